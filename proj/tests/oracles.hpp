// Test-only reference computations, written independently of the library code paths.
#ifndef SBMMRF_TESTS_ORACLES_HPP
#define SBMMRF_TESTS_ORACLES_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

// ARI from the pair counts a, b, c, d (pairs together in both / only first / only second / neither).
template <typename A, typename B>
double ari_pair_counts(const std::vector<A>& x, const std::vector<B>& y) {
    double a = 0, b = 0, c = 0, d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const bool sx = x[i] == x[j], sy = y[i] == y[j];
            if (sx && sy) ++a;
            else if (sx) ++b;
            else if (sy) ++c;
            else ++d;
        }
    }
    const double total = a + b + c + d;
    const double expected = (a + b) * (a + c) / total;
    const double max_index = 0.5 * ((a + b) + (a + c));
    if (max_index == expected) return 1.0;
    return (a - expected) / (max_index - expected);
}

// BH by definition: q_(i) = min_{k >= i} p_(k) m / k, capped at 1.
inline std::vector<double> bh_brute(const std::vector<double>& p) {
    const std::size_t m = p.size();
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t rank = 0; // number of p-values <= p[i], ties resolved by index
        for (std::size_t j = 0; j < m; ++j)
            if (p[j] < p[i] || (p[j] == p[i] && j <= i)) ++rank;
        double best = 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            std::size_t rj = 0;
            for (std::size_t l = 0; l < m; ++l)
                if (p[l] < p[j] || (p[l] == p[j] && l <= j)) ++rj;
            if (rj >= rank) best = std::min(best, p[j] * static_cast<double>(m) / static_cast<double>(rj));
        }
        out[i] = best;
    }
    return out;
}

inline double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Exact posterior over all K^p labelings with Omega integrated out:
// weight(z) = prod_{k<=l} B(M+a, N-M+b)/B(a,b) * exp(f * #{j<j': q=1, z_j = z_j'}) (uniform e_k cancels).
// Returns p x p co-clustering probabilities.
inline std::vector<std::vector<double>> coclustering(const std::vector<std::vector<int>>& g,
                                                     const std::vector<std::vector<int>>& q, int K, double f,
                                                     double a, double b) {
    const std::size_t p = g.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < p; ++i) total *= static_cast<std::size_t>(K);
    std::vector<double> logw(total);
    std::vector<int> z(p);
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t i = 0; i < p; ++i) {
            z[i] = static_cast<int>(c % K);
            c /= K;
        }
        std::vector<std::vector<double>> M(K, std::vector<double>(K, 0)), N(K, std::vector<double>(K, 0));
        double agree = 0;
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = i + 1; j < p; ++j) {
                const int lo = std::min(z[i], z[j]), hi = std::max(z[i], z[j]);
                N[lo][hi] += 1;
                M[lo][hi] += g[i][j];
                if (q[i][j] && z[i] == z[j]) agree += 1;
            }
        }
        double lw = f * agree;
        for (int k = 0; k < K; ++k)
            for (int l = k; l < K; ++l) lw += log_beta_fn(M[k][l] + a, N[k][l] - M[k][l] + b) - log_beta_fn(a, b);
        logw[code] = lw;
    }
    double top = logw[0];
    for (double v : logw) top = std::max(top, v);
    double norm = 0;
    for (double v : logw) norm += std::exp(v - top);
    std::vector<std::vector<double>> co(p, std::vector<double>(p, 0.0));
    for (std::size_t code = 0; code < total; ++code) {
        const double w = std::exp(logw[code] - top) / norm;
        std::size_t c = code;
        for (std::size_t i = 0; i < p; ++i) {
            z[i] = static_cast<int>(c % K);
            c /= K;
        }
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j)
                if (z[i] == z[j]) co[i][j] += w;
    }
    return co;
}

} // namespace oracle

#endif
