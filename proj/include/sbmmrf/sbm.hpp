#ifndef SBMMRF_SBM_HPP
#define SBMMRF_SBM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "sbmmrf/binary_network.hpp"
#include "sbmmrf/csv.hpp"
#include "sbmmrf/errors.hpp"
#include "sbmmrf/matrix.hpp"
#include "sbmmrf/random.hpp"

namespace sbmmrf {

// Community labels, stored 0-based (label k is community k+1 in files).
struct CommunityAssignment {
    std::vector<int> labels;
    int K = 1;

    std::size_t size() const noexcept { return labels.size(); }

    std::vector<std::int64_t> sizes() const {
        std::vector<std::int64_t> n(static_cast<std::size_t>(K), 0);
        for (int z : labels) ++n[static_cast<std::size_t>(z)];
        return n;
    }

    void validate() const {
        if (K < 1) throw DomainError("community count must be >= 1");
        for (int z : labels)
            if (z < 0 || z >= K) throw DomainError("community label out of range");
    }

    bool operator==(const CommunityAssignment&) const = default;
};

// K x K symmetric block edge probabilities.
struct EdgeProbabilityMatrix {
    Matrix<double> values;

    int K() const noexcept { return static_cast<int>(values.rows()); }
    double operator()(int k, int l) const { return values(static_cast<std::size_t>(k), static_cast<std::size_t>(l)); }

    static EdgeProbabilityMatrix constant(int K, double v) {
        return {Matrix<double>(static_cast<std::size_t>(K), static_cast<std::size_t>(K), v)};
    }

    bool operator==(const EdgeProbabilityMatrix&) const = default;
};

// Observed (M) and possible (N) edge counts per block pair.
struct BlockCounts {
    Matrix<std::int64_t> observed;
    Matrix<std::int64_t> possible;

    bool operator==(const BlockCounts&) const = default;
};

struct SamplerConfig {
    int K = 2;
    double f = 1.0;
    std::vector<double> e; // per-community log base rates; empty means log(1/K)
    double a_omega = 1.0;
    double b_omega = 1.0;
    int iterations = 1000;
    std::uint64_t seed = 0;
    // Ramp the coupling linearly from 0 to f across burn-in. Retained draws always use f.
    bool ramp_coupling = true;

    double base_rate(int k) const {
        return e.empty() ? -std::log(static_cast<double>(K)) : e[static_cast<std::size_t>(k)];
    }
    int burn_in() const noexcept { return iterations / 2; }

    void validate() const {
        if (K < 1) throw ValidationError("K must be >= 1");
        if (!(f >= 0.0) || !std::isfinite(f)) throw ValidationError("f must be a finite value >= 0");
        if (!e.empty() && e.size() != static_cast<std::size_t>(K))
            throw ValidationError("e must have one entry per community");
        for (double v : e)
            if (!std::isfinite(v)) throw ValidationError("e entries must be finite");
        if (!(a_omega > 0.0) || !(b_omega > 0.0)) throw ValidationError("a_omega and b_omega must be > 0");
        if (iterations < 2 || iterations % 2 != 0) throw ValidationError("iterations must be even and >= 2");
    }
};

// Retained (post burn-in) draws of one chain.
struct ChainTrace {
    std::vector<CommunityAssignment> z_samples;
    std::vector<EdgeProbabilityMatrix> omega_samples;
    std::vector<double> log_joint;
    SamplerConfig config;

    std::size_t size() const noexcept { return z_samples.size(); }
    // 1-based iteration number of retained sample i.
    int iteration(std::size_t i) const noexcept { return config.burn_in() + 1 + static_cast<int>(i); }

    bool operator==(const ChainTrace& o) const {
        return z_samples == o.z_samples && omega_samples == o.omega_samples && log_joint == o.log_joint;
    }
};

// Log floor used by the sampler and the stored log joint (smallest normal exponent of a double).
inline constexpr double kLogFloor = -745.0;

namespace detail {

inline double floored_log(double x) { return x > 0 ? std::max(std::log(x), kLogFloor) : kLogFloor; }
inline double floored_log1m(double x) { return x < 1 ? std::max(std::log1p(-x), kLogFloor) : kLogFloor; }

inline double block_term(std::int64_t m, std::int64_t n, double w, bool floored) {
    double t = 0;
    if (m > 0) t += static_cast<double>(m) * (floored ? floored_log(w) : std::log(w));
    if (n - m > 0) t += static_cast<double>(n - m) * (floored ? floored_log1m(w) : std::log1p(-w));
    return t;
}

inline void check_same_universe(const BinaryNetwork& g, const BinaryNetwork& q) {
    if (g.size() != q.size()) throw ValidationError("G and Q have different node counts");
    if (g.labels() != q.labels()) throw ValidationError("G and Q have different node labels");
}

inline Matrix<std::int64_t> possible_from_sizes(const std::vector<std::int64_t>& n) {
    const std::size_t K = n.size();
    Matrix<std::int64_t> N(K, K);
    for (std::size_t k = 0; k < K; ++k) {
        N(k, k) = n[k] * (n[k] - 1) / 2;
        for (std::size_t l = k + 1; l < K; ++l) N(k, l) = N(l, k) = n[k] * n[l];
    }
    return N;
}

} // namespace detail

inline BlockCounts edge_counts(const BinaryNetwork& g, const CommunityAssignment& z) {
    if (g.size() != z.size()) throw DomainError("edge_counts: network and labels differ in size");
    z.validate();
    const auto K = static_cast<std::size_t>(z.K);
    BlockCounts c{Matrix<std::int64_t>(K, K, 0), detail::possible_from_sizes(z.sizes())};
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = i + 1; j < g.size(); ++j) {
            if (!g.has_edge(i, j)) continue;
            const auto a = static_cast<std::size_t>(z.labels[i]);
            const auto b = static_cast<std::size_t>(z.labels[j]);
            ++c.observed(a, b);
            if (a != b) ++c.observed(b, a);
        }
    }
    return c;
}

// Bernoulli block log-likelihood. Blocks with no possible pairs contribute nothing; 0*log(0) is 0.
// With floored = true each log is bounded below by kLogFloor, so the result is always finite.
inline double log_likelihood(const BlockCounts& c, const EdgeProbabilityMatrix& omega, bool floored = false) {
    const std::size_t K = c.observed.rows();
    double ll = 0;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = k; l < K; ++l)
            ll += detail::block_term(c.observed(k, l), c.possible(k, l), omega.values(k, l), floored);
    return ll;
}

inline double log_likelihood(const BinaryNetwork& g, const CommunityAssignment& z, const EdgeProbabilityMatrix& omega,
                             bool floored = false) {
    if (omega.K() != z.K) throw DomainError("log_likelihood: omega dimension differs from K");
    return log_likelihood(edge_counts(g, z), omega, floored);
}

// Unnormalised log MRF prior for z_j = k: e_k + f * #(Q-neighbours of j labelled k).
inline double mrf_log_prior_term(std::size_t j, int k, const CommunityAssignment& z, const BinaryNetwork& q,
                                 const SamplerConfig& cfg) {
    std::int64_t agree = 0;
    for (std::size_t i = 0; i < q.size(); ++i)
        if (q.has_edge(j, i) && z.labels[i] == k) ++agree;
    return cfg.base_rate(k) + cfg.f * static_cast<double>(agree);
}

// Number of Q edges whose endpoints share a label.
inline std::int64_t same_label_pairs(const BinaryNetwork& q, const CommunityAssignment& z) {
    std::int64_t n = 0;
    for (std::size_t i = 0; i < q.size(); ++i)
        for (std::size_t j = i + 1; j < q.size(); ++j)
            if (q.has_edge(i, j) && z.labels[i] == z.labels[j]) ++n;
    return n;
}

// Joint MRF log prior: sum_j e_{z_j} + f * sum_{j<j', q=1} I(z_j = z_j'). Its per-site
// conditional is exactly mrf_log_prior_term.
inline double log_prior_labels(const CommunityAssignment& z, std::int64_t agreeing_pairs, const SamplerConfig& cfg) {
    double lp = cfg.f * static_cast<double>(agreeing_pairs);
    for (int k : z.labels) lp += cfg.base_rate(k);
    return lp;
}

inline double log_prior_omega(const EdgeProbabilityMatrix& omega, const SamplerConfig& cfg) {
    const double a = cfg.a_omega, b = cfg.b_omega;
    const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    const int K = omega.K();
    double lp = 0;
    for (int k = 0; k < K; ++k) {
        for (int l = k; l < K; ++l) {
            const double w = omega(k, l);
            if (a != 1.0) lp += (a - 1.0) * detail::floored_log(w);
            if (b != 1.0) lp += (b - 1.0) * detail::floored_log1m(w);
            lp -= log_beta;
        }
    }
    return lp;
}

// Unnormalised log joint posterior log p(G | z, Omega) + log p(z | Q) + log p(Omega), floored logs.
inline double log_joint(const BinaryNetwork& g, const BinaryNetwork& q, const CommunityAssignment& z,
                        const EdgeProbabilityMatrix& omega, const SamplerConfig& cfg) {
    return log_likelihood(g, z, omega, true) + log_prior_labels(z, same_label_pairs(q, z), cfg) +
           log_prior_omega(omega, cfg);
}

// omega_kl | z, G ~ Beta(M_kl + a, N_kl - M_kl + b), k <= l, drawn in row-major order and mirrored.
template <typename Engine>
EdgeProbabilityMatrix sample_omega(const BlockCounts& c, const SamplerConfig& cfg, Engine& rng) {
    const std::size_t K = c.observed.rows();
    EdgeProbabilityMatrix omega{Matrix<double>(K, K)};
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = k; l < K; ++l) {
            const auto m = static_cast<double>(c.observed(k, l));
            const auto n = static_cast<double>(c.possible(k, l));
            boost::random::beta_distribution<double> beta(m + cfg.a_omega, n - m + cfg.b_omega);
            omega.values(k, l) = omega.values(l, k) = beta(rng);
        }
    }
    return omega;
}

// Label state of one chain with incrementally maintained block counts.
class LabelState {
public:
    LabelState(const BinaryNetwork& g, const BinaryNetwork& q, CommunityAssignment z)
        : g_adj_(g.neighbours()), q_adj_(q.neighbours()), z_(std::move(z)) {
        detail::check_same_universe(g, q);
        if (g.size() != z_.size()) throw DomainError("labels and network differ in size");
        z_.validate();
        const auto counts = edge_counts(g, z_);
        observed_ = counts.observed;
        sizes_ = z_.sizes();
        const auto K = static_cast<std::size_t>(z_.K);
        g_count_.assign(K, 0);
        q_count_.assign(K, 0);
        log_w_ = Matrix<double>(K, K);
        log_1mw_ = Matrix<double>(K, K);
        log_cond_.assign(K, 0.0);
    }

    const CommunityAssignment& assignment() const noexcept { return z_; }

    BlockCounts counts() const { return {observed_, detail::possible_from_sizes(sizes_)}; }

    std::int64_t same_label_pairs() const {
        std::int64_t n = 0;
        for (std::size_t i = 0; i < q_adj_.size(); ++i)
            for (auto j : q_adj_[i])
                if (j > i && z_.labels[i] == z_.labels[j]) ++n;
        return n;
    }

    // Normalised full conditional of z_j given everything else.
    std::vector<double> full_conditional(std::size_t j, const EdgeProbabilityMatrix& omega, const SamplerConfig& cfg) {
        prepare(omega);
        compute_log_conditional(j, cfg);
        std::vector<double> xi(log_cond_.size());
        normalise(xi);
        return xi;
    }

    // One ascending sweep over all taxa.
    template <typename Engine>
    void sweep(const EdgeProbabilityMatrix& omega, const SamplerConfig& cfg, Engine& rng) {
        if (omega.K() != z_.K || cfg.K != z_.K) throw DomainError("sweep: K mismatch");
        prepare(omega);
        std::vector<double> xi(log_cond_.size());
        boost::random::uniform_01<double> unit;
        for (std::size_t j = 0; j < z_.size(); ++j) {
            compute_log_conditional(j, cfg);
            normalise(xi);
            const double u = unit(rng);
            int chosen = z_.K - 1;
            double cum = 0;
            for (int k = 0; k < z_.K; ++k) {
                cum += xi[static_cast<std::size_t>(k)];
                if (u < cum) {
                    chosen = k;
                    break;
                }
            }
            move(j, chosen);
        }
    }

    // Relabels taxon j, updating block counts from its neighbour tallies.
    void relabel(std::size_t j, int k) {
        if (k < 0 || k >= z_.K) throw DomainError("relabel: label out of range");
        tally(j);
        move(j, k);
    }

private:
    void prepare(const EdgeProbabilityMatrix& omega) {
        const auto K = static_cast<std::size_t>(z_.K);
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t l = 0; l < K; ++l) {
                log_w_(k, l) = detail::floored_log(omega.values(k, l));
                log_1mw_(k, l) = detail::floored_log1m(omega.values(k, l));
            }
        }
    }

    void tally(std::size_t j) {
        std::fill(g_count_.begin(), g_count_.end(), 0);
        std::fill(q_count_.begin(), q_count_.end(), 0);
        for (auto i : g_adj_[j]) ++g_count_[static_cast<std::size_t>(z_.labels[i])];
        for (auto i : q_adj_[j]) ++q_count_[static_cast<std::size_t>(z_.labels[i])];
    }

    void compute_log_conditional(std::size_t j, const SamplerConfig& cfg) {
        tally(j);
        const auto K = static_cast<std::size_t>(z_.K);
        const auto own = static_cast<std::size_t>(z_.labels[j]);
        for (std::size_t k = 0; k < K; ++k) {
            double v = cfg.base_rate(static_cast<int>(k)) + cfg.f * static_cast<double>(q_count_[k]);
            for (std::size_t l = 0; l < K; ++l) {
                const std::int64_t others = sizes_[l] - (l == own ? 1 : 0);
                const std::int64_t linked = g_count_[l];
                v += static_cast<double>(linked) * log_w_(k, l) + static_cast<double>(others - linked) * log_1mw_(k, l);
            }
            if (!std::isfinite(v)) throw std::logic_error("non-finite full conditional for taxon " + std::to_string(j));
            log_cond_[k] = v;
        }
    }

    void normalise(std::vector<double>& xi) const {
        const double top = *std::max_element(log_cond_.begin(), log_cond_.end());
        double total = 0;
        for (std::size_t k = 0; k < xi.size(); ++k) total += xi[k] = std::exp(log_cond_[k] - top);
        for (auto& x : xi) x /= total;
    }

    // Requires g_count_ tallied for j.
    void move(std::size_t j, int to) {
        const int from = z_.labels[j];
        if (from == to) return;
        const auto K = static_cast<std::size_t>(z_.K);
        const auto a = static_cast<std::size_t>(from);
        const auto b = static_cast<std::size_t>(to);
        for (std::size_t l = 0; l < K; ++l) {
            const std::int64_t c = g_count_[l];
            if (c == 0) continue;
            observed_(a, l) -= c;
            if (l != a) observed_(l, a) -= c;
        }
        z_.labels[j] = to;
        for (std::size_t l = 0; l < K; ++l) {
            // The tally of neighbours in `to` was taken with j outside it, so it is unchanged.
            const std::int64_t c = g_count_[l];
            if (c == 0) continue;
            observed_(b, l) += c;
            if (l != b) observed_(l, b) += c;
        }
        --sizes_[a];
        ++sizes_[b];
    }

    std::vector<std::vector<std::uint32_t>> g_adj_;
    std::vector<std::vector<std::uint32_t>> q_adj_;
    CommunityAssignment z_;
    Matrix<std::int64_t> observed_;
    std::vector<std::int64_t> sizes_;
    std::vector<std::int64_t> g_count_;
    std::vector<std::int64_t> q_count_;
    Matrix<double> log_w_;
    Matrix<double> log_1mw_;
    std::vector<double> log_cond_;
};

// One Gibbs sweep of the labels given Omega (ascending taxon order).
template <typename Engine>
CommunityAssignment sample_z(const BinaryNetwork& g, const BinaryNetwork& q, const EdgeProbabilityMatrix& omega,
                             const CommunityAssignment& z, const SamplerConfig& cfg, Engine& rng) {
    LabelState state(g, q, z);
    state.sweep(omega, cfg, rng);
    return state.assignment();
}

// Uniform random labels over {0..K-1}.
template <typename Engine>
CommunityAssignment random_assignment(std::size_t p, int K, Engine& rng) {
    boost::random::uniform_int_distribution<int> pick(0, K - 1);
    CommunityAssignment z{std::vector<int>(p), K};
    for (auto& l : z.labels) l = pick(rng);
    return z;
}

// Two-step Gibbs sampler: Omega | z, G then z | Omega, G, Q, for cfg.iterations iterations.
// The first half is discarded; the remaining draws and their log joint are returned.
inline ChainTrace gibbs_run(const BinaryNetwork& g, const BinaryNetwork& q, const SamplerConfig& cfg) {
    cfg.validate();
    detail::check_same_universe(g, q);
    Rng rng(cfg.seed);
    LabelState state(g, q, random_assignment(g.size(), cfg.K, rng));

    ChainTrace trace;
    trace.config = cfg;
    const int burn = cfg.burn_in();
    const auto retained = static_cast<std::size_t>(cfg.iterations - burn);
    trace.z_samples.reserve(retained);
    trace.omega_samples.reserve(retained);
    trace.log_joint.reserve(retained);

    SamplerConfig step = cfg;
    for (int t = 1; t <= cfg.iterations; ++t) {
        if (cfg.ramp_coupling) step.f = t <= burn ? cfg.f * static_cast<double>(t - 1) / burn : cfg.f;
        auto omega = sample_omega(state.counts(), cfg, rng);
        state.sweep(omega, step, rng);
        if (t <= burn) continue;
        const auto& z = state.assignment();
        const double lj = log_likelihood(state.counts(), omega, true) +
                          log_prior_labels(z, state.same_label_pairs(), cfg) + log_prior_omega(omega, cfg);
        trace.z_samples.push_back(z);
        trace.omega_samples.push_back(std::move(omega));
        trace.log_joint.push_back(lj);
    }
    return trace;
}

// Trace files: z_samples.csv, omega_samples.csv, log_joint.csv.
inline void write_trace(const std::filesystem::path& dir, const ChainTrace& trace, const std::vector<std::string>& taxa) {
    {
        auto out = csv::open_output(dir / "z_samples.csv");
        csv::Row header{"iteration"};
        header.insert(header.end(), taxa.begin(), taxa.end());
        csv::write_row(out, header);
        for (std::size_t i = 0; i < trace.size(); ++i) {
            out << trace.iteration(i);
            for (int z : trace.z_samples[i].labels) out << ',' << z + 1;
            out << '\n';
        }
    }
    {
        auto out = csv::open_output(dir / "omega_samples.csv");
        const int K = trace.config.K;
        out << "iteration";
        for (int k = 0; k < K; ++k)
            for (int l = k; l < K; ++l) out << ",omega_" << k + 1 << '_' << l + 1;
        out << '\n';
        for (std::size_t i = 0; i < trace.size(); ++i) {
            out << trace.iteration(i);
            for (int k = 0; k < K; ++k)
                for (int l = k; l < K; ++l) out << ',' << csv::format(trace.omega_samples[i](k, l));
            out << '\n';
        }
    }
    {
        auto out = csv::open_output(dir / "log_joint.csv");
        out << "iteration,log_joint\n";
        for (std::size_t i = 0; i < trace.size(); ++i)
            out << trace.iteration(i) << ',' << csv::format(trace.log_joint[i]) << '\n';
    }
}

} // namespace sbmmrf

#endif // SBMMRF_SBM_HPP
