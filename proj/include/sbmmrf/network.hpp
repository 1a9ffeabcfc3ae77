#ifndef SBMMRF_NETWORK_HPP
#define SBMMRF_NETWORK_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "sbmmrf/binary_network.hpp"
#include "sbmmrf/csv.hpp"
#include "sbmmrf/errors.hpp"
#include "sbmmrf/ingest.hpp"
#include "sbmmrf/parallel.hpp"
#include "sbmmrf/transform.hpp"

namespace sbmmrf {

// Average ranks (1-based); ties share the mean of the ranks they span.
inline std::vector<double> midranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

namespace detail {

// Centred ranks with their sum of squares; nullopt for a constant vector.
struct CentredRanks {
    std::vector<double> values;
    double sum_sq = 0;
};

inline std::optional<CentredRanks> centred_ranks(std::span<const double> x) {
    auto r = midranks(x);
    const double mean = 0.5 * static_cast<double>(x.size() + 1);
    CentredRanks out{std::move(r), 0.0};
    for (auto& v : out.values) {
        v -= mean;
        out.sum_sq += v * v;
    }
    if (out.sum_sq <= 0) return std::nullopt;
    return out;
}

inline double rank_correlation(const CentredRanks& a, const CentredRanks& b) {
    double cross = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) cross += a.values[i] * b.values[i];
    return std::clamp(cross / std::sqrt(a.sum_sq * b.sum_sq), -1.0, 1.0);
}

} // namespace detail

// Spearman's rho as the Pearson correlation of mid-ranks.
inline double spearman_rho(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("spearman_rho: vectors differ in length");
    if (a.size() < 3) throw DomainError("spearman_rho: need at least 3 observations");
    auto ra = detail::centred_ranks(a);
    auto rb = detail::centred_ranks(b);
    if (!ra || !rb) throw UndefinedCorrelation();
    return detail::rank_correlation(*ra, *rb);
}

// Two-sided p-value for rho = 0 using t = rho * sqrt((n-2)/(1-rho^2)) on n-2 degrees of freedom.
inline double spearman_pvalue(double rho, std::size_t n) {
    if (n < 3) throw DomainError("spearman_pvalue: need n >= 3");
    if (!(std::abs(rho) <= 1.0)) throw DomainError("spearman_pvalue: |rho| must be <= 1");
    if (std::abs(rho) == 1.0) return 0.0;
    const double df = static_cast<double>(n - 2);
    const double t = std::abs(rho) * std::sqrt(df / (1.0 - rho * rho));
    boost::math::students_t dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
}

// Benjamini-Hochberg step-up adjustment, returned in input order.
inline std::vector<double> bh_adjust(std::span<const double> p) {
    const std::size_t m = p.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] < p[b]; });
    std::vector<double> out(m);
    double running = 1.0;
    for (std::size_t r = m; r-- > 0;) {
        const double scaled = p[order[r]] * static_cast<double>(m) / static_cast<double>(r + 1);
        running = std::min(running, scaled);
        out[order[r]] = std::min(1.0, running);
    }
    return out;
}

struct CorrelationEntry {
    std::size_t a = 0;
    std::size_t b = 0;
    std::optional<double> rho; // empty when undefined (constant column)
    double p_value = 1.0;
    double adjusted_p = 1.0;
    bool edge = false;
};

struct CorrelationResult {
    std::vector<std::string> taxa;
    std::vector<CorrelationEntry> pairs; // one per j < j', row-major order
};

// G has an edge where the BH-adjusted p-value is strictly below alpha.
// Pairs with an undefined correlation never get an edge and are left out of the BH family.
inline std::pair<BinaryNetwork, CorrelationResult> build_cooccurrence(const TransformedMatrix& v, double alpha,
                                                                      unsigned threads = 1) {
    const std::size_t n = v.values.rows();
    const std::size_t p = v.values.cols();
    if (p < 2) throw DomainError("build_cooccurrence: need at least 2 taxa");
    if (n < 3) throw DomainError("build_cooccurrence: need at least 3 samples");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in [0, 1)");

    std::vector<std::optional<detail::CentredRanks>> ranks(p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto col = v.values.column(j);
        ranks[j] = detail::centred_ranks(col);
    }

    CorrelationResult result{v.taxa, {}};
    result.pairs.reserve(p * (p - 1) / 2);
    std::vector<std::size_t> row_start(p, 0);
    for (std::size_t j = 0; j < p; ++j) {
        row_start[j] = result.pairs.size();
        for (std::size_t k = j + 1; k < p; ++k) result.pairs.push_back({j, k, std::nullopt, 1.0, 1.0, false});
    }
    parallel_for(p, threads, [&](std::size_t j) {
        if (!ranks[j]) return;
        for (std::size_t k = j + 1; k < p; ++k) {
            if (!ranks[k]) continue;
            auto& e = result.pairs[row_start[j] + (k - j - 1)];
            e.rho = detail::rank_correlation(*ranks[j], *ranks[k]);
            e.p_value = spearman_pvalue(*e.rho, n);
        }
    });

    std::vector<double> tested;
    std::vector<std::size_t> where;
    for (std::size_t i = 0; i < result.pairs.size(); ++i) {
        if (result.pairs[i].rho) {
            tested.push_back(result.pairs[i].p_value);
            where.push_back(i);
        }
    }
    const auto adjusted = bh_adjust(tested);
    BinaryNetwork g(v.taxa);
    for (std::size_t t = 0; t < where.size(); ++t) {
        auto& e = result.pairs[where[t]];
        e.adjusted_p = adjusted[t];
        e.edge = adjusted[t] < alpha;
        if (e.edge) g.set_edge(e.a, e.b);
    }
    return {std::move(g), std::move(result)};
}

// Edge between every pair of distinct nodes carrying the same group label.
template <typename Group>
BinaryNetwork same_group_network(const std::vector<std::string>& labels, const std::vector<Group>& groups) {
    if (labels.size() != groups.size()) throw DomainError("same_group_network: inconsistent lengths");
    BinaryNetwork q(labels);
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j)
            if (groups[i] == groups[j]) q.set_edge(i, j);
    return q;
}

// Q: edge between distinct taxa that share a parent.
inline BinaryNetwork build_tree_adjacency(const TaxonomyMap& tax, const std::vector<std::string>& taxa) {
    std::vector<std::string> missing;
    for (const auto& t : taxa)
        if (!tax.contains(t)) missing.push_back(t);
    if (!missing.empty()) throw CoverageError(std::move(missing));
    return same_group_network(taxa, tax.parents_of(taxa));
}

inline void write_correlations(std::ostream& out, const CorrelationResult& r) {
    out << "taxon_a,taxon_b,rho,p,adjusted_p,edge\n";
    for (const auto& e : r.pairs) {
        out << csv::escape(r.taxa[e.a]) << ',' << csv::escape(r.taxa[e.b]) << ',';
        if (e.rho) out << csv::format(*e.rho) << ',' << csv::format(e.p_value) << ',' << csv::format(e.adjusted_p);
        else out << "NA,NA,NA";
        out << ',' << (e.edge ? 1 : 0) << '\n';
    }
}

inline void write_correlations(const std::filesystem::path& path, const CorrelationResult& r) {
    auto out = csv::open_output(path);
    write_correlations(out, r);
}

} // namespace sbmmrf

#endif // SBMMRF_NETWORK_HPP
