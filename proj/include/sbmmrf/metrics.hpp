#ifndef SBMMRF_METRICS_HPP
#define SBMMRF_METRICS_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <type_traits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sbmmrf/binary_network.hpp"
#include "sbmmrf/csv.hpp"
#include "sbmmrf/errors.hpp"
#include "sbmmrf/sbm.hpp"

namespace sbmmrf {

namespace detail {
inline double pairs(double n) { return n * (n - 1.0) / 2.0; }
} // namespace detail

// Adjusted Rand index from the contingency table of two labelings.
// Returns 1 when both inputs put every item in a single cluster (or every item apart).
template <typename A, typename B>
double ari(const std::vector<A>& x, const std::vector<B>& y) {
    if (x.size() != y.size()) throw DomainError("ari: label vectors differ in length");
    if (x.size() < 2) throw DomainError("ari: need at least two items");
    std::map<A, std::size_t> xi;
    std::map<B, std::size_t> yi;
    for (const auto& v : x) xi.emplace(v, xi.size());
    for (const auto& v : y) yi.emplace(v, yi.size());
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> cells;
    std::vector<double> row(xi.size(), 0.0), col(yi.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto r = xi[x[i]], c = yi[y[i]];
        ++cells[{r, c}];
        ++row[r];
        ++col[c];
    }
    double index = 0, sum_rows = 0, sum_cols = 0;
    for (const auto& [rc, n] : cells) index += detail::pairs(static_cast<double>(n));
    for (double n : row) sum_rows += detail::pairs(n);
    for (double n : col) sum_cols += detail::pairs(n);
    const double total = detail::pairs(static_cast<double>(x.size()));
    const double expected = sum_rows * sum_cols / total;
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

inline double ari(const CommunityAssignment& a, const CommunityAssignment& b) { return ari(a.labels, b.labels); }

// Degree of each node (nodal strength of a binary network).
inline std::vector<std::int64_t> nodal_strength(const BinaryNetwork& g) {
    std::vector<std::int64_t> d(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j) d[i] += g.adjacency()(i, j);
    return d;
}

struct GenusStrength {
    int community = 0; // 0-based
    std::string genus;
    std::int64_t strength = 0;
};

// Summed nodal strength per (community, genus) pair that has at least one taxon.
template <typename Genus>
std::vector<GenusStrength> genus_community_strength(const BinaryNetwork& g, const CommunityAssignment& z,
                                                    const std::vector<Genus>& tau) {
    if (g.size() != z.size() || z.size() != tau.size())
        throw DomainError("genus_community_strength: inconsistent lengths");
    const auto d = nodal_strength(g);
    std::map<std::pair<int, Genus>, std::int64_t> table;
    for (std::size_t j = 0; j < z.size(); ++j) table[{z.labels[j], tau[j]}] += d[j];
    std::vector<GenusStrength> out;
    for (const auto& [key, s] : table) {
        std::string name;
        if constexpr (std::is_convertible_v<Genus, std::string>) name = key.second;
        else name = std::to_string(key.second);
        out.push_back({key.first, std::move(name), s});
    }
    return out;
}

// Shannon index (natural log) of genus proportions within community k (0-based).
template <typename Genus>
double shannon(const CommunityAssignment& z, const std::vector<Genus>& tau, int k) {
    if (z.size() != tau.size()) throw DomainError("shannon: inconsistent lengths");
    std::map<Genus, std::size_t> counts;
    std::size_t total = 0;
    for (std::size_t j = 0; j < z.size(); ++j) {
        if (z.labels[j] != k) continue;
        ++counts[tau[j]];
        ++total;
    }
    if (total == 0) throw DomainError("shannon: community " + std::to_string(k + 1) + " is empty");
    double h = 0;
    for (const auto& [genus, c] : counts) {
        const double w = static_cast<double>(c) / static_cast<double>(total);
        h -= w * std::log(w);
    }
    return h;
}

inline void write_nodal_strength(const std::filesystem::path& path, const BinaryNetwork& g) {
    auto out = csv::open_output(path);
    out << "taxon,strength\n";
    const auto d = nodal_strength(g);
    for (std::size_t i = 0; i < g.size(); ++i) out << csv::escape(g.labels()[i]) << ',' << d[i] << '\n';
}

inline void write_genus_strength(const std::filesystem::path& path, const std::vector<GenusStrength>& rows) {
    auto out = csv::open_output(path);
    out << "community,genus,strength\n";
    for (const auto& r : rows) out << r.community + 1 << ',' << csv::escape(r.genus) << ',' << r.strength << '\n';
}

struct ShannonRow {
    std::string model;
    int community = 0; // 0-based
    double value = 0;
};

template <typename Genus>
std::vector<ShannonRow> shannon_table(const std::string& model, const CommunityAssignment& z,
                                      const std::vector<Genus>& tau) {
    std::vector<ShannonRow> out;
    const auto sizes = z.sizes();
    for (int k = 0; k < z.K; ++k)
        if (sizes[static_cast<std::size_t>(k)] > 0) out.push_back({model, k, shannon(z, tau, k)});
    return out;
}

inline void write_shannon(const std::filesystem::path& path, const std::vector<ShannonRow>& rows) {
    auto out = csv::open_output(path);
    out << "model,community,shannon\n";
    for (const auto& r : rows) out << csv::escape(r.model) << ',' << r.community + 1 << ',' << csv::format(r.value) << '\n';
}

} // namespace sbmmrf

#endif // SBMMRF_METRICS_HPP
