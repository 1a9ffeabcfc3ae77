#ifndef SBMMRF_INGEST_HPP
#define SBMMRF_INGEST_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "sbmmrf/binary_network.hpp"
#include "sbmmrf/csv.hpp"
#include "sbmmrf/errors.hpp"
#include "sbmmrf/matrix.hpp"

namespace sbmmrf {

// n x p taxon count table. Rows are samples, columns taxa in file order.
struct AbundanceMatrix {
    std::vector<std::string> samples;
    std::vector<std::string> taxa;
    Matrix<std::int64_t> counts;
    // Samples removed because taxon filtering left them without any positive count.
    std::vector<std::string> dropped_samples;

    std::size_t n() const noexcept { return samples.size(); }
    std::size_t p() const noexcept { return taxa.size(); }
};

// taxon -> parent (genus or family) label.
class TaxonomyMap {
public:
    TaxonomyMap() = default;
    explicit TaxonomyMap(std::map<std::string, std::string> entries) : entries_(std::move(entries)) {}

    const std::string& parent(const std::string& taxon) const {
        auto it = entries_.find(taxon);
        if (it == entries_.end()) throw CoverageError({taxon});
        return it->second;
    }
    bool contains(const std::string& taxon) const { return entries_.count(taxon) != 0; }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

    std::vector<std::string> parents_of(const std::vector<std::string>& taxa) const {
        std::vector<std::string> out;
        out.reserve(taxa.size());
        for (const auto& t : taxa) out.push_back(parent(t));
        return out;
    }
    std::size_t parent_count() const {
        std::set<std::string> distinct;
        for (const auto& [t, g] : entries_) distinct.insert(g);
        return distinct.size();
    }

private:
    std::map<std::string, std::string> entries_;
};

inline std::vector<std::size_t> nonzero_counts(const AbundanceMatrix& m) {
    std::vector<std::size_t> out(m.p(), 0);
    for (std::size_t i = 0; i < m.n(); ++i)
        for (std::size_t j = 0; j < m.p(); ++j) out[j] += m.counts(i, j) > 0;
    return out;
}

// Keeps taxa with at least `min_nonzero` positive counts; drops samples left empty.
inline AbundanceMatrix filter_taxa(const AbundanceMatrix& in, std::size_t min_nonzero) {
    const auto nz = nonzero_counts(in);
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < in.p(); ++j)
        if (nz[j] >= min_nonzero) keep.push_back(j);
    if (keep.empty())
        throw EmptyResultError("no taxon has at least " + std::to_string(min_nonzero) + " non-zero counts");

    std::vector<std::size_t> rows;
    AbundanceMatrix out;
    out.dropped_samples = in.dropped_samples;
    for (std::size_t i = 0; i < in.n(); ++i) {
        bool any = false;
        for (auto j : keep) any = any || in.counts(i, j) > 0;
        if (any) rows.push_back(i);
        else out.dropped_samples.push_back(in.samples[i]);
    }
    if (rows.empty()) throw EmptyResultError("no sample has a positive count after taxon filtering");

    for (auto j : keep) out.taxa.push_back(in.taxa[j]);
    for (auto i : rows) out.samples.push_back(in.samples[i]);
    out.counts = Matrix<std::int64_t>(rows.size(), keep.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < keep.size(); ++c) out.counts(r, c) = in.counts(rows[r], keep[c]);
    return out;
}

inline AbundanceMatrix parse_abundance(const std::vector<csv::Row>& rows, std::size_t min_nonzero) {
    if (rows.empty()) throw ParseError("abundance table is empty", 0);
    const auto& header = rows.front();
    if (header.size() < 2) throw ParseError("abundance header needs sample_id and at least one taxon", 0);

    AbundanceMatrix m;
    m.taxa.assign(header.begin() + 1, header.end());
    std::set<std::string> seen;
    for (const auto& t : m.taxa)
        if (!seen.insert(t).second) throw ValidationError("duplicate taxon identifier: " + t);

    const std::size_t p = m.taxa.size();
    m.counts = Matrix<std::int64_t>(rows.size() - 1, p);
    seen.clear();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != p + 1)
            throw ParseError("expected " + std::to_string(p + 1) + " fields, found " + std::to_string(row.size()), r);
        if (!seen.insert(row[0]).second) throw ValidationError("duplicate sample identifier: " + row[0]);
        m.samples.push_back(row[0]);
        std::int64_t total = 0;
        for (std::size_t j = 0; j < p; ++j) {
            auto v = csv::parse_int(row[j + 1]);
            if (!v) throw ValidationError("non-integer count '" + row[j + 1] + "' at row " + std::to_string(r));
            if (*v < 0) throw ValidationError("negative count at row " + std::to_string(r));
            m.counts(r - 1, j) = *v;
            total += *v;
        }
        if (total == 0) throw ValidationError("sample " + row[0] + " has no positive count");
    }
    if (m.samples.empty()) throw EmptyResultError("abundance table has no samples");
    return filter_taxa(m, min_nonzero);
}

inline AbundanceMatrix load_abundance(const std::filesystem::path& path, std::size_t min_nonzero) {
    return parse_abundance(csv::read_file(path), min_nonzero);
}

// Taxonomy rows for taxa outside `taxa` are ignored; every taxon in `taxa` must be present.
inline TaxonomyMap parse_taxonomy(const std::vector<csv::Row>& rows, const std::vector<std::string>& taxa) {
    if (rows.empty()) throw ParseError("taxonomy table is empty", 0);
    std::unordered_map<std::string, std::string> all;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 2) throw ParseError("taxonomy rows need exactly two fields", r);
        if (!all.emplace(rows[r][0], rows[r][1]).second)
            throw ValidationError("duplicate taxonomy row for taxon " + rows[r][0]);
    }
    std::map<std::string, std::string> entries;
    std::vector<std::string> missing;
    for (const auto& t : taxa) {
        auto it = all.find(t);
        if (it == all.end()) missing.push_back(t);
        else entries.emplace(t, it->second);
    }
    if (!missing.empty()) throw CoverageError(std::move(missing));
    return TaxonomyMap(std::move(entries));
}

inline TaxonomyMap load_taxonomy(const std::filesystem::path& path, const std::vector<std::string>& taxa) {
    return parse_taxonomy(csv::read_file(path), taxa);
}

// Result of reading a weighted edge list: `unweighted` has an edge wherever any weight > 0,
// `thresholded` wherever a weight exceeds the threshold.
struct EdgeListNetworks {
    BinaryNetwork unweighted;
    BinaryNetwork thresholded;
    std::size_t self_loops_skipped = 0;
};

inline EdgeListNetworks parse_network(const std::vector<csv::Row>& rows, double threshold,
                                      const std::optional<std::vector<std::string>>& universe = std::nullopt) {
    if (threshold < 0) throw ValidationError("threshold must be nonnegative");
    std::vector<std::string> labels;
    std::unordered_map<std::string, std::size_t> index;
    if (universe) {
        labels = *universe;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (!index.emplace(labels[i], i).second) throw ValidationError("duplicate node label " + labels[i]);
    }
    struct Edge {
        std::size_t a, b;
        double w;
    };
    std::vector<Edge> edges;
    std::size_t loops = 0;
    auto lookup = [&](const std::string& name) {
        auto it = index.find(name);
        if (it != index.end()) return it->second;
        if (universe) throw ValidationError("unknown node in edge list: " + name);
        index.emplace(name, labels.size());
        labels.push_back(name);
        return labels.size() - 1;
    };
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 3) throw ParseError("edge rows need source,target,weight", r);
        auto w = csv::parse_double(row[2]);
        if (!w || !std::isfinite(*w)) throw ValidationError("invalid weight '" + row[2] + "' at row " + std::to_string(r));
        const auto a = lookup(row[0]);
        const auto b = lookup(row[1]);
        if (a == b) {
            ++loops;
            continue;
        }
        edges.push_back({a, b, *w});
    }
    EdgeListNetworks out{BinaryNetwork(labels), BinaryNetwork(labels), loops};
    for (const auto& e : edges) {
        if (e.w > 0) out.unweighted.set_edge(e.a, e.b);
        if (e.w > threshold) out.thresholded.set_edge(e.a, e.b);
    }
    return out;
}

inline EdgeListNetworks load_network(const std::filesystem::path& path, double threshold,
                                     const std::optional<std::vector<std::string>>& universe = std::nullopt) {
    return parse_network(csv::read_file(path), threshold, universe);
}

// Dense adjacency CSV: header "node,<label_1>,...,<label_p>", then one row per label.
inline void write_adjacency(std::ostream& out, const BinaryNetwork& g) {
    csv::Row header{"node"};
    header.insert(header.end(), g.labels().begin(), g.labels().end());
    csv::write_row(out, header);
    for (std::size_t i = 0; i < g.size(); ++i) {
        out << csv::escape(g.labels()[i]);
        for (std::size_t j = 0; j < g.size(); ++j) out << ',' << int(g.adjacency()(i, j));
        out << '\n';
    }
}

inline void write_adjacency(const std::filesystem::path& path, const BinaryNetwork& g) {
    auto out = csv::open_output(path);
    write_adjacency(out, g);
}

inline BinaryNetwork parse_adjacency(const std::vector<csv::Row>& rows) {
    if (rows.empty()) throw ParseError("adjacency table is empty", 0);
    std::vector<std::string> labels(rows[0].begin() + 1, rows[0].end());
    const std::size_t p = labels.size();
    if (rows.size() != p + 1) throw ParseError("adjacency needs one row per label", rows.size());
    Matrix<std::uint8_t> adj(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        const auto& row = rows[i + 1];
        if (row.size() != p + 1) throw ParseError("adjacency row has wrong length", i + 1);
        if (row[0] != labels[i]) throw ParseError("row label " + row[0] + " does not match header", i + 1);
        for (std::size_t j = 0; j < p; ++j) {
            if (row[j + 1] == "0") adj(i, j) = 0;
            else if (row[j + 1] == "1") adj(i, j) = 1;
            else throw ValidationError("adjacency cells must be 0 or 1 (row " + std::to_string(i + 1) + ")");
        }
    }
    return BinaryNetwork(std::move(labels), std::move(adj));
}

inline BinaryNetwork load_adjacency(const std::filesystem::path& path) {
    return parse_adjacency(csv::read_file(path));
}

} // namespace sbmmrf

#endif // SBMMRF_INGEST_HPP
