#ifndef SBMMRF_TRANSFORM_HPP
#define SBMMRF_TRANSFORM_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sbmmrf/csv.hpp"
#include "sbmmrf/errors.hpp"
#include "sbmmrf/ingest.hpp"
#include "sbmmrf/matrix.hpp"

namespace sbmmrf {

struct CompositionMatrix {
    std::vector<std::string> samples;
    std::vector<std::string> taxa;
    Matrix<double> values;
};

enum class ShiftMode { robust, shifted };

inline std::string to_string(ShiftMode m) { return m == ShiftMode::robust ? "robust" : "shifted"; }

inline ShiftMode parse_shift_mode(const std::string& s) {
    if (s == "robust") return ShiftMode::robust;
    if (s == "shifted") return ShiftMode::shifted;
    throw ValidationError("unknown shift mode '" + s + "' (expected robust or shifted)");
}

// Modified centred log-ratio values. Zeros stay zero.
struct TransformedMatrix {
    std::vector<std::string> samples;
    std::vector<std::string> taxa;
    Matrix<double> values;
    ShiftMode mode = ShiftMode::shifted;
    std::vector<double> shifts; // per-sample epsilon; all zero in robust mode
};

inline CompositionMatrix relative_abundance(const AbundanceMatrix& counts) {
    CompositionMatrix out{counts.samples, counts.taxa, Matrix<double>(counts.n(), counts.p())};
    for (std::size_t i = 0; i < counts.n(); ++i) {
        double total = 0;
        for (auto c : counts.counts.row(i)) total += static_cast<double>(c);
        if (total <= 0) throw DomainError("sample " + counts.samples[i] + " has zero total count");
        for (std::size_t j = 0; j < counts.p(); ++j)
            out.values(i, j) = static_cast<double>(counts.counts(i, j)) / total;
    }
    return out;
}

inline double log_geometric_mean_nonzero(std::span<const double> row) {
    double sum = 0;
    std::size_t k = 0;
    for (double x : row) {
        if (x != 0) {
            sum += std::log(x);
            ++k;
        }
    }
    if (k == 0) throw DomainError("geometric mean of an all-zero composition");
    return sum / static_cast<double>(k);
}

inline double geometric_mean_nonzero(std::span<const double> row) {
    return std::exp(log_geometric_mean_nonzero(row));
}

// Transforms one composition row in place of `out`; returns the shift applied.
inline double mclr_row(std::span<const double> x, std::span<double> out, ShiftMode mode) {
    const double log_g = log_geometric_mean_nonzero(x);
    double min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] == 0) {
            out[j] = 0;
        } else {
            out[j] = std::log(x[j]) - log_g;
            min_ratio = std::min(min_ratio, out[j]);
        }
    }
    if (mode == ShiftMode::robust) return 0.0;
    // Non-zero log-ratios sum to zero, so min_ratio <= 0 and eps = 1 + |min| = 1 - min.
    // Writing (r - min) + 1 keeps the row minimum at exactly 1.
    const double eps = 1.0 + std::abs(min_ratio);
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j] != 0) out[j] = (out[j] - min_ratio) + 1.0;
    return eps;
}

inline TransformedMatrix mclr(const CompositionMatrix& comp, ShiftMode mode = ShiftMode::shifted) {
    TransformedMatrix out{comp.samples, comp.taxa, Matrix<double>(comp.values.rows(), comp.values.cols()), mode, {}};
    out.shifts.resize(comp.values.rows());
    for (std::size_t i = 0; i < comp.values.rows(); ++i)
        out.shifts[i] = mclr_row(comp.values.row(i), out.values.row(i), mode);
    return out;
}

inline void write_transformed(std::ostream& out, const TransformedMatrix& v) {
    csv::Row header{"sample_id"};
    header.insert(header.end(), v.taxa.begin(), v.taxa.end());
    csv::write_row(out, header);
    for (std::size_t i = 0; i < v.samples.size(); ++i) {
        out << csv::escape(v.samples[i]);
        for (double x : v.values.row(i)) out << ',' << csv::format(x);
        out << '\n';
    }
}

inline void write_transformed(const std::filesystem::path& path, const TransformedMatrix& v) {
    auto out = csv::open_output(path);
    write_transformed(out, v);
}

} // namespace sbmmrf

#endif // SBMMRF_TRANSFORM_HPP
