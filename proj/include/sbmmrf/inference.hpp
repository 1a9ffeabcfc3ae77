#ifndef SBMMRF_INFERENCE_HPP
#define SBMMRF_INFERENCE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbmmrf/binary_network.hpp"
#include "sbmmrf/csv.hpp"
#include "sbmmrf/errors.hpp"
#include "sbmmrf/parallel.hpp"
#include "sbmmrf/random.hpp"
#include "sbmmrf/sbm.hpp"

namespace sbmmrf {

inline EdgeProbabilityMatrix posterior_mean_omega(const ChainTrace& trace) {
    if (trace.omega_samples.empty()) throw DomainError("posterior_mean_omega: empty trace");
    const auto K = static_cast<std::size_t>(trace.omega_samples.front().K());
    Matrix<double> sum(K, K, 0.0);
    for (const auto& w : trace.omega_samples)
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t l = 0; l < K; ++l) sum(k, l) += w.values(k, l);
    const auto n = static_cast<double>(trace.omega_samples.size());
    for (auto& v : sum.data()) v /= n;
    return {std::move(sum)};
}

struct MapEstimate {
    CommunityAssignment z;
    double log_joint = 0;
    std::size_t index = 0; // position in the retained trace
};

// Retained sample with the largest stored log joint; earliest wins ties.
inline MapEstimate map_labels(const ChainTrace& trace) {
    if (trace.z_samples.empty() || trace.log_joint.size() != trace.z_samples.size())
        throw DomainError("map_labels: empty trace or missing log joint");
    std::size_t best = 0;
    for (std::size_t i = 1; i < trace.log_joint.size(); ++i)
        if (trace.log_joint[i] > trace.log_joint[best]) best = i;
    return {trace.z_samples[best], trace.log_joint[best], best};
}

inline std::int64_t parameter_count(int K) {
    return 1 + static_cast<std::int64_t>(K) * (K + 1) / 2;
}

inline double bic(double map_log_joint, int K, std::size_t p) {
    if (K < 1 || p < 1) throw DomainError("bic: K and p must be >= 1");
    return static_cast<double>(parameter_count(K)) * std::log(static_cast<double>(p)) - 2.0 * map_log_joint;
}

struct FitSummary {
    EdgeProbabilityMatrix omega_hat;
    CommunityAssignment z_map;
    double map_log_joint = 0;
    double bic = 0;
    int K = 1;
    std::int64_t nu = 0;
    int map_iteration = 0;
};

inline FitSummary summarize(const ChainTrace& trace, std::size_t p) {
    const auto map = map_labels(trace);
    FitSummary s;
    s.omega_hat = posterior_mean_omega(trace);
    s.z_map = map.z;
    s.map_log_joint = map.log_joint;
    s.K = trace.config.K;
    s.nu = parameter_count(s.K);
    s.bic = bic(map.log_joint, s.K, p);
    s.map_iteration = trace.iteration(map.index);
    return s;
}

enum class SelectionMethod { min_bic, elbow };

inline std::string to_string(SelectionMethod m) { return m == SelectionMethod::min_bic ? "min_bic" : "elbow"; }

inline SelectionMethod parse_selection_method(const std::string& s) {
    if (s == "min_bic") return SelectionMethod::min_bic;
    if (s == "elbow") return SelectionMethod::elbow;
    throw ValidationError("unknown selection method '" + s + "' (expected min_bic or elbow)");
}

struct BicPoint {
    int K = 0;
    double bic = 0;
};

struct KSelection {
    std::vector<int> grid;
    std::vector<BicPoint> bic_curve;
    int chosen_k = 0;
    SelectionMethod method = SelectionMethod::min_bic;
    std::vector<FitSummary> fits; // one per grid entry
};

inline int argmin_bic(const std::vector<BicPoint>& curve) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (curve[i].bic < curve[best].bic) best = i;
    return curve[best].K;
}

// Interior point with the largest positive second difference bic[i-1] - 2 bic[i] + bic[i+1].
// Returns nullopt when no interior point bends upward.
inline std::optional<int> elbow_k(const std::vector<BicPoint>& curve) {
    std::optional<int> best;
    double best_d2 = 0;
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
        const double d2 = curve[i - 1].bic - 2.0 * curve[i].bic + curve[i + 1].bic;
        if (d2 > best_d2) {
            best_d2 = d2;
            best = curve[i].K;
        }
    }
    return best;
}

inline int choose_k(const std::vector<BicPoint>& curve, SelectionMethod method) {
    if (curve.empty()) throw DomainError("choose_k: empty BIC curve");
    if (method == SelectionMethod::elbow) {
        if (auto k = elbow_k(curve)) return *k;
    }
    return argmin_bic(curve);
}

// Seed of the chain fitted for K within a selection run.
inline std::uint64_t seed_for_k(std::uint64_t base, int K) { return derive_seed(base, static_cast<std::uint64_t>(K)); }

inline KSelection select_k(const BinaryNetwork& g, const BinaryNetwork& q, const SamplerConfig& base,
                           const std::vector<int>& grid, SelectionMethod method = SelectionMethod::min_bic,
                           unsigned threads = 1, int chains = 1) {
    if (chains < 1) throw ValidationError("select_k: chains must be >= 1");
    if (grid.empty()) throw ValidationError("select_k: empty K grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 1) throw ValidationError("select_k: K must be >= 1");
        if (static_cast<std::size_t>(grid[i]) > g.size())
            throw ValidationError("select_k: K=" + std::to_string(grid[i]) + " exceeds the number of taxa");
        if (i > 0 && grid[i] <= grid[i - 1]) throw ValidationError("select_k: grid must be strictly ascending");
    }
    KSelection sel;
    sel.grid = grid;
    sel.method = method;
    sel.fits.resize(grid.size());
    const std::size_t jobs = grid.size() * static_cast<std::size_t>(chains);
    std::vector<FitSummary> runs(jobs);
    parallel_for(jobs, threads, [&](std::size_t job) {
        const std::size_t i = job / static_cast<std::size_t>(chains);
        const auto c = job % static_cast<std::size_t>(chains);
        SamplerConfig cfg = base;
        cfg.K = grid[i];
        cfg.e.clear();
        cfg.seed = seed_for_k(base.seed, grid[i]);
        if (c > 0) cfg.seed = derive_seed(cfg.seed, c);
        runs[job] = summarize(gibbs_run(g, q, cfg), g.size());
    });
    // Independent restarts: keep the chain whose MAP has the highest log joint.
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::size_t best = i * static_cast<std::size_t>(chains);
        for (std::size_t job = best + 1; job < (i + 1) * static_cast<std::size_t>(chains); ++job)
            if (runs[job].map_log_joint > runs[best].map_log_joint) best = job;
        sel.fits[i] = std::move(runs[best]);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) sel.bic_curve.push_back({grid[i], sel.fits[i].bic});
    sel.chosen_k = choose_k(sel.bic_curve, method);
    return sel;
}

inline nlohmann::json omega_to_json(const EdgeProbabilityMatrix& w) {
    auto rows = nlohmann::json::array();
    for (int k = 0; k < w.K(); ++k) {
        auto row = nlohmann::json::array();
        for (int l = 0; l < w.K(); ++l) row.push_back(w(k, l));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::json to_json(const FitSummary& s, const std::vector<std::string>& taxa) {
    nlohmann::json j;
    j["K"] = s.K;
    j["nu"] = s.nu;
    j["bic"] = s.bic;
    j["map_log_joint"] = s.map_log_joint;
    j["map_iteration"] = s.map_iteration;
    j["omega_hat"] = omega_to_json(s.omega_hat);
    auto ordered = nlohmann::json::array();
    for (int z : s.z_map.labels) ordered.push_back(z + 1);
    j["taxa"] = taxa;
    j["z_map"] = ordered;
    return j;
}

inline nlohmann::json to_json(const KSelection& s, const std::vector<std::string>& taxa) {
    nlohmann::json j;
    j["grid"] = s.grid;
    j["method"] = to_string(s.method);
    j["chosen_k"] = s.chosen_k;
    auto curve = nlohmann::json::array();
    for (const auto& pt : s.bic_curve) curve.push_back({{"k", pt.K}, {"bic", pt.bic}});
    j["bic_curve"] = curve;
    auto fits = nlohmann::json::array();
    for (const auto& f : s.fits) fits.push_back(to_json(f, taxa));
    j["fits"] = fits;
    return j;
}

inline void write_bic_curve(const std::filesystem::path& path, const std::vector<BicPoint>& curve) {
    auto out = csv::open_output(path);
    out << "k,bic\n";
    for (const auto& pt : curve) out << pt.K << ',' << csv::format(pt.bic) << '\n';
}

} // namespace sbmmrf

#endif // SBMMRF_INFERENCE_HPP
