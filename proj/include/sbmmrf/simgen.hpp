#ifndef SBMMRF_SIMGEN_HPP
#define SBMMRF_SIMGEN_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <json.hpp>

#include "sbmmrf/binary_network.hpp"
#include "sbmmrf/csv.hpp"
#include "sbmmrf/errors.hpp"
#include "sbmmrf/inference.hpp"
#include "sbmmrf/ingest.hpp"
#include "sbmmrf/metrics.hpp"
#include "sbmmrf/network.hpp"
#include "sbmmrf/parallel.hpp"
#include "sbmmrf/random.hpp"
#include "sbmmrf/sbm.hpp"

namespace sbmmrf {

// How informative genus labels are about communities, by ARI(z, tau):
// weak <= 0.3 < moderate <= 0.7 < strong <= 1.
enum class Strength { weak, moderate, strong };

inline std::string to_string(Strength s) {
    switch (s) {
    case Strength::weak: return "weak";
    case Strength::moderate: return "moderate";
    case Strength::strong: return "strong";
    }
    return "?";
}

inline Strength parse_strength(const std::string& s) {
    if (s == "weak") return Strength::weak;
    if (s == "moderate") return Strength::moderate;
    if (s == "strong") return Strength::strong;
    throw ValidationError("unknown strength '" + s + "'");
}

inline bool in_band(Strength s, double a) {
    switch (s) {
    case Strength::weak: return a <= 0.3;
    case Strength::moderate: return a > 0.3 && a <= 0.7;
    case Strength::strong: return a > 0.7 && a <= 1.0;
    }
    return false;
}

// Distance from an ARI value to a strength band (0 inside).
inline double band_distance(Strength s, double a) {
    switch (s) {
    case Strength::weak: return std::max(0.0, a - 0.3);
    case Strength::moderate: return a <= 0.3 ? 0.3 - a + 1e-12 : std::max(0.0, a - 0.7);
    case Strength::strong: return a <= 0.7 ? 0.7 - a + 1e-12 : 0.0;
    }
    return 1.0;
}

struct ScenarioSpec {
    std::size_t p = 180;
    int K = 3;
    int R = 30; // genus labels are drawn from 1..R
    Strength strength = Strength::weak;
    std::vector<double> within_probs{0.3, 0.6, 0.95};
    double between_lo = 0.0;
    double between_hi = 0.1;
    std::size_t replicates = 50;
    std::uint64_t seed = 1;
    // Genus construction knobs.
    double moderate_aligned = 0.5; // share of taxa whose genus follows their community
    double strong_noise = 0.1;     // chance a taxon's genus is redrawn at random
    int max_attempts = 100;

    std::string name() const { return "K" + std::to_string(K) + "_" + to_string(strength); }

    void validate() const {
        if (p < 2) throw ValidationError("scenario: p must be >= 2");
        if (K < 1) throw ValidationError("scenario: K must be >= 1");
        if (R < 1) throw ValidationError("scenario: R must be >= 1");
        if (within_probs.size() != static_cast<std::size_t>(K))
            throw ValidationError("scenario: need one within-community probability per community");
        for (double w : within_probs)
            if (!(w > 0.0 && w < 1.0)) throw ValidationError("scenario: within probabilities must lie in (0, 1)");
        if (!(between_lo >= 0.0 && between_lo < between_hi && between_hi <= 1.0))
            throw ValidationError("scenario: need 0 <= lo < hi <= 1");
        if (strength != Strength::weak && R < K) throw ValidationError("scenario: need R >= K for aligned genera");
        if (max_attempts < 1) throw ValidationError("scenario: max_attempts must be >= 1");
    }
};

struct LabelDraw {
    CommunityAssignment z;
    std::vector<int> tau; // genus ids in 1..R
    double ari = 0;
};

// Communities uniform at random; genera constructed per strength and redrawn until ARI(z, tau)
// falls in the band.
//   weak:     genera i.i.d. uniform over 1..R.
//   moderate: half the taxa take their community's own genus, the rest a uniform stray genus.
//   strong:   each taxon takes its community's genus, or a stray genus with prob strong_noise.
// Stray genera are those not owned by any community, so a misaligned taxon never shares a
// genus with another community's aligned members.
template <typename Engine>
LabelDraw assign_labels(const ScenarioSpec& spec, Engine& rng) {
    spec.validate();
    boost::random::uniform_int_distribution<int> any_genus(1, spec.R);
    boost::random::uniform_01<double> unit;
    LabelDraw best;
    double best_gap = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
        LabelDraw d;
        d.z = random_assignment(spec.p, spec.K, rng);
        d.tau.assign(spec.p, 0);

        std::vector<int> genera(static_cast<std::size_t>(spec.R));
        std::iota(genera.begin(), genera.end(), 1);
        for (std::size_t i = genera.size(); i > 1; --i) {
            boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(genera[i - 1], genera[pick(rng)]);
        }
        auto own = [&](std::size_t j) { return genera[static_cast<std::size_t>(d.z.labels[j])]; };
        // Genera not owned by any community; falls back to all genera when R == K.
        const auto owned = static_cast<std::size_t>(spec.R > spec.K ? spec.K : 0);
        boost::random::uniform_int_distribution<std::size_t> stray_pick(owned, genera.size() - 1);
        auto stray = [&](auto& engine) { return genera[stray_pick(engine)]; };

        switch (spec.strength) {
        case Strength::weak:
            for (auto& t : d.tau) t = any_genus(rng);
            break;
        case Strength::moderate: {
            std::vector<std::size_t> order(spec.p);
            std::iota(order.begin(), order.end(), 0);
            for (std::size_t i = order.size(); i > 1; --i) {
                boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
                std::swap(order[i - 1], order[pick(rng)]);
            }
            const auto aligned = static_cast<std::size_t>(std::llround(spec.moderate_aligned * static_cast<double>(spec.p)));
            for (std::size_t i = 0; i < spec.p; ++i) {
                const auto j = order[i];
                d.tau[j] = i < aligned ? own(j) : stray(rng);
            }
            break;
        }
        case Strength::strong:
            for (std::size_t j = 0; j < spec.p; ++j) d.tau[j] = unit(rng) < spec.strong_noise ? stray(rng) : own(j);
            break;
        }
        d.ari = ari(d.z.labels, d.tau);
        if (in_band(spec.strength, d.ari)) return d;
        const double gap = band_distance(spec.strength, d.ari);
        if (gap < best_gap) {
            best_gap = gap;
            best = std::move(d);
        }
    }
    throw GenerationError("could not reach the " + to_string(spec.strength) + " ARI band in " +
                              std::to_string(spec.max_attempts) + " attempts",
                          best.ari);
}

// Block probabilities: within_probs on the diagonal, Uniform(lo, hi) off the diagonal.
template <typename Engine>
EdgeProbabilityMatrix draw_omega_spec(const ScenarioSpec& spec, Engine& rng) {
    auto w = EdgeProbabilityMatrix::constant(spec.K, 0.0);
    boost::random::uniform_real_distribution<double> between(spec.between_lo, spec.between_hi);
    for (int k = 0; k < spec.K; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        w.values(kk, kk) = spec.within_probs[kk];
        for (auto l = kk + 1; l < static_cast<std::size_t>(spec.K); ++l) w.values(kk, l) = w.values(l, kk) = between(rng);
    }
    return w;
}

inline std::vector<std::string> synthetic_taxa(std::size_t p) {
    std::vector<std::string> out;
    out.reserve(p);
    for (std::size_t j = 0; j < p; ++j) out.push_back("t" + std::to_string(j + 1));
    return out;
}

// Independent Bernoulli(omega_{z_i z_j}) edges for i < j.
template <typename Engine>
BinaryNetwork sample_network(const CommunityAssignment& z, const EdgeProbabilityMatrix& omega, Engine& rng,
                             std::vector<std::string> labels = {}) {
    if (omega.K() != z.K) throw DomainError("sample_network: omega dimension differs from K");
    z.validate();
    if (labels.empty()) labels = synthetic_taxa(z.size());
    if (labels.size() != z.size()) throw DomainError("sample_network: label count differs from taxa");
    BinaryNetwork g(std::move(labels));
    boost::random::uniform_01<double> unit;
    for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = i + 1; j < z.size(); ++j)
            if (unit(rng) < omega(z.labels[i], z.labels[j])) g.set_edge(i, j);
    return g;
}

struct SyntheticDataset {
    std::string scenario;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    BinaryNetwork g;
    CommunityAssignment z_true;
    std::vector<int> tau;
    EdgeProbabilityMatrix omega_spec;
    double achieved_strength_ari = 0;

    // Same-genus network built from tau.
    BinaryNetwork tree() const { return same_group_network(g.labels(), tau); }
};

inline std::uint64_t replicate_seed(const ScenarioSpec& spec, std::size_t replicate) {
    return derive_seed(spec.seed, replicate);
}

// Seed of the chain fitted to a synthetic dataset: a stream independent of its generation.
inline std::uint64_t fit_seed(const SyntheticDataset& ds) { return derive_seed(ds.seed, 1); }

inline SyntheticDataset generate_dataset(const ScenarioSpec& spec, std::size_t replicate) {
    SyntheticDataset ds;
    ds.scenario = spec.name();
    ds.replicate = replicate;
    ds.seed = replicate_seed(spec, replicate);
    Rng rng(ds.seed);
    auto labels = assign_labels(spec, rng);
    ds.z_true = std::move(labels.z);
    ds.tau = std::move(labels.tau);
    ds.achieved_strength_ari = labels.ari;
    ds.omega_spec = draw_omega_spec(spec, rng);
    ds.g = sample_network(ds.z_true, ds.omega_spec, rng);
    return ds;
}

// Datasets in scenario-major order, replicates 0..replicates-1 each.
inline std::vector<SyntheticDataset> generate_suite(const std::vector<ScenarioSpec>& specs, unsigned threads = 1) {
    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (std::size_t s = 0; s < specs.size(); ++s) {
        specs[s].validate();
        for (std::size_t r = 0; r < specs[s].replicates; ++r) jobs.emplace_back(s, r);
    }
    std::vector<SyntheticDataset> out(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t i) { out[i] = generate_dataset(specs[jobs[i].first], jobs[i].second); });
    return out;
}

// The nine default scenarios: K in {3, 6, 9} x {weak, moderate, strong}, p = 180, R = 30,
// between-community probabilities ~ Uniform(0, 0.1).
inline std::vector<ScenarioSpec> default_suite(std::size_t replicates = 50, std::uint64_t seed = 2024) {
    const std::vector<std::vector<double>> within{
        {0.3, 0.6, 0.95},
        {0.1, 0.3, 0.5, 0.7, 0.9, 0.97},
        {0.12, 0.2, 0.3, 0.4, 0.5, 0.7, 0.8, 0.9, 0.99},
    };
    std::vector<ScenarioSpec> specs;
    for (const auto& w : within) {
        for (auto s : {Strength::weak, Strength::moderate, Strength::strong}) {
            ScenarioSpec spec;
            spec.K = static_cast<int>(w.size());
            spec.within_probs = w;
            spec.strength = s;
            spec.replicates = replicates;
            spec.seed = derive_seed(seed, specs.size());
            specs.push_back(std::move(spec));
        }
    }
    return specs;
}

inline nlohmann::json to_json(const ScenarioSpec& spec) {
    return {{"name", spec.name()},
            {"p", spec.p},
            {"K", spec.K},
            {"R", spec.R},
            {"strength", to_string(spec.strength)},
            {"within_probs", spec.within_probs},
            {"between", {{"distribution", "uniform"}, {"lo", spec.between_lo}, {"hi", spec.between_hi}}},
            {"replicates", spec.replicates},
            {"seed", spec.seed},
            {"moderate_aligned", spec.moderate_aligned},
            {"strong_noise", spec.strong_noise},
            {"max_attempts", spec.max_attempts}};
}

inline void write_truth(const std::filesystem::path& path, const std::vector<std::string>& taxa,
                        const CommunityAssignment& z, const std::vector<int>& tau) {
    auto out = csv::open_output(path);
    out << "taxon,community,genus\n";
    for (std::size_t j = 0; j < taxa.size(); ++j)
        out << csv::escape(taxa[j]) << ',' << z.labels[j] + 1 << ',' << tau[j] << '\n';
}

// Writes adjacency.csv, truth.csv and scenario.json into `dir`.
inline void write_dataset(const std::filesystem::path& dir, const SyntheticDataset& ds, const ScenarioSpec& spec) {
    std::filesystem::create_directories(dir);
    write_adjacency(dir / "adjacency.csv", ds.g);
    write_truth(dir / "truth.csv", ds.g.labels(), ds.z_true, ds.tau);
    auto j = to_json(spec);
    j["replicate"] = ds.replicate;
    j["replicate_seed"] = ds.seed;
    j["achieved_strength_ari"] = ds.achieved_strength_ari;
    j["omega_spec"] = omega_to_json(ds.omega_spec);
    auto out = csv::open_output(dir / "scenario.json");
    out << j.dump(2) << '\n';
}

} // namespace sbmmrf

#endif // SBMMRF_SIMGEN_HPP
