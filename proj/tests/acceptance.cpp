// End-to-end acceptance checks. Prints one PASS/FAIL/SKIP line per criterion.
#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sbmmrf/sbmmrf.hpp"

using namespace sbmmrf;

namespace {

std::map<std::string, std::string> details;

void note(const std::string& detail) {
    details[::testing::UnitTest::GetInstance()->current_test_info()->name()] = detail;
}

class CriterionPrinter : public ::testing::EmptyTestEventListener {
    void OnTestEnd(const ::testing::TestInfo& info) override {
        const auto* r = info.result();
        const char* verdict = r->Skipped() ? "SKIP" : r->Passed() ? "PASS" : "FAIL";
        std::cout << "[criterion " << std::string(info.name()).substr(1, std::string(info.name()).find('_') - 1) << "] "
                  << verdict << "  " << info.name();
        if (auto it = details.find(info.name()); it != details.end()) std::cout << "  (" << it->second << ")";
        std::cout << std::endl;
    }
};

std::vector<std::vector<int>> dense(const BinaryNetwork& g) {
    std::vector<std::vector<int>> a(g.size(), std::vector<int>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j) a[i][j] = g.has_edge(i, j);
    return a;
}

BinaryNetwork random_graph(std::size_t p, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(density);
    BinaryNetwork g(synthetic_taxa(p));
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j)
            if (coin(rng)) g.set_edge(i, j);
    return g;
}

double median(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const auto n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

std::string fmt(double v) { return csv::format(std::round(v * 1e4) / 1e4); }

} // namespace

TEST(Acceptance, C1_ExactPosteriorCoclustering) {
    const auto start = std::chrono::steady_clock::now();
    const auto g = random_graph(8, 0.45, 2024);
    BinaryNetwork q(g.labels());
    q.set_edge(0, 1);
    q.set_edge(1, 2);
    q.set_edge(4, 7);
    q.set_edge(3, 6);
    double worst = 0;
    for (double f : {0.0, 1.0}) {
        SamplerConfig cfg;
        cfg.K = 2;
        cfg.f = f;
        cfg.iterations = 200000;
        cfg.seed = 11;
        const auto trace = gibbs_run(g, q, cfg);
        const auto exact = oracle::coclustering(dense(g), dense(q), 2, f, cfg.a_omega, cfg.b_omega);
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = i + 1; j < 8; ++j) {
                double together = 0;
                for (const auto& z : trace.z_samples) together += z.labels[i] == z.labels[j];
                const double err = std::abs(together / static_cast<double>(trace.size()) - exact[i][j]);
                worst = std::max(worst, err);
                EXPECT_LE(err, 0.03) << "pair " << i << "," << j << " f=" << f;
            }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LT(secs, 120.0);
    note("max abs error " + fmt(worst) + ", " + fmt(secs) + " s");
}

TEST(Acceptance, C2_BetaConjugacy) {
    Rng rng(7);
    std::vector<int> labels(30);
    for (std::size_t j = 0; j < 30; ++j) labels[j] = static_cast<int>(j % 3);
    const CommunityAssignment z{labels, 3};
    auto w = EdgeProbabilityMatrix::constant(3, 0.1);
    w.values(0, 0) = 0.7;
    w.values(1, 1) = 0.5;
    w.values(2, 2) = 0.9;
    const auto g = sample_network(z, w, rng);
    const auto counts = edge_counts(g, z);
    SamplerConfig cfg;
    cfg.K = 3;

    const int draws = 10000;
    std::vector<std::vector<double>> samples(9);
    for (int d = 0; d < draws; ++d) {
        const auto omega = sample_omega(counts, cfg, rng);
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t l = 0; l < 3; ++l) samples[3 * k + l].push_back(omega.values(k, l));
    }
    double worst = 0;
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t l = k; l < 3; ++l) {
            const auto& x = samples[3 * k + l];
            const double a = static_cast<double>(counts.observed(k, l)) + 1;
            const double b = static_cast<double>(counts.possible(k, l) - counts.observed(k, l)) + 1;
            const double mean = a / (a + b);
            const double var = a * b / ((a + b) * (a + b) * (a + b + 1));
            double m = 0;
            for (double v : x) m += v;
            m /= draws;
            double s2 = 0, m4 = 0;
            for (double v : x) {
                s2 += (v - m) * (v - m);
                m4 += std::pow(v - m, 4);
            }
            s2 /= draws;
            m4 /= draws;
            const double se_mean = std::sqrt(s2 / draws);
            const double se_var = std::sqrt((m4 - s2 * s2) / draws);
            worst = std::max({worst, std::abs(m - mean) / se_mean, std::abs(s2 - var) / se_var});
            EXPECT_LE(std::abs(m - mean), 3 * se_mean) << k << "," << l;
            EXPECT_LE(std::abs(s2 - var), 3 * se_var) << k << "," << l;
        }
    note("largest deviation " + fmt(worst) + " standard errors");
}

TEST(Acceptance, C3_NoCouplingIgnoresTaxonomy) {
    const auto ds = generate_dataset(default_suite(1)[2], 0); // K3_strong
    const auto tree = ds.tree();
    SamplerConfig cfg;
    cfg.K = 3;
    cfg.f = 0.0;
    cfg.iterations = 1000;
    cfg.seed = 99;
    const auto with_tree = gibbs_run(ds.g, tree, cfg);
    const auto without = gibbs_run(ds.g, BinaryNetwork(ds.g.labels()), cfg);
    EXPECT_GT(tree.edge_count(), 0u);
    EXPECT_TRUE(with_tree.z_samples == without.z_samples);
    EXPECT_TRUE(with_tree.omega_samples == without.omega_samples);
    EXPECT_TRUE(with_tree.log_joint == without.log_joint);
    note(std::to_string(with_tree.size()) + " retained samples compared");
}

TEST(Acceptance, C4_SimulationReplication) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t reps = 20;
    const auto specs = default_suite(reps);
    const auto datasets = generate_suite(specs, 0);
    std::vector<std::array<double, 2>> scores(datasets.size());
    parallel_for(datasets.size(), 0, [&](std::size_t i) {
        const auto& ds = datasets[i];
        const auto q = ds.tree();
        for (int arm = 0; arm < 2; ++arm) {
            SamplerConfig cfg;
            cfg.K = ds.z_true.K;
            cfg.f = arm;
            cfg.iterations = 2000;
            cfg.seed = fit_seed(ds);
            scores[i][static_cast<std::size_t>(arm)] = ari(map_labels(gibbs_run(ds.g, q, cfg)).z, ds.z_true);
        }
    });
    std::ostringstream summary;
    for (std::size_t s = 0; s < specs.size(); ++s) {
        std::vector<double> plain, coupled;
        std::size_t nonneg = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            const auto& sc = scores[s * reps + r];
            plain.push_back(sc[0]);
            coupled.push_back(sc[1]);
            nonneg += sc[1] >= sc[0];
        }
        const double m0 = median(plain), m1 = median(coupled);
        summary << specs[s].name() << " " << fmt(m0) << "/" << fmt(m1) << " " << nonneg << "/" << reps << "; ";
        if (specs[s].strength == Strength::weak) {
            EXPECT_LE(std::abs(m1 - m0), 0.05) << specs[s].name();
        } else {
            EXPECT_GE(m1, m0) << specs[s].name();
            EXPECT_GE(static_cast<double>(nonneg), 0.7 * static_cast<double>(reps)) << specs[s].name();
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LT(secs, 1800.0);
    std::cout << "  median ARI f=0/f=1, nonnegative paired differences: " << summary.str() << std::endl;
    note(fmt(secs) + " s");
}

TEST(Acceptance, C5_AriFixtures) {
    const std::vector<int> z{1, 1, 1, 1, 1, 2, 2, 2, 2, 2};
    const double none = ari(z, std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    const double half = ari(z, std::vector<int>{1, 1, 1, 1, 1, 2, 3, 4, 5, 6});
    const double same = ari(z, std::vector<int>{1, 1, 1, 1, 1, 2, 2, 2, 2, 2});
    EXPECT_EQ(none, 0.0);
    EXPECT_NEAR(half, 0.5, 0.1);
    EXPECT_EQ(same, 1.0);
    note(fmt(none) + ", " + fmt(half) + ", " + fmt(same));
}

TEST(Acceptance, C6_MclrInvariants) {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<std::size_t> width(2, 60);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::lognormal_distribution<double> amount(0.0, 3.0);
    double worst_sum = 0;
    std::size_t sparse_rows = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto p = width(rng);
        const double zero_rate = i % 4 == 0 ? 0.9 : unit(rng) * 0.8;
        std::vector<double> x(p);
        for (auto& v : x) v = unit(rng) < zero_rate ? 0.0 : amount(rng);
        if (std::all_of(x.begin(), x.end(), [](double v) { return v == 0; })) x[p / 2] = 1.0;
        const double total = std::accumulate(x.begin(), x.end(), 0.0);
        for (auto& v : x) v /= total;
        sparse_rows += zero_rate == 0.9;

        std::vector<double> robust(p), shifted(p);
        mclr_row(x, robust, ShiftMode::robust);
        mclr_row(x, shifted, ShiftMode::shifted);
        double sum = 0;
        double low = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < p; ++j) {
            // A lone non-zero equals its own geometric mean, so robust mode may map it to 0.
            if (x[j] == 0) EXPECT_EQ(robust[j], 0.0) << "row " << i;
            EXPECT_EQ(x[j] == 0, shifted[j] == 0) << "row " << i;
            if (x[j] != 0) {
                sum += robust[j];
                low = std::min(low, shifted[j]);
            }
        }
        EXPECT_LE(std::abs(sum), 1e-10) << "row " << i;
        EXPECT_EQ(low, 1.0) << "row " << i;
        worst_sum = std::max(worst_sum, std::abs(sum));
    }
    std::ostringstream d;
    d << "1000 rows, " << sparse_rows << " with 90% zeros, max |row sum| " << worst_sum;
    note(d.str());
}

TEST(Acceptance, C7_PlantedRecovery) {
    int exact = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(derive_seed(7000, seed));
        std::vector<int> labels(40);
        for (std::size_t j = 0; j < 40; ++j) labels[j] = j < 20 ? 0 : 1;
        const CommunityAssignment truth{labels, 2};
        auto w = EdgeProbabilityMatrix::constant(2, 0.05);
        w.values(0, 0) = w.values(1, 1) = 0.9;
        const auto g = sample_network(truth, w, rng);
        SamplerConfig cfg;
        cfg.K = 2;
        cfg.f = 0.0;
        cfg.iterations = 1000;
        cfg.seed = seed;
        exact += ari(map_labels(gibbs_run(g, BinaryNetwork(g.labels()), cfg)).z, truth) == 1.0;
    }
    EXPECT_GE(exact, 9);
    note(std::to_string(exact) + "/10 seeds with ARI 1");
}

TEST(Acceptance, C8_UrinaryPipeline) {
    const char* dir = std::getenv("SBMMRF_URINARY_DIR");
    if (dir == nullptr) {
        note("set SBMMRF_URINARY_DIR to a directory holding abundance.csv and taxonomy.csv");
        GTEST_SKIP();
    }
    const std::filesystem::path root(dir);
    const auto counts = load_abundance(root / "abundance.csv", 7);
    const auto taxonomy = load_taxonomy(root / "taxonomy.csv", counts.taxa);
    const auto v = mclr(relative_abundance(counts), ShiftMode::shifted);
    const auto [g, corr] = build_cooccurrence(v, 0.05, 0);
    const auto q = build_tree_adjacency(taxonomy, counts.taxa);
    EXPECT_EQ(counts.taxa.size(), 99u);
    EXPECT_EQ(taxonomy.parent_count(), 41u);
    std::vector<int> grid;
    for (int k = 2; k <= 12; ++k) grid.push_back(k);
    std::ostringstream chosen;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SamplerConfig cfg;
        cfg.f = 1.0;
        cfg.seed = seed;
        const auto sel = select_k(g, q, cfg, grid, SelectionMethod::elbow, 0);
        chosen << sel.chosen_k << ' ';
        EXPECT_GE(sel.chosen_k, 6);
        EXPECT_LE(sel.chosen_k, 8);
    }
    note("p=" + std::to_string(counts.taxa.size()) + ", genera=" + std::to_string(taxonomy.parent_count()) +
         ", elbow K per seed: " + chosen.str());
}

TEST(Acceptance, C9_LesMiserables) {
    const auto nets = load_network(std::string(SBMMRF_DATA_DIR) + "/lesmiserables_edges.csv", 2.0);
    const auto& g = nets.unweighted;
    ASSERT_EQ(g.size(), 77u);
    const auto degree = nodal_strength(g);
    const auto hub = static_cast<std::size_t>(std::max_element(degree.begin(), degree.end()) - degree.begin());
    std::vector<int> grid;
    for (int k = 2; k <= 12; ++k) grid.push_back(k);

    int k6 = 0, singleton = 0;
    std::ostringstream chosen;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SamplerConfig cfg;
        cfg.f = 1.0;
        cfg.iterations = 2000;
        cfg.seed = seed;
        const auto sel = select_k(g, nets.thresholded, cfg, grid, SelectionMethod::min_bic, 0, 4);
        chosen << sel.chosen_k << ' ';
        k6 += sel.chosen_k == 6;
        for (const auto& fit : sel.fits) {
            if (fit.K != sel.chosen_k) continue;
            singleton += fit.z_map.sizes()[static_cast<std::size_t>(fit.z_map.labels[hub])] == 1;
        }
    }
    EXPECT_GT(k6, 5) << "chosen K per seed: " << chosen.str();
    EXPECT_GT(singleton, 5);
    note("chosen K per seed: " + chosen.str() + "; K=6 in " + std::to_string(k6) + "/10; " + g.labels()[hub] +
         " alone in " + std::to_string(singleton) + "/10");
}

int main(int argc, char** argv) {
    ::testing::InitGoogleTest(&argc, argv);
    auto& listeners = ::testing::UnitTest::GetInstance()->listeners();
    listeners.Append(new CriterionPrinter);
    return RUN_ALL_TESTS();
}
