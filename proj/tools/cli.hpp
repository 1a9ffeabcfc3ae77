#ifndef SBMMRF_TOOLS_CLI_HPP
#define SBMMRF_TOOLS_CLI_HPP

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sbmmrf/sbmmrf.hpp"

namespace sbmmrf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

struct NetworkOptions {
    std::string abundance;
    std::string taxonomy;
    std::string edges;
    double threshold = 2.0;
    double alpha = 0.05;
    std::string shift = "shifted";
    std::size_t min_nonzero = 7;
};

// Sampler flags shared by fit and select-k.
struct ModelOptions {
    std::string g;
    std::string q;
    std::string taxonomy;
    double f = 1.0;
    int iterations = 1000;
    std::uint64_t seed = 0;
    double a_omega = 1.0;
    double b_omega = 1.0;
    bool no_ramp = false;
};

struct FitOptions {
    int k = 2;
};

struct SelectOptions {
    std::string grid = "2:12";
    std::string method = "min_bic";
    int chains = 1;
};

struct SimulateOptions {
    std::size_t replicates = 50;
    std::uint64_t seed = 2024;
    std::vector<std::string> scenarios;
    bool evaluate = false;
    int iterations = 1000;
    double f = 1.0;
};

struct MetricsOptions {
    std::string truth;
    std::vector<std::string> fits;
};

struct Options {
    std::string out = "out";
    unsigned threads = 1;
    NetworkOptions network;
    ModelOptions model;
    FitOptions fit;
    SelectOptions select;
    SimulateOptions simulate;
    MetricsOptions metrics;
};

// "2:12" or "2,4,6".
inline std::vector<int> parse_grid(const std::string& text) {
    std::vector<int> grid;
    const auto bad = [&] { return ValidationError("invalid K grid '" + text + "' (expected lo:hi or a comma list)"); };
    if (const auto colon = text.find(':'); colon != std::string::npos) {
        const auto lo = csv::parse_int(text.substr(0, colon));
        const auto hi = csv::parse_int(text.substr(colon + 1));
        if (!lo || !hi || *lo > *hi) throw bad();
        for (auto k = *lo; k <= *hi; ++k) grid.push_back(static_cast<int>(k));
        return grid;
    }
    for (const auto& field : csv::split_line(text)) {
        const auto k = csv::parse_int(field);
        if (!k) throw bad();
        grid.push_back(static_cast<int>(*k));
    }
    return grid;
}

inline void write_manifest(const fs::path& dir, const std::string& command, json parameters) {
    json m;
    m["command"] = command;
    m["parameters"] = std::move(parameters);
    auto out = csv::open_output(dir / "manifest.json");
    out << m.dump(2) << '\n';
}

inline json model_json(const ModelOptions& m) {
    return {{"g", m.g},
            {"q", m.q},
            {"taxonomy", m.taxonomy},
            {"f", m.f},
            {"iterations", m.iterations},
            {"seed", m.seed},
            {"a_omega", m.a_omega},
            {"b_omega", m.b_omega},
            {"coupling_ramp", !m.no_ramp}};
}

inline int cmd_network(const Options& o, std::ostream& out) {
    const auto& n = o.network;
    if (n.abundance.empty() == n.edges.empty()) throw ValidationError("network: give exactly one of --abundance or --edges");
    const fs::path dir = o.out;
    json params{{"abundance", n.abundance},   {"taxonomy", n.taxonomy}, {"edges", n.edges},
                {"threshold", n.threshold},   {"alpha", n.alpha},       {"shift", n.shift},
                {"min_nonzero", n.min_nonzero}, {"threads", o.threads}, {"out", o.out}};

    if (!n.edges.empty()) {
        const auto nets = load_network(n.edges, n.threshold);
        write_manifest(dir, "network", params);
        write_adjacency(dir / "g_adjacency.csv", nets.unweighted);
        write_adjacency(dir / "q_adjacency.csv", nets.thresholded);
        out << "G: " << nets.unweighted.size() << " nodes, " << nets.unweighted.edge_count() << " edges\n"
            << "Q: " << nets.thresholded.edge_count() << " edges with weight > " << n.threshold << '\n';
        if (nets.self_loops_skipped > 0) out << "skipped " << nets.self_loops_skipped << " self-loops\n";
        return 0;
    }

    const auto mode = parse_shift_mode(n.shift);
    const auto counts = load_abundance(n.abundance, n.min_nonzero);
    std::optional<BinaryNetwork> tree;
    if (!n.taxonomy.empty()) tree = build_tree_adjacency(load_taxonomy(n.taxonomy, counts.taxa), counts.taxa);
    const auto v = mclr(relative_abundance(counts), mode);
    auto [g, corr] = build_cooccurrence(v, n.alpha, o.threads);

    write_manifest(dir, "network", params);
    write_transformed(dir / "transformed.csv", v);
    write_correlations(dir / "correlations.csv", corr);
    write_adjacency(dir / "g_adjacency.csv", g);
    if (tree) write_adjacency(dir / "q_adjacency.csv", *tree);
    out << "samples: " << counts.samples.size() << ", taxa: " << counts.taxa.size() << '\n';
    if (!counts.dropped_samples.empty()) out << "dropped " << counts.dropped_samples.size() << " empty samples\n";
    out << "G: " << g.edge_count() << " edges at alpha " << n.alpha << '\n';
    if (tree) out << "Q: " << tree->edge_count() << " same-parent pairs\n";
    return 0;
}

struct ModelInputs {
    BinaryNetwork g;
    BinaryNetwork q;
    std::optional<TaxonomyMap> taxonomy;
};

inline ModelInputs load_model_inputs(const ModelOptions& m) {
    if (m.g.empty()) throw ValidationError("--g is required");
    if (!m.q.empty() && !m.taxonomy.empty()) throw ValidationError("give at most one of --q or --taxonomy");
    ModelInputs in{load_adjacency(m.g), BinaryNetwork{}, std::nullopt};
    if (!m.q.empty()) {
        in.q = load_adjacency(m.q);
        if (in.q.labels() != in.g.labels()) throw ValidationError("G and Q cover different taxa");
    } else if (!m.taxonomy.empty()) {
        in.taxonomy = load_taxonomy(m.taxonomy, in.g.labels());
        in.q = build_tree_adjacency(*in.taxonomy, in.g.labels());
    } else {
        if (m.f > 0) throw ValidationError("f > 0 needs a taxonomy network (--q or --taxonomy)");
        in.q = BinaryNetwork(in.g.labels());
    }
    return in;
}

inline SamplerConfig sampler_config(const ModelOptions& m, int K) {
    SamplerConfig cfg;
    cfg.K = K;
    cfg.f = m.f;
    cfg.iterations = m.iterations;
    cfg.seed = m.seed;
    cfg.a_omega = m.a_omega;
    cfg.b_omega = m.b_omega;
    cfg.ramp_coupling = !m.no_ramp;
    return cfg;
}

inline void write_fit_metrics(const fs::path& dir, const ModelInputs& in, const FitSummary& s) {
    write_nodal_strength(dir / "nodal_strength.csv", in.g);
    if (!in.taxonomy) return;
    std::vector<std::string> genus;
    for (const auto& t : in.g.labels()) genus.push_back(in.taxonomy->parent(t));
    write_genus_strength(dir / "genus_strength.csv", genus_community_strength(in.g, s.z_map, genus));
    write_shannon(dir / "shannon.csv", shannon_table("K" + std::to_string(s.K), s.z_map, genus));
}

inline int cmd_fit(const Options& o, std::ostream& out) {
    const fs::path dir = o.out;
    auto cfg = sampler_config(o.model, o.fit.k);
    cfg.validate();
    const auto in = load_model_inputs(o.model);
    if (static_cast<std::size_t>(cfg.K) > in.g.size()) throw ValidationError("K exceeds the number of taxa");

    auto params = model_json(o.model);
    params["k"] = o.fit.k;
    params["out"] = o.out;
    write_manifest(dir, "fit", params);

    const auto trace = gibbs_run(in.g, in.q, cfg);
    const auto s = summarize(trace, in.g.size());
    write_trace(dir, trace, in.g.labels());
    {
        auto f = csv::open_output(dir / "fit.json");
        f << to_json(s, in.g.labels()).dump(2) << '\n';
    }
    write_fit_metrics(dir, in, s);
    out << "K=" << s.K << " map_log_joint=" << csv::format(s.map_log_joint) << " bic=" << csv::format(s.bic)
        << " (iteration " << s.map_iteration << ")\n";
    return 0;
}

inline int cmd_select_k(const Options& o, std::ostream& out) {
    const fs::path dir = o.out;
    const auto grid = parse_grid(o.select.grid);
    const auto method = parse_selection_method(o.select.method);
    auto base = sampler_config(o.model, grid.empty() ? 1 : grid.front());
    base.validate();
    const auto in = load_model_inputs(o.model);

    auto params = model_json(o.model);
    params["grid"] = grid;
    params["method"] = to_string(method);
    params["chains"] = o.select.chains;
    params["threads"] = o.threads;
    params["out"] = o.out;
    write_manifest(dir, "select-k", params);

    const auto sel = select_k(in.g, in.q, base, grid, method, o.threads, o.select.chains);
    write_bic_curve(dir / "bic_curve.csv", sel.bic_curve);
    {
        auto f = csv::open_output(dir / "selection.json");
        f << to_json(sel, in.g.labels()).dump(2) << '\n';
    }
    for (const auto& fit : sel.fits) {
        if (fit.K != sel.chosen_k) continue;
        auto f = csv::open_output(dir / "fit.json");
        f << to_json(fit, in.g.labels()).dump(2) << '\n';
        write_fit_metrics(dir, in, fit);
    }
    for (const auto& pt : sel.bic_curve) out << "K=" << pt.K << " bic=" << csv::format(pt.bic) << '\n';
    out << "chosen K=" << sel.chosen_k << " (" << to_string(method) << ")\n";
    return 0;
}

inline int cmd_simulate(const Options& o, std::ostream& out) {
    const auto& s = o.simulate;
    const fs::path dir = o.out;
    auto specs = default_suite(s.replicates, s.seed);
    if (!s.scenarios.empty()) {
        std::vector<ScenarioSpec> chosen;
        for (const auto& name : s.scenarios) {
            auto it = std::find_if(specs.begin(), specs.end(), [&](const auto& sp) { return sp.name() == name; });
            if (it == specs.end()) throw ValidationError("unknown scenario '" + name + "'");
            chosen.push_back(*it);
        }
        specs = std::move(chosen);
    }
    if (s.evaluate) {
        SamplerConfig probe;
        probe.iterations = s.iterations;
        probe.f = s.f;
        probe.validate();
    }

    json params{{"replicates", s.replicates}, {"seed", s.seed},     {"evaluate", s.evaluate},
                {"iterations", s.iterations}, {"f", s.f},           {"threads", o.threads},
                {"out", o.out}};
    params["scenarios"] = json::array();
    for (const auto& sp : specs) params["scenarios"].push_back(to_json(sp));
    write_manifest(dir, "simulate", params);

    const auto datasets = generate_suite(specs, o.threads);
    std::map<std::string, const ScenarioSpec*> by_name;
    for (const auto& sp : specs) by_name[sp.name()] = &sp;
    for (const auto& ds : datasets)
        write_dataset(dir / ds.scenario / ("rep_" + std::to_string(ds.replicate + 1)), ds, *by_name.at(ds.scenario));
    out << "wrote " << datasets.size() << " datasets across " << specs.size() << " scenarios\n";

    if (!s.evaluate) return 0;
    // Each replicate is fitted twice: f = 0 (plain SBM) and the requested f.
    std::vector<std::array<double, 2>> scores(datasets.size());
    parallel_for(datasets.size(), o.threads, [&](std::size_t i) {
        const auto& ds = datasets[i];
        const auto q = ds.tree();
        for (int arm = 0; arm < 2; ++arm) {
            SamplerConfig cfg;
            cfg.K = ds.z_true.K;
            cfg.f = arm == 0 ? 0.0 : s.f;
            cfg.iterations = s.iterations;
            cfg.seed = fit_seed(ds);
            scores[i][static_cast<std::size_t>(arm)] = ari(map_labels(gibbs_run(ds.g, q, cfg)).z, ds.z_true);
        }
    });
    auto f = csv::open_output(dir / "ari.csv");
    f << "scenario,replicate,model,ari\n";
    const std::string mrf = "sbm_mrf_f" + csv::format(s.f);
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        f << datasets[i].scenario << ',' << datasets[i].replicate + 1 << ",sbm," << csv::format(scores[i][0]) << '\n';
        f << datasets[i].scenario << ',' << datasets[i].replicate + 1 << ',' << mrf << ',' << csv::format(scores[i][1])
          << '\n';
    }
    out << "wrote ari.csv\n";
    return 0;
}

inline std::map<std::string, int> read_truth(const fs::path& path) {
    const auto rows = csv::read_file(path);
    if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "taxon" || rows[0][1] != "community")
        throw ParseError("truth file must start with a taxon,community header", 1);
    std::map<std::string, int> truth;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size()) throw ParseError("row length differs from header", r + 1);
        const auto c = csv::parse_int(rows[r][1]);
        if (!c) throw ValidationError("non-integer community in row " + std::to_string(r + 1));
        if (!truth.emplace(rows[r][0], static_cast<int>(*c)).second)
            throw ValidationError("duplicate taxon '" + rows[r][0] + "'");
    }
    return truth;
}

inline int cmd_metrics(const Options& o, std::ostream& out) {
    const auto& m = o.metrics;
    if (m.truth.empty() || m.fits.empty()) throw ValidationError("metrics: --truth and at least one --fit are required");
    const fs::path dir = o.out;
    const auto truth = read_truth(m.truth);
    write_manifest(dir, "metrics", {{"truth", m.truth}, {"fits", m.fits}, {"out", o.out}});

    auto f = csv::open_output(dir / "ari.csv");
    f << "fit,ari\n";
    for (const auto& path : m.fits) {
        std::ifstream in(path);
        if (!in) throw InputError("cannot open file: " + path);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw ValidationError(path + ": " + e.what());
        }
        if (!j.contains("taxa") || !j.contains("z_map")) throw ValidationError(path + ": missing taxa or z_map");
        const auto taxa = j["taxa"].get<std::vector<std::string>>();
        const auto z = j["z_map"].get<std::vector<int>>();
        if (taxa.size() != z.size() || taxa.size() != truth.size())
            throw ValidationError(path + ": taxa differ from the truth file");
        std::vector<int> reference;
        for (const auto& t : taxa) {
            auto it = truth.find(t);
            if (it == truth.end()) throw CoverageError({t});
            reference.push_back(it->second);
        }
        const double a = ari(z, reference);
        f << csv::escape(path) << ',' << csv::format(a) << '\n';
        out << path << " ari=" << csv::format(a) << '\n';
    }
    return 0;
}

// Exit codes: 0 success, 1 runtime failure, 2 usage or validation.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Community detection in co-occurrence networks with a taxonomy-aware stochastic block model", "sbmmrf"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", o.out, "Output directory")->capture_default_str();
        sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();
    };
    auto add_model = [&](CLI::App* sub) {
        auto& m = o.model;
        sub->add_option("--g", m.g, "Co-occurrence adjacency CSV")->required();
        sub->add_option("--q", m.q, "Taxonomy adjacency CSV");
        sub->add_option("--taxonomy", m.taxonomy, "Taxonomy CSV (taxon,parent)");
        sub->add_option("--f", m.f, "Taxonomy coupling strength")->capture_default_str();
        sub->add_option("--iterations", m.iterations, "Gibbs iterations; the first half is burn-in")->capture_default_str();
        sub->add_option("--seed", m.seed, "Base seed")->capture_default_str();
        sub->add_option("--a-omega", m.a_omega, "Beta prior shape a")->capture_default_str();
        sub->add_option("--b-omega", m.b_omega, "Beta prior shape b")->capture_default_str();
        sub->add_flag("--no-coupling-ramp", m.no_ramp, "Use the full coupling from the first iteration");
    };

    auto* network = app.add_subcommand("network", "Build G (and Q) from abundances or an edge list");
    add_common(network);
    network->add_option("--abundance", o.network.abundance, "Abundance CSV");
    network->add_option("--taxonomy", o.network.taxonomy, "Taxonomy CSV (taxon,parent)");
    network->add_option("--edges", o.network.edges, "Weighted edge-list CSV");
    network->add_option("--threshold", o.network.threshold, "Q keeps edges with weight above this")->capture_default_str();
    network->add_option("--alpha", o.network.alpha, "BH-adjusted significance level")->capture_default_str();
    network->add_option("--shift", o.network.shift, "MCLR mode: shifted or robust")->capture_default_str();
    network->add_option("--min-nonzero", o.network.min_nonzero, "Keep taxa non-zero in at least this many samples")
        ->capture_default_str();

    auto* fit = app.add_subcommand("fit", "Run one Gibbs chain for a fixed K");
    add_common(fit);
    add_model(fit);
    fit->add_option("--k", o.fit.k, "Number of communities")->capture_default_str();

    auto* select = app.add_subcommand("select-k", "Fit a K grid and choose K by BIC");
    add_common(select);
    add_model(select);
    select->add_option("--grid", o.select.grid, "K grid as lo:hi or a comma list")->capture_default_str();
    select->add_option("--method", o.select.method, "min_bic or elbow")->capture_default_str();
    select->add_option("--chains", o.select.chains, "Independent chains per K; the best MAP is kept")->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "Write synthetic benchmark datasets");
    add_common(simulate);
    simulate->add_option("--replicates", o.simulate.replicates, "Replicates per scenario")->capture_default_str();
    simulate->add_option("--seed", o.simulate.seed, "Suite seed")->capture_default_str();
    simulate->add_option("--scenario", o.simulate.scenarios, "Restrict to named scenarios, e.g. K3_weak");
    simulate->add_flag("--evaluate", o.simulate.evaluate, "Fit every replicate with f = 0 and --f, writing ari.csv");
    simulate->add_option("--iterations", o.simulate.iterations, "Gibbs iterations for --evaluate")->capture_default_str();
    simulate->add_option("--f", o.simulate.f, "Coupling strength for --evaluate")->capture_default_str();

    auto* metrics = app.add_subcommand("metrics", "Score fitted labels against a truth file");
    add_common(metrics);
    metrics->add_option("--truth", o.metrics.truth, "truth.csv (taxon,community[,genus])")->required();
    metrics->add_option("--fit", o.metrics.fits, "fit.json files")->required();

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (network->parsed()) return cmd_network(o, out);
        if (fit->parsed()) return cmd_fit(o, out);
        if (select->parsed()) return cmd_select_k(o, out);
        if (simulate->parsed()) return cmd_simulate(o, out);
        return cmd_metrics(o, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace sbmmrf::cli

#endif // SBMMRF_TOOLS_CLI_HPP
