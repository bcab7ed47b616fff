#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spex/algorithms.hpp"
#include "spex/dataset.hpp"
#include "spex/kmeans.hpp"
#include "spex/metrics.hpp"
#include "spex/synth.hpp"
#include "spex/theory.hpp"
#include "spex/tree.hpp"

namespace spex::cli {

enum Exit : int { kOk = 0, kInvalid = 1, kCheckFailed = 2 };

/// Input errors detected while validating a command.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::string algo;
    std::string points, labels, truth, ref, tree;
    std::string out, assign_out, metrics_out, labels_out;
    std::string a, b;
    std::string weight_mode = "indicator_sum";
    std::string suite = "all";
    std::string kind;
    std::size_t leaves = 0, knn = 20, trials = 100, n = 300;
    int k = 0, restarts = 10;
    std::uint64_t seed = 0;
    double noise = 0.05;
    bool header = false, standardize = false;
};

/// Writes through a sibling temporary file and renames it into place.
inline void write_atomic(const std::string& path, const std::string& content) {
    std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw UsageError("cannot write " + path);
        f << content;
        if (!f.flush()) throw UsageError("cannot write " + path);
    }
    std::filesystem::rename(tmp, target);
}

inline std::string sibling(const std::string& of, const std::string& name) {
    auto parent = std::filesystem::path(of).parent_path();
    return (parent / name).string();
}

inline std::string labels_csv(std::span<const int> labels) {
    std::ostringstream s;
    write_labels(s, labels);
    return s.str();
}

inline nlohmann::json nullable(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

/// Aligned two-column rendering of the metrics document.
inline std::string metrics_table(const nlohmann::json& m) {
    std::ostringstream s;
    for (const char* key : {"algo", "n", "leaves", "ARI", "AMI", "REF", "tree_objective", "leaf_target_reached"}) {
        if (!m.contains(key)) continue;
        s << std::left << std::setw(20) << key;
        const auto& v = m[key];
        if (v.is_null())
            s << "-";
        else if (v.is_number_float())
            s << std::fixed << std::setprecision(4) << v.get<double>();
        else if (v.is_string())
            s << v.get<std::string>();
        else
            s << v.dump();
        s << '\n';
    }
    return s.str();
}

namespace detail {

inline int parse_kmeans_ref(const std::string& spec) {
    const std::string prefix = "kmeans:";
    if (spec.rfind(prefix, 0) != 0) throw UsageError("--ref must look like kmeans:<k>");
    try {
        std::size_t used = 0;
        int k = std::stoi(spec.substr(prefix.size()), &used);
        if (used != spec.size() - prefix.size() || k < 1) throw UsageError("bad k in --ref");
        return k;
    } catch (const std::logic_error&) {
        throw UsageError("bad k in --ref");
    }
}

inline KnnWeight parse_weight_mode(const std::string& s) {
    if (s == "indicator_sum") return KnnWeight::indicator_sum;
    if (s == "union") return KnnWeight::union_;
    throw UsageError("unknown --weight-mode: " + s);
}

/// Reference from --labels (centroids = cluster means), else from the
/// built-in k-means when --ref kmeans:<k> or --k is given.
inline std::optional<ReferenceClustering> resolve_reference(const RunConfig& cfg, const Dataset& ds) {
    if (!cfg.labels.empty()) {
        auto raw = read_labels(cfg.labels);
        if (raw.size() != ds.n()) throw UsageError("label count does not match point count");
        auto ref = ReferenceClustering::relabeled(raw);
        return ref.with_centroids(cluster_means(ds, ref.labels(), ref.k()), ds.d());
    }
    int k = cfg.k;
    if (!cfg.ref.empty()) k = parse_kmeans_ref(cfg.ref);
    if (k > 0) return kmeans_fit(ds, k, cfg.restarts, cfg.seed);
    return std::nullopt;
}

inline int do_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    static const std::vector<std::string> algos{"spex-clique", "spex-knn", "cart", "imm", "emn"};
    if (std::find(algos.begin(), algos.end(), cfg.algo) == algos.end())
        throw UsageError("unknown --algo: " + cfg.algo);
    Dataset ds = read_points_csv(cfg.points, cfg.header);
    if (cfg.standardize) ds = standardize(ds);
    auto ref = resolve_reference(cfg, ds);
    if (!ref && cfg.algo == "emn") throw UsageError("EMN requires a centroid-bearing reference");
    if (!ref && cfg.algo == "imm") throw UsageError("IMM requires a centroid-bearing reference");
    if (!ref && (cfg.algo == "spex-clique" || cfg.algo == "cart"))
        throw UsageError(cfg.algo + " requires a reference (--labels, --ref kmeans:<k> or --k)");
    std::size_t leaves = cfg.leaves;
    if (leaves == 0) {
        if (!ref) throw UsageError("spex-knn without a reference needs --leaves");
        leaves = static_cast<std::size_t>(ref->k());
    }
    const std::size_t workers = worker_count();

    ExplainTree tree;
    std::vector<int> assignment;
    std::optional<double> objective;
    bool reached = true;
    if (cfg.algo == "spex-clique" || cfg.algo == "spex-knn" || cfg.algo == "cart") {
        BuildResult res;
        if (cfg.algo == "spex-clique") {
            res = spex_fit(ds, CliqueSource{&*ref}, leaves, workers);
        } else if (cfg.algo == "spex-knn") {
            if (cfg.knn < 1 || cfg.knn >= ds.n()) throw UsageError("--knn must satisfy 1 <= knn < n");
            res = spex_fit(ds, KnnSource{cfg.knn, parse_weight_mode(cfg.weight_mode)}, leaves, workers);
            objective = res.objective;
        } else {
            res = cart_fit(ds, *ref, leaves, workers);
        }
        tree = std::move(res.tree);
        reached = res.leaf_target_reached;
        if (!reached) err << "warning: unreachable leaf target; tree has " << tree.leaf_count() << " leaves\n";
    } else {
        auto res = cfg.algo == "imm" ? imm_fit(ds, *ref) : emn_fit(ds, *ref);
        tree = std::move(res.tree);
    }
    assignment = assign(tree, ds);
    if (!objective && ref) {
        GraphHandle g = CliqueClusterGraph(*ref);
        objective = tree_objective(g, blocks_of(assignment));
    }

    nlohmann::json m;
    m["algo"] = cfg.algo;
    m["n"] = ds.n();
    m["leaves"] = tree.leaf_count();
    m["leaf_target_reached"] = reached;
    std::optional<double> ari_v, ami_v, ref_v;
    if (!cfg.truth.empty()) {
        auto raw = read_labels(cfg.truth);
        if (raw.size() != ds.n()) throw UsageError("truth label count does not match point count");
        auto truth = ReferenceClustering::relabeled(raw);
        ari_v = ari(truth.labels(), assignment);
        ami_v = ami(truth.labels(), assignment);
    }
    if (ref) ref_v = ari(ref->labels(), assignment);
    m["ARI"] = nullable(ari_v);
    m["AMI"] = nullable(ami_v);
    m["REF"] = nullable(ref_v);
    m["tree_objective"] = nullable(objective);

    std::string out_path = cfg.out.empty() ? "tree.json" : cfg.out;
    std::string assign_path = cfg.assign_out.empty() ? sibling(out_path, "assign.csv") : cfg.assign_out;
    std::string metrics_path = cfg.metrics_out.empty() ? sibling(out_path, "metrics.json") : cfg.metrics_out;
    write_atomic(out_path, tree_to_json(tree));
    write_atomic(assign_path, labels_csv(assignment));
    write_atomic(metrics_path, m.dump(2) + "\n");
    out << metrics_table(m);
    return kOk;
}

inline int do_predict(const RunConfig& cfg, std::ostream& out) {
    std::ifstream f(cfg.tree);
    if (!f) throw UsageError("cannot open " + cfg.tree);
    ExplainTree tree = parse_tree_json(f);
    Dataset ds = read_points_csv(cfg.points, cfg.header);
    if (ds.d() != tree.dim) throw UsageError("point dimension does not match the tree");
    auto labels = assign(tree, ds);
    if (cfg.out.empty())
        out << labels_csv(labels);
    else
        write_atomic(cfg.out, labels_csv(labels));
    return kOk;
}

inline int do_eval(const RunConfig& cfg, std::ostream& out) {
    auto a = ReferenceClustering::relabeled(read_labels(cfg.a));
    auto b = ReferenceClustering::relabeled(read_labels(cfg.b));
    if (a.n() != b.n()) throw UsageError("label files differ in length");
    nlohmann::json m;
    m["n"] = a.n();
    m["ARI"] = ari(a.labels(), b.labels());
    m["AMI"] = ami(a.labels(), b.labels());
    if (!cfg.out.empty()) write_atomic(cfg.out, m.dump(2) + "\n");
    out << metrics_table(m);
    return kOk;
}

inline int do_verify(const RunConfig& cfg, std::ostream& out) {
    static const std::vector<std::string> suites{"theorem1", "corollary", "equivalence", "price"};
    std::vector<std::string> chosen;
    if (cfg.suite == "all")
        chosen = suites;
    else if (std::find(suites.begin(), suites.end(), cfg.suite) != suites.end())
        chosen = {cfg.suite};
    else
        throw UsageError("unknown --suite: " + cfg.suite);

    nlohmann::json doc;
    doc["seed"] = cfg.seed;
    doc["trials"] = cfg.trials;
    doc["suites"] = nlohmann::json::array();
    bool ok = true;
    for (const auto& name : chosen) {
        SuiteReport r;
        if (name == "theorem1") r = theorem1_suite(cfg.seed, cfg.trials);
        if (name == "corollary") r = corollary_suite(cfg.seed, cfg.trials);
        if (name == "equivalence") r = equivalence_suite(cfg.seed, cfg.trials);
        if (name == "price") r = price_suite(cfg.seed, cfg.trials);
        ok = ok && r.ok();
        for (const auto& c : r.checks)
            out << std::left << std::setw(12) << name << std::setw(40) << c.name << c.passed << "/" << c.total
                << (c.ok() ? "  PASS" : "  FAIL") << '\n';
        doc["suites"].push_back(suite_to_json(r));
    }
    doc["pass"] = ok;
    if (!cfg.out.empty()) write_atomic(cfg.out, doc.dump(2) + "\n");
    return ok ? kOk : kCheckFailed;
}

inline int do_gen(const RunConfig& cfg, std::ostream& out) {
    if (cfg.out.empty()) throw UsageError("gen needs --out");
    Synthetic s = synth(cfg.kind, cfg.n, cfg.noise, cfg.seed);
    std::ostringstream pts;
    write_points_csv(pts, s.points);
    write_atomic(cfg.out, pts.str());
    std::string labels_path = cfg.labels_out.empty() ? sibling(cfg.out, "labels.csv") : cfg.labels_out;
    write_atomic(labels_path, labels_csv(s.labels));
    out << "wrote " << s.points.n() << " points to " << cfg.out << " and labels to " << labels_path << '\n';
    return kOk;
}

}  // namespace detail

/// Parses argv and runs one command. Exit 0 on success, 1 on invalid input,
/// 2 when a verify check fails.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"explainable clustering with threshold trees"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* fit = app.add_subcommand("fit", "fit a threshold tree");
    fit->add_option("--algo", cfg.algo, "spex-clique | spex-knn | cart | imm | emn")->required();
    fit->add_option("--points", cfg.points, "points CSV")->required();
    fit->add_option("--labels", cfg.labels, "reference labels, one integer per line");
    fit->add_option("--truth", cfg.truth, "ground-truth labels for ARI/AMI");
    fit->add_option("--ref", cfg.ref, "built-in reference, kmeans:<k>");
    fit->add_option("--k", cfg.k, "k for the built-in k-means reference");
    fit->add_option("--leaves", cfg.leaves, "leaf target (default: k)");
    fit->add_option("--knn", cfg.knn, "neighbors for spex-knn")->capture_default_str();
    fit->add_option("--weight-mode", cfg.weight_mode, "indicator_sum | union")->capture_default_str();
    fit->add_option("--seed", cfg.seed, "k-means seed")->capture_default_str();
    fit->add_option("--restarts", cfg.restarts, "k-means restarts")->capture_default_str();
    fit->add_flag("--header", cfg.header, "skip one header line");
    fit->add_flag("--standardize", cfg.standardize, "z-score every feature first");
    fit->add_option("--out", cfg.out, "tree JSON path")->capture_default_str();
    fit->add_option("--assign", cfg.assign_out, "assignment CSV path (default: next to --out)");
    fit->add_option("--metrics", cfg.metrics_out, "metrics JSON path (default: next to --out)");

    auto* predict = app.add_subcommand("predict", "route points through a saved tree");
    predict->add_option("--tree", cfg.tree, "tree JSON")->required();
    predict->add_option("--points", cfg.points, "points CSV")->required();
    predict->add_flag("--header", cfg.header, "skip one header line");
    predict->add_option("--out", cfg.out, "assignment CSV (default: stdout)");

    auto* eval = app.add_subcommand("eval", "compare two labelings");
    eval->add_option("--a", cfg.a, "first label file")->required();
    eval->add_option("--b", cfg.b, "second label file")->required();
    eval->add_option("--out", cfg.out, "metrics JSON path");

    auto* verify = app.add_subcommand("verify", "run the theory suites");
    verify->add_option("--suite", cfg.suite, "all | theorem1 | corollary | equivalence | price")->capture_default_str();
    verify->add_option("--trials", cfg.trials, "instances per suite")->capture_default_str();
    verify->add_option("--seed", cfg.seed, "suite seed")->capture_default_str();
    verify->add_option("--out", cfg.out, "report JSON path");

    auto* gen = app.add_subcommand("gen", "write a synthetic dataset");
    gen->add_option("--kind", cfg.kind, "two_moons | three_gaussians | cart_trap")->required();
    gen->add_option("--n", cfg.n, "point count")->capture_default_str();
    gen->add_option("--noise", cfg.noise, "noise level")->capture_default_str();
    gen->add_option("--seed", cfg.seed, "seed")->capture_default_str();
    gen->add_option("--out", cfg.out, "points CSV")->required();
    gen->add_option("--labels-out", cfg.labels_out, "labels CSV (default: labels.csv next to --out)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalid;
    }

    try {
        if (fit->parsed()) return detail::do_fit(cfg, out, err);
        if (predict->parsed()) return detail::do_predict(cfg, out);
        if (eval->parsed()) return detail::do_eval(cfg, out);
        if (verify->parsed()) return detail::do_verify(cfg, out);
        if (gen->parsed()) return detail::do_gen(cfg, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInvalid;
    }
    return kInvalid;
}

}  // namespace spex::cli
