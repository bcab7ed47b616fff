#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "spex/algorithms.hpp"
#include "spex/cuts.hpp"
#include "spex/dataset.hpp"
#include "spex/graph.hpp"
#include "spex/parallel.hpp"

namespace spex {

// ------------------------------------------------------ graph constructors

/// Star graph over X u M: vertex n + c is centroid c, every point is joined
/// to its own centroid with unit weight.
inline SparseGraph star_graph(const ReferenceClustering& ref) {
    std::vector<WeightedEdge> edges;
    for (Index x = 0; x < ref.n(); ++x) edges.push_back({x, ref.n() + static_cast<Index>(ref.label(x)), 1.0});
    return SparseGraph::from_edges(ref.n() + static_cast<std::size_t>(ref.k()), edges);
}

/// Unit edges between every pair of points in different clusters.
inline SparseGraph independent_set_graph(const ReferenceClustering& ref) {
    std::vector<WeightedEdge> edges;
    for (Index x = 0; x < ref.n(); ++x)
        for (Index y = x + 1; y < ref.n(); ++y)
            if (ref.label(x) != ref.label(y)) edges.push_back({x, y, 1.0});
    return SparseGraph::from_edges(ref.n(), edges);
}

/// Clique with w(x, y) = d(x) d(y); pairs with a zero-degree endpoint carry
/// no edge.
inline SparseGraph degree_weighted_clique(const SparseGraph& g) {
    std::vector<WeightedEdge> edges;
    for (Index x = 0; x < g.n(); ++x)
        for (Index y = x + 1; y < g.n(); ++y)
            if (g.degree(x) > 0.0 && g.degree(y) > 0.0) edges.push_back({x, y, g.degree(x) * g.degree(y)});
    return SparseGraph::from_edges(g.n(), edges);
}

/// Unweighted clique over the given vertices of an n-vertex graph.
inline SparseGraph unit_clique(std::size_t n, std::span<const Index> vertices) {
    std::vector<WeightedEdge> edges;
    for (std::size_t a = 0; a < vertices.size(); ++a)
        for (std::size_t b = a + 1; b < vertices.size(); ++b) edges.push_back({vertices[a], vertices[b], 1.0});
    return SparseGraph::from_edges(n, edges);
}

inline SparseGraph unit_clique(std::size_t n) {
    std::vector<Index> all(n);
    for (Index i = 0; i < n; ++i) all[i] = i;
    return unit_clique(n, all);
}

inline SparseGraph single_edge(std::size_t n, Index s, Index t) {
    WeightedEdge e{s, t, 1.0};
    return SparseGraph::from_edges(n, std::span<const WeightedEdge>(&e, 1));
}

/// Same vertex set, only the edges with both endpoints in `keep`.
inline SparseGraph induced_subgraph(const SparseGraph& g, std::span<const Index> keep) {
    auto in = detail::membership(g.n(), keep);
    std::vector<WeightedEdge> edges;
    for (const auto& e : g.edges())
        if (in[e.u] && in[e.v]) edges.push_back(e);
    return SparseGraph::from_edges(g.n(), edges);
}

// ----------------------------------------------------- non-uniform sparsity

struct NonUniformInstance {
    GraphHandle g;
    GraphHandle h;
};

/// (e_G(S) / vol_G(X)) / (e_H(S) / vol_H(X)); +inf when e_H(S) = 0. A graph
/// without edges contributes a zero numerator.
inline double nonuniform_sparsity(const NonUniformInstance& inst, std::span<const Index> s) {
    if (node_count(inst.g) != node_count(inst.h)) throw std::invalid_argument("graphs differ in vertex count");
    auto mg = cut_measures(inst.g, s);
    auto mh = cut_measures(inst.h, s);
    if (!(mh.e > 0.0)) return kInfinity;
    double vol_g = mg.vol_s + mg.vol_rest, vol_h = mh.vol_s + mh.vol_rest;
    double top = vol_g > 0.0 ? mg.e / vol_g : 0.0;
    return top / (mh.e / vol_h);
}

// ------------------------------------------------------------ bound reports

struct CutValue {
    bool found = false;
    CoordinateCut cut;
    double value = kInfinity;
};

struct BoundReport {
    bool degenerate = false;
    double e_adj = 0.0;
    double e_all = 0.0;
    double ratio = 0.0;
    double bound_paper = 0.0;  // sqrt(ratio)
    double bound_safe = 0.0;   // sqrt(2 ratio)
    CutValue best_theta;
    CutValue best_Psi;
    bool holds_paper_theta = true;
    bool holds_paper_Psi = true;
    bool holds_safe_theta = true;
    // Corollary extras.
    double cost = 0.0;
    double fact_max_rel_error = 0.0;
    bool fact_holds = true;
};

inline constexpr double kBoundSlack = 1e-9;

namespace detail {

/// Exhaustive minima of theta and Psi over every valid coordinate cut of X,
/// ties to the smallest (j, tau).
template <class Graph>
void best_coordinate_cuts(const Dataset& ds, const Graph& g, CutValue& theta, CutValue& psi) {
    std::vector<Index> all(ds.n());
    for (Index i = 0; i < ds.n(); ++i) all[i] = i;
    auto state = make_sweep(g);
    for (std::size_t j = 0; j < ds.d(); ++j) {
        auto order = coordinate_order(ds, all, j);
        state.reset(all);
        std::size_t begin = 0;
        for (std::size_t grp = 0; grp + 1 < order.group_end.size(); ++grp) {
            std::size_t end = order.group_end[grp];
            state.advance(std::span<const Index>(order.points.data() + begin, end - begin));
            begin = end;
            auto m = state.prefix_measures();
            CoordinateCut cut{j, split_threshold(ds(order.points[end - 1], j), ds(order.points[end], j))};
            if (m.theta < theta.value) theta = {true, cut, m.theta};
            if (m.Psi < psi.value) psi = {true, cut, m.Psi};
        }
    }
}

inline void finish_bounds(BoundReport& r) {
    r.bound_paper = std::sqrt(r.ratio);
    r.bound_safe = std::sqrt(2.0 * r.ratio);
    r.holds_paper_theta = r.best_theta.value <= r.bound_paper + kBoundSlack;
    r.holds_paper_Psi = r.best_Psi.value <= r.bound_paper + kBoundSlack;
    r.holds_safe_theta = r.best_theta.value <= r.bound_safe + kBoundSlack;
}

}  // namespace detail

/// Expectation-ratio bound on an explicit graph. E_adj averages squared
/// distances over edges (unordered, weight / total weight); E_all over
/// ordered pairs drawn independently by degree.
inline BoundReport theorem1_report(const Dataset& ds, const SparseGraph& g) {
    if (g.n() != ds.n()) throw std::invalid_argument("graph and dataset differ in size");
    if (g.edge_count() == 0) throw std::invalid_argument("graph has no edges");
    BoundReport r;
    const double delta = g.total_volume() / 2.0;
    for (const auto& e : g.edges()) r.e_adj += e.weight / delta * squared_l2(ds.row(e.u), ds.row(e.v));

    // sum_{x,y} d(x) d(y) ||x - y||^2 = 2 D sum_x d(x) ||x - m||^2 with the
    // degree-weighted mean m and D = 2 delta.
    std::vector<double> mean(ds.d(), 0.0);
    for (Index x = 0; x < ds.n(); ++x)
        for (std::size_t j = 0; j < ds.d(); ++j) mean[j] += g.degree(x) * ds(x, j);
    for (double& m : mean) m /= 2.0 * delta;
    for (Index x = 0; x < ds.n(); ++x) r.e_all += g.degree(x) * squared_l2(ds.row(x), mean) / delta;

    // Degenerate when all positive-degree points coincide.
    std::optional<Index> first;
    r.degenerate = true;
    for (Index x = 0; x < ds.n() && r.degenerate; ++x) {
        if (!(g.degree(x) > 0.0)) continue;
        if (!first)
            first = x;
        else if (!std::equal(ds.row(x).begin(), ds.row(x).end(), ds.row(*first).begin()))
            r.degenerate = false;
    }
    if (r.degenerate) return r;

    r.ratio = r.e_adj / r.e_all;
    detail::best_coordinate_cuts(ds, g, r.best_theta, r.best_Psi);
    detail::finish_bounds(r);
    return r;
}

/// Cost-based bound on the clique graph whose edges inside cluster i weigh
/// 1 / (|C_i| - 1). ratio = 2 cost / ((1/|X|) sum over unordered pairs of
/// squared distances); the machine-checked form is theta <= sqrt(2) bound.
inline BoundReport corollary_report(const Dataset& ds, const ReferenceClustering& ref) {
    require_matching(ds, ref);
    auto sizes = ref.sizes();
    if (std::all_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s < 2; }))
        throw DataError("every cluster is a singleton");
    BoundReport r;
    CliqueClusterGraph g(ref, CliqueWeight::corollary);
    auto means = cluster_means(ds, ref.labels(), ref.k());
    const std::size_t d = ds.d();
    for (Index x = 0; x < ds.n(); ++x)
        r.cost += squared_l2(ds.row(x), {means.data() + static_cast<std::size_t>(ref.label(x)) * d, d});

    // Per-cluster mean identity, with the pair sum evaluated directly.
    std::vector<std::vector<Index>> members(static_cast<std::size_t>(ref.k()));
    for (Index x = 0; x < ds.n(); ++x) members[static_cast<std::size_t>(ref.label(x))].push_back(x);
    for (std::size_t c = 0; c < members.size(); ++c) {
        double lhs = 0.0, pair_sum = 0.0;
        for (Index x : members[c]) lhs += squared_l2(ds.row(x), {means.data() + c * d, d});
        for (std::size_t a = 0; a < members[c].size(); ++a)
            for (std::size_t b = a + 1; b < members[c].size(); ++b)
                pair_sum += squared_l2(ds.row(members[c][a]), ds.row(members[c][b]));
        double rhs = pair_sum / static_cast<double>(members[c].size());
        double scale = std::max(std::abs(lhs), std::abs(rhs));
        double rel = scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0;
        r.fact_max_rel_error = std::max(r.fact_max_rel_error, rel);
    }
    r.fact_holds = r.fact_max_rel_error <= 1e-9;

    std::vector<double> mean(d, 0.0);
    for (Index x = 0; x < ds.n(); ++x)
        for (std::size_t j = 0; j < d; ++j) mean[j] += ds(x, j) / static_cast<double>(ds.n());
    double spread = 0.0;  // (1/|X|) sum over unordered pairs = sum ||x - mean||^2
    for (Index x = 0; x < ds.n(); ++x) spread += squared_l2(ds.row(x), mean);
    r.e_adj = r.cost;
    r.e_all = spread;
    if (!(spread > 0.0)) {
        r.degenerate = true;
        return r;
    }
    r.ratio = 2.0 * r.cost / spread;
    detail::best_coordinate_cuts(ds, g, r.best_theta, r.best_Psi);
    detail::finish_bounds(r);
    return r;
}

// ------------------------------------------------------------- suite plumbing

struct SuiteCheck {
    std::string name;
    std::size_t passed = 0;
    std::size_t total = 0;
    nlohmann::json witness;  // first failing instance, null when none

    bool ok() const { return passed == total; }
};

struct SuiteReport {
    std::string suite;
    std::vector<SuiteCheck> checks;
    nlohmann::json info = nlohmann::json::object();

    bool ok() const {
        return std::all_of(checks.begin(), checks.end(), [](const SuiteCheck& c) { return c.ok(); });
    }
};

inline nlohmann::json suite_to_json(const SuiteReport& r) {
    nlohmann::json j;
    j["suite"] = r.suite;
    j["pass"] = r.ok();
    j["info"] = r.info;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : r.checks)
        j["checks"].push_back(
            {{"name", c.name}, {"passed", c.passed}, {"total", c.total}, {"pass", c.ok()}, {"witness", c.witness}});
    return j;
}

namespace detail {

inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    return std::mt19937_64(seq);
}

inline std::size_t uniform_size(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Uniform points in [0,1]^d; with `grid` the coordinates snap to eighths so
/// ties occur.
inline Dataset random_points(std::mt19937_64& rng, std::size_t n, std::size_t d, bool grid) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n * d);
    for (double& x : v) x = grid ? std::floor(u(rng) * 8.0) / 8.0 : u(rng);
    return Dataset(n, d, std::move(v));
}

/// Random labels using every id in [0, k).
inline std::vector<int> random_labels(std::mt19937_64& rng, std::size_t n, int k) {
    std::vector<int> labels(n);
    std::uniform_int_distribution<int> pick(0, k - 1);
    for (std::size_t i = 0; i < n; ++i) labels[i] = i < static_cast<std::size_t>(k) ? static_cast<int>(i) : pick(rng);
    std::shuffle(labels.begin(), labels.end(), rng);
    return labels;
}

inline nlohmann::json dataset_json(const Dataset& ds) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < ds.n(); ++i) rows.push_back(std::vector<double>(ds.row(i).begin(), ds.row(i).end()));
    return rows;
}

inline nlohmann::json graph_json(const SparseGraph& g) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : g.edges()) edges.push_back({e.u, e.v, e.weight});
    return edges;
}

inline bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

/// Per-trial outcome of a suite: one pass flag and optional witness per check.
struct TrialResult {
    std::vector<std::uint8_t> pass;
    std::vector<nlohmann::json> witness;
    nlohmann::json info;
};

inline SuiteReport merge_trials(std::string suite, const std::vector<std::string>& names,
                                const std::vector<TrialResult>& trials) {
    SuiteReport r;
    r.suite = std::move(suite);
    for (std::size_t c = 0; c < names.size(); ++c) {
        SuiteCheck check;
        check.name = names[c];
        for (std::size_t t = 0; t < trials.size(); ++t) {
            ++check.total;
            if (trials[t].pass[c])
                ++check.passed;
            else if (check.witness.is_null())
                check.witness = {{"trial", t}, {"instance", trials[t].witness[c]}};
        }
        r.checks.push_back(std::move(check));
    }
    return r;
}

}  // namespace detail

// ------------------------------------------------------------------ suites

/// Random sparse graphs on uniform points (n <= 40, d <= 6). Asserts the
/// constant-safe theta bound; the paper-form rates are informational.
inline SuiteReport theorem1_suite(std::uint64_t seed, std::size_t trials) {
    std::vector<detail::TrialResult> out(trials);
    parallel_for(trials, [&](std::size_t t) {
        auto rng = detail::trial_rng(seed, t);
        std::size_t n = detail::uniform_size(rng, 2, 40), d = detail::uniform_size(rng, 1, 6);
        Dataset ds = detail::random_points(rng, n, d, t % 4 == 3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double p = 0.05 + 0.25 * u(rng);
        std::vector<WeightedEdge> edges;
        for (Index x = 0; x < n; ++x)
            for (Index y = x + 1; y < n; ++y)
                if (u(rng) < p) edges.push_back({x, y, 1.0 - u(rng)});  // weight in (0, 1]
        if (edges.empty()) edges.push_back({0, 1, 1.0});
        SparseGraph g = SparseGraph::from_edges(n, edges);
        BoundReport r = theorem1_report(ds, g);
        auto& res = out[t];
        res.pass = {static_cast<std::uint8_t>(r.degenerate || r.holds_safe_theta)};
        res.witness = {nlohmann::json{{"points", detail::dataset_json(ds)},
                                      {"edges", detail::graph_json(g)},
                                      {"ratio", r.ratio},
                                      {"theta_min", r.best_theta.value}}};
        res.info = {{"degenerate", r.degenerate},
                    {"paper_theta", r.holds_paper_theta},
                    {"paper_Psi", r.holds_paper_Psi}};
    });
    auto report = detail::merge_trials("theorem1", {"theta_min <= sqrt(2 ratio)"}, out);
    std::size_t live = 0, theta_ok = 0, psi_ok = 0;
    for (const auto& r : out) {
        if (r.info["degenerate"].get<bool>()) continue;
        ++live;
        theta_ok += r.info["paper_theta"].get<bool>() ? 1 : 0;
        psi_ok += r.info["paper_Psi"].get<bool>() ? 1 : 0;
    }
    report.info = {{"instances", live}, {"paper_form_theta_rate", live ? double(theta_ok) / double(live) : 1.0},
                   {"paper_form_Psi_rate", live ? double(psi_ok) / double(live) : 1.0}};
    return report;
}

/// Gaussian mixtures (k <= 4, n <= 80) labelled by their generating component.
inline SuiteReport corollary_suite(std::uint64_t seed, std::size_t trials) {
    std::vector<detail::TrialResult> out(trials);
    parallel_for(trials, [&](std::size_t t) {
        auto rng = detail::trial_rng(seed, t);
        int k = static_cast<int>(detail::uniform_size(rng, 1, 4));
        std::size_t n = detail::uniform_size(rng, 2 * static_cast<std::size_t>(k), 80);
        std::size_t d = detail::uniform_size(rng, 1, 4);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> u(-5.0, 5.0);
        std::vector<double> centers(static_cast<std::size_t>(k) * d);
        for (double& c : centers) c = u(rng);
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % static_cast<std::size_t>(k));
        std::vector<double> v(n * d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j)
                v[i * d + j] = centers[static_cast<std::size_t>(labels[i]) * d + j] + gauss(rng);
        Dataset ds(n, d, std::move(v));
        ReferenceClustering ref(labels, k);
        BoundReport r = corollary_report(ds, ref);
        auto& res = out[t];
        bool theta_ok = r.degenerate || r.best_theta.value <= std::sqrt(2.0) * r.bound_paper + kBoundSlack;
        nlohmann::json inst{{"points", detail::dataset_json(ds)}, {"labels", labels}, {"ratio", r.ratio},
                            {"theta_min", r.best_theta.value}, {"fact_error", r.fact_max_rel_error}};
        res.pass = {static_cast<std::uint8_t>(theta_ok), static_cast<std::uint8_t>(r.fact_holds)};
        res.witness = {inst, inst};
        res.info = {{"paper_theta", r.degenerate || r.holds_paper_theta}};
    });
    auto report = detail::merge_trials("corollary", {"theta_min <= sqrt(2) bound", "mean identity"}, out);
    std::size_t ok = 0;
    for (const auto& r : out) ok += r.info["paper_theta"].get<bool>() ? 1 : 0;
    report.info = {{"paper_form_theta_rate", trials ? double(ok) / double(trials) : 1.0}};
    return report;
}

/// The four graph-lens identities on random small instances (n <= 30,
/// d <= 4, k <= 5): (a) IMM argmin = non-uniform argmin with the star graph
/// and the diametrical edge, (b) the EMN factor-2 sandwich, (c) the CART
/// conductance identity in the IS graph, (d) gini = 2 alpha / |S|^2. With
/// k = 1 the IS graph is empty and (c), (d) hold vacuously.
inline SuiteReport equivalence_suite(std::uint64_t seed, std::size_t trials) {
    std::vector<detail::TrialResult> out(trials);
    parallel_for(trials, [&](std::size_t t) {
        auto rng = detail::trial_rng(seed, t);
        std::size_t n = detail::uniform_size(rng, 4, 30), d = detail::uniform_size(rng, 1, 4);
        int k = static_cast<int>(detail::uniform_size(rng, 1, std::min<std::size_t>(5, n)));
        Dataset ds = detail::random_points(rng, n, d, t % 2 == 1);
        auto labels = detail::random_labels(rng, n, k);
        ReferenceClustering ref(labels, k);
        ref = ref.with_centroids(cluster_means(ds, labels, k), d);
        Dataset aug = augment_with_centroids(ds, ref);
        std::vector<Index> everyone(n);
        for (Index i = 0; i < n; ++i) everyone[i] = i;
        nlohmann::json inst{{"points", detail::dataset_json(ds)}, {"labels", labels}};

        // A random node: a subset of points and of centroids.
        std::bernoulli_distribution keep(0.75);
        std::vector<Index> node;
        std::vector<int> cids;
        for (Index i = 0; i < n; ++i)
            if (keep(rng)) node.push_back(i);
        for (int c = 0; c < k; ++c)
            if (keep(rng) || c < 2) {
                node.push_back(n + static_cast<Index>(c));
                cids.push_back(c);
            }
        inst["node"] = node;

        bool a_ok = true, b_ok = true, c_ok = true, d_ok = true;
        if (k >= 2) {
            SparseGraph star = induced_subgraph(star_graph(ref), node);
            auto pair = diametrical_pair(ref, cids, Norm::l2);
            SparseGraph edge = single_edge(n + static_cast<std::size_t>(k), n + static_cast<Index>(pair.first),
                                           n + static_cast<Index>(pair.second));
            NonUniformInstance nu{star, edge};
            std::optional<ScoredCut> oracle;
            for (std::size_t j = 0; j < d; ++j)
                for (double tau : thresholds(aug, node, j)) {
                    std::vector<Index> s;
                    for (Index x : node)
                        if (aug(x, j) <= tau) s.push_back(x);
                    double v = nonuniform_sparsity(nu, s);
                    if (v < kInfinity && (!oracle || v < oracle->score)) oracle = ScoredCut{{j, tau}, v, s.size()};
                }
            auto chosen = best_cut(ImmScorer(ref.labels(), k, pair), aug, node);
            a_ok = oracle.has_value() == chosen.has_value() && (!oracle || oracle->cut == chosen->cut);

            std::vector<Index> centroid_vertices;
            for (int c : cids) centroid_vertices.push_back(n + static_cast<Index>(c));
            SparseGraph clique = unit_clique(n + static_cast<std::size_t>(k), centroid_vertices);
            auto m = static_cast<double>(cids.size());
            for (std::size_t j = 0; j < d; ++j)
                for (double tau : thresholds(aug, node, j)) {
                    std::vector<Index> s;
                    std::size_t in_s = 0;
                    for (Index x : node)
                        if (aug(x, j) <= tau) {
                            s.push_back(x);
                            in_s += x >= n ? 1 : 0;
                        }
                    double f = static_cast<double>(std::min(in_s, cids.size() - in_s));
                    if (f < 1.0) continue;
                    double ratio = cut_measures(clique, s).e / m;
                    if (!(0.5 * f <= ratio && ratio <= f)) b_ok = false;
                }

            SparseGraph is = independent_set_graph(ref);
            const double vol_h = is.total_volume();
            for (std::size_t j = 0; j < d; ++j)
                for (double tau : thresholds(ds, everyone, j)) {
                    std::vector<Index> s, rest;
                    for (Index x : everyone) (ds(x, j) <= tau ? s : rest).push_back(x);
                    auto imp = impurity(ref, s, rest);
                    double psi_h = cut_measures(is, s).Psi;
                    if (!detail::close_rel(psi_h, 2.0 - vol_h / 2.0 * imp.modified_cut_impurity, 1e-12))
                        c_ok = false;
                    for (const auto* part : {&s, &rest}) {
                        auto in = detail::membership(n, *part);
                        double alpha = 0.0;
                        for (const auto& e : is.edges())
                            if (in[e.u] && in[e.v]) alpha += e.weight;
                        auto sz = static_cast<double>(part->size());
                        double gini = impurity(ref, *part, {}).gini;
                        if (!detail::close_rel(gini, 2.0 * alpha / (sz * sz), 1e-12)) d_ok = false;
                    }
                }
        }
        out[t].pass = {a_ok, b_ok, c_ok, d_ok};
        out[t].witness = {inst, inst, inst, inst};
    });
    return detail::merge_trials("equivalence",
                                {"imm argmin = non-uniform argmin", "emn sandwich", "cart conductance identity",
                                 "gini = 2 alpha / |S|^2"},
                                out);
}

// ------------------------------------------------------------- price check

struct PriceReport {
    double tree_cost = 0.0;
    double ref_cost = 0.0;
    double ratio = 1.0;
    std::size_t height = 0;
    int k = 0;
    double lemma_rhs = 0.0;  // cost_1(C) + sum_u t_u ||mu' - mu''||_1
    std::vector<double> level_sums;
    bool holds_ratio = true;   // ratio <= 1 + height <= 1 + k
    bool holds_lemma = true;   // tree cost <= lemma_rhs
    bool holds_levels = true;  // every level sum <= cost_1(C)
};

/// k-medians price of explainability for the modified IMM tree with l1
/// diametrical pairs. Reference centroids are recomputed as medians.
inline PriceReport price_check(const Dataset& ds, const ReferenceClustering& ref) {
    require_matching(ds, ref);
    const int k = ref.k();
    ReferenceClustering med = ref.with_centroids(cluster_medians(ds, ref.labels(), k), ds.d());
    PriceReport r;
    r.k = k;
    r.ref_cost = kmedians_cost(ds, ref.labels(), k);
    auto fit = imm_fit(ds, med, Norm::l1);
    r.height = fit.tree.height();

    for (const auto& pts : fit.leaf_points) {
        if (pts.empty()) continue;
        std::vector<int> zeros(pts.size(), 0);
        std::vector<double> v;
        for (Index x : pts) v.insert(v.end(), ds.row(x).begin(), ds.row(x).end());
        r.tree_cost += kmedians_cost(Dataset(pts.size(), ds.d(), std::move(v)), zeros, 1);
    }

    r.level_sums.assign(r.height, 0.0);
    for (const auto& s : fit.splits)
        r.level_sums[s.depth] += static_cast<double>(s.mistakes) * s.pair_l1;
    r.lemma_rhs = r.ref_cost;
    for (double v : r.level_sums) r.lemma_rhs += v;

    const double tol = 1e-9 * std::max(1.0, r.ref_cost);
    if (r.ref_cost > 0.0)
        r.ratio = r.tree_cost / r.ref_cost;
    else
        r.ratio = r.tree_cost > tol ? kInfinity : 1.0;
    r.holds_ratio = r.tree_cost <= (1.0 + static_cast<double>(r.height)) * r.ref_cost + tol &&
                    r.height <= static_cast<std::size_t>(k);
    r.holds_lemma = r.tree_cost <= r.lemma_rhs + tol;
    for (double v : r.level_sums)
        if (v > r.ref_cost + tol) r.holds_levels = false;
    return r;
}

/// Random k-medians instances (k <= 6, n <= 200, d <= 5): gaussian blobs
/// labelled by their generating component.
inline SuiteReport price_suite(std::uint64_t seed, std::size_t trials) {
    std::vector<detail::TrialResult> out(trials);
    std::vector<double> ratios(trials, 1.0);
    parallel_for(trials, [&](std::size_t t) {
        auto rng = detail::trial_rng(seed, t);
        int k = static_cast<int>(detail::uniform_size(rng, 1, 6));
        std::size_t n = detail::uniform_size(rng, static_cast<std::size_t>(k) * 2, 200);
        std::size_t d = detail::uniform_size(rng, 1, 5);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> u(-6.0, 6.0);
        std::vector<double> centers(static_cast<std::size_t>(k) * d);
        for (double& c : centers) c = u(rng);
        auto labels = detail::random_labels(rng, n, k);
        std::vector<double> v(n * d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j)
                v[i * d + j] = centers[static_cast<std::size_t>(labels[i]) * d + j] + gauss(rng);
        Dataset ds(n, d, std::move(v));
        PriceReport r = price_check(ds, ReferenceClustering(labels, k));
        ratios[t] = r.ratio;
        nlohmann::json inst{{"points", detail::dataset_json(ds)}, {"labels", labels}, {"tree_cost", r.tree_cost},
                            {"ref_cost", r.ref_cost}, {"height", r.height}};
        out[t].pass = {r.holds_ratio, r.holds_lemma, r.holds_levels};
        out[t].witness = {inst, inst, inst};
    });
    auto report = detail::merge_trials(
        "price", {"cost ratio <= 1 + height <= 1 + k", "tree cost <= cost + sum t_u diam", "per-level sum <= cost"},
        out);
    report.info = {{"max_ratio", ratios.empty() ? 1.0 : *std::max_element(ratios.begin(), ratios.end())}};
    return report;
}

}  // namespace spex
