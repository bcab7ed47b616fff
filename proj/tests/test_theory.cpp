#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spex/theory.hpp"

using namespace spex;

namespace {

SparseGraph random_graph(std::mt19937_64& rng, std::size_t n, double p) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<WeightedEdge> edges;
    for (Index x = 0; x < n; ++x)
        for (Index y = x + 1; y < n; ++y)
            if (u(rng) < p) edges.push_back({x, y, 1.0 - u(rng)});
    if (edges.empty()) edges.push_back({0, 1, 1.0});
    return SparseGraph::from_edges(n, edges);
}

std::vector<Index> random_cut(std::mt19937_64& rng, std::size_t n) {
    std::vector<Index> s;
    for (Index i = 0; i < n; ++i)
        if (rng() % 2) s.push_back(i);
    if (s.empty()) s.push_back(0);
    if (s.size() == n) s.pop_back();
    return s;
}

}  // namespace

TEST(Graphs, StarAndIndependentSet) {
    ReferenceClustering ref({0, 1, 0}, 2);
    auto star = star_graph(ref);
    EXPECT_EQ(star.n(), 5u);
    EXPECT_EQ(star.edge_count(), 3u);
    EXPECT_EQ(star.degree(3), 2.0);
    auto is = independent_set_graph(ref);
    EXPECT_EQ(is.edge_count(), 2u);
    EXPECT_EQ(is.degree(1), 2.0);
}

TEST(Graphs, DegreeWeightedCliqueUsesDegreeProducts) {
    std::vector<WeightedEdge> e{{0, 1, 1}, {1, 2, 2}};
    auto g = SparseGraph::from_edges(3, e);
    auto h = degree_weighted_clique(g);
    EXPECT_EQ(h.edge_count(), 3u);
    EXPECT_DOUBLE_EQ(h.total_volume(), 2.0 * (1 * 3 + 1 * 2 + 3 * 2));
}

TEST(Graphs, InducedSubgraphKeepsOnlyInternalEdges) {
    std::vector<WeightedEdge> e{{0, 1, 1}, {1, 2, 1}, {2, 3, 1}};
    auto g = SparseGraph::from_edges(4, e);
    std::vector<Index> keep{1, 2, 3};
    auto s = induced_subgraph(g, keep);
    EXPECT_EQ(s.n(), 4u);
    EXPECT_EQ(s.edge_count(), 2u);
    EXPECT_EQ(s.degree(0), 0.0);
}

TEST(NonUniform, UnitCliqueRecoversScaledSparsity) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 3 + rng() % 15;
        auto g = random_graph(rng, n, 0.4);
        auto s = random_cut(rng, n);
        auto m = cut_measures(g, s);
        double v = nonuniform_sparsity({g, unit_clique(n)}, s);
        EXPECT_NEAR(v, m.Phi * static_cast<double>(n - 1) / g.total_volume(), 1e-12 * std::max(1.0, v));
    }
}

TEST(NonUniform, DegreeCliqueRecoversScaledConductance) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 3 + rng() % 15;
        auto g = random_graph(rng, n, 0.5);
        auto s = random_cut(rng, n);
        auto m = cut_measures(g, s);
        auto h = degree_weighted_clique(g);
        double v = nonuniform_sparsity({g, h}, s);
        if (std::isinf(v)) {
            EXPECT_TRUE(m.vol_s == 0.0 || m.vol_rest == 0.0);
            continue;
        }
        double vol = g.total_volume();
        EXPECT_NEAR(v, m.Psi * h.total_volume() / (vol * vol), 1e-12 * std::max(1.0, v));
    }
}

TEST(NonUniform, SingleEdgeRecoversMinCut) {
    std::vector<WeightedEdge> e{{0, 1, 1}, {1, 2, 1}, {2, 3, 1}};
    auto g = SparseGraph::from_edges(4, e);
    std::vector<Index> s{0, 1};
    EXPECT_DOUBLE_EQ(nonuniform_sparsity({g, single_edge(4, 0, 3)}, s), 2.0 * 1.0 / 6.0);
    std::vector<Index> both{0, 3};
    EXPECT_EQ(nonuniform_sparsity({g, single_edge(4, 1, 2)}, both), kInfinity);
}

TEST(Theorem1, TwoPointWitness) {
    Dataset ds(2, 1, {0.0, 3.0});
    std::vector<WeightedEdge> e{{0, 1, 1.0}};
    auto r = theorem1_report(ds, SparseGraph::from_edges(2, e));
    EXPECT_FALSE(r.degenerate);
    EXPECT_DOUBLE_EQ(r.ratio, 2.0);
    EXPECT_DOUBLE_EQ(r.best_theta.value, 1.0);
    EXPECT_DOUBLE_EQ(r.best_Psi.value, 2.0);
    EXPECT_TRUE(r.holds_paper_theta);
    EXPECT_FALSE(r.holds_paper_Psi);
    EXPECT_TRUE(r.holds_safe_theta);
    EXPECT_DOUBLE_EQ(r.bound_safe, 2.0);
}

TEST(Theorem1, ExpectationsMatchDirectSums) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t n = 2 + rng() % 20, d = 1 + rng() % 4;
        auto ds = oracle::random_points(rng, n, d, false);
        auto g = random_graph(rng, n, 0.3);
        auto r = theorem1_report(ds, g);
        double delta = g.total_volume() / 2.0, adj = 0.0, all = 0.0;
        for (const auto& ed : g.edges()) adj += ed.weight * squared_l2(ds.row(ed.u), ds.row(ed.v));
        for (Index x = 0; x < n; ++x)
            for (Index y = 0; y < n; ++y) all += g.degree(x) * g.degree(y) * squared_l2(ds.row(x), ds.row(y));
        EXPECT_NEAR(r.e_adj, adj / delta, 1e-10);
        EXPECT_NEAR(r.e_all, all / (4.0 * delta * delta), 1e-9 * std::max(1.0, r.e_all));
    }
}

TEST(Theorem1, DegenerateWhenEdgeEndpointsCoincide) {
    Dataset ds(3, 1, {1.0, 1.0, 5.0});
    std::vector<WeightedEdge> e{{0, 1, 1.0}};
    EXPECT_TRUE(theorem1_report(ds, SparseGraph::from_edges(3, e)).degenerate);
    std::vector<WeightedEdge> none;
    EXPECT_THROW(theorem1_report(ds, SparseGraph::from_edges(3, none)), std::invalid_argument);
}

TEST(Theorem1, SuitePasses) {
    auto r = theorem1_suite(0, 60);
    EXPECT_TRUE(r.ok());
}

TEST(Corollary, TwoClustersOnALine) {
    Dataset ds(4, 1, {0, 1, 10, 11});
    ReferenceClustering ref({0, 0, 1, 1}, 2);
    auto r = corollary_report(ds, ref);
    EXPECT_DOUBLE_EQ(r.cost, 1.0);
    EXPECT_TRUE(r.fact_holds);
    EXPECT_EQ(r.best_theta.value, 0.0);
    EXPECT_NEAR(r.ratio, 2.0 / 101.0, 1e-15);
}

TEST(Corollary, AllSingletonsRejected) {
    Dataset ds(2, 1, {0, 1});
    EXPECT_THROW(corollary_report(ds, ReferenceClustering({0, 1}, 2)), DataError);
}

TEST(Corollary, SuitePasses) { EXPECT_TRUE(corollary_suite(0, 40).ok()); }

TEST(Equivalence, SuitePasses) {
    auto r = equivalence_suite(0, 60);
    for (const auto& c : r.checks) EXPECT_EQ(c.passed, c.total) << c.name;
}

TEST(Price, SeparatedClustersCostNothingExtra) {
    Dataset ds(6, 1, {0, 1, 2, 10, 11, 12});
    auto r = price_check(ds, ReferenceClustering({0, 0, 0, 1, 1, 1}, 2));
    EXPECT_DOUBLE_EQ(r.ref_cost, 4.0);
    EXPECT_DOUBLE_EQ(r.tree_cost, 4.0);
    EXPECT_DOUBLE_EQ(r.ratio, 1.0);
    EXPECT_EQ(r.height, 1u);
    EXPECT_TRUE(r.holds_ratio && r.holds_lemma && r.holds_levels);
}

TEST(Price, SuitePasses) {
    auto r = price_suite(0, 30);
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(price_suite(0, 0).info["max_ratio"].get<double>(), 1.0);
}

TEST(Suites, Deterministic) {
    EXPECT_EQ(suite_to_json(equivalence_suite(5, 10)).dump(), suite_to_json(equivalence_suite(5, 10)).dump());
}
