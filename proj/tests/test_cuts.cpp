#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spex/algorithms.hpp"
#include "spex/cuts.hpp"

using namespace spex;

namespace {

/// Scores the number of prefix points; used to probe the sweep driver.
struct PrefixSizeScorer {
    std::size_t size = 0, total = 0;
    void reset(std::span<const Index> pts) {
        size = 0;
        total = pts.size();
    }
    void advance(std::span<const Index> g) { size += g.size(); }
    double current_score() const { return std::abs(static_cast<double>(size) - static_cast<double>(total) / 2.0); }
};

struct ConstantScorer {
    void reset(std::span<const Index>) {}
    void advance(std::span<const Index>) {}
    double current_score() const { return 1.0; }
};

struct NeverScorer {
    void reset(std::span<const Index>) {}
    void advance(std::span<const Index>) {}
    double current_score() const { return kInfinityScore(); }
};

std::vector<Index> iota_points(std::size_t n) {
    std::vector<Index> v(n);
    for (Index i = 0; i < n; ++i) v[i] = i;
    return v;
}

}  // namespace

TEST(Cuts, GoesLeftIsInclusive) {
    CoordinateCut c{1, 2.0};
    std::vector<double> a{9.0, 2.0}, b{9.0, 2.0000001};
    EXPECT_TRUE(c.goes_left(a));
    EXPECT_FALSE(c.goes_left(b));
}

TEST(Cuts, ThresholdsAreMidpoints) {
    Dataset ds(5, 1, {3.0, 1.0, 3.0, 0.0, 7.0});
    auto t = thresholds(ds, iota_points(5), 0);
    EXPECT_EQ(t, (std::vector<double>{0.5, 2.0, 5.0}));
}

TEST(Cuts, ThresholdBetweenAdjacentDoubles) {
    double lo = 1.0, hi = std::nextafter(1.0, 2.0);
    double tau = split_threshold(lo, hi);
    EXPECT_LE(lo, tau);
    EXPECT_LT(tau, hi);
    double big = 1e308;
    EXPECT_TRUE(std::isfinite(split_threshold(-big, big)));
}

TEST(Cuts, CoordinateOrderGroupsTies) {
    Dataset ds(5, 1, {2.0, 1.0, 2.0, 1.0, 3.0});
    auto o = coordinate_order(ds, iota_points(5), 0);
    EXPECT_EQ(o.points, (std::vector<Index>{1, 3, 0, 2, 4}));
    EXPECT_EQ(o.group_end, (std::vector<std::size_t>{2, 4, 5}));
}

TEST(Cuts, SingleDistinctValueHasNoCut) {
    Dataset ds(3, 2, {1, 1, 1, 1, 1, 1});
    EXPECT_FALSE(best_cut(ConstantScorer{}, ds, iota_points(3)).has_value());
    Dataset one(1, 1, {0.0});
    EXPECT_FALSE(best_cut(ConstantScorer{}, one, iota_points(1)).has_value());
}

TEST(Cuts, InfiniteScoresAreInadmissible) {
    Dataset ds(3, 1, {0, 1, 2});
    EXPECT_FALSE(best_cut(NeverScorer{}, ds, iota_points(3)).has_value());
}

TEST(Cuts, TieBreakSmallestCoordinateThenThreshold) {
    Dataset ds(3, 2, {0, 5, 1, 6, 2, 7});
    auto c = best_cut(ConstantScorer{}, ds, iota_points(3));
    ASSERT_TRUE(c);
    EXPECT_EQ(c->cut.j, 0u);
    EXPECT_EQ(c->cut.tau, 0.5);
    EXPECT_EQ(c->prefix_size, 1u);
}

TEST(Cuts, BalancedPrefix) {
    Dataset ds(6, 1, {5, 4, 3, 2, 1, 0});
    auto c = best_cut(PrefixSizeScorer{}, ds, iota_points(6));
    ASSERT_TRUE(c);
    EXPECT_EQ(c->cut.tau, 2.5);
    EXPECT_EQ(c->score, 0.0);
}

TEST(Cuts, ParallelSearchMatchesSerial) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t n = 4 + rng() % 40;
        auto ds = oracle::random_points(rng, n, 1 + rng() % 6, trial % 2 == 0);
        auto labels = oracle::random_labels(rng, n, 1 + static_cast<int>(rng() % 3));
        int k = *std::max_element(labels.begin(), labels.end()) + 1;
        CliqueClusterGraph g(labels, k);
        auto pts = iota_points(n);
        auto a = best_cut(ConductanceScorer<CliqueClusterGraph>(g), ds, pts, 1);
        auto b = best_cut(ConductanceScorer<CliqueClusterGraph>(g), ds, pts, 4);
        ASSERT_EQ(a.has_value(), b.has_value());
        if (a) {
            EXPECT_EQ(a->cut, b->cut);
            EXPECT_EQ(a->score, b->score);
        }
    }
}

TEST(Cuts, ResultIndependentOfNodeOrder) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 4 + rng() % 30;
        auto ds = oracle::random_points(rng, n, 3, true);
        auto labels = oracle::random_labels(rng, n, 3);
        auto pts = iota_points(n);
        auto a = best_cut(CartScorer(labels, 3), ds, pts);
        std::shuffle(pts.begin(), pts.end(), rng);
        auto b = best_cut(CartScorer(labels, 3), ds, pts);
        ASSERT_EQ(a.has_value(), b.has_value());
        if (a) {
            EXPECT_EQ(a->cut, b->cut);
        }
    }
}
