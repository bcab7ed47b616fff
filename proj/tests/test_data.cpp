#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "spex/dataset.hpp"
#include "spex/kmeans.hpp"
#include "spex/synth.hpp"

using namespace spex;

TEST(Ingest, ParsesHeaderAndRows) {
    std::istringstream in("x,y\n1.5,2\n-3, 4e1\n");
    Dataset ds = parse_points_csv(in, true);
    EXPECT_EQ(ds.n(), 2u);
    EXPECT_EQ(ds.d(), 2u);
    EXPECT_DOUBLE_EQ(ds(1, 1), 40.0);
}

TEST(Ingest, RowLengthMismatch) {
    std::istringstream in("1,2\n3\n");
    EXPECT_THROW(parse_points_csv(in), DataError);
}

TEST(Ingest, NonNumericCellNamesLine) {
    std::istringstream in("1,2\n3,abc\n");
    try {
        parse_points_csv(in);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(Ingest, EmptyFile) {
    std::istringstream in("");
    EXPECT_THROW(parse_points_csv(in), DataError);
    std::istringstream labels("\n");
    EXPECT_THROW(parse_labels(labels), DataError);
}

TEST(Ingest, LabelsRelabeledContiguously) {
    std::istringstream in("7\n-2\n7\n100\n");
    auto ref = ReferenceClustering::relabeled(parse_labels(in));
    EXPECT_EQ(ref.k(), 3);
    EXPECT_EQ(ref.labels(), (std::vector<int>{1, 0, 1, 2}));
}

TEST(Ingest, LabelValidation) {
    EXPECT_THROW(ReferenceClustering({0, 2}, 3), DataError);  // label 1 unused
    EXPECT_THROW(ReferenceClustering({0, 3}, 3), DataError);
    EXPECT_THROW(ReferenceClustering({0, 1}, 2, {0.0}, 1), DataError);
}

TEST(Ingest, CsvRoundTripIsExact) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    std::vector<double> v(60);
    for (double& x : v) x = u(rng) / 3.0;
    v[0] = 0.1;
    v[1] = 5e-324;
    v[2] = -0.0;
    Dataset ds(20, 3, v);
    std::stringstream io;
    write_points_csv(io, ds);
    Dataset back = parse_points_csv(io);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(std::bit_cast<std::uint64_t>(back.values()[i]), std::bit_cast<std::uint64_t>(v[i]));
}

TEST(Ingest, NonFiniteRejected) {
    EXPECT_THROW(Dataset(1, 1, {std::numeric_limits<double>::quiet_NaN()}), DataError);
    std::istringstream in("1,inf\n");
    EXPECT_THROW(parse_points_csv(in), DataError);
}

TEST(Costs, KmeansTwoPoints) {
    Dataset ds(2, 1, {0.0, 2.0});
    ReferenceClustering ref({0, 0}, 1, {1.0}, 1);
    EXPECT_DOUBLE_EQ(kmeans_cost(ds, ref), 2.0);
}

TEST(Costs, KmediansThreePoints) {
    Dataset ds(3, 1, {0.0, 2.0, 10.0});
    ReferenceClustering ref({0, 0, 0}, 1, {99.0}, 1);  // stored centroid ignored
    auto c = costs(ds, ref);
    EXPECT_DOUBLE_EQ(c.kmedians_l1_cost, 10.0);
}

TEST(Costs, ZeroWhenPointsSitOnCentroids) {
    Dataset ds(2, 2, {1.0, 1.0, 5.0, 5.0});
    ReferenceClustering ref({0, 1}, 2, {1.0, 1.0, 5.0, 5.0}, 2);
    auto c = costs(ds, ref);
    EXPECT_EQ(c.kmeans_cost, 0.0);
    EXPECT_EQ(c.kmedians_l1_cost, 0.0);
}

TEST(Costs, LowerMedianOnEvenCount) { EXPECT_EQ(lower_median({4.0, 1.0, 3.0, 2.0}), 2.0); }

TEST(Costs, KmeansNeedsCentroids) {
    Dataset ds(2, 1, {0.0, 2.0});
    EXPECT_THROW(kmeans_cost(ds, ReferenceClustering({0, 0}, 1)), DataError);
}

TEST(Costs, LabelCountMismatch) {
    Dataset ds(2, 1, {0.0, 2.0});
    EXPECT_THROW(kmeans_cost(ds, ReferenceClustering({0, 0, 0}, 1, {1.0}, 1)), DataError);
}

TEST(Standardize, ZeroMeanUnitVariance) {
    Dataset ds(4, 2, {1, 5, 2, 5, 3, 5, 4, 5});
    Dataset z = standardize(ds);
    double mean = 0, var = 0;
    for (Index i = 0; i < 4; ++i) mean += z(i, 0);
    for (Index i = 0; i < 4; ++i) var += z(i, 0) * z(i, 0);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var / 4.0, 1.0, 1e-12);
    EXPECT_EQ(z(0, 1), 0.0);  // constant column centered only
}

TEST(KMeans, TwoSeparatedBlobs) {
    Dataset ds(6, 1, {0.0, 0.1, 0.2, 10.0, 10.1, 10.2});
    auto ref = kmeans_fit(ds, 2, 3, 0);
    EXPECT_EQ(ref.labels()[0], ref.labels()[1]);
    EXPECT_EQ(ref.labels()[0], ref.labels()[2]);
    EXPECT_NE(ref.labels()[0], ref.labels()[3]);
    EXPECT_NEAR(kmeans_cost(ds, ref), 0.04, 1e-12);
}

TEST(KMeans, KEqualsNGivesZeroCost) {
    Dataset ds(4, 1, {0.0, 1.0, 5.0, 9.0});
    EXPECT_DOUBLE_EQ(kmeans_cost(ds, kmeans_fit(ds, 4, 2, 1)), 0.0);
}

TEST(KMeans, Errors) {
    Dataset ds(3, 1, {0.0, 1.0, 2.0});
    EXPECT_THROW(kmeans_fit(ds, 0), DataError);
    EXPECT_THROW(kmeans_fit(ds, 4), DataError);
    EXPECT_THROW(kmeans_fit(ds, 2, 0), DataError);
}

TEST(KMeans, CostNonIncreasingAndDeterministic) {
    auto s = three_gaussians(300, 1.0, 7);
    for (std::uint64_t r = 0; r < 5; ++r) {
        auto run = kmeans_single(s.points, 3, 0, r, 300);
        for (std::size_t t = 1; t < run.cost_trace.size(); ++t)
            EXPECT_LE(run.cost_trace[t], run.cost_trace[t - 1] * (1 + 1e-12));
    }
    auto a = kmeans_fit(s.points, 3, 10, 0);
    auto b = kmeans_fit(s.points, 3, 10, 0);
    EXPECT_EQ(a.labels(), b.labels());
}

TEST(Synth, TwoMoonsNoiseFreeArcs) {
    auto s = two_moons(400, 0.0, 0);
    ASSERT_EQ(s.points.n(), 400u);
    std::size_t outer = 0;
    for (Index i = 0; i < 400; ++i) {
        if (s.labels[i] == 0) {
            ++outer;
            EXPECT_NEAR(std::hypot(s.points(i, 0), s.points(i, 1)), 1.0, 1e-12);
        } else {
            EXPECT_NEAR(std::hypot(s.points(i, 0) - 1.0, s.points(i, 1) - 0.5), 1.0, 1e-12);
        }
    }
    EXPECT_EQ(outer, 200u);
}

TEST(Synth, ThreeGaussiansDeterministic) {
    auto a = three_gaussians(300, 1.0, 7);
    auto b = three_gaussians(300, 1.0, 7);
    EXPECT_EQ(a.points, b.points);
    EXPECT_EQ(a.labels, b.labels);
}

TEST(Synth, CartTrapSelfCheckHoldsAcrossSeeds) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) EXPECT_NO_THROW(cart_trap(300, seed));
    for (std::size_t n : {10u, 57u, 1000u}) EXPECT_NO_THROW(cart_trap(n, 1));
}

TEST(Synth, CartTrapZeroErrorHorizontalRoot) {
    auto s = cart_trap(300, 1);
    std::vector<Index> all(300);
    for (Index i = 0; i < 300; ++i) all[i] = i;
    bool found = false;
    for (double tau : thresholds(s.points, all, 1))
        if (detail::cut_errors(s.points, s.labels, 3, all, 1, tau) == 0) found = true;
    EXPECT_TRUE(found);
    for (double tau : thresholds(s.points, all, 0))
        EXPECT_GE(detail::cut_errors(s.points, s.labels, 3, all, 0, tau), 1u);
}

TEST(Synth, Errors) {
    EXPECT_THROW(synth("spiral", 100, 0.1, 0), DataError);
    EXPECT_THROW(synth("two_moons", 5, 0.1, 0), DataError);
    EXPECT_THROW(synth("two_moons", 50, -1.0, 0), DataError);
}

TEST(Ingest, FromFilesWithLabels) {
    auto [ds, ref] = ingest(std::string(SPEX_DATA_DIR) + "/iris.csv", std::string(SPEX_DATA_DIR) + "/iris_labels.csv");
    EXPECT_EQ(ds.n(), 150u);
    EXPECT_EQ(ds.d(), 4u);
    ASSERT_TRUE(ref.has_value());
    EXPECT_EQ(ref->k(), 3);
}
