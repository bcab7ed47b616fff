#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "spex/metrics.hpp"

using namespace spex;

namespace {

double mutual_information(const std::vector<int>& a, const std::vector<int>& b) {
    const double n = static_cast<double>(a.size());
    std::map<int, double> pa, pb;
    std::map<std::pair<int, int>, double> pab;
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa[a[i]] += 1.0;
        pb[b[i]] += 1.0;
        pab[{a[i], b[i]}] += 1.0;
    }
    double mi = 0.0;
    for (const auto& [cell, c] : pab) mi += c / n * std::log(n * c / (pa[cell.first] * pb[cell.second]));
    return mi;
}

double entropy(const std::vector<int>& a) {
    std::map<int, double> p;
    for (int x : a) p[x] += 1.0;
    double h = 0.0;
    for (const auto& [l, c] : p) h -= c / static_cast<double>(a.size()) * std::log(c / static_cast<double>(a.size()));
    return h;
}

/// Expected MI as the average over every permutation of b.
double ami_by_permutations(const std::vector<int>& a, const std::vector<int>& observed) {
    std::vector<int> b = observed;
    std::sort(b.begin(), b.end());
    double sum = 0.0, count = 0.0;
    std::vector<std::size_t> perm(b.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    do {
        std::vector<int> pb(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) pb[i] = b[perm[i]];
        sum += mutual_information(a, pb);
        count += 1.0;
    } while (std::next_permutation(perm.begin(), perm.end()));
    double emi = sum / count;
    double mean_h = 0.5 * (entropy(a) + entropy(b));
    return (mutual_information(a, observed) - emi) / (mean_h - emi);
}

/// ARI from pair counting over all unordered pairs.
double ari_by_pairs(const std::vector<int>& a, const std::vector<int>& b) {
    double both = 0, only_a = 0, only_b = 0, total = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            bool sa = a[i] == a[j], sb = b[i] == b[j];
            both += sa && sb;
            only_a += sa;
            only_b += sb;
            total += 1;
        }
    double expected = only_a * only_b / total;
    double mx = 0.5 * (only_a + only_b);
    if (mx == expected) return 1.0;
    return (both - expected) / (mx - expected);
}

}  // namespace

TEST(Ari, IdenticalIsExactlyOne) {
    std::vector<int> a{0, 0, 1, 1, 2, 2, 2};
    EXPECT_EQ(ari(a, a), 1.0);
    std::vector<int> renamed{5, 5, 3, 3, 9, 9, 9};
    EXPECT_EQ(ari(a, renamed), 1.0);
}

TEST(Ari, CheckerboardIsMinusHalf) {
    std::vector<int> a{0, 0, 1, 1}, b{0, 1, 0, 1};
    EXPECT_EQ(ari(a, b), -0.5);
}

TEST(Ari, MatchesPairCountingAndIsSymmetric) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 2 + rng() % 40;
        auto a = oracle::random_labels(rng, n, 1 + static_cast<int>(rng() % std::min<std::size_t>(5, n)));
        auto b = oracle::random_labels(rng, n, 1 + static_cast<int>(rng() % std::min<std::size_t>(5, n)));
        EXPECT_NEAR(ari(a, b), ari_by_pairs(a, b), 1e-12);
        EXPECT_EQ(ari(a, b), ari(b, a));
    }
}

TEST(Ari, ConstantLabelings) {
    std::vector<int> c{0, 0, 0}, d{1, 1, 1};
    EXPECT_EQ(ari(c, d), 1.0);
}

TEST(Ari, Errors) {
    std::vector<int> a{0, 1}, b{0, 1, 1}, one{0};
    EXPECT_THROW(ari(a, b), std::invalid_argument);
    EXPECT_THROW(ari(one, one), std::invalid_argument);
}

TEST(Ami, CheckerboardAgainstExhaustiveExpectation) {
    std::vector<int> a{0, 0, 1, 1}, b{0, 1, 0, 1};
    EXPECT_NEAR(ami(a, b), ami_by_permutations(a, b), 1e-12);
    EXPECT_NEAR(ami(a, b), -0.5, 1e-12);
}

TEST(Ami, SmallTablesAgainstExhaustiveExpectation) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 4 + rng() % 4;
        auto a = oracle::random_labels(rng, n, 2 + static_cast<int>(rng() % 2));
        auto b = oracle::random_labels(rng, n, 2 + static_cast<int>(rng() % 2));
        bool same_partition = ari(a, b) == 1.0;
        if (same_partition) continue;
        EXPECT_NEAR(ami(a, b), ami_by_permutations(a, b), 1e-10);
    }
}

TEST(Ami, Conventions) {
    std::vector<int> a{0, 0, 1, 1, 2}, c{4, 4, 4, 4, 4};
    EXPECT_EQ(ami(a, a), 1.0);
    EXPECT_EQ(ami(a, c), 0.0);
    EXPECT_EQ(ami(c, a), 0.0);
    EXPECT_EQ(ami(c, c), 1.0);
}

TEST(Ami, SymmetricAndRenamingInvariant) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 5 + rng() % 60;
        auto a = oracle::random_labels(rng, n, 2 + static_cast<int>(rng() % 3));
        auto b = oracle::random_labels(rng, n, 2 + static_cast<int>(rng() % 3));
        EXPECT_NEAR(ami(a, b), ami(b, a), 1e-12);
        auto renamed = a;
        for (int& x : renamed) x = 10 - 3 * x;
        EXPECT_NEAR(ami(a, b), ami(renamed, b), 1e-12);
        EXPECT_LE(ami(a, b), 1.0 + 1e-12);
    }
}

TEST(TreeObjective, SumOfLeafConductances) {
    CliqueClusterGraph g({0, 0, 1, 1}, 2);
    EXPECT_EQ(tree_objective(g, {{0, 1}, {2, 3}}), 0.0);
    // {0, 2} and {1, 3}: each side cuts 2 of volume 2
    EXPECT_DOUBLE_EQ(tree_objective(g, {{0, 2}, {1, 3}}), 2.0);
    EXPECT_THROW(tree_objective(g, {{0, 1}, {1, 2, 3}}), std::invalid_argument);
    EXPECT_THROW(tree_objective(g, {{0, 1}, {2}}), std::invalid_argument);
}

TEST(TreeObjective, BlocksOfLabels) {
    std::vector<int> labels{1, 0, 1, 2};
    auto b = blocks_of(labels);
    ASSERT_EQ(b.size(), 3u);
    EXPECT_EQ(b[1], (std::vector<Index>{0, 2}));
}
