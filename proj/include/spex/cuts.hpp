#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "spex/dataset.hpp"
#include "spex/parallel.hpp"

namespace spex {

inline constexpr double kInfinityScore() { return std::numeric_limits<double>::infinity(); }

/// S_{j,tau} = {x : x_j <= tau}.
struct CoordinateCut {
    std::size_t j = 0;
    double tau = 0.0;

    bool goes_left(std::span<const double> x) const { return x[j] <= tau; }
    friend bool operator==(const CoordinateCut&, const CoordinateCut&) = default;
};

struct ScoredCut {
    CoordinateCut cut;
    double score = 0.0;  // lower is better
    std::size_t prefix_size = 0;
};

/// Lexicographic (score, j, tau) preference.
inline bool better_cut(const ScoredCut& a, const ScoredCut& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.cut.j != b.cut.j) return a.cut.j < b.cut.j;
    return a.cut.tau < b.cut.tau;
}

/// Threshold strictly between two consecutive distinct values: lo <= tau < hi.
inline double split_threshold(double lo, double hi) {
    double tau = std::midpoint(lo, hi);
    if (!(tau < hi)) tau = lo;
    return tau;
}

/// Points of a node sorted by coordinate j (ties by index) and split into
/// groups of equal coordinate value. Points in one group never separate.
struct CoordinateOrder {
    std::vector<Index> points;
    std::vector<std::size_t> group_end;  // exclusive end offset of each group
};

inline CoordinateOrder coordinate_order(const Dataset& ds, std::span<const Index> node_points, std::size_t j) {
    CoordinateOrder order;
    order.points.assign(node_points.begin(), node_points.end());
    std::sort(order.points.begin(), order.points.end(), [&](Index a, Index b) {
        double va = ds(a, j), vb = ds(b, j);
        return va < vb || (va == vb && a < b);
    });
    for (std::size_t t = 1; t <= order.points.size(); ++t)
        if (t == order.points.size() || ds(order.points[t], j) != ds(order.points[t - 1], j))
            order.group_end.push_back(t);
    return order;
}

/// Midpoints between consecutive distinct values of coordinate j.
inline std::vector<double> thresholds(const Dataset& ds, std::span<const Index> node_points, std::size_t j) {
    std::vector<double> values;
    values.reserve(node_points.size());
    for (Index x : node_points) values.push_back(ds(x, j));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<double> taus;
    for (std::size_t t = 1; t < values.size(); ++t) taus.push_back(split_threshold(values[t - 1], values[t]));
    return taus;
}

/// Sweep-line cut scorer. reset() binds the node, advance() moves a group of
/// points from the suffix into the prefix, current_score() scores the
/// current prefix/suffix split (+inf when the split is not admissible).
template <class S>
concept CutScorer = std::copy_constructible<S> &&
    requires(S s, const S cs, std::span<const Index> pts) {
        s.reset(pts);
        s.advance(pts);
        { cs.current_score() } -> std::convertible_to<double>;
    };

/// Best admissible cut of one coordinate; absent if none is finite.
template <CutScorer Scorer>
std::optional<ScoredCut> best_cut_on_coordinate(Scorer& scorer, const Dataset& ds,
                                                std::span<const Index> node_points, std::size_t j) {
    auto order = coordinate_order(ds, node_points, j);
    if (order.group_end.size() < 2) return std::nullopt;
    scorer.reset(node_points);
    std::optional<ScoredCut> best;
    std::size_t begin = 0;
    for (std::size_t g = 0; g + 1 < order.group_end.size(); ++g) {
        std::size_t end = order.group_end[g];
        scorer.advance(std::span<const Index>(order.points.data() + begin, end - begin));
        begin = end;
        double score = scorer.current_score();
        if (!(score < kInfinityScore())) continue;
        if (!best || score < best->score) {
            double tau = split_threshold(ds(order.points[end - 1], j), ds(order.points[end], j));
            best = ScoredCut{{j, tau}, score, end};
        }
    }
    return best;
}

/// Global argmin over all coordinates and thresholds with the (score, j, tau)
/// tie-break. Coordinates are searched on the worker pool with private
/// scorer copies; the reduction is order-independent.
template <CutScorer Scorer>
std::optional<ScoredCut> best_cut(const Scorer& prototype, const Dataset& ds, std::span<const Index> node_points,
                                  std::size_t max_workers = 1) {
    if (node_points.size() < 2) return std::nullopt;
    std::vector<std::optional<ScoredCut>> per(ds.d());
    if (max_workers == 1) {
        Scorer scorer = prototype;
        for (std::size_t j = 0; j < ds.d(); ++j) per[j] = best_cut_on_coordinate(scorer, ds, node_points, j);
    } else {
        parallel_for(
            ds.d(),
            [&](std::size_t j) {
                Scorer scorer = prototype;
                per[j] = best_cut_on_coordinate(scorer, ds, node_points, j);
            },
            max_workers);
    }
    std::optional<ScoredCut> best;
    for (const auto& c : per)
        if (c && (!best || better_cut(*c, *best))) best = c;
    return best;
}

}  // namespace spex
