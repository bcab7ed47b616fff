#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "spex/cuts.hpp"
#include "spex/dataset.hpp"

namespace spex {

struct Synthetic {
    Dataset points;
    std::vector<int> labels;
};

namespace detail {

inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i)
        v[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return v;
}

/// Number of points whose cluster appears on both sides of the cut, counted
/// as the minority side of every split cluster.
inline std::size_t cut_errors(const Dataset& ds, std::span<const int> labels, int k, std::span<const Index> pts,
                              std::size_t j, double tau) {
    std::vector<std::size_t> left(static_cast<std::size_t>(k), 0), right(static_cast<std::size_t>(k), 0);
    for (Index x : pts) (ds(x, j) <= tau ? left : right)[static_cast<std::size_t>(labels[x])]++;
    std::size_t errors = 0;
    for (std::size_t c = 0; c < left.size(); ++c) errors += std::min(left[c], right[c]);
    return errors;
}

inline bool is_pure(std::span<const int> labels, std::span<const Index> pts) {
    return std::all_of(pts.begin(), pts.end(), [&](Index x) { return labels[x] == labels[pts.front()]; });
}

/// True when the set is pure or one coordinate cut splits it into pure parts.
inline bool one_cut_separates(const Dataset& ds, std::span<const int> labels, std::span<const Index> pts) {
    if (pts.empty() || is_pure(labels, pts)) return true;
    for (std::size_t j = 0; j < ds.d(); ++j)
        for (double tau : thresholds(ds, pts, j)) {
            std::vector<Index> l, r;
            for (Index x : pts) (ds(x, j) <= tau ? l : r).push_back(x);
            if (is_pure(labels, l) && is_pure(labels, r)) return true;
        }
    return false;
}

inline double weighted_gini(const Dataset& ds, std::span<const int> labels, int k, std::span<const Index> pts,
                            std::size_t j, double tau) {
    std::vector<double> left(static_cast<std::size_t>(k), 0.0), right(static_cast<std::size_t>(k), 0.0);
    double nl = 0.0, nr = 0.0;
    for (Index x : pts) {
        bool l = ds(x, j) <= tau;
        (l ? left : right)[static_cast<std::size_t>(labels[x])] += 1.0;
        (l ? nl : nr) += 1.0;
    }
    auto part = [](const std::vector<double>& h, double m) {
        double sq = 0.0;
        for (double c : h) sq += c * c;
        return m > 0.0 ? m - sq / m : 0.0;
    };
    return (part(left, nl) + part(right, nr)) / static_cast<double>(pts.size());
}

/// Brute-force check of the failure mode the trap instance must exhibit.
inline void check_cart_trap(const Dataset& ds, std::span<const int> labels) {
    std::vector<Index> all(ds.n());
    for (Index i = 0; i < ds.n(); ++i) all[i] = i;
    bool zero_error_tree = false;
    for (double tau : thresholds(ds, all, 1)) {
        if (cut_errors(ds, labels, 3, all, 1, tau) != 0) continue;
        std::vector<Index> l, r;
        for (Index x : all) (ds(x, 1) <= tau ? l : r).push_back(x);
        if (one_cut_separates(ds, labels, l) && one_cut_separates(ds, labels, r)) zero_error_tree = true;
    }
    double best_vertical = kInfinityScore(), best_horizontal = kInfinityScore();
    for (double tau : thresholds(ds, all, 0)) {
        if (cut_errors(ds, labels, 3, all, 0, tau) == 0)
            throw std::logic_error("cart_trap self-check: a vertical cut splits no cluster");
        best_vertical = std::min(best_vertical, weighted_gini(ds, labels, 3, all, 0, tau));
    }
    for (double tau : thresholds(ds, all, 1))
        best_horizontal = std::min(best_horizontal, weighted_gini(ds, labels, 3, all, 1, tau));
    if (!zero_error_tree) throw std::logic_error("cart_trap self-check: no zero-error horizontal-first tree");
    if (!(best_vertical < best_horizontal))
        throw std::logic_error("cart_trap self-check: best gini cut is not vertical");
}

}  // namespace detail

/// Two interleaving half circles; outer arc label 0, inner arc label 1.
inline Synthetic two_moons(std::size_t n, double noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::size_t n_out = n / 2, n_in = n - n_out;
    std::vector<double> values;
    std::vector<int> labels;
    for (double t : detail::linspace(0.0, std::numbers::pi, n_out)) {
        values.push_back(std::cos(t));
        values.push_back(std::sin(t));
        labels.push_back(0);
    }
    for (double t : detail::linspace(0.0, std::numbers::pi, n_in)) {
        values.push_back(1.0 - std::cos(t));
        values.push_back(0.5 - std::sin(t));
        labels.push_back(1);
    }
    if (noise > 0.0)
        for (double& v : values) v += noise * gauss(rng);
    return {Dataset(n, 2, std::move(values)), std::move(labels)};
}

/// Three isotropic gaussians with standard deviation `noise`.
inline Synthetic three_gaussians(std::size_t n, double noise, std::uint64_t seed) {
    static constexpr double centers[3][2] = {{0.0, 0.0}, {4.0, 0.0}, {2.0, 3.5}};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> values;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
        auto c = static_cast<int>(i * 3 / n);
        values.push_back(centers[c][0] + noise * gauss(rng));
        values.push_back(centers[c][1] + noise * gauss(rng));
        labels.push_back(c);
    }
    return {Dataset(n, 2, std::move(values)), std::move(labels)};
}

/// Two bottom rectangles side by side and a top band spanning both. The best
/// gini cut is vertical and slices the top cluster, while a horizontal cut
/// followed by a vertical one is error-free. Checked by brute force.
inline Synthetic cart_trap(std::size_t n, std::uint64_t seed) {
    if (n < 10) throw DataError("cart_trap needs n >= 10");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t c = std::max<std::size_t>(2, n / 5);
    std::size_t a = (n - c) / 2, b = n - c - a;
    std::vector<double> values;
    std::vector<int> labels;
    auto rect = [&](std::size_t count, double x0, double x1, double y0, double y1, int label) {
        for (std::size_t i = 0; i < count; ++i) {
            values.push_back(x0 + (x1 - x0) * unit(rng));
            values.push_back(y0 + (y1 - y0) * unit(rng));
            labels.push_back(label);
        }
    };
    rect(a, 0.0, 10.0, 0.0, 4.0, 0);
    rect(b, 12.0, 22.0, 0.0, 4.0, 1);
    rect(c / 2, 0.0, 10.0, 5.0, 8.0, 2);
    rect(c - c / 2, 12.0, 22.0, 5.0, 8.0, 2);
    Dataset ds(n, 2, std::move(values));
    detail::check_cart_trap(ds, labels);
    return {std::move(ds), std::move(labels)};
}

/// Dispatch by name; `noise` is ignored by cart_trap.
inline Synthetic synth(const std::string& kind, std::size_t n, double noise, std::uint64_t seed) {
    if (n < 6) throw DataError("synthetic generators need n >= 6");
    if (!(noise >= 0.0)) throw DataError("noise must be non-negative");
    if (kind == "two_moons") return two_moons(n, noise, seed);
    if (kind == "three_gaussians") return three_gaussians(n, noise, seed);
    if (kind == "cart_trap") return cart_trap(n, seed);
    throw DataError("unknown synthetic kind: " + kind);
}

}  // namespace spex
