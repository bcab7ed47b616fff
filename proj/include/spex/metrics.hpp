#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "spex/graph.hpp"

namespace spex {

struct AgreementReport {
    double ari = 0.0;
    double ami = 0.0;
    double ref_ari = 0.0;
};

namespace detail {

struct Contingency {
    std::vector<std::size_t> a_sizes, b_sizes;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> cells;
    std::size_t n = 0;
};

inline Contingency contingency(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw std::invalid_argument("label count mismatch");
    if (a.size() < 2) throw std::invalid_argument("agreement indices need at least two points");
    auto compact = [](std::span<const int> v) {
        std::map<int, std::size_t> ids;
        for (int x : v) ids.emplace(x, 0);
        std::size_t next = 0;
        for (auto& [label, id] : ids) id = next++;
        std::vector<std::size_t> out;
        out.reserve(v.size());
        for (int x : v) out.push_back(ids[x]);
        return std::pair{out, next};
    };
    auto [ca, ka] = compact(a);
    auto [cb, kb] = compact(b);
    Contingency t;
    t.n = a.size();
    t.a_sizes.assign(ka, 0);
    t.b_sizes.assign(kb, 0);
    for (std::size_t i = 0; i < t.n; ++i) {
        ++t.a_sizes[ca[i]];
        ++t.b_sizes[cb[i]];
        ++t.cells[{ca[i], cb[i]}];
    }
    return t;
}

inline __int128 pairs(std::size_t m) { return static_cast<__int128>(m) * (static_cast<__int128>(m) - 1) / 2; }

}  // namespace detail

/// Adjusted Rand index. Evaluated in exact integer arithmetic up to the final
/// division, so symmetric and label-invariant bit for bit.
inline double ari(std::span<const int> a, std::span<const int> b) {
    auto t = detail::contingency(a, b);
    __int128 sum_ij = 0, sum_a = 0, sum_b = 0;
    for (const auto& [cell, count] : t.cells) sum_ij += detail::pairs(count);
    for (auto s : t.a_sizes) sum_a += detail::pairs(s);
    for (auto s : t.b_sizes) sum_b += detail::pairs(s);
    __int128 total = detail::pairs(t.n);
    // (sum_ij - A B / N) / ((A + B) / 2 - A B / N), scaled by 2N.
    __int128 num = 2 * (sum_ij * total - sum_a * sum_b);
    __int128 den = (sum_a + sum_b) * total - 2 * sum_a * sum_b;
    if (den == 0) return 1.0;
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

/// Adjusted mutual information with arithmetic-mean normalization and the
/// hypergeometric expected MI. Identical labelings score 1; exactly one
/// constant labeling scores 0.
inline double ami(std::span<const int> a, std::span<const int> b) {
    auto t = detail::contingency(a, b);
    const bool a_const = t.a_sizes.size() == 1, b_const = t.b_sizes.size() == 1;
    if (a_const && b_const) return 1.0;
    if (a_const || b_const) return 0.0;
    if (t.cells.size() == t.a_sizes.size() && t.cells.size() == t.b_sizes.size()) return 1.0;
    const auto n = static_cast<double>(t.n);

    double mi = 0.0;
    for (const auto& [cell, count] : t.cells) {
        auto c = static_cast<double>(count);
        mi += c / n * std::log(n * c / (static_cast<double>(t.a_sizes[cell.first]) *
                                        static_cast<double>(t.b_sizes[cell.second])));
    }
    auto entropy = [&](const std::vector<std::size_t>& sizes) {
        double h = 0.0;
        for (auto s : sizes) {
            double p = static_cast<double>(s) / n;
            h -= p * std::log(p);
        }
        return h;
    };
    double h_mean = 0.5 * (entropy(t.a_sizes) + entropy(t.b_sizes));

    double emi = 0.0;
    const double lg_n = std::lgamma(n + 1.0);
    for (auto ai : t.a_sizes)
        for (auto bj : t.b_sizes) {
            auto av = static_cast<double>(ai), bv = static_cast<double>(bj);
            double base = std::lgamma(av + 1.0) + std::lgamma(bv + 1.0) + std::lgamma(n - av + 1.0) +
                          std::lgamma(n - bv + 1.0) - lg_n;
            std::size_t lo = ai + bj > t.n ? ai + bj - t.n : 0;
            lo = std::max<std::size_t>(lo, 1);
            std::size_t hi = std::min(ai, bj);
            for (std::size_t nij = lo; nij <= hi; ++nij) {
                auto v = static_cast<double>(nij);
                double log_p = base - std::lgamma(v + 1.0) - std::lgamma(av - v + 1.0) - std::lgamma(bv - v + 1.0) -
                               std::lgamma(n - av - bv + v + 1.0);
                emi += v / n * std::log(n * v / (av * bv)) * std::exp(log_p);
            }
        }
    double den = h_mean - emi;
    if (den == 0.0) return 1.0;
    return (mi - emi) / den;
}

/// Sum of leaf conductances against the whole graph. The leaves must
/// partition the vertex set.
inline double tree_objective(const GraphHandle& g, const std::vector<std::vector<Index>>& partition) {
    const std::size_t n = node_count(g);
    std::vector<std::uint8_t> seen(n, 0);
    std::size_t covered = 0;
    for (const auto& part : partition)
        for (Index x : part) {
            if (x >= n) throw std::invalid_argument("partition index out of range");
            if (seen[x]) throw std::invalid_argument("partition blocks overlap");
            seen[x] = 1;
            ++covered;
        }
    if (covered != n) throw std::invalid_argument("partition does not cover every point");
    double total = 0.0;
    for (const auto& part : partition) total += cut_measures(g, part).psi;
    return total;
}

/// Leaf blocks of a labeling with ids 0..L-1.
inline std::vector<std::vector<Index>> blocks_of(std::span<const int> labels) {
    std::vector<std::vector<Index>> out;
    for (Index i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) throw std::invalid_argument("negative label");
        auto c = static_cast<std::size_t>(labels[i]);
        if (c >= out.size()) out.resize(c + 1);
        out[c].push_back(i);
    }
    return out;
}

}  // namespace spex
