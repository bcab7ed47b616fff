#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "spex/dataset.hpp"

namespace spex {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Neighbor {
    Index to;
    double weight;
};

struct WeightedEdge {
    Index u;
    Index v;
    double weight;
};

/// Explicit undirected weighted graph stored as symmetric adjacency lists.
class SparseGraph {
public:
    SparseGraph() = default;

    /// Each undirected edge listed once; parallel entries are merged by summing.
    static SparseGraph from_edges(std::size_t n, std::span<const WeightedEdge> edges) {
        std::vector<WeightedEdge> canon;
        canon.reserve(edges.size());
        for (const auto& e : edges) {
            if (e.u >= n || e.v >= n) throw std::out_of_range("edge endpoint out of range");
            if (e.u == e.v) throw std::invalid_argument("self-loops are not allowed");
            if (!(e.weight > 0.0) || !std::isfinite(e.weight))
                throw std::invalid_argument("edge weights must be positive and finite");
            canon.push_back({std::min(e.u, e.v), std::max(e.u, e.v), e.weight});
        }
        std::sort(canon.begin(), canon.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
            return std::tie(a.u, a.v) < std::tie(b.u, b.v);
        });
        SparseGraph g;
        g.adjacency_.assign(n, {});
        for (std::size_t i = 0; i < canon.size();) {
            WeightedEdge e = canon[i++];
            while (i < canon.size() && canon[i].u == e.u && canon[i].v == e.v) e.weight += canon[i++].weight;
            g.adjacency_[e.u].push_back({e.v, e.weight});
            g.adjacency_[e.v].push_back({e.u, e.weight});
        }
        g.finalize();
        return g;
    }

    std::size_t n() const { return adjacency_.size(); }
    std::span<const Neighbor> neighbors(Index x) const { return adjacency_[x]; }
    double degree(Index x) const { return degrees_[x]; }
    const std::vector<double>& degrees() const { return degrees_; }
    double total_volume() const { return total_volume_; }
    std::size_t edge_count() const { return edge_count_; }

    /// Undirected edges, each once with u < v, sorted.
    std::vector<WeightedEdge> edges() const {
        std::vector<WeightedEdge> out;
        out.reserve(edge_count_);
        for (Index u = 0; u < n(); ++u)
            for (const auto& nb : adjacency_[u])
                if (u < nb.to) out.push_back({u, nb.to, nb.weight});
        std::sort(out.begin(), out.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
            return std::tie(a.u, a.v) < std::tie(b.u, b.v);
        });
        return out;
    }

    /// Symmetry and degree bookkeeping check.
    bool audit() const {
        double total = 0.0;
        for (Index u = 0; u < n(); ++u) {
            double deg = 0.0;
            for (const auto& nb : adjacency_[u]) {
                if (nb.to == u || !(nb.weight > 0.0)) return false;
                const auto& back = adjacency_[nb.to];
                auto it = std::find_if(back.begin(), back.end(), [&](const Neighbor& b) { return b.to == u; });
                if (it == back.end() || it->weight != nb.weight) return false;
                deg += nb.weight;
            }
            if (deg != degrees_[u]) return false;
            total += deg;
        }
        return total == total_volume_;
    }

private:
    void finalize() {
        degrees_.assign(n(), 0.0);
        total_volume_ = 0.0;
        edge_count_ = 0;
        for (Index u = 0; u < n(); ++u) {
            std::sort(adjacency_[u].begin(), adjacency_[u].end(),
                      [](const Neighbor& a, const Neighbor& b) { return a.to < b.to; });
            for (const auto& nb : adjacency_[u]) {
                degrees_[u] += nb.weight;
                if (u < nb.to) ++edge_count_;
            }
            total_volume_ += degrees_[u];
        }
    }

    std::vector<std::vector<Neighbor>> adjacency_;
    std::vector<double> degrees_;
    double total_volume_ = 0.0;
    std::size_t edge_count_ = 0;
};

/// Writes "u v w" per undirected edge (u < v).
inline void write_edge_list(std::ostream& out, const SparseGraph& g) {
    for (const auto& e : g.edges()) out << e.u << ' ' << e.v << ' ' << detail::format_double(e.weight) << '\n';
}

enum class CliqueWeight {
    unit,       // every intra-cluster edge has weight 1
    corollary,  // edges inside cluster i weigh 1/(n_i - 1)
};

/// Implicit graph in which every reference cluster is a clique. Only labels
/// and cluster sizes are stored.
class CliqueClusterGraph {
public:
    CliqueClusterGraph(std::vector<int> labels, int k, CliqueWeight mode = CliqueWeight::unit)
        : labels_(std::move(labels)), k_(k), mode_(mode), sizes_(static_cast<std::size_t>(k), 0) {
        for (int l : labels_) {
            if (l < 0 || l >= k_) throw std::invalid_argument("label outside [0, k)");
            ++sizes_[static_cast<std::size_t>(l)];
        }
        edge_weight_.resize(sizes_.size());
        for (std::size_t c = 0; c < sizes_.size(); ++c) {
            auto s = static_cast<double>(sizes_[c]);
            if (sizes_[c] < 2)
                edge_weight_[c] = 0.0;
            else
                edge_weight_[c] = mode_ == CliqueWeight::unit ? 1.0 : 1.0 / (s - 1.0);
        }
        total_volume_ = 0.0;
        for (std::size_t c = 0; c < sizes_.size(); ++c)
            total_volume_ += static_cast<double>(sizes_[c]) * cluster_degree(static_cast<int>(c));
    }

    explicit CliqueClusterGraph(const ReferenceClustering& ref, CliqueWeight mode = CliqueWeight::unit)
        : CliqueClusterGraph(ref.labels(), ref.k(), mode) {}

    std::size_t n() const { return labels_.size(); }
    int k() const { return k_; }
    CliqueWeight mode() const { return mode_; }
    int label(Index x) const { return labels_[x]; }
    const std::vector<int>& labels() const { return labels_; }
    std::size_t cluster_size(int c) const { return sizes_[static_cast<std::size_t>(c)]; }
    double edge_weight(int c) const { return edge_weight_[static_cast<std::size_t>(c)]; }
    double cluster_degree(int c) const {
        return edge_weight(c) * (static_cast<double>(cluster_size(c)) - 1.0);
    }
    double degree(Index x) const { return cluster_degree(labels_[x]); }
    double total_volume() const { return total_volume_; }

    /// Materializes the clique edges (tests and dumps; O(sum n_i^2)).
    SparseGraph materialize() const {
        std::vector<std::vector<Index>> members(sizes_.size());
        for (Index x = 0; x < n(); ++x) members[static_cast<std::size_t>(labels_[x])].push_back(x);
        std::vector<WeightedEdge> edges;
        for (std::size_t c = 0; c < members.size(); ++c)
            for (std::size_t a = 0; a < members[c].size(); ++a)
                for (std::size_t b = a + 1; b < members[c].size(); ++b)
                    edges.push_back({members[c][a], members[c][b], edge_weight_[c]});
        return SparseGraph::from_edges(n(), edges);
    }

private:
    std::vector<int> labels_;
    int k_;
    CliqueWeight mode_;
    std::vector<std::size_t> sizes_;
    std::vector<double> edge_weight_;
    double total_volume_ = 0.0;
};

/// Either graph representation, for runtime dispatch.
using GraphHandle = std::variant<SparseGraph, CliqueClusterGraph>;

inline std::size_t node_count(const GraphHandle& g) {
    return std::visit([](const auto& gg) { return gg.n(); }, g);
}

// ------------------------------------------------------------ cut measures

/// Cut quantities of a set S against the whole vertex set X.
struct CutMeasures {
    double e = 0.0;         // e_G(S, X \ S)
    double vol_s = 0.0;     // vol_G(S)
    double vol_rest = 0.0;  // vol_G(X \ S)
    std::size_t size_s = 0;
    std::size_t size_rest = 0;
    double phi = 0.0;    // sparsity e / |S|
    double psi = 0.0;    // conductance e / vol(S)
    double Phi = 0.0;    // ratio cut
    double Psi = 0.0;    // normalized cut
    double theta = 0.0;  // e / min(vol(S), vol(X \ S))
};

/// Derives every ratio from the raw totals. Zero-volume sets have psi = 0;
/// trivial two-way cuts (S empty or S = X) get +inf two-way measures.
inline CutMeasures make_cut_measures(double e, double vol_s, double vol_rest, std::size_t size_s,
                                     std::size_t size_rest) {
    CutMeasures m;
    m.e = e;
    m.vol_s = vol_s;
    m.vol_rest = vol_rest;
    m.size_s = size_s;
    m.size_rest = size_rest;
    m.phi = size_s > 0 ? e / static_cast<double>(size_s) : 0.0;
    m.psi = vol_s > 0.0 ? e / vol_s : 0.0;
    if (size_s == 0 || size_rest == 0) {
        m.Phi = m.Psi = m.theta = kInfinity;
        return m;
    }
    double n = static_cast<double>(size_s + size_rest);
    m.Phi = e * n / (static_cast<double>(size_s) * static_cast<double>(size_rest));
    double psi_rest = vol_rest > 0.0 ? e / vol_rest : 0.0;
    m.Psi = m.psi + psi_rest;
    double low = std::min(vol_s, vol_rest);
    m.theta = low > 0.0 ? e / low : 0.0;
    return m;
}

namespace detail {

inline std::vector<std::uint8_t> membership(std::size_t n, std::span<const Index> s) {
    std::vector<std::uint8_t> in(n, 0);
    for (Index x : s) {
        if (x >= n) throw std::out_of_range("point index out of range");
        if (in[x]) throw std::invalid_argument("duplicate point index in set");
        in[x] = 1;
    }
    return in;
}

}  // namespace detail

inline CutMeasures cut_measures(const SparseGraph& g, std::span<const Index> s) {
    auto in = detail::membership(g.n(), s);
    double e = 0.0, vol = 0.0;
    for (Index x : s) {
        vol += g.degree(x);
        for (const auto& nb : g.neighbors(x))
            if (!in[nb.to]) e += nb.weight;
    }
    return make_cut_measures(e, vol, g.total_volume() - vol, s.size(), g.n() - s.size());
}

inline CutMeasures cut_measures(const CliqueClusterGraph& g, std::span<const Index> s) {
    detail::membership(g.n(), s);
    std::vector<std::size_t> hist(static_cast<std::size_t>(g.k()), 0);
    for (Index x : s) ++hist[static_cast<std::size_t>(g.label(x))];
    double e = 0.0, vol = 0.0;
    for (int c = 0; c < g.k(); ++c) {
        auto sc = static_cast<double>(hist[static_cast<std::size_t>(c)]);
        auto nc = static_cast<double>(g.cluster_size(c));
        e += g.edge_weight(c) * sc * (nc - sc);
        vol += g.edge_weight(c) * sc * (nc - 1.0);
    }
    return make_cut_measures(e, vol, g.total_volume() - vol, s.size(), g.n() - s.size());
}

inline CutMeasures cut_measures(const GraphHandle& g, std::span<const Index> s) {
    return std::visit([&](const auto& gg) { return cut_measures(gg, s); }, g);
}

// ---------------------------------------------------------------- kNN graph

enum class KnnWeight {
    indicator_sum,  // [y in N(x)] + [x in N(y)], in {1, 2}
    union_,         // 1 if either holds
};

/// Exact kNN graph by brute force; distance ties go to the lower index.
inline SparseGraph build_knn_graph(const Dataset& ds, std::size_t kappa,
                                   KnnWeight mode = KnnWeight::indicator_sum) {
    const std::size_t n = ds.n();
    if (kappa < 1 || kappa >= n) throw std::invalid_argument("kNN needs 1 <= kappa < n");
    std::vector<WeightedEdge> edges;
    edges.reserve(n * kappa);
    std::vector<std::pair<double, Index>> cand;
    cand.reserve(n - 1);
    for (Index x = 0; x < n; ++x) {
        cand.clear();
        for (Index y = 0; y < n; ++y)
            if (y != x) cand.emplace_back(squared_l2(ds.row(x), ds.row(y)), y);
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(kappa), cand.end());
        for (std::size_t t = 0; t < kappa; ++t) edges.push_back({x, cand[t].second, 1.0});
    }
    if (mode == KnnWeight::indicator_sum) return SparseGraph::from_edges(n, edges);
    for (auto& e : edges) {
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const WeightedEdge& a, const WeightedEdge& b) { return a.u == b.u && a.v == b.v; }),
                edges.end());
    return SparseGraph::from_edges(n, edges);
}

// ------------------------------------------------------------------ sweeps

/// Incremental prefix/suffix accumulator over the implicit clique graph.
/// Moving one point updates both sides in O(1).
class CliqueSweep {
public:
    explicit CliqueSweep(const CliqueClusterGraph& g)
        : g_(&g), prefix_(static_cast<std::size_t>(g.k()), 0), node_(static_cast<std::size_t>(g.k()), 0) {}

    void reset(std::span<const Index> node_points) {
        std::fill(prefix_.begin(), prefix_.end(), 0);
        std::fill(node_.begin(), node_.end(), 0);
        for (Index x : node_points) {
            if (x >= g_->n()) throw std::out_of_range("point index out of range");
            ++node_[static_cast<std::size_t>(g_->label(x))];
        }
        e_prefix_ = vol_prefix_ = 0.0;
        e_suffix_ = vol_suffix_ = 0.0;
        for (int c = 0; c < g_->k(); ++c) {
            auto t = static_cast<double>(node_[static_cast<std::size_t>(c)]);
            auto nc = static_cast<double>(g_->cluster_size(c));
            e_suffix_ += g_->edge_weight(c) * t * (nc - t);
            vol_suffix_ += g_->edge_weight(c) * t * (nc - 1.0);
        }
        size_prefix_ = 0;
        size_suffix_ = node_points.size();
    }

    void advance(Index x) {
        auto c = g_->label(x);
        auto ci = static_cast<std::size_t>(c);
        double w = g_->edge_weight(c);
        auto nc = static_cast<double>(g_->cluster_size(c));
        auto s = static_cast<double>(prefix_[ci]);
        auto t = static_cast<double>(node_[ci] - prefix_[ci]);
        e_prefix_ += w * (nc - 2.0 * s - 1.0);
        e_suffix_ += w * (2.0 * t - nc - 1.0);
        vol_prefix_ += w * (nc - 1.0);
        vol_suffix_ -= w * (nc - 1.0);
        ++prefix_[ci];
        ++size_prefix_;
        --size_suffix_;
    }

    void advance(std::span<const Index> group) {
        for (Index x : group) advance(x);
    }

    double psi_prefix() const { return vol_prefix_ > 0.0 ? e_prefix_ / vol_prefix_ : 0.0; }
    double psi_suffix() const { return vol_suffix_ > 0.0 ? e_suffix_ / vol_suffix_ : 0.0; }
    double e_prefix() const { return e_prefix_; }
    double e_suffix() const { return e_suffix_; }
    double vol_prefix() const { return vol_prefix_; }
    double vol_suffix() const { return vol_suffix_; }

    CutMeasures prefix_measures() const {
        return make_cut_measures(e_prefix_, vol_prefix_, g_->total_volume() - vol_prefix_, size_prefix_,
                                 g_->n() - size_prefix_);
    }
    CutMeasures suffix_measures() const {
        return make_cut_measures(e_suffix_, vol_suffix_, g_->total_volume() - vol_suffix_, size_suffix_,
                                 g_->n() - size_suffix_);
    }

private:
    const CliqueClusterGraph* g_;
    std::vector<std::size_t> prefix_;
    std::vector<std::size_t> node_;
    double e_prefix_ = 0.0, vol_prefix_ = 0.0;
    double e_suffix_ = 0.0, vol_suffix_ = 0.0;
    std::size_t size_prefix_ = 0, size_suffix_ = 0;
};

/// Incremental prefix/suffix accumulator over an explicit graph. Moving a
/// point costs O(degree).
class SparseSweep {
public:
    explicit SparseSweep(const SparseGraph& g) : g_(&g), state_(g.n(), kOutside) {}

    void reset(std::span<const Index> node_points) {
        for (Index x : members_) state_[x] = kOutside;
        members_.assign(node_points.begin(), node_points.end());
        for (Index x : members_) {
            if (x >= g_->n()) throw std::out_of_range("point index out of range");
            state_[x] = kSuffix;
        }
        e_prefix_ = vol_prefix_ = 0.0;
        e_suffix_ = vol_suffix_ = 0.0;
        for (Index x : members_) {
            vol_suffix_ += g_->degree(x);
            for (const auto& nb : g_->neighbors(x))
                if (state_[nb.to] != kSuffix) e_suffix_ += nb.weight;
        }
        size_prefix_ = 0;
        size_suffix_ = members_.size();
    }

    void advance(Index x) {
        for (const auto& nb : g_->neighbors(x)) {
            auto st = state_[nb.to];
            if (st == kPrefix)
                e_prefix_ -= nb.weight;
            else
                e_prefix_ += nb.weight;
            if (st == kSuffix)
                e_suffix_ += nb.weight;
            else
                e_suffix_ -= nb.weight;
        }
        state_[x] = kPrefix;
        vol_prefix_ += g_->degree(x);
        vol_suffix_ -= g_->degree(x);
        ++size_prefix_;
        --size_suffix_;
    }

    void advance(std::span<const Index> group) {
        for (Index x : group) advance(x);
    }

    double psi_prefix() const { return vol_prefix_ > 0.0 ? e_prefix_ / vol_prefix_ : 0.0; }
    double psi_suffix() const { return vol_suffix_ > 0.0 ? e_suffix_ / vol_suffix_ : 0.0; }
    double e_prefix() const { return e_prefix_; }
    double e_suffix() const { return e_suffix_; }
    double vol_prefix() const { return vol_prefix_; }
    double vol_suffix() const { return vol_suffix_; }

    CutMeasures prefix_measures() const {
        return make_cut_measures(e_prefix_, vol_prefix_, g_->total_volume() - vol_prefix_, size_prefix_,
                                 g_->n() - size_prefix_);
    }
    CutMeasures suffix_measures() const {
        return make_cut_measures(e_suffix_, vol_suffix_, g_->total_volume() - vol_suffix_, size_suffix_,
                                 g_->n() - size_suffix_);
    }

private:
    static constexpr std::uint8_t kOutside = 0, kSuffix = 1, kPrefix = 2;
    const SparseGraph* g_;
    std::vector<std::uint8_t> state_;
    std::vector<Index> members_;
    double e_prefix_ = 0.0, vol_prefix_ = 0.0;
    double e_suffix_ = 0.0, vol_suffix_ = 0.0;
    std::size_t size_prefix_ = 0, size_suffix_ = 0;
};

inline CliqueSweep make_sweep(const CliqueClusterGraph& g) { return CliqueSweep(g); }
inline SparseSweep make_sweep(const SparseGraph& g) { return SparseSweep(g); }

/// Prefix and suffix measures for every prefix length 1..len-1 of the given
/// ordering, all against the full vertex set.
template <class Graph>
std::vector<std::pair<CutMeasures, CutMeasures>> sweep(const Graph& g, std::span<const Index> node_points) {
    std::vector<std::pair<CutMeasures, CutMeasures>> out;
    if (node_points.size() < 2) return out;
    auto state = make_sweep(g);
    state.reset(node_points);
    out.reserve(node_points.size() - 1);
    for (std::size_t t = 0; t + 1 < node_points.size(); ++t) {
        state.advance(node_points[t]);
        out.emplace_back(state.prefix_measures(), state.suffix_measures());
    }
    return out;
}

inline std::vector<std::pair<CutMeasures, CutMeasures>> sweep(const GraphHandle& g,
                                                              std::span<const Index> node_points) {
    return std::visit([&](const auto& gg) { return sweep(gg, node_points); }, g);
}

}  // namespace spex
