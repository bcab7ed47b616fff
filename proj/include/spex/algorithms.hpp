#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "spex/cuts.hpp"
#include "spex/dataset.hpp"
#include "spex/graph.hpp"
#include "spex/tree.hpp"

namespace spex {

// ------------------------------------------------------- conductance (SpEx)

/// CutScore = psi(prefix) + psi(node \ prefix), both against the full graph.
template <class Graph>
class ConductanceScorer {
public:
    explicit ConductanceScorer(const Graph& g) : sweep_(make_sweep(g)) {}

    void reset(std::span<const Index> node_points) { sweep_.reset(node_points); }
    void advance(std::span<const Index> group) { sweep_.advance(group); }
    // One rounding of e_p/v_p + e_s/v_s, so equal rational scores compare
    // equal whenever the weights are integers.
    double current_score() const {
        double ep = sweep_.e_prefix(), vp = sweep_.vol_prefix();
        double es = sweep_.e_suffix(), vs = sweep_.vol_suffix();
        if (vp > 0.0 && vs > 0.0) return (ep * vs + es * vp) / (vp * vs);
        return sweep_.psi_prefix() + sweep_.psi_suffix();
    }

private:
    decltype(make_sweep(std::declval<const Graph&>())) sweep_;
};

/// Leaf quality psi_G(X_v); splitting reduces the multi-way normalized cut.
template <class Graph>
class ConductanceCriterion {
public:
    explicit ConductanceCriterion(const Graph& g) : g_(&g) {}
    ConductanceScorer<Graph> scorer() const { return ConductanceScorer<Graph>(*g_); }
    double leaf_quality(std::span<const Index> pts) const { return cut_measures(*g_, pts).psi; }

private:
    const Graph* g_;
};

// -------------------------------------------------------------------- CART

/// Gini impurity sum p_i (1 - p_i) of a label histogram with `total` members.
inline double gini_from_counts(std::span<const std::size_t> counts, std::size_t total) {
    if (total == 0) return 0.0;
    std::uint64_t sq = 0;
    for (auto c : counts) sq += static_cast<std::uint64_t>(c) * c;
    auto t = static_cast<double>(total);
    return (t * t - static_cast<double>(sq)) / (t * t);
}

/// CutScore = (|S| gini(S) + |T| gini(T)) / |X| for prefix S and suffix T.
class CartScorer {
public:
    CartScorer(const std::vector<int>& labels, int k)
        : labels_(&labels), prefix_(static_cast<std::size_t>(k), 0), node_(static_cast<std::size_t>(k), 0) {}

    void reset(std::span<const Index> node_points) {
        std::fill(prefix_.begin(), prefix_.end(), 0);
        std::fill(node_.begin(), node_.end(), 0);
        for (Index x : node_points) ++node_[static_cast<std::size_t>((*labels_)[x])];
        node_size_ = node_points.size();
        prefix_size_ = 0;
        sq_prefix_ = 0;
        sq_suffix_ = 0;
        for (auto c : node_) sq_suffix_ += static_cast<std::uint64_t>(c) * c;
    }

    void advance(std::span<const Index> group) {
        for (Index x : group) {
            auto c = static_cast<std::size_t>((*labels_)[x]);
            std::uint64_t s = prefix_[c], t = node_[c] - prefix_[c];
            sq_prefix_ += 2 * s + 1;
            sq_suffix_ -= 2 * t - 1;
            ++prefix_[c];
            ++prefix_size_;
        }
    }

    double current_score() const {
        auto s = static_cast<double>(prefix_size_);
        auto t = static_cast<double>(node_size_ - prefix_size_);
        if (prefix_size_ == 0 || prefix_size_ == node_size_) return kInfinityScore();
        // (s - sq_s/s + t - sq_t/t) / |X| as one integer ratio, rounded once.
        double num = (s + t) * s * t - static_cast<double>(sq_prefix_) * t - static_cast<double>(sq_suffix_) * s;
        return num / (s * t * static_cast<double>(labels_->size()));
    }

private:
    const std::vector<int>* labels_;
    std::vector<std::size_t> prefix_;
    std::vector<std::size_t> node_;
    std::size_t node_size_ = 0, prefix_size_ = 0;
    std::uint64_t sq_prefix_ = 0, sq_suffix_ = 0;
};

/// Leaf quality (|X'| / |X|) gini(X').
class CartCriterion {
public:
    explicit CartCriterion(const ReferenceClustering& ref) : labels_(ref.labels()), k_(ref.k()) {}
    CartScorer scorer() const { return CartScorer(labels_, k_); }
    double leaf_quality(std::span<const Index> pts) const {
        std::vector<std::size_t> counts(static_cast<std::size_t>(k_), 0);
        for (Index x : pts) ++counts[static_cast<std::size_t>(labels_[x])];
        if (pts.empty()) return 0.0;
        std::uint64_t sq = 0;
        for (auto c : counts) sq += static_cast<std::uint64_t>(c) * c;
        auto m = static_cast<double>(pts.size());
        return (m * m - static_cast<double>(sq)) / (m * static_cast<double>(labels_.size()));
    }

private:
    std::vector<int> labels_;
    int k_;
};

// ----------------------------------------------------------- impurities

struct ImpurityMeasures {
    double gini = 0.0;                   // gini(S)
    double cut_impurity = 0.0;           // size-weighted two-way impurity
    double modified_cut_impurity = 0.0;  // volume-weighted, independent-set graph
};

/// Impurities of the two-way split (S, complement) of X' = S u complement.
/// The modified impurity uses independent-set graph volumes over the whole
/// reference and the association assoc(A, A) = sum over ordered pairs inside
/// A of cross-cluster edges, i.e. twice the internal edge weight; NaN when
/// either volume is zero.
inline ImpurityMeasures impurity(const ReferenceClustering& ref, std::span<const Index> s,
                                 std::span<const Index> complement) {
    const auto k = static_cast<std::size_t>(ref.k());
    auto hist = [&](std::span<const Index> pts) {
        std::vector<std::size_t> h(k, 0);
        for (Index x : pts) {
            if (x >= ref.n()) throw std::out_of_range("point index out of range");
            ++h[static_cast<std::size_t>(ref.label(x))];
        }
        return h;
    };
    auto hs = hist(s), hc = hist(complement);
    ImpurityMeasures m;
    m.gini = gini_from_counts(hs, s.size());
    double total = static_cast<double>(s.size() + complement.size());
    if (total > 0.0)
        m.cut_impurity = (static_cast<double>(s.size()) * m.gini +
                          static_cast<double>(complement.size()) * gini_from_counts(hc, complement.size())) /
                         total;

    // Independent-set graph over X: x ~ y iff labels differ.
    auto sizes = ref.sizes();
    auto n = static_cast<double>(ref.n());
    auto volume = [&](const std::vector<std::size_t>& h) {
        double v = 0.0;
        for (std::size_t c = 0; c < k; ++c) v += static_cast<double>(h[c]) * (n - static_cast<double>(sizes[c]));
        return v;
    };
    auto assoc = [&](const std::vector<std::size_t>& h, std::size_t m_size) {
        double a = 0.0;
        for (std::size_t c = 0; c < k; ++c)
            a += static_cast<double>(h[c]) * static_cast<double>(m_size - h[c]);
        return a;
    };
    double vol_x = volume(sizes);
    double vs = volume(hs), vc = volume(hc);
    if (vol_x > 0.0 && vs > 0.0 && vc > 0.0)
        m.modified_cut_impurity = 2.0 / vol_x * (assoc(hs, s.size()) / vs + assoc(hc, complement.size()) / vc);
    else
        m.modified_cut_impurity = std::numeric_limits<double>::quiet_NaN();
    return m;
}

// ---------------------------------------------------------- IMM and EMN

enum class Norm { l1, l2 };

/// Points X followed by the k centroids as rows n..n+k-1.
inline Dataset augment_with_centroids(const Dataset& ds, const ReferenceClustering& ref) {
    if (!ref.has_centroids()) throw DataError("reference clustering has no centroids");
    std::vector<double> values(ds.values());
    for (int c = 0; c < ref.k(); ++c) {
        auto row = ref.centroid(c);
        values.insert(values.end(), row.begin(), row.end());
    }
    return Dataset(ds.n() + static_cast<std::size_t>(ref.k()), ds.d(), std::move(values));
}

/// Pair of centroids at maximal distance; ties to the lexicographically
/// smallest (i, j). Returns the centroid (cluster) ids.
inline std::pair<int, int> diametrical_pair(const ReferenceClustering& ref, std::span<const int> centroid_ids,
                                            Norm norm) {
    std::pair<int, int> best{centroid_ids[0], centroid_ids.size() > 1 ? centroid_ids[1] : centroid_ids[0]};
    double best_d = -1.0;
    for (std::size_t a = 0; a < centroid_ids.size(); ++a)
        for (std::size_t b = a + 1; b < centroid_ids.size(); ++b) {
            auto ca = ref.centroid(centroid_ids[a]), cb = ref.centroid(centroid_ids[b]);
            double d = norm == Norm::l1 ? l1_distance(ca, cb) : squared_l2(ca, cb);
            if (d > best_d) {
                best_d = d;
                best = {centroid_ids[a], centroid_ids[b]};
            }
        }
    return best;
}

/// Incremental mistake counter on the augmented point set. A point x counts
/// as a mistake when its own centroid is in the node and lies on the other
/// side of the cut.
class MistakeCounter {
public:
    MistakeCounter(const std::vector<int>& labels, int k)
        : labels_(&labels), n_(labels.size()), k_(static_cast<std::size_t>(k)),
          node_points_(k_, 0), prefix_points_(k_, 0), centroid_in_node_(k_, 0), centroid_in_prefix_(k_, 0) {}

    void reset(std::span<const Index> node_points) {
        std::fill(node_points_.begin(), node_points_.end(), 0);
        std::fill(prefix_points_.begin(), prefix_points_.end(), 0);
        std::fill(centroid_in_node_.begin(), centroid_in_node_.end(), 0);
        std::fill(centroid_in_prefix_.begin(), centroid_in_prefix_.end(), 0);
        centroids_in_node_ = centroids_in_prefix_ = 0;
        for (Index x : node_points) {
            if (x < n_) {
                ++node_points_[static_cast<std::size_t>((*labels_)[x])];
            } else {
                centroid_in_node_[x - n_] = 1;
                ++centroids_in_node_;
            }
        }
        mistakes_ = 0;
    }

    void advance(std::span<const Index> group) {
        for (Index x : group) {
            if (x < n_) {
                auto c = static_cast<std::size_t>((*labels_)[x]);
                ++prefix_points_[c];
                if (centroid_in_node_[c]) mistakes_ += centroid_in_prefix_[c] ? -1 : 1;
            } else {
                auto c = x - n_;
                // The centroid's points in the prefix stop being mistakes and
                // those still in the suffix become mistakes.
                mistakes_ += static_cast<long long>(node_points_[c] - prefix_points_[c]) -
                             static_cast<long long>(prefix_points_[c]);
                centroid_in_prefix_[c] = 1;
                ++centroids_in_prefix_;
            }
        }
    }

    long long mistakes() const { return mistakes_; }
    bool centroid_in_prefix(int c) const { return centroid_in_prefix_[static_cast<std::size_t>(c)] != 0; }
    std::size_t centroids_in_prefix() const { return centroids_in_prefix_; }
    std::size_t centroids_in_node() const { return centroids_in_node_; }

private:
    const std::vector<int>* labels_;
    std::size_t n_, k_;
    std::vector<std::size_t> node_points_, prefix_points_;
    std::vector<std::uint8_t> centroid_in_node_, centroid_in_prefix_;
    std::size_t centroids_in_node_ = 0, centroids_in_prefix_ = 0;
    long long mistakes_ = 0;
};

/// Mistakes, admissible only when the cut separates the fixed centroid pair.
class ImmScorer {
public:
    ImmScorer(const std::vector<int>& labels, int k, std::pair<int, int> pair)
        : counter_(labels, k), pair_(pair) {}

    void reset(std::span<const Index> pts) { counter_.reset(pts); }
    void advance(std::span<const Index> group) { counter_.advance(group); }
    double current_score() const {
        if (counter_.centroid_in_prefix(pair_.first) == counter_.centroid_in_prefix(pair_.second))
            return kInfinityScore();
        return static_cast<double>(counter_.mistakes());
    }

private:
    MistakeCounter counter_;
    std::pair<int, int> pair_;
};

/// mistakes / min(centroids in prefix, centroids in suffix); admissible when
/// the minimum is at least one.
class EmnScorer {
public:
    EmnScorer(const std::vector<int>& labels, int k) : counter_(labels, k) {}

    void reset(std::span<const Index> pts) { counter_.reset(pts); }
    void advance(std::span<const Index> group) { counter_.advance(group); }
    double current_score() const {
        std::size_t a = counter_.centroids_in_prefix();
        std::size_t f = std::min(a, counter_.centroids_in_node() - a);
        if (f == 0) return kInfinityScore();
        return static_cast<double>(counter_.mistakes()) / static_cast<double>(f);
    }

private:
    MistakeCounter counter_;
};

/// Per-split bookkeeping of a centroid tree.
struct CentroidSplit {
    NodeId node = 0;
    std::size_t depth = 0;
    ScoredCut cut;
    long long mistakes = 0;
    std::pair<int, int> pair{0, 0};
    double pair_l1 = 0.0;  // ||mu' - mu''||_1 of the diametrical pair
};

struct CentroidTreeResult {
    ExplainTree tree;
    std::vector<CentroidSplit> splits;
    std::vector<std::vector<Index>> leaf_points;  // data points only, by node id
};

enum class CentroidRule { imm, emn };

namespace detail {

inline CentroidTreeResult centroid_tree(const Dataset& ds, const ReferenceClustering& ref, CentroidRule rule,
                                        Norm norm) {
    require_matching(ds, ref);
    if (!ref.has_centroids()) throw DataError("reference clustering has no centroids");
    const Dataset aug = augment_with_centroids(ds, ref);
    const std::size_t n = ds.n();

    CentroidTreeResult result;
    auto& tree = result.tree;
    tree.dim = ds.d();
    tree.nodes.push_back(leaf_node(0));
    std::vector<std::vector<Index>> members{{}};
    std::vector<std::size_t> depth{0};
    for (Index i = 0; i < aug.n(); ++i) members[0].push_back(i);

    // Leaves are processed in node-id order; children get larger ids.
    for (NodeId v = 0; v < tree.nodes.size(); ++v) {
        std::vector<int> cids;
        for (Index x : members[v])
            if (x >= n) cids.push_back(static_cast<int>(x - n));
        if (cids.size() < 2) continue;
        auto pair = diametrical_pair(ref, cids, norm);
        std::optional<ScoredCut> cut;
        if (rule == CentroidRule::imm)
            cut = best_cut(ImmScorer(ref.labels(), ref.k(), pair), aug, members[v]);
        else
            cut = best_cut(EmnScorer(ref.labels(), ref.k()), aug, members[v]);
        if (!cut) throw std::runtime_error("centroids in a node coincide; no separating cut exists");

        MistakeCounter counter(ref.labels(), ref.k());
        counter.reset(members[v]);
        std::vector<Index> left, right;
        for (Index x : members[v]) (aug(x, cut->cut.j) <= cut->cut.tau ? left : right).push_back(x);
        counter.advance(left);

        CentroidSplit rec;
        rec.node = v;
        rec.depth = depth[v];
        rec.cut = *cut;
        rec.mistakes = counter.mistakes();
        rec.pair = pair;
        rec.pair_l1 = l1_distance(ref.centroid(pair.first), ref.centroid(pair.second));
        result.splits.push_back(rec);

        NodeId lid = tree.nodes.size(), rid = lid + 1;
        tree.nodes[v].leaf = false;
        tree.nodes[v].cut = cut->cut;
        tree.nodes[v].left = lid;
        tree.nodes[v].right = rid;
        tree.nodes.push_back(leaf_node(lid));
        tree.nodes.push_back(leaf_node(rid));
        members.push_back(std::move(left));
        members.push_back(std::move(right));
        depth.push_back(depth[v] + 1);
        depth.push_back(depth[v] + 1);
        members[v].clear();
    }

    result.leaf_points.resize(tree.nodes.size());
    for (NodeId v = 0; v < tree.nodes.size(); ++v) {
        auto& node = tree.nodes[v];
        if (!node.leaf) continue;
        for (Index x : members[v]) {
            if (x < n)
                result.leaf_points[v].push_back(x);
            else
                node.cluster = static_cast<int>(x - n);
        }
        node.count = result.leaf_points[v].size();
    }
    return result;
}

}  // namespace detail

/// Modified IMM: per node, minimize mistakes among cuts separating the
/// diametrical centroid pair; split until every leaf holds one centroid.
inline CentroidTreeResult imm_fit(const Dataset& ds, const ReferenceClustering& ref, Norm norm = Norm::l2) {
    return detail::centroid_tree(ds, ref, CentroidRule::imm, norm);
}

/// EMN: per node, minimize mistakes / min(centroids on each side).
inline CentroidTreeResult emn_fit(const Dataset& ds, const ReferenceClustering& ref) {
    return detail::centroid_tree(ds, ref, CentroidRule::emn, Norm::l2);
}

// ---------------------------------------------------------- SpEx and CART

struct CliqueSource {
    const ReferenceClustering* ref;
};

struct KnnSource {
    std::size_t kappa = 20;
    KnnWeight weight = KnnWeight::indicator_sum;
};

using SpexSource = std::variant<CliqueSource, KnnSource>;

/// SpEx over the clique graph of a reference clustering or over the data's
/// kNN graph.
inline BuildResult spex_fit(const Dataset& ds, const SpexSource& source, std::size_t leaves,
                            std::size_t workers = 1) {
    BuildOptions opt{leaves, workers};
    if (const auto* clique = std::get_if<CliqueSource>(&source)) {
        require_matching(ds, *clique->ref);
        CliqueClusterGraph g(*clique->ref);
        return build_tree(ds, ConductanceCriterion<CliqueClusterGraph>(g), opt);
    }
    const auto& knn = std::get<KnnSource>(source);
    SparseGraph g = build_knn_graph(ds, knn.kappa, knn.weight);
    return build_tree(ds, ConductanceCriterion<SparseGraph>(g), opt);
}

inline BuildResult cart_fit(const Dataset& ds, const ReferenceClustering& ref, std::size_t leaves,
                            std::size_t workers = 1) {
    require_matching(ds, ref);
    return build_tree(ds, CartCriterion(ref), BuildOptions{leaves, workers});
}

}  // namespace spex
