#pragma once

#include <algorithm>
#include <cstdio>
#include <future>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spex/cuts.hpp"
#include "spex/dataset.hpp"

namespace spex {

using NodeId = std::size_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct TreeNode {
    NodeId id = 0;
    bool leaf = true;
    CoordinateCut cut;  // internal nodes
    NodeId left = kNoNode;
    NodeId right = kNoNode;
    int cluster = 0;          // leaves
    std::size_t count = 0;    // leaves: training points routed here
};

inline TreeNode leaf_node(NodeId id) {
    TreeNode n;
    n.id = id;
    return n;
}

class TreeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Binary threshold tree. nodes[i].id == i; left child gets x_j <= tau.
struct ExplainTree {
    std::size_t dim = 0;
    NodeId root = 0;
    std::vector<TreeNode> nodes;

    std::size_t leaf_count() const {
        return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& t) { return t.leaf; }));
    }

    /// Leaf ids in left-to-right order.
    std::vector<NodeId> leaves_in_order() const {
        std::vector<NodeId> out, stack{root};
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            if (nodes[v].leaf) {
                out.push_back(v);
            } else {
                stack.push_back(nodes[v].right);
                stack.push_back(nodes[v].left);
            }
        }
        return out;
    }

    /// Edges on the longest root-to-leaf path.
    std::size_t height() const {
        std::size_t best = 0;
        std::vector<std::pair<NodeId, std::size_t>> stack{{root, 0}};
        while (!stack.empty()) {
            auto [v, depth] = stack.back();
            stack.pop_back();
            best = std::max(best, depth);
            if (!nodes[v].leaf) {
                stack.emplace_back(nodes[v].left, depth + 1);
                stack.emplace_back(nodes[v].right, depth + 1);
            }
        }
        return best;
    }

    NodeId route(std::span<const double> x) const {
        NodeId v = root;
        while (!nodes[v].leaf) {
            const auto& n = nodes[v];
            if (n.cut.j >= x.size()) throw TreeError("tree coordinate index exceeds point dimension");
            v = n.cut.goes_left(x) ? n.left : n.right;
        }
        return v;
    }

    friend bool operator==(const ExplainTree& a, const ExplainTree& b) {
        if (a.dim != b.dim || a.root != b.root || a.nodes.size() != b.nodes.size()) return false;
        for (std::size_t i = 0; i < a.nodes.size(); ++i) {
            const auto &x = a.nodes[i], &y = b.nodes[i];
            if (x.id != y.id || x.leaf != y.leaf) return false;
            if (x.leaf) {
                if (x.cluster != y.cluster || x.count != y.count) return false;
            } else if (!(x.cut == y.cut) || x.left != y.left || x.right != y.right) {
                return false;
            }
        }
        return true;
    }
};

/// Routes every point root-to-leaf and returns the leaf cluster ids.
inline std::vector<int> assign(const ExplainTree& tree, const Dataset& ds) {
    if (ds.d() < tree.dim) throw TreeError("dataset dimension is smaller than the tree's");
    std::vector<int> labels(ds.n());
    for (Index i = 0; i < ds.n(); ++i) labels[i] = tree.nodes[tree.route(ds.row(i))].cluster;
    return labels;
}

// ------------------------------------------------------------- greedy build

/// What build_tree needs from a splitting rule: a sweep scorer prototype and
/// the quality of a leaf (the summand it contributes to the tree objective).
template <class C>
concept SplitCriterion = requires(const C& c, std::span<const Index> pts) {
    { c.scorer() } -> CutScorer;
    { c.leaf_quality(pts) } -> std::convertible_to<double>;
};

struct BuildOptions {
    std::size_t leaves = 1;
    std::size_t workers = 1;  // 1 = serial child searches
};

struct SplitRecord {
    NodeId node = 0;
    ScoredCut cut;
    double priority = 0.0;
    double objective_after = 0.0;
};

struct BuildResult {
    ExplainTree tree;
    bool leaf_target_reached = true;
    std::vector<std::vector<Index>> leaf_members;  // indexed by leaf cluster id
    std::vector<SplitRecord> splits;
    double objective = 0.0;  // sum of leaf qualities after the last split
};

namespace detail {

struct LeafTask {
    NodeId node = 0;
    std::vector<Index> members;
    std::optional<ScoredCut> cut;
    double quality = 0.0;
    double priority = -std::numeric_limits<double>::infinity();
};

struct TaskOrder {
    bool operator()(const LeafTask& a, const LeafTask& b) const {
        // max-heap: larger priority, then more members, then smaller node id
        if (a.priority != b.priority) return a.priority < b.priority;
        if (a.members.size() != b.members.size()) return a.members.size() < b.members.size();
        return a.node > b.node;
    }
};

template <SplitCriterion Criterion>
LeafTask make_task(const Criterion& criterion, const Dataset& ds, NodeId id, std::vector<Index> members) {
    LeafTask t;
    t.node = id;
    t.members = std::move(members);
    t.quality = criterion.leaf_quality(t.members);
    t.cut = best_cut(criterion.scorer(), ds, t.members);
    if (t.cut) t.priority = t.quality - t.cut->score;
    return t;
}

}  // namespace detail

/// Greedy best-first construction: repeatedly split the leaf whose best cut
/// gives the largest drop of the summed leaf quality, until `leaves` leaves
/// exist or no leaf has a valid cut (leaf_target_reached = false).
template <SplitCriterion Criterion>
BuildResult build_tree(const Dataset& ds, const Criterion& criterion, BuildOptions opt) {
    if (opt.leaves < 1) throw std::invalid_argument("leaf target must be >= 1");
    BuildResult result;
    auto& tree = result.tree;
    tree.dim = ds.d();
    tree.root = 0;
    tree.nodes.push_back(leaf_node(0));

    std::vector<Index> all(ds.n());
    for (Index i = 0; i < ds.n(); ++i) all[i] = i;

    std::priority_queue<detail::LeafTask, std::vector<detail::LeafTask>, detail::TaskOrder> queue;
    std::vector<std::vector<Index>> members_of;  // by node id, leaves only
    members_of.emplace_back();
    double objective = 0.0;
    std::size_t leaf_count = 1;
    if (opt.leaves > 1) {
        auto root_task = detail::make_task(criterion, ds, 0, all);
        objective = root_task.quality;
        queue.push(std::move(root_task));
    } else {
        objective = criterion.leaf_quality(all);
        members_of[0] = std::move(all);
    }

    while (leaf_count < opt.leaves) {
        if (queue.empty() || !queue.top().cut) break;
        detail::LeafTask task = queue.top();
        queue.pop();
        const CoordinateCut cut = task.cut->cut;
        std::vector<Index> left, right;
        for (Index x : task.members) (ds(x, cut.j) <= cut.tau ? left : right).push_back(x);

        NodeId lid = tree.nodes.size(), rid = lid + 1;
        auto& parent = tree.nodes[task.node];
        parent.leaf = false;
        parent.cut = cut;
        parent.left = lid;
        parent.right = rid;
        tree.nodes.push_back(leaf_node(lid));
        tree.nodes.push_back(leaf_node(rid));
        members_of.resize(tree.nodes.size());

        detail::LeafTask lt, rt;
        if (opt.workers > 1) {
            auto fut = std::async(std::launch::async,
                                  [&] { return detail::make_task(criterion, ds, lid, left); });
            rt = detail::make_task(criterion, ds, rid, right);
            lt = fut.get();
        } else {
            lt = detail::make_task(criterion, ds, lid, left);
            rt = detail::make_task(criterion, ds, rid, right);
        }
        objective = objective - task.quality + lt.quality + rt.quality;
        result.splits.push_back({task.node, *task.cut, task.priority, objective});
        queue.push(std::move(lt));
        queue.push(std::move(rt));
        ++leaf_count;
    }
    result.leaf_target_reached = leaf_count >= opt.leaves;

    while (!queue.empty()) {
        members_of[queue.top().node] = queue.top().members;
        queue.pop();
    }
    auto order = tree.leaves_in_order();
    result.leaf_members.resize(order.size());
    for (std::size_t c = 0; c < order.size(); ++c) {
        auto& node = tree.nodes[order[c]];
        node.cluster = static_cast<int>(c);
        node.count = members_of[order[c]].size();
        result.leaf_members[c] = std::move(members_of[order[c]]);
    }
    result.objective = objective;
    return result;
}

// ------------------------------------------------------------------ JSON

namespace detail {

inline std::string format_tau(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    std::string s(buf);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

}  // namespace detail

/// Canonical document: keys in fixed order, nodes by id, tau with 17
/// significant digits.
inline void write_tree_json(std::ostream& out, const ExplainTree& tree) {
    out << "{\"d\": " << tree.dim << ", \"root\": " << tree.root << ", \"nodes\": [";
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const auto& n = tree.nodes[i];
        out << (i ? ",\n  " : "\n  ");
        if (n.leaf)
            out << "{\"id\": " << n.id << ", \"kind\": \"leaf\", \"cluster\": " << n.cluster
                << ", \"count\": " << n.count << "}";
        else
            out << "{\"id\": " << n.id << ", \"kind\": \"internal\", \"j\": " << n.cut.j
                << ", \"tau\": " << detail::format_tau(n.cut.tau) << ", \"left\": " << n.left
                << ", \"right\": " << n.right << "}";
    }
    out << "\n]}\n";
}

inline std::string tree_to_json(const ExplainTree& tree) {
    std::ostringstream os;
    write_tree_json(os, tree);
    return os.str();
}

/// Parses and validates a tree document: ids must be 0..N-1, every child
/// must exist, and every node must be reached exactly once from the root.
inline ExplainTree parse_tree_json(std::istream& in) {
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw TreeError(std::string("malformed tree document: ") + e.what());
    }
    try {
        ExplainTree tree;
        tree.dim = doc.at("d").get<std::size_t>();
        tree.root = doc.at("root").get<NodeId>();
        const auto& nodes = doc.at("nodes");
        if (!nodes.is_array() || nodes.empty()) throw TreeError("tree has no nodes");
        tree.nodes.resize(nodes.size());
        std::vector<bool> defined(nodes.size(), false);
        for (const auto& jn : nodes) {
            auto id = jn.at("id").get<NodeId>();
            if (id >= nodes.size() || defined[id]) throw TreeError("node ids must be unique and in 0..N-1");
            defined[id] = true;
            TreeNode n;
            n.id = id;
            auto kind = jn.at("kind").get<std::string>();
            if (kind == "leaf") {
                n.leaf = true;
                n.cluster = jn.at("cluster").get<int>();
                n.count = jn.at("count").get<std::size_t>();
                if (n.cluster < 0) throw TreeError("leaf cluster id must be non-negative");
            } else if (kind == "internal") {
                n.leaf = false;
                n.cut.j = jn.at("j").get<std::size_t>();
                n.cut.tau = jn.at("tau").get<double>();
                n.left = jn.at("left").get<NodeId>();
                n.right = jn.at("right").get<NodeId>();
                if (n.cut.j >= tree.dim) throw TreeError("cut coordinate outside [0, d)");
            } else {
                throw TreeError("unknown node kind '" + kind + "'");
            }
            tree.nodes[id] = n;
        }
        if (tree.root >= tree.nodes.size()) throw TreeError("root id does not exist");
        std::vector<bool> seen(tree.nodes.size(), false);
        std::vector<NodeId> stack{tree.root};
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            if (seen[v]) throw TreeError("cycle or shared child detected");
            seen[v] = true;
            const auto& n = tree.nodes[v];
            if (n.leaf) continue;
            for (NodeId c : {n.left, n.right}) {
                if (c >= tree.nodes.size()) throw TreeError("dangling child id " + std::to_string(c));
                stack.push_back(c);
            }
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end())
            throw TreeError("node unreachable from root");
        return tree;
    } catch (const nlohmann::json::exception& e) {
        throw TreeError(std::string("malformed tree document: ") + e.what());
    }
}

inline ExplainTree tree_from_json(const std::string& text) {
    std::istringstream is(text);
    return parse_tree_json(is);
}

}  // namespace spex
