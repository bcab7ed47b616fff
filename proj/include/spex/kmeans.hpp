#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "spex/dataset.hpp"
#include "spex/parallel.hpp"

namespace spex {

struct KMeansRun {
    std::vector<int> labels;
    std::vector<double> centroids;  // k x d
    double cost = 0.0;
    std::vector<double> cost_trace;  // cost after every Lloyd iteration
};

namespace detail {

inline std::vector<double> kmeanspp_seed(const Dataset& ds, int k, std::mt19937_64& rng) {
    const std::size_t n = ds.n(), d = ds.d();
    std::vector<double> centers;
    centers.reserve(static_cast<std::size_t>(k) * d);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    Index first = pick(rng);
    centers.insert(centers.end(), ds.row(first).begin(), ds.row(first).end());
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    for (int c = 1; c < k; ++c) {
        std::span<const double> last(centers.data() + static_cast<std::size_t>(c - 1) * d, d);
        double total = 0.0;
        for (Index i = 0; i < n; ++i) {
            dist[i] = std::min(dist[i], squared_l2(ds.row(i), last));
            total += dist[i];
        }
        Index chosen = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double r = u(rng);
            double acc = 0.0;
            chosen = n - 1;
            for (Index i = 0; i < n; ++i) {
                acc += dist[i];
                if (r < acc && dist[i] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        centers.insert(centers.end(), ds.row(chosen).begin(), ds.row(chosen).end());
    }
    return centers;
}

inline KMeansRun lloyd(const Dataset& ds, int k, std::vector<double> centers, int max_iter) {
    const std::size_t n = ds.n(), d = ds.d();
    const auto kk = static_cast<std::size_t>(k);
    KMeansRun run;
    run.labels.assign(n, -1);
    std::vector<double> best_dist(n, 0.0);
    double previous = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < std::max(1, max_iter); ++iter) {
        bool changed = false;
        for (Index i = 0; i < n; ++i) {
            int arg = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < kk; ++c) {
                double dd = squared_l2(ds.row(i), {centers.data() + c * d, d});
                if (dd < bd) {
                    bd = dd;
                    arg = static_cast<int>(c);
                }
            }
            best_dist[i] = bd;
            if (run.labels[i] != arg) {
                run.labels[i] = arg;
                changed = true;
            }
        }
        // Empty clusters take the point farthest from its current centroid.
        std::vector<std::size_t> counts(kk, 0);
        for (int l : run.labels) ++counts[static_cast<std::size_t>(l)];
        for (std::size_t c = 0; c < kk; ++c) {
            if (counts[c] > 0) continue;
            Index far = 0;
            double fd = -1.0;
            for (Index i = 0; i < n; ++i)
                if (counts[static_cast<std::size_t>(run.labels[i])] > 1 && best_dist[i] > fd) {
                    fd = best_dist[i];
                    far = i;
                }
            --counts[static_cast<std::size_t>(run.labels[far])];
            run.labels[far] = static_cast<int>(c);
            ++counts[c];
            best_dist[far] = 0.0;
            changed = true;
        }
        centers = cluster_means(ds, run.labels, k);
        double cost = 0.0;
        for (Index i = 0; i < n; ++i)
            cost += squared_l2(ds.row(i), {centers.data() + static_cast<std::size_t>(run.labels[i]) * d, d});
        if (cost > previous * (1.0 + 1e-12) + 1e-300)
            throw std::logic_error("k-means cost increased during a Lloyd iteration");
        run.cost_trace.push_back(cost);
        previous = cost;
        if (!changed) break;
    }
    run.centroids = std::move(centers);
    run.cost = previous;
    return run;
}

}  // namespace detail

/// One seeded k-means++ + Lloyd run; restart r of kmeans_fit uses this.
inline KMeansRun kmeans_single(const Dataset& ds, int k, std::uint64_t seed, std::uint64_t restart,
                               int max_iter) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(restart), static_cast<std::uint32_t>(restart >> 32)};
    std::mt19937_64 rng(seq);
    return detail::lloyd(ds, k, detail::kmeanspp_seed(ds, k, rng), max_iter);
}

/// Best of `restarts` k-means++ seeded Lloyd runs (minimum cost, ties to the
/// lower restart index). Restarts run on the worker pool.
inline ReferenceClustering kmeans_fit(const Dataset& ds, int k, int restarts = 10,
                                      std::uint64_t seed = 0, int max_iter = 300) {
    if (k < 1) throw DataError("k-means needs k >= 1");
    if (static_cast<std::size_t>(k) > ds.n()) throw DataError("k-means needs k <= n");
    if (restarts < 1) throw DataError("k-means needs restarts >= 1");
    std::vector<KMeansRun> runs(static_cast<std::size_t>(restarts));
    parallel_for(runs.size(), [&](std::size_t r) { runs[r] = kmeans_single(ds, k, seed, r, max_iter); });
    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r)
        if (runs[r].cost < runs[best].cost) best = r;
    return ReferenceClustering(std::move(runs[best].labels), k, std::move(runs[best].centroids), ds.d());
}

}  // namespace spex
