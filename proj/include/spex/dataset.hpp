#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace spex {

using Index = std::size_t;

/// Raised for malformed input files and violated data invariants.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Immutable n x d matrix of finite coordinates, row-major.
class Dataset {
public:
    Dataset(std::size_t n, std::size_t d, std::vector<double> values)
        : n_(n), d_(d), values_(std::move(values)) {
        if (n_ == 0 || d_ == 0) throw DataError("dataset must have n >= 1 and d >= 1");
        if (values_.size() != n_ * d_) throw DataError("dataset value count does not match n*d");
        for (double v : values_)
            if (!std::isfinite(v)) throw DataError("dataset contains a non-finite value");
    }

    static Dataset from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) throw DataError("empty file");
        std::size_t d = rows.front().size();
        std::vector<double> values;
        values.reserve(rows.size() * d);
        for (const auto& r : rows) {
            if (r.size() != d) throw DataError("row-length mismatch");
            values.insert(values.end(), r.begin(), r.end());
        }
        return Dataset(rows.size(), d, std::move(values));
    }

    std::size_t n() const { return n_; }
    std::size_t d() const { return d_; }
    double operator()(Index i, std::size_t j) const { return values_[i * d_ + j]; }
    std::span<const double> row(Index i) const { return {values_.data() + i * d_, d_}; }
    const std::vector<double>& values() const { return values_; }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::size_t n_;
    std::size_t d_;
    std::vector<double> values_;
};

/// Cluster labels in [0, k) with optional k x d centroids.
class ReferenceClustering {
public:
    ReferenceClustering(std::vector<int> labels, int k) : labels_(std::move(labels)), k_(k) {
        validate();
    }

    ReferenceClustering(std::vector<int> labels, int k, std::vector<double> centroids,
                        std::size_t dim)
        : labels_(std::move(labels)), k_(k), centroids_(std::move(centroids)), dim_(dim) {
        validate();
        if (dim_ == 0 || centroids_->size() != static_cast<std::size_t>(k_) * dim_)
            throw DataError("centroids must have exactly k rows of dimension d");
    }

    /// Maps arbitrary integer class ids onto 0..k-1, ordered by id value.
    static ReferenceClustering relabeled(std::span<const long long> raw) {
        std::map<long long, int> ids;
        for (long long v : raw) ids.emplace(v, 0);
        int next = 0;
        for (auto& [v, id] : ids) id = next++;
        std::vector<int> labels;
        labels.reserve(raw.size());
        for (long long v : raw) labels.push_back(ids.at(v));
        return ReferenceClustering(std::move(labels), next);
    }

    ReferenceClustering with_centroids(std::vector<double> centroids, std::size_t dim) const {
        return ReferenceClustering(labels_, k_, std::move(centroids), dim);
    }

    const std::vector<int>& labels() const { return labels_; }
    int label(Index i) const { return labels_[i]; }
    int k() const { return k_; }
    std::size_t n() const { return labels_.size(); }
    bool has_centroids() const { return centroids_.has_value(); }
    std::size_t dim() const { return dim_; }

    std::span<const double> centroid(int c) const {
        if (!centroids_) throw DataError("reference clustering has no centroids");
        return {centroids_->data() + static_cast<std::size_t>(c) * dim_, dim_};
    }

    std::vector<std::size_t> sizes() const {
        std::vector<std::size_t> s(static_cast<std::size_t>(k_), 0);
        for (int l : labels_) ++s[static_cast<std::size_t>(l)];
        return s;
    }

private:
    void validate() const {
        if (labels_.empty()) throw DataError("reference clustering has no labels");
        if (k_ < 1) throw DataError("reference clustering needs k >= 1");
        std::vector<bool> seen(static_cast<std::size_t>(k_), false);
        for (int l : labels_) {
            if (l < 0 || l >= k_) throw DataError("label outside [0, k)");
            seen[static_cast<std::size_t>(l)] = true;
        }
        for (bool s : seen)
            if (!s) throw DataError("every label in [0, k) must occur at least once");
    }

    std::vector<int> labels_;
    int k_;
    std::optional<std::vector<double>> centroids_;
    std::size_t dim_ = 0;
};

struct CostReport {
    double kmeans_cost = 0.0;
    double kmedians_l1_cost = 0.0;
};

inline void require_matching(const Dataset& ds, const ReferenceClustering& ref) {
    if (ref.n() != ds.n()) throw DataError("label count mismatch");
    if (ref.has_centroids() && ref.dim() != ds.d())
        throw DataError("centroid dimension does not match dataset");
}

/// Per-cluster coordinate means, k x d.
inline std::vector<double> cluster_means(const Dataset& ds, std::span<const int> labels, int k) {
    const std::size_t d = ds.d();
    std::vector<double> sums(static_cast<std::size_t>(k) * d, 0.0);
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < ds.n(); ++i) {
        auto c = static_cast<std::size_t>(labels[i]);
        ++counts[c];
        for (std::size_t j = 0; j < d; ++j) sums[c * d + j] += ds(i, j);
    }
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] > 0)
            for (std::size_t j = 0; j < d; ++j) sums[c * d + j] /= static_cast<double>(counts[c]);
    return sums;
}

/// Lower median of a sequence (element (m-1)/2 of the sorted values).
inline double lower_median(std::vector<double> values) {
    if (values.empty()) throw DataError("median of empty set");
    auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

/// Per-cluster coordinate-wise lower medians, k x d. Empty clusters get zeros.
inline std::vector<double> cluster_medians(const Dataset& ds, std::span<const int> labels, int k) {
    const std::size_t d = ds.d();
    std::vector<std::vector<Index>> members(static_cast<std::size_t>(k));
    for (Index i = 0; i < ds.n(); ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);
    std::vector<double> med(static_cast<std::size_t>(k) * d, 0.0);
    std::vector<double> column;
    for (std::size_t c = 0; c < members.size(); ++c) {
        if (members[c].empty()) continue;
        for (std::size_t j = 0; j < d; ++j) {
            column.clear();
            for (Index i : members[c]) column.push_back(ds(i, j));
            med[c * d + j] = lower_median(column);
        }
    }
    return med;
}

inline double squared_l2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double t = a[j] - b[j];
        s += t * t;
    }
    return s;
}

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::abs(a[j] - b[j]);
    return s;
}

/// k-medians cost of a labeling; centroids are recomputed as coordinate-wise medians.
inline double kmedians_cost(const Dataset& ds, std::span<const int> labels, int k) {
    auto med = cluster_medians(ds, labels, k);
    double cost = 0.0;
    for (Index i = 0; i < ds.n(); ++i) {
        std::span<const double> c(med.data() + static_cast<std::size_t>(labels[i]) * ds.d(), ds.d());
        cost += l1_distance(ds.row(i), c);
    }
    return cost;
}

inline double kmeans_cost(const Dataset& ds, const ReferenceClustering& ref) {
    require_matching(ds, ref);
    if (!ref.has_centroids()) throw DataError("k-means cost needs centroids");
    double cost = 0.0;
    for (Index i = 0; i < ds.n(); ++i) cost += squared_l2(ds.row(i), ref.centroid(ref.label(i)));
    return cost;
}

inline CostReport costs(const Dataset& ds, const ReferenceClustering& ref) {
    CostReport r;
    r.kmeans_cost = kmeans_cost(ds, ref);
    r.kmedians_l1_cost = kmedians_cost(ds, ref.labels(), ref.k());
    return r;
}

/// Z-scores every column with the population standard deviation. Constant
/// columns are only centered.
inline Dataset standardize(const Dataset& ds) {
    const std::size_t n = ds.n(), d = ds.d();
    std::vector<double> out(ds.values());
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (Index i = 0; i < n; ++i) mean += ds(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (Index i = 0; i < n; ++i) var += (ds(i, j) - mean) * (ds(i, j) - mean);
        double sd = std::sqrt(var / static_cast<double>(n));
        for (Index i = 0; i < n; ++i) {
            double v = ds(i, j) - mean;
            out[i * d + j] = sd > 0.0 ? v / sd : v;
        }
    }
    return Dataset(n, d, std::move(out));
}

// ---------------------------------------------------------------- CSV I/O

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view cell, std::size_t line) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size())
        throw DataError("non-numeric cell on line " + std::to_string(line));
    if (!std::isfinite(v)) throw DataError("non-finite cell on line " + std::to_string(line));
    return v;
}

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace detail

inline Dataset parse_points_csv(std::istream& in, bool header = false) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    if (header && std::getline(in, line)) ++lineno;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = detail::trim(line);
        if (sv.empty()) continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = sv.find(',', start);
            row.push_back(detail::parse_double(sv.substr(start, comma - start), lineno));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError("row-length mismatch on line " + std::to_string(lineno));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("empty file");
    return Dataset::from_rows(rows);
}

inline std::vector<long long> parse_labels(std::istream& in) {
    std::vector<long long> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = detail::trim(line);
        if (sv.empty()) continue;
        long long v = 0;
        auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
        if (ec != std::errc() || ptr != sv.data() + sv.size())
            throw DataError("non-integer label on line " + std::to_string(lineno));
        out.push_back(v);
    }
    if (out.empty()) throw DataError("empty file");
    return out;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return in;
}

inline Dataset read_points_csv(const std::string& path, bool header = false) {
    auto in = open_input(path);
    return parse_points_csv(in, header);
}

inline std::vector<long long> read_labels(const std::string& path) {
    auto in = open_input(path);
    return parse_labels(in);
}

/// Loads points and, when given, a label file relabeled to 0..k-1.
inline std::pair<Dataset, std::optional<ReferenceClustering>> ingest(
    const std::string& points_path, const std::optional<std::string>& labels_path,
    bool header = false) {
    Dataset ds = read_points_csv(points_path, header);
    if (!labels_path) return {std::move(ds), std::nullopt};
    auto raw = read_labels(*labels_path);
    if (raw.size() != ds.n()) throw DataError("label count mismatch");
    return {std::move(ds), ReferenceClustering::relabeled(raw)};
}

/// Shortest round-trip decimal form for every value.
inline void write_points_csv(std::ostream& out, const Dataset& ds) {
    for (Index i = 0; i < ds.n(); ++i) {
        for (std::size_t j = 0; j < ds.d(); ++j) {
            if (j) out << ',';
            out << detail::format_double(ds(i, j));
        }
        out << '\n';
    }
}

inline void write_labels(std::ostream& out, std::span<const int> labels) {
    for (int l : labels) out << l << '\n';
}

}  // namespace spex
