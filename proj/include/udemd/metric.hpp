#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "udemd/diffusion.hpp"
#include "udemd/error.hpp"
#include "udemd/parallel.hpp"
#include "udemd/signal_set.hpp"

namespace udemd {

/// Symmetric m x m matrix of pairwise distances between signals.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    DistanceMatrix(std::size_t m, std::string metric_name)
        : m_(m), values_(m * m, 0.0), metric_name_(std::move(metric_name)) {}

    std::size_t size() const noexcept { return m_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * m_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * m_ + j]; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * m_, m_}; }
    const std::vector<double>& data() const noexcept { return values_; }

    const std::string& metric_name() const noexcept { return metric_name_; }
    void set_metric_name(std::string name) { metric_name_ = std::move(name); }

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    void set_labels(std::vector<std::string> labels) {
        require(labels.empty() || labels.size() == m_, ErrorCode::DimensionMismatch, "label count mismatch");
        labels_ = std::move(labels);
    }

    /// Largest violation of symmetry, zero diagonal or nonnegativity.
    double validation_error() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            worst = std::max(worst, std::abs((*this)(i, i)));
            for (std::size_t j = 0; j < m_; ++j) {
                worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
                worst = std::max(worst, -(*this)(i, j));
            }
        }
        return worst;
    }

private:
    std::size_t m_ = 0;
    std::vector<double> values_;
    std::string metric_name_;
    std::vector<std::string> labels_;
};

/// Read-only view of a row-major rows x cols matrix.
struct RowMatrixView {
    std::span<const double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::span<const double> row(std::size_t i) const { return data.subspan(i * cols, cols); }
};

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
    return s;
}

/// Exact L1 distances between all row pairs, computed once per unordered
/// pair so the result is exactly symmetric.
inline DistanceMatrix pairwise_l1(const RowMatrixView& rows, std::string metric_name = "l1") {
    require(rows.data.size() == rows.rows * rows.cols, ErrorCode::DimensionMismatch, "row view size mismatch");
    for (double v : rows.data) require(std::isfinite(v), ErrorCode::NonFiniteValue, "non-finite coordinate");
    DistanceMatrix dm(rows.rows, std::move(metric_name));
    parallel_for(rows.rows, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < rows.rows; ++j) {
            const double d = l1_distance(rows.row(i), rows.row(j));
            dm(i, j) = d;
            dm(j, i) = d;
        }
    });
    return dm;
}

struct Neighbor {
    std::size_t index = 0;
    double distance = 0.0;
    bool operator==(const Neighbor&) const = default;
};

/// Per query, neighbors in non-decreasing distance order.
struct NeighborList {
    std::vector<std::vector<Neighbor>> neighbors;

    std::size_t query_count() const noexcept { return neighbors.size(); }
};

/// Exact k nearest neighbors from a distance matrix. Self-matches are
/// excluded; equal distances are ordered by ascending index.
inline NeighborList knn(const DistanceMatrix& dm, std::size_t k) {
    const std::size_t m = dm.size();
    require(k < m, ErrorCode::KTooLarge,
            "k = " + std::to_string(k) + " needs at least k + 1 = " + std::to_string(k + 1) + " signals, have " +
                std::to_string(m));
    NeighborList out;
    out.neighbors.resize(m);
    parallel_for(m, [&](std::size_t q) {
        std::vector<Neighbor> cand;
        cand.reserve(m - 1);
        for (std::size_t j = 0; j < m; ++j)
            if (j != q) cand.push_back({j, dm(q, j)});
        auto before = [](const Neighbor& a, const Neighbor& b) {
            return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
        };
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(), before);
        cand.resize(k);
        out.neighbors[q] = std::move(cand);
    });
    return out;
}

inline NeighborList knn(const RowMatrixView& rows, std::size_t k) { return knn(pairwise_l1(rows), k); }

/// Total variation between two raw signal columns: half their L1 distance.
inline double tv_distance(const SignalSet& s, std::size_t i, std::size_t j) {
    require(i < s.signal_count() && j < s.signal_count(), ErrorCode::IndexOutOfRange, "signal index out of range");
    return 0.5 * l1_distance(s.column(i), s.column(j));
}

inline double euclidean_distance(const SignalSet& s, std::size_t i, std::size_t j) {
    require(i < s.signal_count() && j < s.signal_count(), ErrorCode::IndexOutOfRange, "signal index out of range");
    auto a = s.column(i), b = s.column(j);
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(acc);
}

template <typename PairDistance>
DistanceMatrix pairwise_signal_distance(const SignalSet& s, std::string name, PairDistance&& dist) {
    const std::size_t m = s.signal_count();
    DistanceMatrix dm(m, std::move(name));
    parallel_for(m, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double d = dist(s, i, j);
            dm(i, j) = d;
            dm(j, i) = d;
        }
    });
    if (!s.labels().empty()) dm.set_labels(s.labels());
    return dm;
}

inline DistanceMatrix pairwise_tv(const SignalSet& s) {
    return pairwise_signal_distance(s, "tv", [](const SignalSet& x, std::size_t i, std::size_t j) {
        return tv_distance(x, i, j);
    });
}

/// Total variation after pushing every signal `steps` times through the
/// walk: the one-step graph-aware variant of the plain TV baseline.
inline DistanceMatrix pairwise_tv_diffused(const DiffusionOperator& op, const SignalSet& s, std::size_t steps = 1) {
    auto dm = pairwise_tv(apply_diffusion(op, s, steps));
    dm.set_metric_name("tv-diffused");
    return dm;
}

inline DistanceMatrix pairwise_euclidean(const SignalSet& s) {
    return pairwise_signal_distance(s, "euclidean", [](const SignalSet& x, std::size_t i, std::size_t j) {
        return euclidean_distance(x, i, j);
    });
}

} // namespace udemd
