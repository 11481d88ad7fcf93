#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "udemd/error.hpp"

namespace udemd {

/// Nonnegative n x m matrix whose columns are signals over the n graph nodes.
/// Storage is column-major so each signal is a contiguous span.
class SignalSet {
public:
    SignalSet() = default;

    SignalSet(std::size_t nodes, std::size_t signals)
        : nodes_(nodes), signals_(signals), values_(nodes * signals, 0.0) {}

    SignalSet(std::size_t nodes, std::size_t signals, std::vector<double> column_major)
        : nodes_(nodes), signals_(signals), values_(std::move(column_major)) {
        require(values_.size() == nodes_ * signals_, ErrorCode::DimensionMismatch,
                "signal buffer size does not match n*m");
        for (double v : values_) {
            require(std::isfinite(v), ErrorCode::NonFiniteValue, "signal entry is not finite");
            require(v >= 0.0, ErrorCode::NegativeEntry, "signal entry is negative");
        }
    }

    std::size_t node_count() const noexcept { return nodes_; }
    std::size_t signal_count() const noexcept { return signals_; }

    std::span<const double> column(std::size_t j) const { return {values_.data() + j * nodes_, nodes_}; }
    std::span<double> column(std::size_t j) { return {values_.data() + j * nodes_, nodes_}; }

    double operator()(std::size_t node, std::size_t signal) const { return values_[signal * nodes_ + node]; }
    double& operator()(std::size_t node, std::size_t signal) { return values_[signal * nodes_ + node]; }

    const std::vector<double>& data() const noexcept { return values_; }

    double column_sum(std::size_t j) const {
        double s = 0.0;
        for (double v : column(j)) s += v;
        return s;
    }

    bool normalized() const noexcept { return normalized_; }
    void set_normalized(bool flag) noexcept { normalized_ = flag; }

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    void set_labels(std::vector<std::string> labels) {
        require(labels.empty() || labels.size() == signals_, ErrorCode::DimensionMismatch,
                "label count does not match signal count");
        labels_ = std::move(labels);
    }

    bool operator==(const SignalSet&) const = default;

private:
    std::size_t nodes_ = 0;
    std::size_t signals_ = 0;
    std::vector<double> values_;
    std::vector<std::string> labels_;
    bool normalized_ = false;
};

/// Rescales every column onto the probability simplex. Zero entries stay zero.
inline SignalSet normalize_columns(SignalSet s) {
    for (std::size_t j = 0; j < s.signal_count(); ++j) {
        const double total = s.column_sum(j);
        require(total > 0.0, ErrorCode::ZeroColumn, "column " + std::to_string(j) + " has zero mass");
        for (double& v : s.column(j)) v /= total;
    }
    s.set_normalized(true);
    return s;
}

} // namespace udemd
