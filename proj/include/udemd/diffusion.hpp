#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "udemd/error.hpp"
#include "udemd/graph.hpp"
#include "udemd/parallel.hpp"
#include "udemd/signal_set.hpp"

namespace udemd {

struct RandomWalkOptions {
    /// Holding probability beta: P = beta*I + (1 - beta)*D^-1 A. Zero gives
    /// the plain walk; any beta in (0, 1) makes the chain aperiodic.
    double laziness = 0.0;
    /// Density normalization A <- Q^-1 A Q^-1, Q = diag(row sums of A),
    /// applied before the row normalization.
    bool anisotropic = false;
};

/// Row-stochastic random-walk matrix built from a graph. Signals are pushed
/// forward as row vectors (x <- x P), which conserves total mass.
class DiffusionOperator {
public:
    std::size_t node_count() const noexcept { return n_; }
    std::size_t nnz() const noexcept { return cols_.size(); }
    const RandomWalkOptions& options() const noexcept { return options_; }
    const std::vector<double>& degree() const noexcept { return degree_; }
    std::uint64_t graph_fingerprint() const noexcept { return graph_fingerprint_; }

    /// Entry P[i, j].
    double at(std::size_t i, std::size_t j) const {
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
            if (cols_[p] == j) return vals_[p];
        return 0.0;
    }

    std::span<const std::size_t> row_indices(std::size_t i) const {
        return {cols_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::span<const double> row_values(std::size_t i) const {
        return {vals_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }

    double max_row_sum_error() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (double v : row_values(i)) s += v;
            worst = std::max(worst, std::abs(s - 1.0));
        }
        return worst;
    }

    /// out[j] = sum_i in[i] * P[i, j]; `in` and `out` must not alias.
    void push_forward(std::span<const double> in, std::span<double> out) const {
        for (std::size_t j = 0; j < n_; ++j) {
            double acc = 0.0;
            for (std::size_t p = t_row_ptr_[j]; p < t_row_ptr_[j + 1]; ++p) acc += t_vals_[p] * in[t_cols_[p]];
            out[j] = acc;
        }
    }

    /// Applies `steps` pushes, ping-ponging between `x` and `scratch`; the
    /// result is left in `x`.
    void push_forward(std::vector<double>& x, std::vector<double>& scratch, std::size_t steps) const {
        scratch.resize(n_);
        for (std::size_t s = 0; s < steps; ++s) {
            push_forward(std::span<const double>(x), std::span<double>(scratch));
            x.swap(scratch);
        }
    }

private:
    friend DiffusionOperator build_random_walk(const Graph&, const RandomWalkOptions&);

    std::size_t n_ = 0;
    RandomWalkOptions options_;
    std::uint64_t graph_fingerprint_ = 0;
    std::vector<double> degree_;
    std::vector<std::size_t> row_ptr_, cols_;
    std::vector<double> vals_;
    // Transpose of P, used for the gather-form push-forward.
    std::vector<std::size_t> t_row_ptr_, t_cols_;
    std::vector<double> t_vals_;
};

inline DiffusionOperator build_random_walk(const Graph& g, const RandomWalkOptions& options = {}) {
    require(options.laziness >= 0.0 && options.laziness < 1.0, ErrorCode::InvalidArgument,
            "laziness must lie in [0, 1)");
    const std::size_t n = g.node_count();
    DiffusionOperator op;
    op.n_ = n;
    op.options_ = options;
    op.graph_fingerprint_ = g.fingerprint();

    std::vector<double> weights = g.values();
    if (options.anisotropic) {
        const auto& q = g.degrees();
        for (std::size_t i = 0; i < n; ++i) {
            require(q[i] > 0.0, ErrorCode::ZeroDegreeNode, "node " + std::to_string(i) + " has zero degree");
            for (std::size_t p = g.row_ptr()[i]; p < g.row_ptr()[i + 1]; ++p)
                weights[p] /= q[i] * q[g.col_indices()[p]];
        }
    }

    op.degree_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = g.row_ptr()[i]; p < g.row_ptr()[i + 1]; ++p) op.degree_[i] += weights[p];

    const double beta = options.laziness;
    op.row_ptr_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        require(op.degree_[i] > 0.0, ErrorCode::ZeroDegreeNode, "node " + std::to_string(i) + " has zero degree");
        const bool needs_diag = beta > 0.0 && g.weight(i, i) == 0.0;
        op.row_ptr_[i + 1] = op.row_ptr_[i] + (g.row_ptr()[i + 1] - g.row_ptr()[i]) + (needs_diag ? 1 : 0);
    }
    op.cols_.resize(op.row_ptr_.back());
    op.vals_.resize(op.row_ptr_.back());
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t out = op.row_ptr_[i];
        bool diag_done = false;
        auto emit = [&](std::size_t j, double v) {
            op.cols_[out] = j;
            op.vals_[out] = v;
            ++out;
        };
        for (std::size_t p = g.row_ptr()[i]; p < g.row_ptr()[i + 1]; ++p) {
            const std::size_t j = g.col_indices()[p];
            if (beta > 0.0 && !diag_done && j > i && g.weight(i, i) == 0.0) {
                emit(i, beta);
                diag_done = true;
            }
            double v = (1.0 - beta) * weights[p] / op.degree_[i];
            if (j == i) {
                v += beta;
                diag_done = true;
            }
            emit(j, v);
        }
        if (beta > 0.0 && !diag_done) emit(i, beta);
    }

    // Explicit transpose: counting sort by column.
    op.t_row_ptr_.assign(n + 1, 0);
    for (auto j : op.cols_) ++op.t_row_ptr_[j + 1];
    for (std::size_t j = 0; j < n; ++j) op.t_row_ptr_[j + 1] += op.t_row_ptr_[j];
    op.t_cols_.resize(op.cols_.size());
    op.t_vals_.resize(op.vals_.size());
    std::vector<std::size_t> cursor(op.t_row_ptr_.begin(), op.t_row_ptr_.end() - 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = op.row_ptr_[i]; p < op.row_ptr_[i + 1]; ++p) {
            const auto j = op.cols_[p];
            op.t_cols_[cursor[j]] = i;
            op.t_vals_[cursor[j]] = op.vals_[p];
            ++cursor[j];
        }
    return op;
}

/// Pushes every column forward `steps` times. Never forms a power of P.
inline SignalSet apply_diffusion(const DiffusionOperator& op, const SignalSet& signals, std::size_t steps) {
    require(signals.node_count() == op.node_count(), ErrorCode::DimensionMismatch,
            "signals have " + std::to_string(signals.node_count()) + " rows but the operator has " +
                std::to_string(op.node_count()) + " nodes");
    require(steps > 0, ErrorCode::InvalidArgument, "steps must be positive");
    SignalSet out = signals;
    parallel_for(signals.signal_count(), [&](std::size_t j) {
        std::vector<double> x(signals.column(j).begin(), signals.column(j).end()), scratch;
        op.push_forward(x, scratch, steps);
        auto dst = out.column(j);
        std::copy(x.begin(), x.end(), dst.begin());
    });
    return out;
}

} // namespace udemd
