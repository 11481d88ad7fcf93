#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "udemd/error.hpp"

namespace udemd::ot {

/// Standard-form linear program: min c.x subject to A x = b, x >= 0, with A
/// dense row-major (rows x cols).
struct LinearProgram {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> c;

    double& at(std::size_t r, std::size_t col) { return a[r * cols + col]; }
};

struct LpSolution {
    enum class Status { Optimal, Infeasible, Unbounded, IterationLimit } status = Status::IterationLimit;
    std::vector<double> x;
    double objective = 0.0;
    std::size_t pivots = 0;
};

/// Two-phase tableau simplex. Dantzig pricing, switching to Bland's rule
/// after a run of degenerate pivots. Redundant equality rows are dropped
/// after phase one. Meant for cross-checking small instances only.
class DenseSimplex {
public:
    explicit DenseSimplex(double tolerance = 1e-10) : tol_(tolerance) {}

    LpSolution solve(LinearProgram lp, std::size_t max_pivots = 200000) {
        require(lp.a.size() == lp.rows * lp.cols && lp.b.size() == lp.rows && lp.c.size() == lp.cols,
                ErrorCode::DimensionMismatch, "malformed linear program");
        m_ = lp.rows;
        n_ = lp.cols;
        width_ = n_ + m_ + 1;
        tab_.assign((m_ + 1) * width_, 0.0);
        basis_.assign(m_, 0);
        max_pivots_ = max_pivots;
        pivots_ = 0;

        for (std::size_t r = 0; r < m_; ++r) {
            const double sign = lp.b[r] < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n_; ++j) cell(r, j) = sign * lp.a[r * n_ + j];
            cell(r, n_ + r) = 1.0;
            rhs(r) = sign * lp.b[r];
            basis_[r] = n_ + r;
        }

        LpSolution sol;
        // Phase one: minimize the sum of artificials.
        std::fill(obj_row().begin(), obj_row().end(), 0.0);
        for (std::size_t r = 0; r < m_; ++r)
            for (std::size_t j = 0; j < width_; ++j)
                if (j < n_ || j == width_ - 1) obj(j) -= cell(r, j);
        allowed_ = n_;  // artificials never re-enter
        auto st = iterate();
        if (st != LpSolution::Status::Optimal) {
            sol.status = st;
            return sol;
        }
        double scale = 1.0;
        for (double v : lp.b) scale = std::max(scale, std::abs(v));
        if (-obj(width_ - 1) > 1e-9 * scale) {
            sol.status = LpSolution::Status::Infeasible;
            return sol;
        }
        drive_out_artificials();

        // Phase two with the real objective expressed in the current basis.
        std::fill(obj_row().begin(), obj_row().end(), 0.0);
        for (std::size_t j = 0; j < n_; ++j) obj(j) = lp.c[j];
        for (std::size_t r = 0; r < m_; ++r) {
            const std::size_t bcol = basis_[r];
            if (bcol >= n_) continue;
            const double cb = lp.c[bcol];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < width_; ++j) obj(j) -= cb * cell(r, j);
        }
        st = iterate();
        sol.status = st;
        sol.pivots = pivots_;
        if (st != LpSolution::Status::Optimal) return sol;
        sol.x.assign(n_, 0.0);
        for (std::size_t r = 0; r < m_; ++r)
            if (basis_[r] < n_) sol.x[basis_[r]] = std::max(0.0, rhs(r));
        sol.objective = 0.0;
        for (std::size_t j = 0; j < n_; ++j) sol.objective += lp.c[j] * sol.x[j];
        return sol;
    }

private:
    double& cell(std::size_t r, std::size_t j) { return tab_[r * width_ + j]; }
    double& rhs(std::size_t r) { return tab_[r * width_ + width_ - 1]; }
    double& obj(std::size_t j) { return tab_[m_ * width_ + j]; }
    std::span<double> obj_row() { return {tab_.data() + m_ * width_, width_}; }

    LpSolution::Status iterate() {
        std::size_t degenerate_run = 0;
        for (;;) {
            const bool bland = degenerate_run > 50;
            std::size_t enter = width_;
            double best = -tol_;
            for (std::size_t j = 0; j < allowed_; ++j) {
                if (obj(j) < best) {
                    enter = j;
                    if (bland) break;
                    best = obj(j);
                }
            }
            if (enter == width_) return LpSolution::Status::Optimal;

            std::size_t leave = m_;
            double ratio = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m_; ++r) {
                const double coef = cell(r, enter);
                if (coef <= tol_) continue;
                const double q = rhs(r) / coef;
                if (q < ratio - 1e-15 || (q <= ratio + 1e-15 && leave < m_ && basis_[r] < basis_[leave])) {
                    ratio = q;
                    leave = r;
                }
            }
            if (leave == m_) return LpSolution::Status::Unbounded;
            if (pivots_ >= max_pivots_) return LpSolution::Status::IterationLimit;
            degenerate_run = ratio <= 1e-15 ? degenerate_run + 1 : 0;
            pivot(leave, enter);
        }
    }

    void pivot(std::size_t r, std::size_t col) {
        ++pivots_;
        const double p = cell(r, col);
        for (std::size_t j = 0; j < width_; ++j) cell(r, j) /= p;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == r) continue;
            double* row_i = &tab_[i * width_];
            const double f = row_i[col];
            if (f == 0.0) continue;
            const double* row_r = &tab_[r * width_];
            for (std::size_t j = 0; j < width_; ++j) row_i[j] -= f * row_r[j];
            row_i[col] = 0.0;
        }
        basis_[r] = col;
    }

    void drive_out_artificials() {
        std::vector<std::size_t> drop;
        for (std::size_t r = 0; r < m_; ++r) {
            if (basis_[r] < n_) continue;
            std::size_t col = n_;
            double best = 1e-9;
            for (std::size_t j = 0; j < n_; ++j)
                if (std::abs(cell(r, j)) > best) {
                    best = std::abs(cell(r, j));
                    col = j;
                }
            if (col < n_)
                pivot(r, col);
            else
                drop.push_back(r);  // redundant constraint
        }
        if (drop.empty()) return;
        std::vector<double> kept;
        std::vector<std::size_t> kept_basis;
        std::size_t d = 0;
        for (std::size_t r = 0; r <= m_; ++r) {
            if (d < drop.size() && drop[d] == r) {
                ++d;
                continue;
            }
            kept.insert(kept.end(), tab_.begin() + static_cast<std::ptrdiff_t>(r * width_),
                        tab_.begin() + static_cast<std::ptrdiff_t>((r + 1) * width_));
            if (r < m_) kept_basis.push_back(basis_[r]);
        }
        tab_ = std::move(kept);
        basis_ = std::move(kept_basis);
        m_ = basis_.size();
    }

    double tol_;
    std::size_t m_ = 0, n_ = 0, width_ = 0, allowed_ = 0;
    std::size_t max_pivots_ = 0, pivots_ = 0;
    std::vector<double> tab_;
    std::vector<std::size_t> basis_;
};

} // namespace udemd::ot
