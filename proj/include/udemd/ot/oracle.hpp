#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "udemd/error.hpp"
#include "udemd/graph.hpp"
#include "udemd/ot/dense_lp.hpp"
#include "udemd/ot/network_simplex.hpp"

namespace udemd::ot {

/// Symmetric nonnegative ground-cost matrix with zero diagonal.
class CostMatrix {
public:
    static constexpr std::size_t metric_check_cap = 200;

    CostMatrix() = default;

    CostMatrix(std::size_t n, std::vector<double> values) : n_(n), values_(std::move(values)) {
        require(values_.size() == n_ * n_, ErrorCode::DimensionMismatch, "cost matrix must be n x n");
        for (std::size_t i = 0; i < n_; ++i) {
            require((*this)(i, i) == 0.0, ErrorCode::InvalidArgument, "cost matrix diagonal must be zero");
            for (std::size_t j = 0; j < n_; ++j) {
                const double c = (*this)(i, j);
                require(std::isfinite(c) && c >= 0.0, ErrorCode::InvalidArgument, "costs must be finite and >= 0");
                require(c == (*this)(j, i), ErrorCode::InvalidArgument, "cost matrix must be symmetric");
            }
        }
        if (n_ <= metric_check_cap) is_metric_ = max_triangle_violation() <= 1e-12 * std::max(1.0, max_entry());
    }

    static CostMatrix from_geodesics(const GeodesicTable& table) {
        const std::size_t n = table.node_count();
        require(table.source_count() == n, ErrorCode::DimensionMismatch, "need all-pairs geodesics");
        std::vector<double> v(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) v[i * n + j] = std::min(table(i, j), table(j, i));
        return CostMatrix(n, std::move(v));
    }

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    const std::vector<double>& data() const noexcept { return values_; }

    /// Verified on construction for n <= metric_check_cap; false otherwise.
    bool is_metric() const noexcept { return is_metric_; }
    std::optional<double> truncation() const noexcept { return truncation_; }

    double max_entry() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }

    /// max over triples of d(i,k) - d(i,j) - d(j,k), clamped at 0.
    double max_triangle_violation() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                for (std::size_t k = 0; k < n_; ++k)
                    worst = std::max(worst, (*this)(i, k) - (*this)(i, j) - (*this)(j, k));
        return worst;
    }

private:
    friend CostMatrix truncate_cost(const CostMatrix&, double);

    std::size_t n_ = 0;
    std::vector<double> values_;
    bool is_metric_ = false;
    std::optional<double> truncation_;
};

/// d_lambda(x, y) = min(lambda, d(x, y)).
inline CostMatrix truncate_cost(const CostMatrix& cost, double lambda) {
    require(lambda > 0.0, ErrorCode::InvalidArgument, "truncation level must be positive");
    std::vector<double> v = cost.data();
    for (auto& x : v) x = std::min(x, lambda);
    CostMatrix out(cost.size(), std::move(v));
    out.truncation_ = cost.truncation_ ? std::min(*cost.truncation_, lambda) : lambda;
    return out;
}

struct TransportResult {
    double cost = 0.0;
    std::size_t n = 0;
    std::vector<double> plan;            // n x n row-major
    std::vector<double> destroyed;       // per source node (unbalanced only)
    std::vector<double> created;         // per target node (unbalanced only)
    double destroyed_mass = 0.0;
    double created_mass = 0.0;
    double dual_objective = std::numeric_limits<double>::quiet_NaN();
    std::size_t iterations = 0;
    bool converged = false;

    double plan_at(std::size_t i, std::size_t j) const { return plan[i * n + j]; }
    double teleported_mass() const { return destroyed_mass; }

    /// Largest deviation of plan marginals (plus teleported mass) from mu, nu.
    double marginal_error(std::span<const double> mu, std::span<const double> nu) const {
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = destroyed.empty() ? 0.0 : destroyed[i];
            double col = created.empty() ? 0.0 : created[i];
            for (std::size_t j = 0; j < n; ++j) {
                row += plan[i * n + j];
                col += plan[j * n + i];
            }
            worst = std::max({worst, std::abs(row - mu[i]), std::abs(col - nu[i])});
        }
        return worst;
    }
};

namespace detail {

inline double mass(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0); }

inline void check_distribution(std::span<const double> x, std::size_t n, const char* name) {
    require(x.size() == n, ErrorCode::DimensionMismatch, std::string(name) + " has the wrong length");
    for (double v : x)
        require(std::isfinite(v) && v >= 0.0, ErrorCode::NegativeEntry, std::string(name) + " has a negative entry");
}

inline std::vector<std::size_t> support(std::span<const double> x) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > 0.0) s.push_back(i);
    return s;
}

/// Transport between supports, optionally with a dummy source/sink pair
/// charging `half_penalty` per unit created or destroyed.
inline TransportResult solve_transport(const CostMatrix& cost, std::span<const double> mu, std::span<const double> nu,
                                       std::optional<double> half_penalty) {
    const std::size_t n = cost.size();
    const auto rows = support(mu), cols = support(nu);
    const std::size_t r = rows.size(), c = cols.size();
    const bool dummy = half_penalty.has_value();
    const std::size_t sources = r + (dummy ? 1 : 0), sinks = c + (dummy ? 1 : 0);

    std::vector<NetworkSimplex::Arc> arcs;
    arcs.reserve(sources * sinks);
    for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = 0; b < c; ++b) arcs.push_back({a, sources + b, cost(rows[a], cols[b])});
    const double mu_mass = mass(mu), nu_mass = mass(nu);
    std::vector<double> supply(sources + sinks, 0.0);
    for (std::size_t a = 0; a < r; ++a) supply[a] = mu[rows[a]];
    const double nu_scale = dummy || nu_mass == 0.0 ? 1.0 : mu_mass / nu_mass;
    for (std::size_t b = 0; b < c; ++b) supply[sources + b] = -nu[cols[b]] * nu_scale;
    if (dummy) {
        const std::size_t dsrc = r, dsink = sources + c;
        for (std::size_t a = 0; a < r; ++a) arcs.push_back({a, dsink, *half_penalty});
        for (std::size_t b = 0; b < c; ++b) arcs.push_back({dsrc, sources + b, *half_penalty});
        arcs.push_back({dsrc, dsink, 0.0});
        supply[dsrc] = nu_mass;
        supply[dsink] = -mu_mass;
    }

    NetworkSimplex solver(sources + sinks, arcs, supply);
    const auto status = solver.run();
    require(status == NetworkSimplex::Status::Optimal, ErrorCode::SolverFailure,
            status == NetworkSimplex::Status::Infeasible ? "transport problem infeasible" : "iteration limit reached");

    TransportResult out;
    out.n = n;
    out.plan.assign(n * n, 0.0);
    for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = 0; b < c; ++b) out.plan[rows[a] * n + cols[b]] = solver.flow(a * c + b);
    if (dummy) {
        out.destroyed.assign(n, 0.0);
        out.created.assign(n, 0.0);
        const std::size_t base = r * c;
        for (std::size_t a = 0; a < r; ++a) out.destroyed[rows[a]] = solver.flow(base + a);
        for (std::size_t b = 0; b < c; ++b) out.created[cols[b]] = solver.flow(base + r + b);
        out.destroyed_mass = mass(out.destroyed);
        out.created_mass = mass(out.created);
    }
    out.cost = solver.total_cost();
    out.dual_objective = solver.dual_objective();
    out.iterations = solver.iterations();
    out.converged = true;
    return out;
}

} // namespace detail

inline constexpr std::size_t exact_emd_max_nodes = 2000;
inline constexpr std::size_t unbalanced_max_nodes = 500;
inline constexpr std::size_t dense_lp_max_nodes = 60;

/// Balanced optimal transport cost via network simplex.
inline TransportResult exact_emd(const CostMatrix& cost, std::span<const double> mu, std::span<const double> nu) {
    const std::size_t n = cost.size();
    require(n <= exact_emd_max_nodes, ErrorCode::InstanceTooLarge,
            "exact_emd supports n <= " + std::to_string(exact_emd_max_nodes));
    detail::check_distribution(mu, n, "mu");
    detail::check_distribution(nu, n, "nu");
    const double mm = detail::mass(mu), nm = detail::mass(nu);
    require(std::abs(mm - nm) <= 1e-9, ErrorCode::MassMismatch,
            "masses differ: " + std::to_string(mm) + " vs " + std::to_string(nm));
    if (mm == 0.0) {
        TransportResult empty;
        empty.n = n;
        empty.plan.assign(n * n, 0.0);
        empty.dual_objective = 0.0;
        empty.converged = true;
        return empty;
    }
    return detail::solve_transport(cost, mu, nu, std::nullopt);
}

/// TV-unbalanced transport: mass may be destroyed at a source or created
/// at a target at cost lambda/2 per unit each, so teleporting one unit
/// costs lambda. Solved as one min-cost flow with a dummy source and sink.
inline TransportResult tv_unbalanced_emd(const CostMatrix& cost, std::span<const double> mu,
                                         std::span<const double> nu, double lambda) {
    const std::size_t n = cost.size();
    require(n <= unbalanced_max_nodes, ErrorCode::InstanceTooLarge,
            "tv_unbalanced_emd supports n <= " + std::to_string(unbalanced_max_nodes));
    require(std::isfinite(lambda) && lambda >= 0.0, ErrorCode::InvalidArgument, "lambda must be >= 0");
    detail::check_distribution(mu, n, "mu");
    detail::check_distribution(nu, n, "nu");
    if (lambda == 0.0) {
        TransportResult out;
        out.n = n;
        out.plan.assign(n * n, 0.0);
        out.destroyed.assign(mu.begin(), mu.end());
        out.created.assign(nu.begin(), nu.end());
        out.destroyed_mass = detail::mass(mu);
        out.created_mass = detail::mass(nu);
        out.dual_objective = 0.0;
        out.converged = true;
        return out;
    }
    return detail::solve_transport(cost, mu, nu, 0.5 * lambda);
}

namespace detail {

inline TransportResult lp_transport(const CostMatrix& cost, std::span<const double> mu, std::span<const double> nu,
                                    std::optional<double> half_penalty) {
    const std::size_t n = cost.size();
    require(n <= dense_lp_max_nodes, ErrorCode::InstanceTooLarge,
            "dense LP path supports n <= " + std::to_string(dense_lp_max_nodes));
    const bool dummy = half_penalty.has_value();
    // Variables: plan (n*n), then destroyed (n) and created (n) if unbalanced.
    LinearProgram lp;
    lp.cols = n * n + (dummy ? 2 * n : 0);
    lp.rows = 2 * n;
    lp.a.assign(lp.rows * lp.cols, 0.0);
    lp.b.assign(lp.rows, 0.0);
    lp.c.assign(lp.cols, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            lp.c[i * n + j] = cost(i, j);
            lp.at(i, i * n + j) = 1.0;
            lp.at(n + j, i * n + j) = 1.0;
        }
    for (std::size_t i = 0; i < n; ++i) {
        lp.b[i] = mu[i];
        lp.b[n + i] = nu[i];
        if (dummy) {
            lp.at(i, n * n + i) = 1.0;
            lp.c[n * n + i] = *half_penalty;
            lp.at(n + i, n * n + n + i) = 1.0;
            lp.c[n * n + n + i] = *half_penalty;
        }
    }
    auto sol = DenseSimplex().solve(std::move(lp));
    require(sol.status == LpSolution::Status::Optimal, ErrorCode::SolverFailure, "dense LP did not reach optimality");
    TransportResult out;
    out.n = n;
    out.plan.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(n * n));
    if (dummy) {
        out.destroyed.assign(sol.x.begin() + static_cast<std::ptrdiff_t>(n * n),
                             sol.x.begin() + static_cast<std::ptrdiff_t>(n * n + n));
        out.created.assign(sol.x.begin() + static_cast<std::ptrdiff_t>(n * n + n), sol.x.end());
        out.destroyed_mass = mass(out.destroyed);
        out.created_mass = mass(out.created);
    }
    out.cost = sol.objective;
    out.iterations = sol.pivots;
    out.converged = true;
    return out;
}

} // namespace detail

/// Independent cross-check of exact_emd through a dense LP formulation.
inline TransportResult exact_emd_lp(const CostMatrix& cost, std::span<const double> mu, std::span<const double> nu) {
    detail::check_distribution(mu, cost.size(), "mu");
    detail::check_distribution(nu, cost.size(), "nu");
    require(std::abs(detail::mass(mu) - detail::mass(nu)) <= 1e-9, ErrorCode::MassMismatch, "masses differ");
    return detail::lp_transport(cost, mu, nu, std::nullopt);
}

/// Dense LP form of tv_unbalanced_emd: destroyed/created slack variables
/// priced at lambda/2 each.
inline TransportResult tv_unbalanced_emd_lp(const CostMatrix& cost, std::span<const double> mu,
                                            std::span<const double> nu, double lambda) {
    require(std::isfinite(lambda) && lambda >= 0.0, ErrorCode::InvalidArgument, "lambda must be >= 0");
    detail::check_distribution(mu, cost.size(), "mu");
    detail::check_distribution(nu, cost.size(), "nu");
    return detail::lp_transport(cost, mu, nu, 0.5 * lambda);
}

} // namespace udemd::ot
