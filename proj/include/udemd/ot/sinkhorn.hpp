#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "udemd/error.hpp"
#include "udemd/ot/oracle.hpp"

namespace udemd::ot {

struct SinkhornOptions {
    double epsilon = 1e-2;
    std::size_t max_iter = 10000;
    double tol = 1e-9;
    // Start from a large epsilon and halve down to the target; each
    // intermediate stage warm-starts the next.
    bool epsilon_scaling = true;
    std::size_t stage_iter = 200;
};

namespace detail {

inline double log_sum_exp(std::span<const double> v) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double x : v) hi = std::max(hi, x);
    if (!std::isfinite(hi)) return hi;
    double s = 0.0;
    for (double x : v) s += std::exp(x - hi);
    return hi + std::log(s);
}

} // namespace detail

/// Entropic OT in the log domain, restricted to the supports of mu and nu.
/// The reported cost is <plan, C> (no entropy term). On non-convergence the
/// iterate with the smallest marginal violation is returned with
/// converged = false.
inline TransportResult sinkhorn(const CostMatrix& cost, std::span<const double> mu, std::span<const double> nu,
                                const SinkhornOptions& opt = {}) {
    const std::size_t n = cost.size();
    require(opt.epsilon > 0.0 && std::isfinite(opt.epsilon), ErrorCode::InvalidArgument, "epsilon must be > 0");
    require(opt.max_iter > 0, ErrorCode::InvalidArgument, "max_iter must be > 0");
    detail::check_distribution(mu, n, "mu");
    detail::check_distribution(nu, n, "nu");
    const double mm = detail::mass(mu), nm = detail::mass(nu);
    require(std::abs(mm - nm) <= 1e-9, ErrorCode::MassMismatch, "masses differ");

    TransportResult out;
    out.n = n;
    out.plan.assign(n * n, 0.0);
    if (mm == 0.0) {
        out.converged = true;
        return out;
    }

    const auto rows = detail::support(mu), cols = detail::support(nu);
    const std::size_t r = rows.size(), c = cols.size();
    std::vector<double> C(r * c), log_a(r), log_b(c);
    double max_cost = 0.0;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            C[i * c + j] = cost(rows[i], cols[j]);
            max_cost = std::max(max_cost, C[i * c + j]);
        }
    for (std::size_t i = 0; i < r; ++i) log_a[i] = std::log(mu[rows[i]]);
    for (std::size_t j = 0; j < c; ++j) log_b[j] = std::log(nu[cols[j]] * mm / nm);

    std::vector<double> f(r, 0.0), g(c, 0.0), buf(std::max(r, c));
    double eps = opt.epsilon;
    if (opt.epsilon_scaling) eps = std::max(opt.epsilon, max_cost);

    auto update = [&](double e) {
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < c; ++j) buf[j] = (g[j] - C[i * c + j]) / e;
            f[i] = e * (log_a[i] - detail::log_sum_exp({buf.data(), c}));
        }
        for (std::size_t j = 0; j < c; ++j) {
            for (std::size_t i = 0; i < r; ++i) buf[i] = (f[i] - C[i * c + j]) / e;
            g[j] = e * (log_b[j] - detail::log_sum_exp({buf.data(), r}));
        }
    };
    // After a g-update columns are exact; the violation sits in the rows.
    auto row_violation = [&](double e) {
        double worst = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < c; ++j) s += std::exp((f[i] + g[j] - C[i * c + j]) / e);
            worst = std::max(worst, std::abs(s - mu[rows[i]]));
        }
        return worst;
    };

    std::size_t used = 0;
    while (eps > opt.epsilon) {
        for (std::size_t it = 0; it < opt.stage_iter && used < opt.max_iter; ++it, ++used) {
            update(eps);
            if (row_violation(eps) < opt.tol) break;
        }
        eps = std::max(opt.epsilon, eps / 2.0);
    }

    std::vector<double> best_f = f, best_g = g;
    double best_err = std::numeric_limits<double>::infinity();
    bool converged = false;
    while (used < opt.max_iter) {
        update(eps);
        ++used;
        const double err = row_violation(eps);
        if (err < best_err) {
            best_err = err;
            best_f = f;
            best_g = g;
        }
        if (err < opt.tol) {
            converged = true;
            break;
        }
    }
    if (!std::isfinite(best_err)) {
        // budget was spent during scaling
        best_err = row_violation(eps);
        best_f = f;
        best_g = g;
    }

    double total = 0.0;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            const double p = std::exp((best_f[i] + best_g[j] - C[i * c + j]) / eps);
            out.plan[rows[i] * n + cols[j]] = p;
            total += p * C[i * c + j];
        }
    out.cost = total;
    out.iterations = used;
    out.converged = converged;
    return out;
}

} // namespace udemd::ot
