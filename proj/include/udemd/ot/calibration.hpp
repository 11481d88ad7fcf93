#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "udemd/error.hpp"
#include "udemd/generators.hpp"
#include "udemd/graph.hpp"
#include "udemd/ot/oracle.hpp"
#include "udemd/parallel.hpp"
#include "udemd/random.hpp"

namespace udemd::ot {

struct CalibrationOptions {
    std::size_t trials = 50;
    std::size_t nodes = 15;
    std::uint64_t seed = 0;
    double extra_edge_probability = 0.2;
    double min_weight = 0.5;
    double max_weight = 2.0;
    // TV penalties, as fractions of each instance's geodesic diameter.
    std::vector<double> penalty_fractions{0.25, 0.5, 0.75};
    // Ratio search range for lambda_t / lambda_u.
    double ratio_min = 0.25;
    double ratio_max = 4.0;
    std::size_t grid_points = 33;
    std::size_t refine_iterations = 60;
};

struct CalibrationReport {
    struct GridPoint {
        double ratio = 0.0;
        double discrepancy = 0.0;
    };

    std::size_t trials = 0;
    std::size_t nodes = 0;
    std::uint64_t seed = 0;
    std::vector<double> penalty_fractions;
    double best_ratio = 0.0;
    /// Mean relative |W_{d_t} - TV-UW_u| / TV-UW_u at the best ratio.
    double residual = 0.0;
    double max_residual = 0.0;
    /// Largest spread among exact, truncated and unbalanced costs when both
    /// levels are at or above the diameter.
    double degenerate_gap = 0.0;
    std::vector<GridPoint> grid;
};

inline void to_json(nlohmann::json& j, const CalibrationReport::GridPoint& p) {
    j = nlohmann::json{{"ratio", p.ratio}, {"discrepancy", p.discrepancy}};
}
inline void from_json(const nlohmann::json& j, CalibrationReport::GridPoint& p) {
    j.at("ratio").get_to(p.ratio);
    j.at("discrepancy").get_to(p.discrepancy);
}

inline void to_json(nlohmann::json& j, const CalibrationReport& r) {
    j = nlohmann::json{{"trials", r.trials},
                       {"nodes", r.nodes},
                       {"seed", r.seed},
                       {"penalty_fractions", r.penalty_fractions},
                       {"best_ratio", r.best_ratio},
                       {"residual", r.residual},
                       {"max_residual", r.max_residual},
                       {"degenerate_gap", r.degenerate_gap},
                       {"grid", r.grid}};
}
inline void from_json(const nlohmann::json& j, CalibrationReport& r) {
    j.at("trials").get_to(r.trials);
    j.at("nodes").get_to(r.nodes);
    j.at("seed").get_to(r.seed);
    j.at("penalty_fractions").get_to(r.penalty_fractions);
    j.at("best_ratio").get_to(r.best_ratio);
    j.at("residual").get_to(r.residual);
    j.at("max_residual").get_to(r.max_residual);
    j.at("degenerate_gap").get_to(r.degenerate_gap);
    j.at("grid").get_to(r.grid);
}

namespace detail {

struct CalibrationCase {
    CostMatrix cost;
    std::vector<double> mu, nu;
    double diameter = 0.0;
};

inline CalibrationCase calibration_case(const CalibrationOptions& opt, std::size_t trial) {
    const std::uint64_t s = mix_seed(opt.seed, trial);
    const Graph g = random_connected_graph(
        opt.nodes, {opt.extra_edge_probability, opt.min_weight, opt.max_weight}, s);
    CalibrationCase c;
    c.cost = CostMatrix::from_geodesics(all_pairs_geodesics(g));
    c.diameter = c.cost.max_entry();
    std::mt19937_64 rng(mix_seed(s, 1));
    c.mu = sample_dirichlet(opt.nodes, 1.0, rng);
    c.nu = sample_dirichlet(opt.nodes, 1.0, rng);
    return c;
}

} // namespace detail

/// Measures the ratio lambda_t / lambda_u at which exact transport on the
/// truncated cost min(lambda_t, d) best matches TV-unbalanced transport with
/// penalty lambda_u. Log-spaced grid search, then golden-section refinement
/// around the best grid point.
inline CalibrationReport lemma1_calibration(const CalibrationOptions& opt) {
    require(opt.trials > 0 && opt.nodes >= 2, ErrorCode::InvalidArgument, "need trials > 0 and nodes >= 2");
    require(!opt.penalty_fractions.empty(), ErrorCode::InvalidArgument, "empty penalty grid");
    require(opt.ratio_min > 0.0 && opt.ratio_max > opt.ratio_min && opt.grid_points >= 3,
            ErrorCode::InvalidArgument, "invalid ratio search range");

    std::vector<detail::CalibrationCase> cases(opt.trials);
    parallel_for(opt.trials, [&](std::size_t t) { cases[t] = detail::calibration_case(opt, t); });

    const std::size_t per_case = opt.penalty_fractions.size();
    const std::size_t jobs = opt.trials * per_case;
    std::vector<double> unbalanced(jobs);
    parallel_for(jobs, [&](std::size_t k) {
        const auto& c = cases[k / per_case];
        const double lam = opt.penalty_fractions[k % per_case] * c.diameter;
        unbalanced[k] = tv_unbalanced_emd(c.cost, c.mu, c.nu, lam).cost;
    });

    std::vector<double> rel(jobs);
    auto discrepancy = [&](double ratio, double* worst) {
        parallel_for(jobs, [&](std::size_t k) {
            const auto& c = cases[k / per_case];
            const double lam = opt.penalty_fractions[k % per_case] * c.diameter;
            const double w = exact_emd(truncate_cost(c.cost, ratio * lam), c.mu, c.nu).cost;
            rel[k] = std::abs(w - unbalanced[k]) / std::max(unbalanced[k], 1e-300);
        });
        if (worst) *worst = *std::max_element(rel.begin(), rel.end());
        double s = 0.0;
        for (double v : rel) s += v;
        return s / static_cast<double>(jobs);
    };

    CalibrationReport report;
    report.trials = opt.trials;
    report.nodes = opt.nodes;
    report.seed = opt.seed;
    report.penalty_fractions = opt.penalty_fractions;

    const double lo = std::log(opt.ratio_min), hi = std::log(opt.ratio_max);
    std::size_t best = 0;
    for (std::size_t i = 0; i < opt.grid_points; ++i) {
        const double r = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(opt.grid_points - 1));
        report.grid.push_back({r, discrepancy(r, nullptr)});
        if (report.grid[i].discrepancy < report.grid[best].discrepancy) best = i;
    }

    double a = std::log(report.grid[best == 0 ? 0 : best - 1].ratio);
    double b = std::log(report.grid[std::min(best + 1, opt.grid_points - 1)].ratio);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = discrepancy(std::exp(x1), nullptr), f2 = discrepancy(std::exp(x2), nullptr);
    for (std::size_t it = 0; it < opt.refine_iterations && b - a > 1e-12; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = discrepancy(std::exp(x1), nullptr);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = discrepancy(std::exp(x2), nullptr);
        }
    }
    double best_r = std::exp(f1 <= f2 ? x1 : x2);
    double best_f = std::min(f1, f2);
    if (report.grid[best].discrepancy < best_f) {
        best_r = report.grid[best].ratio;
        best_f = report.grid[best].discrepancy;
    }
    report.best_ratio = best_r;
    report.residual = discrepancy(best_r, &report.max_residual);

    std::vector<double> gaps(opt.trials);
    parallel_for(opt.trials, [&](std::size_t t) {
        const auto& c = cases[t];
        const double big = c.diameter;
        const double w = exact_emd(c.cost, c.mu, c.nu).cost;
        const double wt = exact_emd(truncate_cost(c.cost, big), c.mu, c.nu).cost;
        const double wu = tv_unbalanced_emd(c.cost, c.mu, c.nu, big).cost;
        gaps[t] = std::max({w, wt, wu}) - std::min({w, wt, wu});
    });
    report.degenerate_gap = *std::max_element(gaps.begin(), gaps.end());
    return report;
}

} // namespace udemd::ot
