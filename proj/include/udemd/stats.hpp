#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "udemd/error.hpp"

namespace udemd::stats {

/// Average ranks (1-based). Values within `rel_tie` of each other, relative
/// to the larger magnitude, are treated as tied.
inline std::vector<double> average_ranks(std::span<const double> x, double rel_tie = 0.0) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n) {
            const double a = x[order[j - 1]], b = x[order[j]];
            if (b - a > rel_tie * std::max(std::abs(a), std::abs(b))) break;
            ++j;
        }
        const double r = 0.5 * static_cast<double>(i + j + 1);
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
        i = j;
    }
    return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, ErrorCode::DimensionMismatch, "need two equal-length samples");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

/// Spearman rank correlation (Pearson on average ranks).
inline double spearman(std::span<const double> x, std::span<const double> y, double rel_tie = 0.0) {
    const auto rx = average_ranks(x, rel_tie), ry = average_ranks(y, rel_tie);
    return pearson(rx, ry);
}

inline double median(std::vector<double> v) {
    require(!v.empty(), ErrorCode::InvalidArgument, "median of an empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline double mean(std::span<const double> v) {
    require(!v.empty(), ErrorCode::InvalidArgument, "mean of an empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, ErrorCode::DimensionMismatch, "need two equal-length samples");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    require(sxx > 0.0, ErrorCode::InvalidArgument, "x values are all equal");
    return {sxy / sxx, my - sxy / sxx * mx};
}

} // namespace udemd::stats
