#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <iterator>
#include <map>
#include <numeric>
#include <vector>

#include "udemd/error.hpp"
#include "udemd/metric.hpp"
#include "udemd/parallel.hpp"

namespace udemd {

using LabelVector = std::vector<int>;

/// Mean over queries of |predicted top-k  intersect  true top-k| / k.
inline double precision_at_k(const NeighborList& predicted, const NeighborList& truth, std::size_t k) {
    require(k > 0, ErrorCode::InvalidArgument, "k must be positive");
    require(predicted.query_count() == truth.query_count(), ErrorCode::DimensionMismatch,
            "neighbor lists cover different query counts");
    require(predicted.query_count() > 0, ErrorCode::InvalidArgument, "no queries");
    double total = 0.0;
    std::vector<std::size_t> a, b;
    for (std::size_t q = 0; q < predicted.query_count(); ++q) {
        const auto& p = predicted.neighbors[q];
        const auto& t = truth.neighbors[q];
        require(p.size() >= k && t.size() >= k, ErrorCode::KTooLarge, "neighbor list shorter than k");
        a.clear();
        b.clear();
        for (std::size_t i = 0; i < k; ++i) {
            a.push_back(p[i].index);
            b.push_back(t[i].index);
        }
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        std::vector<std::size_t> common;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
        total += static_cast<double>(common.size()) / static_cast<double>(k);
    }
    return total / static_cast<double>(predicted.query_count());
}

namespace detail {

// Relabels to 0..c-1 in order of first appearance.
inline std::vector<std::size_t> dense_labels(const LabelVector& labels, std::size_t* classes) {
    std::map<int, std::size_t> ids;
    std::vector<std::size_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids.try_emplace(labels[i], ids.size()).first->second;
    *classes = ids.size();
    return out;
}

struct Contingency {
    std::size_t n = 0, rows = 0, cols = 0;
    std::vector<double> table;  // rows x cols
    std::vector<double> a, b;   // row and column sums
};

inline Contingency contingency(const LabelVector& pred, const LabelVector& truth) {
    require(pred.size() == truth.size(), ErrorCode::InvalidLabels, "label vectors differ in length");
    require(!pred.empty(), ErrorCode::InvalidLabels, "empty label vector");
    Contingency c;
    c.n = pred.size();
    const auto u = dense_labels(truth, &c.rows);
    const auto v = dense_labels(pred, &c.cols);
    c.table.assign(c.rows * c.cols, 0.0);
    c.a.assign(c.rows, 0.0);
    c.b.assign(c.cols, 0.0);
    for (std::size_t i = 0; i < c.n; ++i) {
        c.table[u[i] * c.cols + v[i]] += 1.0;
        c.a[u[i]] += 1.0;
        c.b[v[i]] += 1.0;
    }
    return c;
}

inline double entropy(const std::vector<double>& counts, double n) {
    double h = 0.0;
    for (double x : counts)
        if (x > 0.0) h -= x / n * std::log(x / n);
    return h;
}

inline double mutual_information(const Contingency& c) {
    const double n = static_cast<double>(c.n);
    double mi = 0.0;
    for (std::size_t i = 0; i < c.rows; ++i)
        for (std::size_t j = 0; j < c.cols; ++j) {
            const double x = c.table[i * c.cols + j];
            if (x > 0.0) mi += x / n * std::log(n * x / (c.a[i] * c.b[j]));
        }
    return std::max(0.0, mi);
}

// Expected mutual information under the hypergeometric permutation model.
inline double expected_mutual_information(const Contingency& c) {
    const double n = static_cast<double>(c.n);
    const double lg_n = std::lgamma(n + 1.0);
    double emi = 0.0;
    for (double ai : c.a)
        for (double bj : c.b) {
            const double lo = std::max(1.0, ai + bj - n), hi = std::min(ai, bj);
            const double base = std::lgamma(ai + 1.0) + std::lgamma(bj + 1.0) + std::lgamma(n - ai + 1.0) +
                                std::lgamma(n - bj + 1.0) - lg_n;
            for (double nij = lo; nij <= hi; nij += 1.0) {
                const double lp = base - std::lgamma(nij + 1.0) - std::lgamma(ai - nij + 1.0) -
                                  std::lgamma(bj - nij + 1.0) - std::lgamma(n - ai - bj + nij + 1.0);
                emi += nij / n * std::log(n * nij / (ai * bj)) * std::exp(lp);
            }
        }
    return emi;
}

inline bool trivial_agreement(const Contingency& c) {
    return (c.rows == 1 && c.cols == 1) || (c.rows == c.n && c.cols == c.n);
}

} // namespace detail

/// Adjusted Rand index.
inline double ari(const LabelVector& pred, const LabelVector& truth) {
    const auto c = detail::contingency(pred, truth);
    auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
    double index = 0.0, sa = 0.0, sb = 0.0;
    for (double x : c.table) index += pairs(x);
    for (double x : c.a) sa += pairs(x);
    for (double x : c.b) sb += pairs(x);
    const double total = pairs(static_cast<double>(c.n));
    const double expected = total > 0.0 ? sa * sb / total : 0.0;
    const double maximum = 0.5 * (sa + sb);
    if (maximum == expected) return 1.0;
    return (index - expected) / (maximum - expected);
}

/// Normalized mutual information, arithmetic-mean normalization.
inline double nmi(const LabelVector& pred, const LabelVector& truth) {
    const auto c = detail::contingency(pred, truth);
    if (c.rows == 1 && c.cols == 1) return 1.0;
    const double mi = detail::mutual_information(c);
    if (mi <= 0.0) return 0.0;
    const double n = static_cast<double>(c.n);
    const double norm = 0.5 * (detail::entropy(c.a, n) + detail::entropy(c.b, n));
    return mi / std::max(norm, std::numeric_limits<double>::epsilon());
}

/// Adjusted mutual information, arithmetic-mean normalization.
inline double ami(const LabelVector& pred, const LabelVector& truth) {
    const auto c = detail::contingency(pred, truth);
    if (detail::trivial_agreement(c)) return 1.0;
    const double n = static_cast<double>(c.n);
    const double mi = detail::mutual_information(c);
    const double emi = detail::expected_mutual_information(c);
    const double mean_h = 0.5 * (detail::entropy(c.a, n) + detail::entropy(c.b, n));
    double denom = mean_h - emi;
    const double eps = std::numeric_limits<double>::epsilon();
    denom = denom < 0.0 ? std::min(denom, -eps) : std::max(denom, eps);
    return (mi - emi) / denom;
}

/// Silhouette on a precomputed distance matrix. Points in singleton
/// clusters score 0.
inline double silhouette(const DistanceMatrix& dm, const LabelVector& labels) {
    const std::size_t m = dm.size();
    require(labels.size() == m, ErrorCode::InvalidLabels, "label count does not match the distance matrix");
    std::size_t k = 0;
    const auto lab = detail::dense_labels(labels, &k);
    require(k >= 2, ErrorCode::InvalidLabels, "silhouette needs at least two clusters");
    std::vector<double> size(k, 0.0);
    for (auto l : lab) size[l] += 1.0;
    std::vector<double> score(m, 0.0);
    parallel_for(m, [&](std::size_t i) {
        std::vector<double> sum(k, 0.0);
        for (std::size_t j = 0; j < m; ++j) sum[lab[j]] += dm(i, j);
        const std::size_t own = lab[i];
        if (size[own] <= 1.0) return;
        const double a = sum[own] / (size[own] - 1.0);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c)
            if (c != own) b = std::min(b, sum[c] / size[c]);
        const double d = std::max(a, b);
        score[i] = d > 0.0 ? (b - a) / d : 0.0;
    });
    return std::accumulate(score.begin(), score.end(), 0.0) / static_cast<double>(m);
}

/// k-medoids (PAM): greedy BUILD followed by best-improvement SWAP. Fully
/// deterministic; ties go to the lowest index. Labels are numbered by
/// ascending medoid index.
inline LabelVector cluster_from_distances(const DistanceMatrix& dm, std::size_t num_clusters) {
    const std::size_t m = dm.size();
    require(num_clusters >= 1 && num_clusters <= m, ErrorCode::InvalidArgument, "need 1 <= clusters <= points");
    constexpr double inf = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> medoids;
    std::vector<char> is_medoid(m, 0);
    std::vector<double> nearest(m, inf);
    for (std::size_t c = 0; c < num_clusters; ++c) {
        std::size_t pick = m;
        double best = inf;
        for (std::size_t o = 0; o < m; ++o) {
            if (is_medoid[o]) continue;
            double cost = 0.0;
            for (std::size_t j = 0; j < m; ++j) cost += std::min(nearest[j], dm(o, j));
            if (cost < best) {
                best = cost;
                pick = o;
            }
        }
        medoids.push_back(pick);
        is_medoid[pick] = 1;
        for (std::size_t j = 0; j < m; ++j) nearest[j] = std::min(nearest[j], dm(pick, j));
    }

    auto total_cost = [&] {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            double d = inf;
            for (auto md : medoids) d = std::min(d, dm(md, j));
            s += d;
        }
        return s;
    };

    double current = total_cost();
    for (std::size_t round = 0; round < 100 * m; ++round) {
        // nearest and second-nearest medoid distance per point
        std::vector<double> d1(m, inf), d2(m, inf);
        std::vector<std::size_t> near(m, 0);
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t s = 0; s < medoids.size(); ++s) {
                const double d = dm(medoids[s], j);
                if (d < d1[j]) {
                    d2[j] = d1[j];
                    d1[j] = d;
                    near[j] = s;
                } else if (d < d2[j]) {
                    d2[j] = d;
                }
            }
        double best_delta = 0.0;
        std::size_t best_s = 0, best_o = m;
        for (std::size_t s = 0; s < medoids.size(); ++s)
            for (std::size_t o = 0; o < m; ++o) {
                if (is_medoid[o]) continue;
                double delta = 0.0;
                for (std::size_t j = 0; j < m; ++j) {
                    const double dj = dm(o, j);
                    if (near[j] == s)
                        delta += std::min(dj, d2[j]) - d1[j];
                    else if (dj < d1[j])
                        delta += dj - d1[j];
                }
                if (delta < best_delta) {
                    best_delta = delta;
                    best_s = s;
                    best_o = o;
                }
            }
        if (best_o == m || best_delta > -1e-12 * std::max(1.0, current)) break;
        is_medoid[medoids[best_s]] = 0;
        medoids[best_s] = best_o;
        is_medoid[best_o] = 1;
        current = total_cost();
    }

    std::sort(medoids.begin(), medoids.end());
    LabelVector labels(m, 0);
    for (std::size_t j = 0; j < m; ++j) {
        double best = inf;
        for (std::size_t s = 0; s < medoids.size(); ++s)
            if (dm(medoids[s], j) < best) {
                best = dm(medoids[s], j);
                labels[j] = static_cast<int>(s);
            }
    }
    return labels;
}

} // namespace udemd
