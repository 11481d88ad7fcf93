#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "udemd/udemd.hpp"

namespace support {

using Dense = std::vector<std::vector<double>>;

// Random-walk matrix straight from adjacency weights, no sparse code.
inline Dense dense_walk(const udemd::Graph& g, double laziness = 0.0) {
    const std::size_t n = g.node_count();
    Dense p(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < n; ++j) deg += g.weight(i, j);
        for (std::size_t j = 0; j < n; ++j) p[i][j] = (1.0 - laziness) * g.weight(i, j) / deg;
        p[i][i] += laziness;
    }
    return p;
}

inline Dense matmul(const Dense& a, const Dense& b) {
    const std::size_t n = a.size();
    Dense c(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline Dense matpow(const Dense& p, std::size_t t) {
    const std::size_t n = p.size();
    Dense r(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) r[i][i] = 1.0;
    for (std::size_t s = 0; s < t; ++s) r = matmul(r, p);
    return r;
}

// Row vector times matrix.
inline std::vector<double> push(const std::vector<double>& x, const Dense& p) {
    std::vector<double> y(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p.size(); ++j) y[j] += x[i] * p[i][j];
    return y;
}

// Embedding row of one signal from explicit dense powers P^{2^k}.
inline std::vector<double> dense_embedding_row(const Dense& p, const std::vector<double>& mu, unsigned K, double alpha) {
    std::vector<std::vector<double>> scales;
    for (unsigned k = 0; k <= K; ++k) scales.push_back(push(mu, matpow(p, std::size_t{1} << k)));
    std::vector<double> row;
    for (unsigned k = 0; k < K; ++k) {
        const double w = std::pow(2.0, -(static_cast<double>(K) - k - 1.0) * alpha);
        for (std::size_t v = 0; v < mu.size(); ++v) row.push_back(w * (scales[k + 1][v] - scales[k][v]));
    }
    row.insert(row.end(), scales[K].begin(), scales[K].end());
    return row;
}

inline udemd::SignalSet random_distributions(std::size_t n, std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    udemd::SignalSet s(n, m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto x = udemd::sample_dirichlet(n, 1.0, rng);
        std::copy(x.begin(), x.end(), s.column(j).begin());
    }
    s.set_normalized(true);
    return s;
}

inline udemd::Graph random_graph(std::size_t n, std::uint64_t seed, double p = 0.2, bool weighted = true) {
    return udemd::random_connected_graph(n, {p, weighted ? 0.5 : 1.0, weighted ? 2.0 : 1.0}, seed);
}

// Exact transport optimum by enumerating every vertex of the
// transportation polytope. Masses are integers; every vertex arises from
// repeatedly saturating some cell with min(supply, demand), so a memoized
// search over those choices visits them all.
inline double brute_force_emd(const std::vector<int>& supply, const std::vector<int>& demand,
                              const std::function<double(std::size_t, std::size_t)>& cost) {
    std::map<std::pair<std::vector<int>, std::vector<int>>, double> memo;
    std::function<double(const std::vector<int>&, const std::vector<int>&)> solve =
        [&](const std::vector<int>& s, const std::vector<int>& d) -> double {
        bool empty = true;
        for (int v : s) empty = empty && v == 0;
        if (empty) return 0.0;
        auto key = std::make_pair(s, d);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == 0) continue;
            for (std::size_t j = 0; j < d.size(); ++j) {
                if (d[j] == 0) continue;
                const int q = std::min(s[i], d[j]);
                auto s2 = s;
                auto d2 = d;
                s2[i] -= q;
                d2[j] -= q;
                best = std::min(best, q * cost(i, j) + solve(s2, d2));
            }
        }
        memo[key] = best;
        return best;
    };
    return solve(supply, demand);
}

} // namespace support
