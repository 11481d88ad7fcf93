#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "udemd/error.hpp"
#include "udemd/graph.hpp"
#include "udemd/metric.hpp"
#include "udemd/signal_set.hpp"

namespace udemd {

/// Cycle 0-1-...-(n-1)-0 with unit weights.
inline Graph gen_ring(std::size_t n) {
    require(n >= 3, ErrorCode::InvalidArgument, "a ring needs at least 3 nodes");
    std::vector<Edge> edges;
    edges.reserve(n);
    for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
    return Graph::from_edges(n, edges);
}

/// Path 0-1-...-(n-1) with unit weights.
inline Graph gen_path(std::size_t n) {
    require(n >= 2, ErrorCode::InvalidArgument, "a path needs at least 2 nodes");
    std::vector<Edge> edges;
    for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
    return Graph::from_edges(n, edges);
}

/// Adds a self-loop of the given weight at every node.
inline Graph with_self_loops(const Graph& g, double weight) {
    require(weight > 0.0, ErrorCode::InvalidArgument, "self-loop weight must be positive");
    std::vector<Edge> edges;
    for (const auto& e : g.edges())
        if (e.src != e.dst) edges.push_back(e);
    for (std::size_t i = 0; i < g.node_count(); ++i) edges.push_back({i, i, weight + g.weight(i, i)});
    return Graph::from_edges(g.node_count(), edges);
}

struct RandomGraphOptions {
    double extra_edge_probability = 0.0;  // per non-tree pair
    double min_weight = 1.0;
    double max_weight = 1.0;
};

/// Uniform random recursive tree (node i attaches to a uniform earlier
/// node) plus independent extra edges; connected by construction.
inline Graph random_connected_graph(std::size_t n, const RandomGraphOptions& opt, std::uint64_t seed) {
    require(n >= 2, ErrorCode::InvalidArgument, "random graph needs at least 2 nodes");
    require(opt.min_weight > 0.0 && opt.max_weight >= opt.min_weight, ErrorCode::InvalidArgument,
            "invalid weight range");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw_weight = [&] {
        if (opt.max_weight == opt.min_weight) return opt.min_weight;
        return opt.min_weight + (opt.max_weight - opt.min_weight) * unit(rng);
    };
    std::set<std::pair<std::size_t, std::size_t>> present;
    std::vector<Edge> edges;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t parent = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
        edges.push_back({parent, i, draw_weight()});
        present.insert({parent, i});
    }
    if (opt.extra_edge_probability > 0.0) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                if (present.count({i, j})) continue;
                if (unit(rng) < opt.extra_edge_probability) edges.push_back({i, j, draw_weight()});
            }
    }
    return Graph::from_edges(n, edges);
}

inline Graph random_tree(std::size_t n, std::uint64_t seed, double min_weight = 1.0, double max_weight = 1.0) {
    return random_connected_graph(n, {0.0, min_weight, max_weight}, seed);
}

struct SphereOptions {
    std::size_t distributions = 200;
    std::size_t points_per = 10;
    bool noise_spike = false;
    double spike_mass = 0.1;
    std::size_t knn_k = 10;
    double cluster_sigma = 0.1;
    std::uint64_t seed = 0;
    /// When nonzero, cluster means are themselves drawn around this many
    /// centers (spread super_sigma) instead of uniformly. Centers are
    /// uniform, redrawn until pairwise chords are at least super_separation.
    std::size_t super_clusters = 0;
    double super_sigma = 0.15;
    double super_separation = 1.0;
};

struct SphereDataset {
    Graph graph;
    SignalSet signals;
    /// For each distribution, every other distribution ordered by the
    /// great-circle distance between cluster means.
    NeighborList truth;
    std::vector<std::array<double, 3>> points;
    std::vector<std::array<double, 3>> means;
    /// Super-cluster of each distribution (all zero without planting).
    std::vector<int> groups;
};

namespace detail {

inline std::array<double, 3> normalized(std::array<double, 3> v) {
    const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    require(r > 0.0, ErrorCode::DegenerateCluster, "sampled a zero vector");
    return {v[0] / r, v[1] / r, v[2] / r};
}

inline std::array<double, 3> uniform_on_sphere(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (;;) {
        std::array<double, 3> v{gauss(rng), gauss(rng), gauss(rng)};
        if (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] > 1e-24) return normalized(v);
    }
}

inline double chord2(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

} // namespace detail

namespace detail {

// Adds the shortest point pairs joining connected components until the
// edge set is connected (Prim over components).
inline void bridge_components(const std::vector<std::array<double, 3>>& points, std::vector<Edge>& edges) {
    const std::size_t n = points.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : edges) parent[find(e.src)] = find(e.dst);
    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < n; ++i) members[find(i)].push_back(i);

    std::vector<char> in_tree(n, 0);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> from(n, 0);
    auto absorb = [&](std::size_t root) {
        for (std::size_t i : members[root]) in_tree[i] = 1;
        for (std::size_t i : members[root])
            for (std::size_t j = 0; j < n; ++j)
                if (!in_tree[j]) {
                    const double d = chord2(points[i], points[j]);
                    if (d < best[j]) {
                        best[j] = d;
                        from[j] = i;
                    }
                }
    };
    absorb(find(0));
    for (;;) {
        std::size_t pick = n;
        for (std::size_t j = 0; j < n; ++j)
            if (!in_tree[j] && (pick == n || best[j] < best[pick])) pick = j;
        if (pick == n) break;
        edges.push_back({std::min(pick, from[pick]), std::max(pick, from[pick]), 1.0});
        absorb(find(pick));
    }
}

} // namespace detail

/// Symmetric k-nearest-neighbor graph (union rule, unit weights) over
/// points; ties in distance resolve to the lower index. If the result is
/// disconnected, components are joined by their shortest bridging pairs.
inline Graph knn_graph(const std::vector<std::array<double, 3>>& points, std::size_t k) {
    const std::size_t n = points.size();
    require(n >= 2, ErrorCode::InvalidArgument, "knn graph needs at least 2 points");
    k = std::min(k, n - 1);
    std::vector<Edge> edges;
    edges.reserve(n * k);
    std::vector<std::pair<double, std::size_t>> cand(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t c = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) cand[c++] = {detail::chord2(points[i], points[j]), j};
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
        for (std::size_t q = 0; q < k; ++q) {
            const auto j = cand[q].second;
            edges.push_back({std::min(i, j), std::max(i, j), 1.0});
        }
    }
    detail::bridge_components(points, edges);
    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.src, a.dst) < std::tie(b.src, b.dst); });
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const Edge& a, const Edge& b) { return a.src == b.src && a.dst == b.dst; }),
                edges.end());
    return Graph::from_edges(n, edges);
}

/// Gaussian clusters on the unit sphere (isotropic 3-D noise around each
/// mean, projected back to the sphere). Points of distribution i occupy
/// nodes [i*points_per, (i+1)*points_per); spike points, when enabled,
/// follow as nodes m*points_per + i.
inline SphereDataset gen_sphere_dataset(const SphereOptions& opt) {
    require(opt.distributions >= 2, ErrorCode::InvalidArgument, "need at least 2 distributions");
    require(opt.points_per >= 1, ErrorCode::DegenerateCluster, "each distribution needs at least one point");
    require(opt.spike_mass >= 0.0 && opt.spike_mass < 1.0, ErrorCode::InvalidArgument,
            "spike mass fraction must lie in [0, 1)");
    require(opt.cluster_sigma >= 0.0, ErrorCode::InvalidArgument, "cluster sigma must be nonnegative");
    const std::size_t m = opt.distributions, pp = opt.points_per;
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SphereDataset ds;
    ds.means.reserve(m);
    ds.groups.assign(m, 0);
    if (opt.super_clusters > 0) {
        require(opt.super_clusters <= m, ErrorCode::InvalidArgument, "more super-clusters than distributions");
        std::vector<std::array<double, 3>> centers;
        const double sep2 = opt.super_separation * opt.super_separation;
        for (std::size_t tries = 0; centers.size() < opt.super_clusters; ++tries) {
            require(tries < 100000, ErrorCode::InvalidArgument, "cannot place super-cluster centers that far apart");
            const auto z = detail::uniform_on_sphere(rng);
            bool ok = true;
            for (const auto& c : centers) ok = ok && detail::chord2(z, c) >= sep2;
            if (ok) centers.push_back(z);
        }
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t c = i % opt.super_clusters;
            ds.groups[i] = static_cast<int>(c);
            const auto& z = centers[c];
            ds.means.push_back(detail::normalized({z[0] + opt.super_sigma * gauss(rng), z[1] + opt.super_sigma * gauss(rng),
                                                   z[2] + opt.super_sigma * gauss(rng)}));
        }
    } else {
        for (std::size_t i = 0; i < m; ++i) ds.means.push_back(detail::uniform_on_sphere(rng));
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < pp; ++p) {
            const auto& mu = ds.means[i];
            std::array<double, 3> v{mu[0] + opt.cluster_sigma * gauss(rng), mu[1] + opt.cluster_sigma * gauss(rng),
                                    mu[2] + opt.cluster_sigma * gauss(rng)};
            ds.points.push_back(detail::normalized(v));
        }
    if (opt.noise_spike)
        for (std::size_t i = 0; i < m; ++i) ds.points.push_back(detail::uniform_on_sphere(rng));

    const std::size_t n = ds.points.size();
    ds.graph = knn_graph(ds.points, opt.knn_k);

    ds.signals = SignalSet(n, m);
    const double spike = opt.noise_spike ? opt.spike_mass : 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < pp; ++p) ds.signals(i * pp + p, i) = (1.0 - spike) / static_cast<double>(pp);
        if (opt.noise_spike) ds.signals(m * pp + i, i) = spike;
    }
    ds.signals.set_normalized(true);

    ds.truth.neighbors.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto& row = ds.truth.neighbors[i];
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            const auto& a = ds.means[i];
            const auto& b = ds.means[j];
            const double dot = std::clamp(a[0] * b[0] + a[1] * b[1] + a[2] * b[2], -1.0, 1.0);
            row.push_back({j, std::acos(dot)});
        }
        std::sort(row.begin(), row.end(), [](const Neighbor& x, const Neighbor& y) {
            return x.distance < y.distance || (x.distance == y.distance && x.index < y.index);
        });
    }
    return ds;
}

} // namespace udemd
