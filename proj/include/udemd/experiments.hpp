#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "udemd/diffusion.hpp"
#include "udemd/embedding.hpp"
#include "udemd/error.hpp"
#include "udemd/eval.hpp"
#include "udemd/generators.hpp"
#include "udemd/graph.hpp"
#include "udemd/metric.hpp"
#include "udemd/ot/oracle.hpp"
#include "udemd/ot/sinkhorn.hpp"
#include "udemd/random.hpp"
#include "udemd/stats.hpp"

namespace udemd::experiments {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------- ring

struct RingOptions {
    std::size_t nodes = 500;
    std::vector<unsigned> scales{2, 3, 4, 5};
    double alpha = 0.5;
    /// The even ring is bipartite; a lazy walk avoids period-2 artifacts.
    double laziness = 0.5;
    /// Relative tolerance for treating curve values as tied when ranking.
    double rank_tie = 1e-9;
    double onset_fraction = 0.95;
};

struct RingRow {
    unsigned scales;
    std::size_t j;
    double geodesic;
    double threshold;  // min(2^K, geodesic)
    double udemd;
};

struct RingSummary {
    unsigned scales;
    double spearman;
    std::size_t onset;  // first j reaching onset_fraction of the plateau
    double plateau;
};

struct RingResult {
    std::vector<RingRow> rows;
    std::vector<RingSummary> summary;
    double seconds = 0.0;
};

/// UDEMD(delta_0, delta_j) against the thresholded ring geodesic for
/// j = 1 .. n/2.
inline RingResult ring_experiment(const RingOptions& opt) {
    require(!opt.scales.empty(), ErrorCode::InvalidArgument, "no scales requested");
    Stopwatch clock;
    const Graph g = gen_ring(opt.nodes);
    const auto op = build_random_walk(g, {opt.laziness, false});
    const auto geo = geodesic_distances(g, {0});
    const std::size_t half = opt.nodes / 2;

    SignalSet diracs(opt.nodes, half + 1);
    for (std::size_t j = 0; j <= half; ++j) diracs(j, j) = 1.0;
    diracs.set_normalized(true);

    RingResult out;
    for (unsigned K : opt.scales) {
        UdemdConfig cfg;
        cfg.scales = K;
        cfg.alpha = opt.alpha;
        const auto e = udemd_embed(op, diracs, cfg);
        const double cap = std::ldexp(1.0, static_cast<int>(K));
        std::vector<double> curve, truth;
        for (std::size_t j = 1; j <= half; ++j) {
            const double d = udemd_distance(e, 0, j);
            out.rows.push_back({K, j, geo(0, j), std::min(cap, geo(0, j)), d});
            curve.push_back(d);
            truth.push_back(std::min(cap, geo(0, j)));
        }
        RingSummary s{K, 0.0, 0, 0.0};
        if (curve.size() >= 2) s.spearman = stats::spearman(curve, truth, opt.rank_tie);
        for (double v : curve) s.plateau = std::max(s.plateau, v);
        for (std::size_t i = 0; i < curve.size(); ++i)
            if (curve[i] >= opt.onset_fraction * s.plateau) {
                s.onset = i + 1;
                break;
            }
        out.summary.push_back(s);
    }
    out.seconds = clock.seconds();
    return out;
}

// ---------------------------------------------------------------- sphere

struct SphereExperimentOptions {
    SphereOptions data;
    std::vector<unsigned> scales{1, 2, 3, 4, 5, 6};
    double alpha = 0.5;
    double laziness = 0.5;
    std::vector<std::string> methods{"udemd", "tv", "tv-diffused", "euclidean", "sinkhorn"};
    std::size_t k = 10;
    double sinkhorn_epsilon = 0.1;
    std::size_t sinkhorn_max_nodes = 2000;
};

struct MethodScore {
    std::string method;
    std::optional<unsigned> scales;
    double precision = 0.0;
    double seconds = 0.0;
    bool skipped = false;
    std::string note;
};

struct SphereExperimentResult {
    std::size_t nodes = 0;
    std::size_t signals = 0;
    std::size_t k = 0;
    std::vector<MethodScore> scores;
    bool ot_solver_invoked = false;
    double generate_seconds = 0.0;
};

inline const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> names{"udemd", "tv", "tv-diffused", "euclidean", "sinkhorn"};
    return names;
}

/// Pairwise Sinkhorn costs on geodesic ground distance, one solve per pair.
inline DistanceMatrix pairwise_sinkhorn(const Graph& g, const SignalSet& s, double epsilon) {
    const auto cost = ot::CostMatrix::from_geodesics(all_pairs_geodesics(g));
    const std::size_t m = s.signal_count();
    DistanceMatrix dm(m, "sinkhorn");
    ot::SinkhornOptions so;
    so.epsilon = epsilon;
    parallel_for(m, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double c = ot::sinkhorn(cost, s.column(i), s.column(j), so).cost;
            dm(i, j) = c;
        }
    });
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < i; ++j) dm(i, j) = dm(j, i);
    return dm;
}

inline SphereExperimentResult sphere_experiment(const SphereExperimentOptions& opt) {
    require(!opt.methods.empty(), ErrorCode::InvalidArgument, "no methods requested");
    for (const auto& name : opt.methods)
        require(std::find(known_methods().begin(), known_methods().end(), name) != known_methods().end(),
                ErrorCode::InvalidArgument, "unknown method '" + name + "'");
    Stopwatch gen_clock;
    const auto ds = gen_sphere_dataset(opt.data);
    SphereExperimentResult out;
    out.generate_seconds = gen_clock.seconds();
    out.nodes = ds.graph.node_count();
    out.signals = ds.signals.signal_count();
    out.k = opt.k;
    require(opt.k < out.signals, ErrorCode::KTooLarge, "k must be smaller than the number of distributions");

    const auto op = build_random_walk(ds.graph, {opt.laziness, false});
    auto score = [&](const DistanceMatrix& dm) { return precision_at_k(knn(dm, opt.k), ds.truth, opt.k); };

    for (const auto& method : opt.methods) {
        if (method == "udemd") {
            require(!opt.scales.empty(), ErrorCode::InvalidArgument, "udemd needs at least one K");
            for (unsigned K : opt.scales) {
                Stopwatch clock;
                UdemdConfig cfg;
                cfg.scales = K;
                cfg.alpha = opt.alpha;
                const auto dm = udemd_distance_matrix(udemd_embed(op, ds.signals, cfg));
                const double secs = clock.seconds();
                out.scores.push_back({method, K, score(dm), secs, false, {}});
            }
            continue;
        }
        MethodScore s;
        s.method = method;
        Stopwatch clock;
        std::optional<DistanceMatrix> dm;
        if (method == "tv")
            dm = pairwise_tv(ds.signals);
        else if (method == "tv-diffused")
            dm = pairwise_tv_diffused(op, ds.signals, 1);
        else if (method == "euclidean")
            dm = pairwise_euclidean(ds.signals);
        else if (method == "sinkhorn") {
            if (out.nodes > opt.sinkhorn_max_nodes) {
                s.skipped = true;
                s.note = "n exceeds the sinkhorn cap of " + std::to_string(opt.sinkhorn_max_nodes);
            } else {
                out.ot_solver_invoked = true;
                dm = pairwise_sinkhorn(ds.graph, ds.signals, opt.sinkhorn_epsilon);
            }
        }
        s.seconds = clock.seconds();
        if (dm) s.precision = score(*dm);
        out.scores.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------- oracle battery

struct EquivalenceOptions {
    std::size_t graphs = 30;
    std::size_t pairs = 12;
    std::size_t min_nodes = 10;
    std::size_t max_nodes = 30;
    /// Extra edges per node on top of the spanning tree, on average.
    double extra_degree = 1.5;
    double alpha = 0.5;
    double laziness = 0.5;
    std::uint64_t seed = 0;
};

struct EquivalenceGraph {
    std::size_t nodes;
    std::size_t edges;
    double diameter;
    unsigned scales;
    double lambda;
    double spearman;
};

struct EquivalenceResult {
    std::vector<EquivalenceGraph> graphs;
    double mean_spearman = 0.0;
};

/// Per random graph: Spearman between UDEMD (2^K close to the diameter)
/// and exact transport on the geodesic cost truncated at 2^K, over random
/// distribution pairs.
inline EquivalenceResult oracle_equivalence(const EquivalenceOptions& opt) {
    require(opt.graphs > 0 && opt.pairs >= 2, ErrorCode::InvalidArgument, "need graphs > 0 and pairs >= 2");
    require(opt.min_nodes >= 3 && opt.max_nodes >= opt.min_nodes, ErrorCode::InvalidArgument, "invalid node range");
    EquivalenceResult out;
    out.graphs.resize(opt.graphs);
    parallel_for(opt.graphs, [&](std::size_t gi) {
        std::mt19937_64 rng(mix_seed(opt.seed, gi));
        const std::size_t n = std::uniform_int_distribution<std::size_t>(opt.min_nodes, opt.max_nodes)(rng);
        const double p = std::min(1.0, opt.extra_degree / static_cast<double>(n));
        const Graph g = random_connected_graph(n, {p, 1.0, 1.0}, rng());
        const auto cost = ot::CostMatrix::from_geodesics(all_pairs_geodesics(g));
        const double diam = cost.max_entry();
        const unsigned K = static_cast<unsigned>(std::max(0.0, std::round(std::log2(diam))));
        const double lambda = std::ldexp(1.0, static_cast<int>(K));
        const auto truncated = ot::truncate_cost(cost, lambda);

        SignalSet s(n, 2 * opt.pairs);
        for (std::size_t c = 0; c < 2 * opt.pairs; ++c) {
            const auto x = sample_dirichlet(n, 1.0, rng);
            std::copy(x.begin(), x.end(), s.column(c).begin());
        }
        s.set_normalized(true);
        const auto op = build_random_walk(g, {opt.laziness, false});
        UdemdConfig cfg;
        cfg.scales = K;
        cfg.alpha = opt.alpha;
        const auto e = udemd_embed(op, s, cfg);
        std::vector<double> approx, exact;
        for (std::size_t q = 0; q < opt.pairs; ++q) {
            approx.push_back(udemd_distance(e, 2 * q, 2 * q + 1));
            exact.push_back(ot::exact_emd(truncated, s.column(2 * q), s.column(2 * q + 1)).cost);
        }
        out.graphs[gi] = {n, g.edge_count(), diam, K, lambda, stats::spearman(approx, exact)};
    });
    double sum = 0.0;
    for (const auto& r : out.graphs) sum += r.spearman;
    out.mean_spearman = sum / static_cast<double>(out.graphs.size());
    return out;
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
    std::vector<std::size_t> nodes{1000};
    std::vector<std::size_t> signals{250, 500, 1000, 2000};
    std::vector<unsigned> scales{4};
    std::size_t repeats = 3;
    std::size_t knn_k = 10;
    double laziness = 0.5;
    std::uint64_t seed = 0;
};

struct BenchRow {
    std::size_t nodes;
    std::size_t edges;
    std::size_t signals;
    unsigned scales;
    std::size_t repeats;
    double median_seconds;
    double min_seconds;
};

/// kNN graph over uniform points on the sphere.
inline Graph bench_graph(std::size_t n, std::size_t knn_k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::array<double, 3>> pts(n);
    for (auto& p : pts) p = detail::uniform_on_sphere(rng);
    return knn_graph(pts, knn_k);
}

inline SignalSet random_signals(std::size_t n, std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SignalSet s(n, m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto x = sample_dirichlet(n, 1.0, rng);
        std::copy(x.begin(), x.end(), s.column(j).begin());
    }
    s.set_normalized(true);
    return s;
}

/// Median embed wall time over the (n, m, K) grid.
inline std::vector<BenchRow> bench(const BenchOptions& opt) {
    require(!opt.nodes.empty() && !opt.signals.empty() && !opt.scales.empty(), ErrorCode::InvalidArgument,
            "bench grid is empty");
    require(opt.repeats >= 1, ErrorCode::InvalidArgument, "repeats must be >= 1");
    std::vector<BenchRow> rows;
    for (std::size_t n : opt.nodes) {
        const Graph g = bench_graph(n, opt.knn_k, opt.seed);
        const auto op = build_random_walk(g, {opt.laziness, false});
        for (std::size_t m : opt.signals) {
            const auto s = random_signals(n, m, mix_seed(opt.seed, m));
            for (unsigned K : opt.scales) {
                UdemdConfig cfg;
                cfg.scales = K;
                std::vector<double> times;
                for (std::size_t r = 0; r < opt.repeats; ++r) {
                    Stopwatch clock;
                    const auto e = udemd_embed(op, s, cfg);
                    times.push_back(clock.seconds());
                    require(e.signal_count() == m, ErrorCode::SolverFailure, "embedding lost signals");
                }
                rows.push_back({n, g.edge_count(), m, K, opt.repeats, stats::median(times),
                                *std::min_element(times.begin(), times.end())});
            }
        }
    }
    return rows;
}

} // namespace udemd::experiments
