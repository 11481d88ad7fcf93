#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace udemd;

namespace {

Graph parse(const std::string& text, LoadReport* report = nullptr) {
    std::istringstream in(text);
    return load_graph(in, report);
}

template <typename F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an udemd::Error";
    return ErrorCode::SolverFailure;
}

} // namespace

TEST(LoadGraph, Triangle) {
    const auto g = parse("0\t1\t1\n1\t2\t1\n0\t2\t1\n");
    EXPECT_EQ(g.node_count(), 3u);
    EXPECT_EQ(g.edge_count(), 3u);
    EXPECT_DOUBLE_EQ(g.weight(2, 0), 1.0);
}

TEST(LoadGraph, PathDegrees) {
    const auto g = parse("0\t1\t1\n1\t2\t1\n");
    EXPECT_EQ(g.degrees(), (std::vector<double>{1, 2, 1}));
}

TEST(LoadGraph, DeclaredIsolatedNodeIsDisconnected) {
    EXPECT_EQ(code_of([] { parse("%nodes 3\n0\t1\t1\n"); }), ErrorCode::DisconnectedGraph);
}

TEST(LoadGraph, MirrorsOneDirectionalEdges) {
    LoadReport r;
    const auto g = parse("0 1 2.5\n1 2\n2 1 1\n", &r);
    EXPECT_DOUBLE_EQ(g.weight(1, 0), 2.5);
    EXPECT_EQ(r.mirrored, 1u);
    EXPECT_DOUBLE_EQ(g.weight(1, 2), 1.0);
}

TEST(LoadGraph, Errors) {
    EXPECT_EQ(code_of([] { parse("0 1 1\n1 0 2\n"); }), ErrorCode::AsymmetricWeights);
    EXPECT_EQ(code_of([] { parse("0 1 -1\n"); }), ErrorCode::NegativeWeight);
    EXPECT_EQ(code_of([] { parse("%nodes 2\n0 5 1\n"); }), ErrorCode::InvalidIndex);
    EXPECT_EQ(code_of([] { parse("0 1 1 9\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse("0 x\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse("%nodes\n0 1\n"); }), ErrorCode::ParseError);
}

TEST(LoadGraph, SelfLoopsFlaggedAndFoldedIntoDegree) {
    LoadReport r;
    const auto g = parse("# comment\n0 1 1\n1 1 3\n", &r);
    EXPECT_EQ(r.self_loops, 1u);
    EXPECT_TRUE(g.has_self_loops());
    EXPECT_DOUBLE_EQ(g.degree(1), 4.0);
    const auto op = build_random_walk(g);
    EXPECT_DOUBLE_EQ(op.at(1, 1), 0.75);
    EXPECT_LT(op.max_row_sum_error(), 1e-12);
}

TEST(LoadGraph, ZeroWeightEdgesDropped) {
    LoadReport r;
    EXPECT_EQ(code_of([&] { parse("0 1 1\n1 2 0\n", &r); }), ErrorCode::DisconnectedGraph);
    const auto g = parse("0 1 1\n1 2 1\n0 2 0\n", &r);
    EXPECT_EQ(g.edge_count(), 2u);
    EXPECT_EQ(r.zero_weight, 1u);
}

TEST(LoadGraph, WriteReadRoundTrip) {
    const auto g = support::random_graph(25, 3);
    std::stringstream io;
    write_edge_list(io, g);
    const auto h = load_graph(io);
    EXPECT_EQ(g.fingerprint(), h.fingerprint());
}

TEST(RandomWalk, Triangle) {
    const auto op = build_random_walk(parse("0 1\n1 2\n0 2\n"));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(op.at(i, j), i == j ? 0.0 : 0.5);
}

TEST(RandomWalk, Path) {
    const auto op = build_random_walk(gen_path(3));
    const double want[3][3] = {{0, 1, 0}, {0.5, 0, 0.5}, {0, 1, 0}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(op.at(i, j), want[i][j]);
}

TEST(RandomWalk, WeightedRow) {
    const auto op = build_random_walk(parse("0 1 2\n1 2 1\n"));
    EXPECT_DOUBLE_EQ(op.at(1, 0), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(op.at(1, 1), 0.0);
    EXPECT_DOUBLE_EQ(op.at(1, 2), 1.0 / 3.0);
}

TEST(RandomWalk, ZeroDegreeNode) {
    const std::vector<Edge> none;
    const auto g = Graph::from_edges(1, none);
    EXPECT_EQ(code_of([&] { build_random_walk(g); }), ErrorCode::ZeroDegreeNode);
}

TEST(RandomWalk, LazinessRange) {
    EXPECT_EQ(code_of([] { build_random_walk(gen_ring(4), {1.0, false}); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { build_random_walk(gen_ring(4), {-0.1, false}); }), ErrorCode::InvalidArgument);
    const auto op = build_random_walk(gen_ring(4), {0.5, false});
    EXPECT_DOUBLE_EQ(op.at(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(op.at(0, 1), 0.25);
}

TEST(RandomWalk, AnisotropicNormalization) {
    const auto g = support::random_graph(15, 8);
    const auto op = build_random_walk(g, {0.0, true});
    // A'_ij = A_ij / (q_i q_j); P = D'^-1 A'
    const std::size_t n = g.node_count();
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += g.weight(i, j) / (g.degree(i) * g.degree(j));
        for (std::size_t j = 0; j < n; ++j)
            EXPECT_NEAR(op.at(i, j), g.weight(i, j) / (g.degree(i) * g.degree(j)) / row, 1e-14);
    }
}

TEST(RandomWalk, InvariantsOnRandomGraphs) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto g = support::random_graph(5 + seed, seed, 0.15, seed % 2 == 0);
        for (double lazy : {0.0, 0.5}) {
            const auto op = build_random_walk(g, {lazy, false});
            EXPECT_LT(op.max_row_sum_error(), 1e-12);
            for (std::size_t i = 0; i < g.node_count(); ++i)
                for (std::size_t j = 0; j < g.node_count(); ++j) {
                    const double p = op.at(i, j);
                    EXPECT_GE(p, 0.0);
                    EXPECT_LE(p, 1.0);
                    if (p > 0.0 && i != j) {
                        EXPECT_GT(g.weight(i, j), 0.0);
                    }
                    if (i == j && lazy == 0.0 && p > 0.0) {
                        EXPECT_GT(g.weight(i, i), 0.0);
                    }
                }
        }
    }
}

TEST(ApplyDiffusion, PathDirac) {
    const auto op = build_random_walk(gen_path(3));
    SignalSet s(3, 1);
    s(1, 0) = 1.0;
    const auto out = apply_diffusion(op, s, 1);
    EXPECT_DOUBLE_EQ(out(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(out(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(out(2, 0), 0.5);
}

TEST(ApplyDiffusion, StationaryDistributionIsFixed) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto g = support::random_graph(20, seed);
        const auto op = build_random_walk(g);
        double total = 0.0;
        for (double d : g.degrees()) total += d;
        SignalSet s(g.node_count(), 1);
        for (std::size_t i = 0; i < g.node_count(); ++i) s(i, 0) = g.degree(i) / total;
        const auto out = apply_diffusion(op, s, 7);
        for (std::size_t i = 0; i < g.node_count(); ++i) EXPECT_NEAR(out(i, 0), s(i, 0), 1e-12);
    }
}

TEST(ApplyDiffusion, MatchesDenseMatrixPower) {
    const auto g = support::random_graph(12, 42);
    const auto op = build_random_walk(g);
    const auto p5 = support::matpow(support::dense_walk(g), 5);
    SignalSet s(12, 1);
    s(4, 0) = 1.0;
    const auto out = apply_diffusion(op, s, 5);
    for (std::size_t j = 0; j < 12; ++j) EXPECT_NEAR(out(j, 0), p5[4][j], 1e-10);
}

TEST(ApplyDiffusion, SparseDenseAgreementAndMassConservation) {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const std::size_t n = 4 + 4 * seed;  // up to 48
        const auto g = support::random_graph(n, seed + 100);
        const double lazy = seed % 3 == 0 ? 0.5 : 0.0;
        const auto op = build_random_walk(g, {lazy, false});
        const auto dense = support::dense_walk(g, lazy);
        auto s = support::random_distributions(n, 3, seed);
        for (std::size_t i = 0; i < n; ++i) s(i, 2) *= 3.7;  // unnormalized column
        const std::size_t steps = 1 + seed % 6;
        const auto out = apply_diffusion(op, s, steps);
        const auto pt = support::matpow(dense, steps);
        for (std::size_t c = 0; c < 3; ++c) {
            std::vector<double> x(s.column(c).begin(), s.column(c).end());
            const auto want = support::push(x, pt);
            for (std::size_t v = 0; v < n; ++v) EXPECT_NEAR(out(v, c), want[v], 1e-10);
            EXPECT_NEAR(out.column_sum(c), s.column_sum(c), 1e-10);
        }
    }
}

TEST(ApplyDiffusion, Errors) {
    const auto op = build_random_walk(gen_ring(5));
    EXPECT_EQ(code_of([&] { apply_diffusion(op, SignalSet(4, 1), 1); }), ErrorCode::DimensionMismatch);
    EXPECT_EQ(code_of([&] { apply_diffusion(op, SignalSet(5, 1), 0); }), ErrorCode::InvalidArgument);
}

TEST(Geodesics, Ring) {
    const auto g = gen_ring(500);
    const auto t = geodesic_distances(g, {0});
    EXPECT_DOUBLE_EQ(t(0, 250), 250.0);
    EXPECT_DOUBLE_EQ(t(0, 499), 1.0);
}

TEST(Geodesics, TreeMatchesPathEnumeration) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto g = random_tree(10, seed, 0.5, 3.0);
        const auto t = all_pairs_geodesics(g);
        const std::size_t n = g.node_count();
        // exhaustive simple-path search
        for (std::size_t s = 0; s < n; ++s) {
            std::vector<double> best(n, std::numeric_limits<double>::infinity());
            std::vector<char> on(n, 0);
            std::function<void(std::size_t, double)> walk = [&](std::size_t u, double len) {
                best[u] = std::min(best[u], len);
                on[u] = 1;
                for (std::size_t v = 0; v < n; ++v)
                    if (!on[v] && g.weight(u, v) > 0.0) walk(v, len + g.weight(u, v));
                on[u] = 0;
            };
            walk(s, 0.0);
            for (std::size_t v = 0; v < n; ++v) EXPECT_NEAR(t(s, v), best[v], 1e-12);
        }
    }
}

TEST(Geodesics, MetricAxioms) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const std::size_t n = 20 + 16 * seed;  // up to 100
        const auto g = support::random_graph(n, seed + 7, 0.05, seed % 2 == 1);
        const auto t = all_pairs_geodesics(g);
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_EQ(t(i, i), 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                EXPECT_NEAR(t(i, j), t(j, i), 1e-12);
                for (std::size_t k = 0; k < n; ++k) ASSERT_LE(t(i, k), t(i, j) + t(j, k) + 1e-12);
            }
        }
    }
}

TEST(Geodesics, BfsAndDijkstraAgreeOnUnitWeights) {
    const auto g = support::random_graph(40, 5, 0.1, false);
    ASSERT_TRUE(g.unit_weights());
    auto edges = g.edges();
    edges.push_back({0, 0, 0.0});
    const auto t = all_pairs_geodesics(g);
    // force the weighted path by scaling every weight by 2
    for (auto& e : edges) e.weight *= 2.0;
    const auto h = all_pairs_geodesics(Graph::from_edges(40, edges));
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 40; ++j) EXPECT_DOUBLE_EQ(2.0 * t(i, j), h(i, j));
}

TEST(GenRing, Shapes) {
    const auto tri = gen_ring(3);
    EXPECT_EQ(tri.edge_count(), 3u);
    EXPECT_EQ(tri.fingerprint(), parse("0 1\n1 2\n0 2\n").fingerprint());
    const auto r = gen_ring(500);
    EXPECT_EQ(r.node_count(), 500u);
    EXPECT_EQ(r.edge_count(), 500u);
    for (double d : r.degrees()) EXPECT_EQ(d, 2.0);
    EXPECT_EQ(code_of([] { gen_ring(2); }), ErrorCode::InvalidArgument);
}

TEST(GenSphere, SmallNoNoise) {
    SphereOptions o;
    o.distributions = 2;
    const auto ds = gen_sphere_dataset(o);
    EXPECT_EQ(ds.graph.node_count(), 20u);
    EXPECT_EQ(ds.signals.signal_count(), 2u);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(ds.signals.column_sum(j), 1.0, 1e-12);
    ASSERT_EQ(ds.truth.neighbors[0].size(), 1u);
    EXPECT_EQ(ds.truth.neighbors[0][0].index, 1u);
    EXPECT_EQ(ds.truth.neighbors[1][0].index, 0u);
}

TEST(GenSphere, FullScaleNodeCount) {
    SphereOptions o;
    o.distributions = 200;
    const auto ds = gen_sphere_dataset(o);
    EXPECT_EQ(ds.graph.node_count(), 2000u);
    o.noise_spike = true;
    const auto noisy = gen_sphere_dataset(o);
    EXPECT_EQ(noisy.graph.node_count(), 2200u);
    for (std::size_t j = 0; j < 200; ++j) {
        EXPECT_NEAR(noisy.signals.column_sum(j), 1.0, 1e-12);
        EXPECT_DOUBLE_EQ(noisy.signals(2000 + j, j), 0.1);
    }
}

TEST(GenSphere, Deterministic) {
    SphereOptions o;
    o.distributions = 30;
    o.noise_spike = true;
    o.seed = 17;
    const auto a = gen_sphere_dataset(o), b = gen_sphere_dataset(o);
    EXPECT_EQ(a.graph.fingerprint(), b.graph.fingerprint());
    EXPECT_TRUE(a.signals == b.signals);
    EXPECT_EQ(a.points, b.points);
    o.seed = 18;
    EXPECT_NE(gen_sphere_dataset(o).graph.fingerprint(), a.graph.fingerprint());
}

TEST(GenSphere, Errors) {
    SphereOptions o;
    o.points_per = 0;
    EXPECT_EQ(code_of([&] { gen_sphere_dataset(o); }), ErrorCode::DegenerateCluster);
    o.points_per = 10;
    o.distributions = 1;
    EXPECT_EQ(code_of([&] { gen_sphere_dataset(o); }), ErrorCode::InvalidArgument);
}

TEST(GenSphere, PlantedGroupsStayConnected) {
    SphereOptions o;
    o.distributions = 60;
    o.super_clusters = 3;
    o.seed = 4;
    const auto ds = gen_sphere_dataset(o);
    EXPECT_EQ(ds.graph.node_count(), 600u);
    for (std::size_t i = 0; i < 60; ++i) EXPECT_EQ(ds.groups[i], static_cast<int>(i % 3));
}

TEST(GenRandom, ConnectedAndDeterministic) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = support::random_graph(30, seed), b = support::random_graph(30, seed);
        EXPECT_EQ(a.fingerprint(), b.fingerprint());
    }
}
