#include <gtest/gtest.h>

#include "support.hpp"

using namespace udemd;
using namespace udemd::experiments;

namespace {

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

TEST(Stats, AverageRanksWithTies) {
    const std::vector<double> x{10, 20, 10, 30, 20};
    EXPECT_EQ(stats::average_ranks(x), (std::vector<double>{1.5, 3.5, 1.5, 5, 3.5}));
    const std::vector<double> near{1.0, 1.0 + 1e-12, 2.0};
    EXPECT_EQ(stats::average_ranks(near), (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(stats::average_ranks(near, 1e-9), (std::vector<double>{1.5, 1.5, 3}));
}

TEST(Stats, PearsonAndSpearman) {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> y{2, 4, 6, 8, 10};
    const std::vector<double> cubed{1, 8, 27, 64, 125};
    const std::vector<double> rev{5, 4, 3, 2, 1};
    EXPECT_NEAR(stats::pearson(x, y), 1.0, 1e-15);
    EXPECT_LT(stats::pearson(x, cubed), 1.0);
    EXPECT_NEAR(stats::spearman(x, cubed), 1.0, 1e-15);
    EXPECT_NEAR(stats::spearman(x, rev), -1.0, 1e-15);
    // scipy.stats.spearmanr([1,2,3,4,5],[5,6,7,8,7]) = 0.8207826816681233
    EXPECT_NEAR(stats::spearman(x, std::vector<double>{5, 6, 7, 8, 7}), 0.8207826816681233, 1e-12);
    const std::vector<double> flat{3, 3, 3, 3, 3};
    EXPECT_EQ(stats::pearson(x, flat), 0.0);
    EXPECT_EQ(code_of([&] { stats::pearson(x, std::vector<double>{1, 2}); }), ErrorCode::DimensionMismatch);
}

TEST(Stats, MedianMeanFit) {
    EXPECT_EQ(stats::median({3, 1, 2}), 2.0);
    EXPECT_EQ(stats::median({4, 1, 2, 3}), 2.5);
    EXPECT_EQ(stats::mean(std::vector<double>{1, 2, 6}), 3.0);
    const auto fit = stats::fit_line(std::vector<double>{0, 1, 2, 3}, std::vector<double>{1, 3, 5, 7});
    EXPECT_NEAR(fit.slope, 2.0, 1e-14);
    EXPECT_NEAR(fit.intercept, 1.0, 1e-14);
    EXPECT_EQ(code_of([] { stats::median({}); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { stats::fit_line(std::vector<double>{1, 1}, std::vector<double>{0, 1}); }),
              ErrorCode::InvalidArgument);
}

TEST(RingExperiment, RowsAndSummary) {
    RingOptions opt;
    opt.nodes = 64;
    opt.scales = {1, 3};
    const auto r = ring_experiment(opt);
    ASSERT_EQ(r.rows.size(), 64u);
    ASSERT_EQ(r.summary.size(), 2u);
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.geodesic, static_cast<double>(row.j));
        EXPECT_EQ(row.threshold, std::min(std::ldexp(1.0, row.scales), row.geodesic));
        EXPECT_GT(row.udemd, 0.0);
    }
    for (const auto& s : r.summary) {
        EXPECT_GT(s.spearman, 0.0);
        EXPECT_GE(s.onset, 1u);
        EXPECT_LE(s.onset, 32u);
        double top = 0.0;
        for (const auto& row : r.rows)
            if (row.scales == s.scales) top = std::max(top, row.udemd);
        EXPECT_EQ(s.plateau, top);
    }
    // coarser scales saturate later
    EXPECT_LT(r.summary[0].onset, r.summary[1].onset);
    opt.scales.clear();
    EXPECT_EQ(code_of([&] { ring_experiment(opt); }), ErrorCode::InvalidArgument);
}

TEST(SphereExperiment, EuclideanOnlyNeverTouchesTransport) {
    SphereExperimentOptions opt;
    opt.data.distributions = 30;
    opt.data.points_per = 5;
    opt.methods = {"euclidean"};
    const auto r = sphere_experiment(opt);
    EXPECT_FALSE(r.ot_solver_invoked);
    ASSERT_EQ(r.scores.size(), 1u);
    EXPECT_EQ(r.scores[0].method, "euclidean");
    EXPECT_GE(r.scores[0].precision, 0.0);
    EXPECT_LE(r.scores[0].precision, 1.0);
    EXPECT_EQ(r.nodes, 150u);
    EXPECT_EQ(r.signals, 30u);
}

TEST(SphereExperiment, UdemdPerScaleAndSinkhornCap) {
    SphereExperimentOptions opt;
    opt.data.distributions = 20;
    opt.data.points_per = 5;
    opt.k = 5;
    opt.scales = {1, 2};
    opt.methods = {"udemd", "sinkhorn", "tv"};
    opt.sinkhorn_max_nodes = 50;
    const auto r = sphere_experiment(opt);
    ASSERT_EQ(r.scores.size(), 4u);
    EXPECT_EQ(r.scores[0].scales, 1u);
    EXPECT_EQ(r.scores[1].scales, 2u);
    EXPECT_TRUE(r.scores[2].skipped);
    EXPECT_FALSE(r.ot_solver_invoked);
    EXPECT_EQ(r.scores[3].method, "tv");
    EXPECT_FALSE(r.scores[3].scales.has_value());

    opt.methods = {"sinkhorn"};
    opt.sinkhorn_max_nodes = 2000;
    opt.data.distributions = 8;
    opt.data.points_per = 4;
    const auto small = sphere_experiment(opt);
    EXPECT_TRUE(small.ot_solver_invoked);
    EXPECT_FALSE(small.scores[0].skipped);
}

TEST(SphereExperiment, Errors) {
    SphereExperimentOptions opt;
    opt.data.distributions = 10;
    opt.data.points_per = 3;
    opt.methods = {"wasserstein"};
    EXPECT_EQ(code_of([&] { sphere_experiment(opt); }), ErrorCode::InvalidArgument);
    opt.methods = {"tv"};
    opt.k = 10;
    EXPECT_EQ(code_of([&] { sphere_experiment(opt); }), ErrorCode::KTooLarge);
}

TEST(OracleEquivalence, SmallBattery) {
    EquivalenceOptions opt;
    opt.graphs = 4;
    opt.pairs = 8;
    opt.min_nodes = 8;
    opt.max_nodes = 14;
    opt.seed = 3;
    const auto r = oracle_equivalence(opt);
    ASSERT_EQ(r.graphs.size(), 4u);
    double sum = 0.0;
    for (const auto& g : r.graphs) {
        EXPECT_GE(g.nodes, 8u);
        EXPECT_LE(g.nodes, 14u);
        EXPECT_GE(g.edges, g.nodes - 1);
        EXPECT_EQ(g.lambda, std::ldexp(1.0, static_cast<int>(g.scales)));
        EXPECT_GE(g.spearman, -1.0);
        EXPECT_LE(g.spearman, 1.0);
        sum += g.spearman;
    }
    EXPECT_NEAR(r.mean_spearman, sum / 4.0, 1e-15);
    const auto again = oracle_equivalence(opt);
    EXPECT_EQ(again.mean_spearman, r.mean_spearman);
    opt.pairs = 1;
    EXPECT_EQ(code_of([&] { oracle_equivalence(opt); }), ErrorCode::InvalidArgument);
}

TEST(Bench, RowsCoverTheGrid) {
    BenchOptions opt;
    opt.nodes = {100};
    opt.signals = {10, 20};
    opt.scales = {1, 2};
    opt.repeats = 2;
    const auto rows = bench(opt);
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& r : rows) {
        EXPECT_EQ(r.nodes, 100u);
        EXPECT_GE(r.edges, 99u);
        EXPECT_EQ(r.repeats, 2u);
        EXPECT_GT(r.median_seconds, 0.0);
        EXPECT_LE(r.min_seconds, r.median_seconds);
    }
    EXPECT_EQ(rows[1].signals, 10u);
    EXPECT_EQ(rows[1].scales, 2u);
    opt.signals.clear();
    EXPECT_EQ(code_of([&] { bench(opt); }), ErrorCode::InvalidArgument);
    opt.signals = {10};
    opt.repeats = 0;
    EXPECT_EQ(code_of([&] { bench(opt); }), ErrorCode::InvalidArgument);
}

TEST(Bench, RandomSignalsAreDistributions) {
    const auto s = random_signals(40, 6, 2);
    EXPECT_TRUE(s.normalized());
    for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(s.column_sum(j), 1.0, 1e-12);
    const auto g = bench_graph(80, 6, 1);
    EXPECT_EQ(g.node_count(), 80u);
    EXPECT_TRUE(bench_graph(80, 6, 1).fingerprint() == g.fingerprint());
}
