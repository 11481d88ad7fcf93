#include <gtest/gtest.h>

#include "support.hpp"

using namespace udemd;

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

NeighborList lists(const std::vector<std::vector<std::size_t>>& idx) {
    NeighborList nl;
    for (const auto& row : idx) {
        std::vector<Neighbor> r;
        for (std::size_t i = 0; i < row.size(); ++i) r.push_back({row[i], static_cast<double>(i)});
        nl.neighbors.push_back(std::move(r));
    }
    return nl;
}

DistanceMatrix from_values(std::size_t m, const std::vector<double>& v) {
    DistanceMatrix dm(m, "given");
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) dm(i, j) = v[i * m + j];
    return dm;
}

// Points on a line; distance |x_i - x_j|.
DistanceMatrix line(const std::vector<double>& x) {
    DistanceMatrix dm(x.size(), "line");
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) dm(i, j) = std::abs(x[i] - x[j]);
    return dm;
}

LabelVector relabel(const LabelVector& l, const std::map<int, int>& map) {
    LabelVector out;
    for (int v : l) out.push_back(map.at(v));
    return out;
}

} // namespace

TEST(PrecisionAtK, Examples) {
    const auto t = lists({{1, 2, 3, 4}, {0, 2, 3, 4}});
    EXPECT_EQ(precision_at_k(t, t, 4), 1.0);
    EXPECT_EQ(precision_at_k(lists({{5, 6, 7, 8}, {5, 6, 7, 8}}), t, 4), 0.0);
    EXPECT_EQ(precision_at_k(lists({{4, 3, 9, 8}, {2, 0, 7, 9}}), t, 4), 0.5);
    // only the top k of each list count
    EXPECT_EQ(precision_at_k(lists({{1, 9, 2}, {0, 9, 2}}), lists({{1, 2, 9}, {0, 2, 9}}), 2), 0.5);
}

TEST(PrecisionAtK, HalfOverlapAtK100) {
    std::vector<std::vector<std::size_t>> truth(20), pred(20);
    for (std::size_t q = 0; q < 20; ++q)
        for (std::size_t i = 0; i < 100; ++i) {
            truth[q].push_back(i);
            pred[q].push_back(i < 50 ? 99 - i : 100 + i);
        }
    EXPECT_DOUBLE_EQ(precision_at_k(lists(pred), lists(truth), 100), 0.5);
}

TEST(PrecisionAtK, InvariantToQueryOrder) {
    std::mt19937_64 rng(1);
    std::vector<std::vector<std::size_t>> a(30), b(30);
    std::uniform_int_distribution<std::size_t> u(0, 40);
    for (std::size_t q = 0; q < 30; ++q)
        for (int i = 0; i < 5; ++i) {
            a[q].push_back(u(rng));
            b[q].push_back(u(rng));
        }
    const double before = precision_at_k(lists(a), lists(b), 5);
    std::vector<std::size_t> perm(30);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<std::size_t>> pa, pb;
    for (auto p : perm) {
        pa.push_back(a[p]);
        pb.push_back(b[p]);
    }
    EXPECT_NEAR(precision_at_k(lists(pa), lists(pb), 5), before, 1e-15);
}

TEST(PrecisionAtK, Errors) {
    const auto t = lists({{1, 2}});
    EXPECT_EQ(code_of([&] { precision_at_k(t, t, 3); }), ErrorCode::KTooLarge);
    EXPECT_EQ(code_of([&] { precision_at_k(t, t, 0); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([&] { precision_at_k(t, lists({{1, 2}, {0, 2}}), 1); }), ErrorCode::DimensionMismatch);
}

TEST(ClusterScores, PerfectAgreement) {
    const LabelVector a{0, 0, 1, 1, 2, 2, 2};
    EXPECT_DOUBLE_EQ(ari(a, a), 1.0);
    EXPECT_DOUBLE_EQ(nmi(a, a), 1.0);
    EXPECT_DOUBLE_EQ(ami(a, a), 1.0);
    const LabelVector renamed{5, 5, -1, -1, 9, 9, 9};
    EXPECT_DOUBLE_EQ(ari(renamed, a), 1.0);
    EXPECT_DOUBLE_EQ(ami(renamed, a), 1.0);
}

// Reference values computed with scikit-learn 1.7.2
// (adjusted_rand_score, normalized_mutual_info_score with the arithmetic
// mean, adjusted_mutual_info_score).
TEST(ClusterScores, FrozenReferenceValues) {
    const LabelVector a{0, 0, 0, 1, 1, 1, 2, 2, 2, 2}, b{0, 0, 1, 1, 1, 2, 2, 2, 0, 0};
    EXPECT_NEAR(ari(b, a), 0.09090909090909091, 1e-12);
    EXPECT_NEAR(nmi(b, a), 0.3946483716358942, 1e-12);
    EXPECT_NEAR(ami(b, a), 0.17152423540072848, 1e-12);

    const LabelVector a2{0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2}, b2{1, 1, 1, 0, 0, 0, 2, 2, 2, 3, 3, 3};
    EXPECT_NEAR(ari(b2, a2), -0.27906976744186046, 1e-12);
    EXPECT_NEAR(nmi(b2, a2), 0.0, 1e-12);
    EXPECT_NEAR(ami(b2, a2), -0.41177482995759007, 1e-12);
}

TEST(ClusterScores, SingleClusterIsChanceLevel) {
    const LabelVector one(6, 0), truth{0, 0, 1, 1, 2, 2};
    EXPECT_NEAR(ari(one, truth), 0.0, 1e-12);
    EXPECT_LE(ami(one, truth), 1e-12);
    EXPECT_NEAR(nmi(one, truth), 0.0, 1e-12);
}

TEST(ClusterScores, AllSingletons) {
    const LabelVector s{0, 1, 2, 3, 4};
    EXPECT_DOUBLE_EQ(ami(s, s), 1.0);
    EXPECT_NEAR(ami(s, LabelVector{0, 0, 1, 1, 2}), 0.0, 1e-12);
}

TEST(ClusterScores, RandomLabelingsAverageToZeroAri) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> u(0, 2);
        LabelVector a(200), b(200);
        for (auto& x : a) x = u(rng);
        for (auto& x : b) x = u(rng);
        total += ari(a, b);
    }
    EXPECT_NEAR(total / 100.0, 0.0, 0.05);
}

TEST(ClusterScores, InvariantUnderRelabelingAndSymmetric) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> u(0, 3);
    for (int t = 0; t < 20; ++t) {
        LabelVector a(50), b(50);
        for (auto& x : a) x = u(rng);
        for (auto& x : b) x = u(rng);
        const auto ra = relabel(a, {{0, 7}, {1, 3}, {2, -2}, {3, 0}});
        const auto rb = relabel(b, {{0, 1}, {1, 0}, {2, 3}, {3, 2}});
        EXPECT_NEAR(ari(ra, rb), ari(a, b), 1e-12);
        EXPECT_NEAR(nmi(ra, rb), nmi(a, b), 1e-12);
        EXPECT_NEAR(ami(ra, rb), ami(a, b), 1e-12);
        EXPECT_NEAR(ari(b, a), ari(a, b), 1e-12);
        EXPECT_NEAR(nmi(b, a), nmi(a, b), 1e-12);
        EXPECT_NEAR(ami(b, a), ami(a, b), 1e-12);
    }
}

TEST(ClusterScores, Errors) {
    EXPECT_EQ(code_of([] { ari({0, 1}, {0}); }), ErrorCode::InvalidLabels);
    EXPECT_EQ(code_of([] { nmi({}, {}); }), ErrorCode::InvalidLabels);
}

TEST(Silhouette, FrozenReferenceValues) {
    const auto dm = from_values(5, {0, 1, 4, 5, 6, 1, 0, 3, 5, 5, 4, 3, 0, 2, 2.5, 5, 5, 2, 0, 1, 6, 5, 2.5, 1, 0});
    EXPECT_NEAR(silhouette(dm, {0, 0, 1, 1, 1}), 0.6616383616383616, 1e-12);
    // the singleton scores 0
    EXPECT_NEAR(silhouette(dm, {0, 1, 1, 1, 1}), 0.12004273504273506, 1e-12);
}

TEST(Silhouette, SeparatedClustersScoreOne) {
    DistanceMatrix dm(8, "blocks");
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) dm(i, j) = (i < 4) == (j < 4) ? 0.0 : 10.0;
    EXPECT_NEAR(silhouette(dm, {0, 0, 0, 0, 1, 1, 1, 1}), 1.0, 1e-12);
}

TEST(Silhouette, IdenticalPointSetsScoreNearZero) {
    // each location carries one point of each label
    std::vector<double> x;
    LabelVector l;
    for (int i = 0; i < 50; ++i)
        for (int c = 0; c < 2; ++c) {
            x.push_back(i);
            l.push_back(c);
        }
    EXPECT_NEAR(silhouette(line(x), l), 0.0, 0.1);
    std::mt19937_64 rng(4);
    std::vector<std::size_t> perm(100);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> px;
    LabelVector pl;
    for (auto p : perm) {
        px.push_back(x[p]);
        pl.push_back(l[p]);
    }
    EXPECT_NEAR(silhouette(line(px), pl), silhouette(line(x), l), 1e-12);
}

TEST(Silhouette, AllDistancesEqualIsZero) {
    DistanceMatrix dm(6, "flat");
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) dm(i, j) = i == j ? 0.0 : 1.0;
    EXPECT_NEAR(silhouette(dm, {0, 0, 0, 1, 1, 1}), 0.0, 1e-12);
    DistanceMatrix zero(4, "zero");
    EXPECT_EQ(silhouette(zero, {0, 0, 1, 1}), 0.0);
}

TEST(Silhouette, Errors) {
    DistanceMatrix dm(3, "x");
    EXPECT_EQ(code_of([&] { silhouette(dm, {0, 0, 0}); }), ErrorCode::InvalidLabels);
    EXPECT_EQ(code_of([&] { silhouette(dm, {0, 1}); }), ErrorCode::InvalidLabels);
}

TEST(KMedoids, RecoversBlocks) {
    DistanceMatrix dm(9, "blocks");
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 9; ++j) dm(i, j) = i == j ? 0.0 : (i % 2) == (j % 2) ? 0.0 : 50.0;
    const auto labels = cluster_from_distances(dm, 2);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(labels[i], static_cast<int>(i % 2));
}

TEST(KMedoids, LineClustersAndOptimality) {
    const std::vector<double> x{0.0, 0.5, 1.0, 10.0, 10.5, 11.0, 30.0, 31.0};
    const auto dm = line(x);
    const auto labels = cluster_from_distances(dm, 3);
    EXPECT_EQ(labels, (LabelVector{0, 0, 0, 1, 1, 1, 2, 2}));
    EXPECT_EQ(cluster_from_distances(dm, 1), LabelVector(8, 0));
    EXPECT_EQ(code_of([&] { cluster_from_distances(dm, 0); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([&] { cluster_from_distances(dm, 9); }), ErrorCode::InvalidArgument);
}

TEST(KMedoids, ResultIsSwapLocallyOptimal) {
    int global_hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        const std::size_t m = 10;
        std::vector<std::array<double, 2>> p(m);
        for (auto& q : p) q = {g(rng) + 5.0 * (seed % 3), g(rng)};
        DistanceMatrix dm(m, "plane");
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) dm(i, j) = std::hypot(p[i][0] - p[j][0], p[i][1] - p[j][1]);
        auto cost = [&](const std::vector<std::size_t>& med) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                double d = 1e300;
                for (auto md : med) d = std::min(d, dm(md, j));
                s += d;
            }
            return s;
        };
        const auto labels = cluster_from_distances(dm, 3);
        std::vector<std::size_t> med;
        for (int c = 0; c < 3; ++c) {
            double best = 1e300;
            std::size_t arg = m;
            for (std::size_t o = 0; o < m; ++o) {
                if (labels[o] != c) continue;
                double s = 0.0;
                for (std::size_t j = 0; j < m; ++j)
                    if (labels[j] == c) s += dm(o, j);
                if (s < best) {
                    best = s;
                    arg = o;
                }
            }
            ASSERT_LT(arg, m) << "empty cluster " << c;
            med.push_back(arg);
        }
        const double got = cost(med);
        for (std::size_t s = 0; s < 3; ++s)
            for (std::size_t o = 0; o < m; ++o) {
                auto swapped = med;
                swapped[s] = o;
                EXPECT_GE(cost(swapped), got - 1e-12) << "seed " << seed;
            }
        double opt = 1e300;
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = a + 1; b < m; ++b)
                for (std::size_t c = b + 1; c < m; ++c) opt = std::min(opt, cost({a, b, c}));
        global_hits += got <= opt + 1e-12;
    }
    EXPECT_GE(global_hits, 15);
}

TEST(KMedoids, Deterministic) {
    const auto s = support::random_distributions(20, 30, 5);
    const auto dm = pairwise_tv(s);
    EXPECT_EQ(cluster_from_distances(dm, 4), cluster_from_distances(dm, 4));
}

TEST(KMedoids, PlantedSphereSuperClusters) {
    SphereOptions o;
    o.distributions = 60;
    o.super_clusters = 3;
    o.seed = 0;
    const auto ds = gen_sphere_dataset(o);
    UdemdConfig cfg;
    const auto e = udemd_embed(build_random_walk(ds.graph, {0.5, false}), ds.signals, cfg);
    const auto labels = cluster_from_distances(udemd_distance_matrix(e), 3);
    EXPECT_GE(ari(labels, ds.groups), 0.9);
}
