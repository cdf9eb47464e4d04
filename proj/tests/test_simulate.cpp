#include "genrehawkes/baselines.hpp"
#include "genrehawkes/rng.hpp"
#include "genrehawkes/simulate.hpp"
#include "genrehawkes/stats.hpp"
#include "genrehawkes/taggraph.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <stdexcept>

using namespace genrehawkes;

TEST(Philox, KnownAnswerVectors) {
    using C = Philox4x32::Counter;
    EXPECT_EQ(Philox4x32::bijection({0, 0, 0, 0}, {0, 0}), (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(Philox4x32::bijection({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(Philox4x32::bijection({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, StreamsAreIndependentAndReproducible) {
    Philox4x32 a(42, 0), b(42, 0), c(42, 1), d(43, 0);
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        EXPECT_EQ(x, b());
        EXPECT_NE(x, c());
        EXPECT_NE(x, d());
    }
    Philox4x32 u(7, 3);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform();
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
}

TEST(SimulateHawkes, BetaZeroIsPoisson) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) total += simulate_hawkes({2.0, 0.0, 1.0}, {seed, 0.0, 1000.0}).size();
    EXPECT_NEAR(total / 200.0, 2000.0, 0.02 * 2000.0);
}

TEST(SimulateHawkes, LongRunRateMatchesBranchingMean) {
    const HawkesParams p{0.5, 0.8, 2.0};
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) total += simulate_hawkes(p, {seed, 0.0, 2000.0}).size();
    EXPECT_NEAR(total / (200.0 * 2000.0), p.stationary_rate(), 0.03 * p.stationary_rate());
}

TEST(SimulateHawkes, DeterministicAndWithinWindow) {
    const HawkesParams p{0.5, 0.8, 2.0};
    const SimConfig cfg{99, 10.0, 60.0, {1.0, 9.5, 10.0}};
    const auto a = simulate_hawkes(p, cfg);
    EXPECT_EQ(a, simulate_hawkes(p, cfg));
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
    for (double t : a) {
        EXPECT_GT(t, 10.0);
        EXPECT_LE(t, 60.0);
    }
    auto other = cfg;
    other.stream = 1;
    EXPECT_NE(a, simulate_hawkes(p, other));
}

TEST(SimulateHawkes, ThinningPassesKs) {
    const HawkesParams p{0.3, 1.4, 2.0};
    int passes = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto t = simulate_hawkes(p, {seed, 0.0, 500.0});
        if (ks_test_exponential(rescaled_residuals(p, t)).p_value >= 0.01) ++passes;
    }
    EXPECT_GE(passes, 95);
}

TEST(SimulateHawkes, RejectsBadConfig) {
    EXPECT_THROW((void)simulate_hawkes({0.5, 2.0, 2.0}, {0, 0.0, 10.0}), std::invalid_argument);
    EXPECT_THROW((void)simulate_hawkes({0.5, 0.5, 2.0}, {0, 5.0, 5.0}), std::invalid_argument);
    EXPECT_THROW((void)simulate_hawkes({0.5, 0.5, 2.0}, {0, 5.0, 9.0, {6.0}}), std::invalid_argument);
}

TEST(SimulateNhpp, ConstantLinearAndZero) {
    double constant = 0.0, linear = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        constant += simulate_nhpp([](double) { return 1.5; }, 1.5, {seed, 2.0, 302.0}).size();
        linear += simulate_nhpp([](double t) { return 0.01 * t + 0.5; }, 2.5, {seed, 0.0, 200.0}).size();
    }
    EXPECT_NEAR(constant / 200.0, 450.0, 0.02 * 450.0);
    const double expected = 0.01 * 200.0 * 200.0 / 2.0 + 0.5 * 200.0;
    EXPECT_NEAR(linear / 200.0, expected, 0.03 * expected);
    EXPECT_TRUE(simulate_nhpp([](double) { return 0.0; }, 1.0, {1, 0.0, 100.0}).empty());
    EXPECT_THROW((void)simulate_nhpp([](double t) { return t; }, 1.0, {1, 0.0, 100.0}), std::invalid_argument);
}

namespace {

std::vector<ClusterSpec> three_clusters() {
    return {
        {{"anime", "manga", "otaku"}, {0.4, 0.5, 1.0}, {{"u1", "u2", "u3"}, 0.6}, {}},
        {{"guitar", "music"}, {1.0, 0.9, 3.0}, {{"u4", "u5"}, 0.2}, {}},
        {{"cooking", "food", "recipe", "vegan"}, {0.3, 0.1, 0.5}, {{"u6"}, 0.0}, {}},
    };
}

}  // namespace

TEST(SyntheticCorpus, PipelineRecoversThreeClusters) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto corpus = make_synthetic_corpus(three_clusters(), 200.0, seed);
        EXPECT_DOUBLE_EQ(corpus.stream.horizon(), 200.0);
        const auto comps = connected_components(prune_graph(build_affinity_graph(corpus.stream), 2));
        const auto clusters = assign_videos(corpus.stream, comps);
        ASSERT_EQ(clusters.size(), 3u);
        for (const auto& c : clusters) {
            std::set<int> truth;
            for (const auto& e : c.events.events()) truth.insert(corpus.labels.at(e.video_id));
            EXPECT_EQ(truth.size(), 1u);
        }
    }
}

TEST(SyntheticCorpus, ReproducibleAcrossThreadCounts) {
    const auto a = make_synthetic_corpus(three_clusters(), 150.0, 12);
    const auto b = make_synthetic_corpus(three_clusters(), 150.0, 12, {}, 3);
    EXPECT_EQ(a.stream, b.stream);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_NE(a.stream, make_synthetic_corpus(three_clusters(), 150.0, 13).stream);
}

TEST(SyntheticCorpus, EmptySpecAndOverlap) {
    EXPECT_TRUE(make_synthetic_corpus({}, 100.0, 1).stream.empty());
    auto spec = three_clusters();
    spec[1].tags.push_back("food");
    EXPECT_THROW((void)make_synthetic_corpus(spec, 100.0, 1), std::invalid_argument);
}

TEST(SyntheticCorpus, PoissonClusterSelectsPoissonByAic) {
    int poisson_wins = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto corpus = make_synthetic_corpus({{{"x", "y"}, {1.0, 0.0, 1.0}, {{"u"}, 0.0}, {}}}, 400.0, seed);
        const auto t = corpus.stream.times();
        if (fit_poisson(t, 400.0).aic <= fit_hawkes(t, 400.0).aic) ++poisson_wins;
    }
    EXPECT_GT(poisson_wins, 10);
}
