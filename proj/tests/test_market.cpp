#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qmarket/market.hpp"

using namespace qmarket;
constexpr double kPi = std::numbers::pi;

namespace {

MarketConfig base_config() {
    MarketConfig cfg;
    cfg.n_steps = 300;
    cfg.seed = 17;
    return cfg;
}

bool same_trades(const std::vector<TradeRecord>& a, const std::vector<TradeRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].step != b[i].step || !(a[i].direction == b[i].direction) || a[i].outcome.label != b[i].outcome.label ||
            !(a[i].outcome.collapsed_state == b[i].outcome.collapsed_state) ||
            a[i].outcome.break_point != b[i].outcome.break_point || a[i].realized_price != b[i].realized_price) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST(PriceOfState, AxisEndpointsAndMidpoint) {
    MarketConfig cfg;
    cfg.price_axis = UnitVector3::from_polar(1.0, 2.0);
    EXPECT_EQ(price_of_state(cfg, cfg.price_axis), 150.0);
    EXPECT_EQ(price_of_state(cfg, -cfg.price_axis), 50.0);
    EXPECT_NEAR(price_of_state(cfg, any_orthogonal(cfg.price_axis)), 100.0, 1e-12);
}

TEST(PriceOfState, MonotoneInPolarAngle) {
    MarketConfig cfg;
    double prev = INFINITY;
    for (int k = 0; k <= 180; ++k) {
        const double p = price_of_state(cfg, UnitVector3::from_polar(k * kPi / 180, 0.3));
        EXPECT_LE(p, prev);
        prev = p;
    }
}

TEST(MarketConfig, Validation) {
    auto cfg = base_config();
    cfg.price_min = 0.0;
    EXPECT_THROW(run_market(cfg), std::invalid_argument);
    cfg = base_config();
    cfg.price_max = cfg.price_min;
    EXPECT_THROW(run_market(cfg), std::invalid_argument);
    cfg = base_config();
    cfg.regime = LocalRegime{4.0};
    EXPECT_THROW(run_market(cfg), std::invalid_argument);
    cfg = base_config();
    cfg.regime = GlobalRegime{{UnitVector3{}, 0.1, 1.5}, 0.1};
    EXPECT_THROW(run_market(cfg), std::invalid_argument);
    cfg = base_config();
    cfg.n_steps = 0;
    EXPECT_THROW(run_market(cfg), std::invalid_argument);
}

TEST(RunMarket, DeltaWithoutNoiseIsAFixedPoint) {
    auto cfg = base_config();
    cfg.rho = RhoDistribution::delta(0.0);
    cfg.regime = LocalRegime{0.0};
    const auto trades = run_market(cfg);
    for (std::size_t i = 1; i < trades.size(); ++i) ASSERT_EQ(trades[i].realized_price, trades[0].realized_price);
}

TEST(RunMarket, PricesWithinBounds) {
    for (int variant = 0; variant < 4; ++variant) {
        auto cfg = base_config();
        cfg.n_steps = 2000;
        cfg.price_min = 80;
        cfg.price_max = 120;
        cfg.rho = variant % 2 ? RhoDistribution::truncated_gaussian(0.3, 0.2) : RhoDistribution::uniform();
        if (variant >= 2) cfg.regime = GlobalRegime{{UnitVector3{}, 0.2, 0.05}, 0.4};
        else cfg.regime = LocalRegime{kPi};
        for (const auto& t : run_market(cfg)) {
            ASSERT_GE(t.realized_price, 80.0);
            ASSERT_LE(t.realized_price, 120.0);
            ASSERT_EQ(t.realized_price, price_of_state(cfg, t.outcome.collapsed_state));
        }
    }
}

TEST(RunMarket, SeedDeterminism) {
    auto cfg = base_config();
    cfg.regime = GlobalRegime{{UnitVector3{}, 0.1, 0.02}, 0.3};
    EXPECT_TRUE(same_trades(run_market(cfg), run_market(cfg)));
    auto other = cfg;
    other.seed = 18;
    EXPECT_FALSE(same_trades(run_market(cfg), run_market(other)));
}

TEST(RunMarket, EnsembleIndependentOfWorkers) {
    auto cfg = base_config();
    cfg.regime = LocalRegime{0.5};
    const auto one = run_ensemble(cfg, 6, 1);
    const auto eight = run_ensemble(cfg, 6, 8);
    ASSERT_EQ(one.size(), 6u);
    for (std::size_t k = 0; k < 6; ++k) {
        EXPECT_TRUE(same_trades(one[k], eight[k]));
        auto member = cfg;
        member.seed = derive_seed(cfg.seed, k);
        EXPECT_TRUE(same_trades(one[k], run_market(member)));
    }
}

TEST(RunMarket, PerfectHerdingRepeatsFirstOutcome) {
    auto cfg = base_config();
    const auto n = UnitVector3::from_polar(0.4, 1.0);
    cfg.regime = GlobalRegime{{n, 0.0, 0.0}, 0.0};
    const auto trades = run_market(cfg);
    for (const auto& t : trades) {
        ASSERT_EQ(t.direction, n);
        ASSERT_EQ(t.outcome.label, trades.front().outcome.label);
    }
}

TEST(RunMarket, NoisyHerdingBalancesSides) {
    // Constant news, noise up to 90 degrees. With uniform rho the side chain
    // is symmetric: P(O1 | O1 before) = (1 + c) / 2 = P(O2 | O2 before), so
    // the long-run fraction of O1 is 1/2.
    auto cfg = base_config();
    cfg.n_steps = 40000;
    cfg.regime = GlobalRegime{{UnitVector3{}, 0.0, 0.0}, kPi / 2};
    std::size_t o1 = 0;
    for (const auto& t : run_market(cfg)) o1 += t.outcome.label == Outcome::O1;
    EXPECT_NEAR(static_cast<double>(o1) / cfg.n_steps, 0.5, 0.03);
}

TEST(RunMarket, LocalDirectionsStayWithinNoise) {
    auto cfg = base_config();
    cfg.regime = LocalRegime{0.3};
    const auto trades = run_market(cfg);
    for (std::size_t i = 1; i < trades.size(); ++i) {
        ASSERT_LE(angle_between(trades[i - 1].outcome.collapsed_state, trades[i].direction), 0.3 + 1e-9);
    }
}

TEST(SummaryStats, ConstantSeries) {
    const auto st = summary_stats_of_prices(std::vector<double>(50, 100.0));
    EXPECT_EQ(st.variance, 0.0);
    EXPECT_TRUE(st.kurtosis_undefined());
    EXPECT_EQ(st.n_prices, 50u);
    EXPECT_EQ(st.n_returns, 49u);
    ASSERT_EQ(st.return_autocorrelation.size(), 10u);
    for (const auto& a : st.return_autocorrelation) EXPECT_FALSE(a.has_value());
}

TEST(SummaryStats, NormalReturnsHaveNoExcessKurtosis) {
    CounterRng rng(81, 0);
    std::vector<double> r(100000);
    for (auto& x : r) x = 0.01 * rng.normal();
    const auto st = summary_stats_of_returns(r);
    ASSERT_TRUE(st.excess_kurtosis);
    EXPECT_NEAR(*st.excess_kurtosis, 0.0, 0.1);
    EXPECT_NEAR(st.variance, 1e-4, 2e-6);
    for (const auto& a : st.return_autocorrelation) EXPECT_NEAR(*a, 0.0, 0.02);
}

TEST(SummaryStats, AlternatingSeries) {
    std::vector<double> p;
    for (int i = 0; i < 60; ++i) p.push_back(i % 2 ? 110.0 : 100.0);
    const auto st = summary_stats_of_prices(p);
    ASSERT_TRUE(st.return_autocorrelation[0]);
    EXPECT_NEAR(*st.return_autocorrelation[0], -1.0, 1e-9);
    EXPECT_NEAR(*st.return_autocorrelation[1], 1.0, 1e-9);
    EXPECT_NEAR(st.mean, std::log(1.1) / 59.0, 1e-15);
}

TEST(SummaryStats, HandComputedMoments) {
    // Returns +-a twice each plus a zero: mean 0, m2 = 4a^2/5, m4 = 4a^4/5,
    // so m4 / m2^2 = 5/4.
    const std::vector<double> r{0.1, -0.1, 0.0, 0.1, -0.1};
    std::vector<double> padded;
    for (int i = 0; i < 6; ++i) padded.insert(padded.end(), r.begin(), r.end());
    const auto st = summary_stats_of_returns(padded);
    EXPECT_NEAR(st.mean, 0.0, 1e-17);
    EXPECT_NEAR(st.variance, 0.01 * 24.0 / 29.0, 1e-15);
    EXPECT_NEAR(*st.excess_kurtosis, 1.25 - 3.0, 1e-12);
}

TEST(SummaryStats, TooShort) {
    EXPECT_THROW(summary_stats_of_prices(std::vector<double>(29, 1.0)), std::invalid_argument);
    std::vector<double> p(40, 1.0);
    p[3] = 0.0;
    EXPECT_THROW(summary_stats_of_prices(p), std::invalid_argument);
}

TEST(TripleVerdict, UniformSixtyDegreesInfeasible) {
    const auto scan = triple_verdict(RhoDistribution::uniform(), coplanar_triple(kPi / 3));
    EXPECT_FALSE(scan.lp.feasible);
    EXPECT_TRUE(scan.verdicts_agree);
    EXPECT_TRUE(triple_verdict(RhoDistribution::delta(0.0), coplanar_triple(kPi / 3)).lp.feasible);
}

TEST(RepresentativeTriple, MedianSpacing) {
    std::vector<UnitVector3> dirs;
    for (int k = 0; k < 7; ++k) dirs.push_back(UnitVector3::from_polar(k * kPi / 3, 0.0));
    const auto t = representative_triple(dirs);
    ASSERT_EQ(t.size(), 3u);
    EXPECT_NEAR(angle_between(t[0], t[1]), kPi / 3, 1e-12);
    EXPECT_NEAR(angle_between(t[1], t[2]), kPi / 3, 1e-12);
    EXPECT_NEAR(angle_between(t[0], t[2]), 2 * kPi / 3, 1e-12);
}

TEST(CompareWithGbm, SideBySide) {
    auto cfg = base_config();
    cfg.n_steps = 100000;
    cfg.regime = LocalRegime{kPi / 3};
    GbmParams gbm{100.0, 0.05, 0.2, 1.0, 100000};
    const auto cmp = compare_with_gbm(cfg, gbm);
    ASSERT_TRUE(cmp.gbm.excess_kurtosis);
    EXPECT_NEAR(*cmp.gbm.excess_kurtosis, 0.0, 0.1);
    EXPECT_EQ(cmp.trades.size(), 100000u);
    EXPECT_EQ(cmp.gbm_path.values.size(), 100001u);
    EXPECT_NE(cmp.sphere_seed, cmp.gbm_seed);
    EXPECT_TRUE(cmp.kolmogorov.verdicts_agree);
    // Directions within 60 degrees of the state: the median spacing is below
    // a right angle, where uniform-rho triples are not Kolmogorovian.
    EXPECT_FALSE(cmp.kolmogorov.lp.feasible);
    gbm.steps = 10;
    EXPECT_THROW(compare_with_gbm(cfg, gbm), std::invalid_argument);
}
