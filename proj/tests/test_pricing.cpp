#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "qmarket/pricing.hpp"

using namespace qmarket;

namespace {

OptionSpec atm(OptionKind kind = OptionKind::Call) {
    OptionSpec s;
    s.spot = 100;
    s.strike = 100;
    s.rate = 0.05;
    s.volatility = 0.2;
    s.tau = 1.0;
    s.kind = kind;
    return s;
}

OptionSpec with(OptionSpec s, double spot, double strike, OptionKind kind) {
    s.spot = spot;
    s.strike = strike;
    s.kind = kind;
    return s;
}

}  // namespace

TEST(IntrinsicValue, Examples) {
    EXPECT_EQ(intrinsic_value(atm()), 0.0);
    EXPECT_EQ(intrinsic_value(with(atm(), 110, 100, OptionKind::Call)), 10.0);
    EXPECT_EQ(intrinsic_value(with(atm(), 90, 100, OptionKind::Put)), 10.0);
    EXPECT_EQ(intrinsic_value(with(atm(), 110, 100, OptionKind::Put)), 0.0);
}

TEST(TimeValue, Examples) {
    const auto itm = with(atm(), 110, 100, OptionKind::Call);
    EXPECT_EQ(time_value(itm, 10.0), 0.0);
    EXPECT_NEAR(time_value(atm(), 10.4506), 10.4506, 1e-15);
    EXPECT_EQ(time_value(with(atm(), 90, 100, OptionKind::Call), 0.0), 0.0);
    // Deep in-the-money European put: negative, not clamped.
    const auto deep = with(atm(), 20, 100, OptionKind::Put);
    EXPECT_LT(time_value(deep, bs_price(deep)), 0.0);
}

TEST(NormCdf, SymmetryAndQuadratureOracle) {
    EXPECT_EQ(norm_cdf(0.0), 0.5);
    for (double t : {0.5, 1.0, 2.0}) EXPECT_NEAR(norm_cdf(t) + norm_cdf(-t), 1.0, 1e-14);
    EXPECT_NEAR(norm_cdf(1.96), 0.975002, 1e-6);
    EXPECT_NEAR(norm_cdf(1.96), oracle::normal_cdf(1.96), 1e-13);
    for (double t = -6.0; t <= 6.0; t += 0.25) EXPECT_NEAR(norm_cdf(t), oracle::normal_cdf(t), 1e-12) << t;
}

TEST(D1D2, HandEvaluation) {
    const auto d = d1_d2(atm());
    EXPECT_NEAR(d.d1, 0.35, 1e-15);
    EXPECT_NEAR(d.d2, 0.15, 1e-15);
}

TEST(D1D2, RelationOnRandomSpecs) {
    CounterRng rng(61, 0);
    for (int i = 0; i < 10000; ++i) {
        const auto s = oracle::random_spec(rng);
        const auto d = d1_d2(s);
        ASSERT_NEAR(d.d2, d.d1 - s.volatility * std::sqrt(s.tau), 1e-14);
    }
}

TEST(D1D2, MonotoneInMoneyness) {
    double prev = -INFINITY;
    for (double spot : {1.0, 10.0, 100.0, 1e3, 1e6, 1e12}) {
        const auto d = d1_d2(with(atm(), spot, 100, OptionKind::Call));
        EXPECT_GT(d.d1, prev);
        prev = d.d1;
    }
    EXPECT_GT(prev, 50.0);
}

TEST(D1D2, DegenerateThrows) {
    auto s = atm();
    s.volatility = 0.0;
    EXPECT_THROW(d1_d2(s), DegenerateParameters);
    s = atm();
    s.tau = 0.0;
    EXPECT_THROW(d1_d2(s), DegenerateParameters);
}

TEST(BsPrice, AtTheMoneyBenchmark) {
    EXPECT_NEAR(bs_price(atm()), 10.4506, 5e-4);
    EXPECT_NEAR(bs_price(atm()), 10.450583572185565, 1e-12);
}

TEST(BsPrice, AtTheMoneyAgainstIndependentMonteCarlo) {
    const auto mc = oracle::reference_mc_call(100, 100, 0.05, 0.2, 1.0, 2000000, 99);
    EXPECT_NEAR(bs_price(atm()), mc.value, 3 * mc.std_error);
}

TEST(BsPrice, ExpiryAndZeroVolatilityLimits) {
    auto s = with(atm(), 110, 100, OptionKind::Call);
    s.tau = 0.0;
    EXPECT_EQ(bs_price(s), 10.0);
    s = atm();
    s.volatility = 0.0;
    EXPECT_NEAR(bs_price(s), 100 - 100 * std::exp(-0.05), 1e-12);
    s.kind = OptionKind::Put;
    EXPECT_EQ(bs_price(s), 0.0);
}

TEST(BsPrice, PutCallParity) {
    CounterRng rng(62, 0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const auto c = oracle::random_spec(rng);
        auto p = c;
        p.kind = OptionKind::Put;
        worst = std::max(worst, std::abs(bs_price(c) - bs_price(p) - (c.spot - c.strike * std::exp(-c.rate * c.tau))));
    }
    EXPECT_LE(worst, 1e-12);
}

TEST(BsPrice, NoArbitrageBoundsAndMonotonicity) {
    CounterRng rng(63, 0);
    for (int i = 0; i < 10000; ++i) {
        const auto s = oracle::random_spec(rng);
        const double c = bs_price(s);
        ASSERT_GE(c, std::max(s.spot - s.strike * std::exp(-s.rate * s.tau), 0.0) - 1e-12);
        ASSERT_LE(c, s.spot);
    }
    double prev = 0.0;
    for (double spot = 50.0; spot <= 150.0; spot += 0.5) {
        const double c = bs_price(with(atm(), spot, 100, OptionKind::Call));
        EXPECT_GE(c, prev);
        prev = c;
    }
    prev = 0.0;
    for (double vol = 0.01; vol <= 1.0; vol += 0.01) {
        auto s = atm();
        s.volatility = vol;
        EXPECT_GE(bs_price(s), prev);
        prev = bs_price(s);
    }
}

TEST(OptionSpec, ValidationAndAmericanRejected) {
    auto s = atm();
    s.spot = -1;
    EXPECT_THROW(bs_price(s), std::invalid_argument);
    s = atm();
    s.style = ExerciseStyle::American;
    EXPECT_THROW(bs_price(s), std::invalid_argument);
    EXPECT_THROW(binomial_price(s, 10), std::invalid_argument);
}

TEST(Binomial, OneStepTwoLeafOracle) {
    OptionSpec s = atm();
    s.rate = 0.0;
    const double u = std::exp(0.2), d = 1.0 / u;
    const double q = (1.0 - d) / (u - d);
    const double expected = q * (100 * u - 100);
    EXPECT_NEAR(binomial_price(s, 1), expected, 1e-12);
}

TEST(Binomial, ConvergesToClosedForm) {
    EXPECT_LT(std::abs(binomial_price(atm(), 1000) - bs_price(atm())), 0.01);
    std::vector<double> lx, ly;
    for (std::uint32_t n = 50; n <= 1600; n *= 2) {
        lx.push_back(std::log(n));
        ly.push_back(std::log(std::abs(binomial_price(atm(), n) - bs_price(atm()))));
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    EXPECT_GE(sxy / sxx, -1.3);
    EXPECT_LE(sxy / sxx, -0.7);
}

TEST(Binomial, LatticeParity) {
    CounterRng rng(64, 0);
    for (int i = 0; i < 200; ++i) {
        const auto c = oracle::random_spec(rng);
        auto p = c;
        p.kind = OptionKind::Put;
        const std::uint32_t n = 50 + i;
        try {
            EXPECT_NEAR(binomial_price(c, n) - binomial_price(p, n), c.spot - c.strike * std::exp(-c.rate * c.tau),
                        1e-10);
        } catch (const std::domain_error&) {
            // Coarse lattice with high rate and low volatility: q outside [0, 1].
        }
    }
}

TEST(Binomial, RejectsBadInputs) {
    EXPECT_THROW(binomial_price(atm(), 0), std::invalid_argument);
    auto s = atm();
    s.volatility = 0.0;
    EXPECT_THROW(binomial_price(s, 10), std::invalid_argument);
    s = atm();
    s.rate = 5.0;
    s.volatility = 0.01;
    EXPECT_THROW(binomial_price(s, 1), std::domain_error);
    s = with(atm(), 110, 100, OptionKind::Call);
    s.tau = 0.0;
    EXPECT_EQ(binomial_price(s, 10), 10.0);
}

TEST(Gbm, ZeroVolatilityIsDeterministic) {
    GbmParams g{100.0, 0.07, 0.0, 2.0, 8};
    const auto paths = gbm_paths(g, 3, 1);
    for (const auto& p : paths) {
        ASSERT_EQ(p.values.size(), 9u);
        for (std::size_t k = 0; k < p.values.size(); ++k) {
            EXPECT_NEAR(p.values[k], 100.0 * std::exp(0.07 * p.times[k]), 1e-10);
            EXPECT_NEAR(p.times[k], 2.0 * k / 8, 1e-15);
        }
    }
}

TEST(Gbm, DiscountedMartingale) {
    GbmParams g{100.0, 0.05, 0.3, 1.0, 1};
    const auto est = discounted_terminal_mean(g, 0.05, 1000000, 65);
    EXPECT_NEAR(est.value, 100.0, 4 * est.std_error);
}

TEST(Gbm, IdenticalAcrossWorkers) {
    GbmParams g{50.0, 0.1, 0.4, 1.0, 64};
    const auto a = gbm_paths(g, 300, 66, 1);
    const auto b = gbm_paths(g, 300, 66, 8);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i].values, b[i].values);
    EXPECT_EQ(gbm_terminal_values(g, 300, 66, 1), gbm_terminal_values(g, 300, 66, 3));
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(gbm_terminal_values(g, 300, 66)[i], a[i].values.back());
}

TEST(Gbm, LogReturnsAreNormal) {
    GbmParams g{100.0, 0.0, 0.2, 1.0, 100000};
    const auto path = gbm_paths(g, 1, 67).front();
    std::vector<double> r;
    for (std::size_t k = 1; k < path.values.size(); ++k) r.push_back(std::log(path.values[k] / path.values[k - 1]));
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / r.size();
    double m2 = 0, m4 = 0;
    for (double x : r) {
        m2 += (x - mean) * (x - mean);
        m4 += std::pow(x - mean, 4);
    }
    m2 /= r.size();
    m4 /= r.size();
    EXPECT_NEAR(m4 / (m2 * m2) - 3.0, 0.0, 0.1);
    EXPECT_NEAR(m2, 0.04 / 100000, 0.04 / 100000 * 0.02);
}

TEST(Gbm, EulerSchemeRuns) {
    GbmParams g{100.0, 0.05, 0.2, 1.0, 252};
    const auto paths = gbm_paths(g, 10, 68, 1, GbmScheme::Euler);
    EXPECT_EQ(paths.size(), 10u);
    GbmParams wild{1.0, 0.0, 50.0, 1.0, 2};
    EXPECT_THROW(gbm_paths(wild, 1000, 69, 1, GbmScheme::Euler), std::runtime_error);
}

TEST(MonteCarlo, CoverageOfClosedForm) {
    int covered = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const auto mc = mc_price(atm(), 100000, 1000 + rep);
        covered += std::abs(mc.value - bs_price(atm())) <= 1.96 * mc.std_error;
    }
    EXPECT_GE(covered, 95 - 4);  // binomial(100, 0.95) lower 2-sigma band
}

TEST(MonteCarlo, IndependentOfWorkers) {
    const auto a = mc_price(atm(OptionKind::Put), 30000, 70, 1);
    const auto b = mc_price(atm(OptionKind::Put), 30000, 70, 8);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.std_error, b.std_error);
}

TEST(PdeResidual, ClosedFormSatisfiesPde) {
    const double r1 = pde_residual(atm(), 0.1, 1e-4);
    EXPECT_LT(std::abs(r1), 1e-4);
    const double coarse = r1;
    const double fine = pde_residual(atm(), 0.05, 5e-5);
    const double ratio = coarse / fine;
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
}

TEST(PdeResidual, IntrinsicValueFails) {
    const double r = pde_residual([](const OptionSpec& s) { return intrinsic_value(s); }, atm(), 0.1, 1e-4);
    EXPECT_GT(std::abs(r), 0.1);
}

TEST(PdeResidual, GuardsSteps) {
    EXPECT_THROW(pde_residual(atm(), 0.0, 1e-4), std::invalid_argument);
    EXPECT_THROW(pde_residual(atm(), 0.1, 2.0), std::invalid_argument);
    EXPECT_THROW(pde_residual(atm(), 1e-6, 1e-4), std::invalid_argument);
    auto s = atm();
    s.volatility = 0.0;
    EXPECT_THROW(pde_residual(s, 0.1, 1e-4), std::invalid_argument);
}
