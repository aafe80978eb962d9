#include "ruinlab/risk_process.hpp"
#include "ruinlab/rng.hpp"

#include "oracles.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

using namespace ruinlab;

namespace {

RiskModel make_model(double lambda, double beta, double loading, double theta = 1.0, int horizon = 60) {
    RiskModel m;
    m.lambda = lambda;
    m.beta = beta;
    m.loading = loading;
    m.copula_theta = theta;
    m.horizon = horizon;
    return m;
}

// P(Gamma(n, beta) <= s) from the Poisson identity.
double erlang_cdf(long n, double beta, double s) {
    const double x = beta * s;
    double term = std::exp(-x), sum = 0.0;
    for (long k = 0; k < n; ++k) {
        sum += term;
        term *= x / static_cast<double>(k + 1);
    }
    return 1.0 - sum;
}

double ruin_key(const SurplusPath& p) {
    return p.ruin_time ? *p.ruin_time : std::numeric_limits<double>::infinity();
}

} // namespace

TEST(Premium, Examples) {
    EXPECT_NEAR(premium_per_period(make_model(10, 0.001, 0.2)), 12000.0, 1e-8);
    auto m = make_model(7, 0.01, 0.0);
    EXPECT_DOUBLE_EQ(premium_per_period(m), expected_period_loss(m));
    EXPECT_NEAR(premium_per_period(make_model(17.53, 0.00000273, 0.1)), 7063369.96, 0.01);
}

TEST(Premium, PositiveDrift) {
    for (double loading : {0.01, 0.1, 0.5, 2.0}) {
        const auto m = make_model(3.3, 0.2, loading);
        EXPECT_GT(premium_per_period(m) - m.lambda / m.beta, 0.0);
    }
}

TEST(Model, Validation) {
    EXPECT_NO_THROW(validate(make_model(0, 1, 0.1)));
    EXPECT_THROW(validate(make_model(-1, 1, 0.1)), std::invalid_argument);
    EXPECT_THROW(validate(make_model(1, 0, 0.1)), std::invalid_argument);
    EXPECT_THROW(validate(make_model(1, 1, 0.0)), std::invalid_argument);
    EXPECT_THROW(validate(make_model(1, 1, 0.1, 0.5)), std::invalid_argument);
    EXPECT_THROW(validate(make_model(1, 1, 0.1, 1.0, 0)), std::invalid_argument);
}

TEST(PoissonQuantile, AgreesWithCdf) {
    for (double lambda : {0.3, 4.2, 17.33, 900.0}) {
        for (double u : {1e-9, 0.01, 0.3, 0.5, 0.9, 0.999999}) {
            const long n = poisson_quantile(u, lambda);
            const PoissonInverter inv(lambda);
            EXPECT_EQ(inv(u), n) << lambda << " " << u;
            // P(N <= n) >= u > P(N <= n - 1), via a direct log-pmf sum
            double cdf = 0.0, below = 0.0;
            for (long k = 0; k <= n; ++k) {
                const double pmf = std::exp(k * std::log(lambda) - lambda - std::lgamma(k + 1.0));
                if (k < n) below += pmf;
                cdf += pmf;
            }
            EXPECT_GE(cdf, u - 1e-12);
            EXPECT_LT(below, u + 1e-12);
        }
    }
    EXPECT_EQ(poisson_quantile(0.7, 0.0), 0);
}

TEST(AggregateClaims, VanishingFrequency) {
    const auto m = make_model(1e-12, 1.0, 0.1);
    auto engine = make_engine(1);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(aggregate_claims_independent(m, engine), 0.0);
    }
}

TEST(AggregateClaims, CompoundPoissonMoments) {
    const auto m = make_model(5.0, 0.5, 0.1);
    auto engine = make_engine(2024);
    std::vector<double> s(1'000'000);
    for (auto& x : s) x = aggregate_claims_independent(m, engine);
    EXPECT_NEAR(oracle::sample_mean(s), m.lambda / m.beta, 0.01 * m.lambda / m.beta);
    const double var = 2.0 * m.lambda / (m.beta * m.beta);
    EXPECT_NEAR(oracle::sample_variance(s), var, 0.03 * var);
}

TEST(AggregateClaims, UnitThetaReducesToIndependence) {
    const auto m = make_model(4.0, 0.1, 0.1, 1.0);
    auto e1 = make_engine(10);
    auto e2 = make_engine(20);
    std::vector<double> a(100'000), b(100'000);
    for (auto& x : a) x = aggregate_claims_dependent(m, e1);
    for (auto& x : b) x = aggregate_claims_independent(m, e2);
    EXPECT_GT(oracle::ks_two_sample_p(a, b), 0.01);

    // Same engine state gives the same draw.
    auto e3 = make_engine(30);
    auto e4 = make_engine(30);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(aggregate_claims_dependent(m, e3), aggregate_claims_independent(m, e4));
    }
}

TEST(AggregateClaims, StrongCouplingCorrelatesCountAndMeanSize) {
    const auto m = make_model(5.0, 1.0, 0.1, 5.0);
    const PeriodSampler sampler(m, Assumption::Dependent);
    ASSERT_TRUE(sampler.uses_copula());
    auto engine = make_engine(77);
    std::vector<double> counts, means, claims;
    for (int i = 0; i < 100'000; ++i) {
        const auto loss = sampler.draw(engine, claims);
        if (loss.count == 0) continue;
        counts.push_back(static_cast<double>(loss.count));
        means.push_back(loss.total / static_cast<double>(loss.count));
    }
    const double mc = oracle::sample_mean(counts), mm = oracle::sample_mean(means);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        sxy += (counts[i] - mc) * (means[i] - mm);
        sxx += (counts[i] - mc) * (counts[i] - mc);
        syy += (means[i] - mm) * (means[i] - mm);
    }
    EXPECT_GT(sxy / std::sqrt(sxx * syy), 0.5);
}

TEST(AggregateClaims, MedianLevelGivenCount) {
    const auto m = make_model(6.0, 0.02, 0.1, 2.0);
    for (double u : {0.05, 0.4, 0.8, 0.99}) {
        const auto loss = aggregate_claims_copula(m, u, 0.5);
        ASSERT_GT(loss.count, 0);
        // The total sits at the conditional median, so the mean claim is the
        // median of the count's Gamma law divided by the count.
        EXPECT_NEAR(erlang_cdf(loss.count, m.beta, loss.total), 0.5, 1e-10);
        EXPECT_NEAR(loss.total / static_cast<double>(loss.count),
                    (loss.count - 1.0 / 3.0) / (m.beta * static_cast<double>(loss.count)),
                    0.05 / (m.beta * static_cast<double>(loss.count)));
    }
    // Raising v raises the total for a fixed count.
    EXPECT_LT(aggregate_claims_copula(m, 0.5, 0.2).total, aggregate_claims_copula(m, 0.5, 0.9).total);
}

TEST(SplitTotal, Exchangeable) {
    SplitMix64 gen(4);
    std::vector<double> claims;
    split_total(100.0, 7, gen, claims);
    ASSERT_EQ(claims.size(), 7u);
    double s = 0;
    for (double c : claims) {
        EXPECT_GT(c, 0.0);
        s += c;
    }
    EXPECT_NEAR(s, 100.0, 1e-10);
    split_total(5.0, 0, gen, claims);
    EXPECT_TRUE(claims.empty());
}

TEST(SurplusPath, NoClaimsNoRuin) {
    const auto m = make_model(0.0, 1.0, 0.1, 1.0, 24);
    auto stream = PathStream::for_path(1, 0);
    const auto p = simulate_surplus_path(m, 5.0, Assumption::Independent, stream);
    EXPECT_FALSE(p.ruin_time);
    ASSERT_EQ(p.values.size(), 25u);
    for (std::size_t i = 1; i < p.values.size(); ++i) {
        EXPECT_EQ(p.values[i] - p.values[i - 1], premium_per_period(m));
    }

    const auto m2 = make_model(1e-9, 1e-9, 0.1, 1.0, 24);
    auto stream2 = PathStream::for_path(1, 0);
    const auto p2 = simulate_surplus_path(m2, 5.0, Assumption::Independent, stream2);
    for (std::size_t i = 1; i < p2.values.size(); ++i) {
        EXPECT_GT(p2.values[i], p2.values[i - 1]);
    }
}

TEST(SurplusPath, ImmediateRuinFromZero) {
    const auto m = make_model(2.0, 1.0, 0.1);
    const double c = premium_per_period(m);
    const PeriodSampler sampler(m, Assumption::Independent);
    std::vector<double> claims;
    int found = 0;
    for (std::uint64_t i = 0; i < 200 && found < 10; ++i) {
        auto probe = PathStream::for_path(9, i);
        if (sampler.draw(probe.engine, claims).total <= c) continue;
        ++found;
        auto stream = PathStream::for_path(9, i);
        const auto p = simulate_surplus_path(m, 0.0, Assumption::Independent, stream);
        ASSERT_TRUE(p.ruin_time);
        EXPECT_EQ(*p.ruin_time, 1);
        EXPECT_EQ(p.values.size(), 2u);
    }
    EXPECT_EQ(found, 10);
}

TEST(SurplusPath, BitIdenticalForSeed) {
    for (auto assumption : {Assumption::Independent, Assumption::Dependent}) {
        auto m = make_model(3.0, 0.5, 0.1, 2.5, 120);
        m.monitoring = Monitoring::Continuous;
        auto s1 = PathStream::for_path(99, 5);
        auto s2 = PathStream::for_path(99, 5);
        const auto a = simulate_surplus_path(m, 20.0, assumption, s1);
        const auto b = simulate_surplus_path(m, 20.0, assumption, s2);
        EXPECT_EQ(a.values, b.values);
        EXPECT_EQ(a.ruin_time, b.ruin_time);
    }
}

TEST(SurplusPath, MoreCapitalNeverRuinsEarlier) {
    for (auto monitoring : {Monitoring::PeriodEnd, Monitoring::Continuous}) {
        for (auto assumption : {Assumption::Independent, Assumption::Dependent}) {
            auto m = make_model(2.0, 1.0, 0.05, 3.0, 80);
            m.monitoring = monitoring;
            for (std::uint64_t path = 0; path < 200; ++path) {
                double previous = 0.0;
                for (double u0 : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
                    auto stream = PathStream::for_path(31, path);
                    const double key = ruin_key(simulate_surplus_path(m, u0, assumption, stream));
                    EXPECT_GE(key, previous);
                    previous = key;
                }
            }
        }
    }
}

TEST(SurplusPath, ContinuousMonitoringRuinsNoLater) {
    auto pe = make_model(3.0, 1.0, 0.1, 1.0, 60);
    auto ct = pe;
    ct.monitoring = Monitoring::Continuous;
    int strictly_earlier = 0;
    for (std::uint64_t path = 0; path < 500; ++path) {
        auto s1 = PathStream::for_path(12, path);
        auto s2 = PathStream::for_path(12, path);
        const double a = ruin_key(simulate_surplus_path(pe, 1.0, Assumption::Independent, s1));
        const double b = ruin_key(simulate_surplus_path(ct, 1.0, Assumption::Independent, s2));
        EXPECT_LE(b, a);
        strictly_earlier += b < a;
    }
    EXPECT_GT(strictly_earlier, 0);
}

TEST(RunningMinimum, MatchesPathRuinDecision) {
    for (auto monitoring : {Monitoring::PeriodEnd, Monitoring::Continuous}) {
        auto m = make_model(2.0, 1.0, 0.1, 2.0, 50);
        m.monitoring = monitoring;
        const PeriodSampler sampler(m, Assumption::Dependent);
        for (std::uint64_t path = 0; path < 300; ++path) {
            auto s = PathStream::for_path(44, path);
            const double lowest = simulate_running_minimum(m, sampler, s, -1e300);
            for (double u0 : {0.0, 1.0, 3.0, 6.0}) {
                auto stream = PathStream::for_path(44, path);
                const bool ruined = simulate_surplus_path(m, u0, Assumption::Dependent, stream).ruin_time.has_value();
                EXPECT_EQ(ruined, u0 + lowest < 0.0) << path << " " << u0;
            }
        }
    }
}
