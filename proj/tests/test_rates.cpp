#include "hybridpop/error.hpp"
#include "hybridpop/rates.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace hybridpop;
using hybridpop::testing::constant_spec;

TEST(EvalBeta, ConstantLawIsOneEverywhere)
{
    auto p = instantiate(constant_spec(1.0), 9);
    for (std::size_t i = 0; i < 9; ++i) {
        for (double a : {0.0, 0.5, 7.0}) {
            for (double P : {0.0, 1.0, 100.0}) {
                EXPECT_EQ(eval_beta(p, i, a, P), 1.0);
            }
        }
    }
}

TEST(EvalBeta, SaturatingBaseSixAtUnitPopulation)
{
    ModelSpec s    = constant_spec(6.0);
    s.beta.density = density::Saturating{1.0};
    auto p         = instantiate(s, 5);
    EXPECT_DOUBLE_EQ(eval_beta(p, 2, 0.3, 1.0), 3.0);
}

TEST(EvalBeta, ZeroProfileGivesZero)
{
    auto p = instantiate(constant_spec(0.0), 5);
    EXPECT_EQ(eval_beta(p, 0, 0.0, 0.0), 0.0);
    EXPECT_EQ(eval_beta(p, 4, 3.0, 2.0), 0.0);
}

TEST(EvalBeta, RejectsNegativePopulationAndBadAges)
{
    ModelSpec s = constant_spec(1.0);
    s.a_max     = 2.0;
    auto p      = instantiate(s, 5);
    EXPECT_THROW(eval_beta(p, 0, 0.5, -1.0), std::invalid_argument);
    EXPECT_THROW(eval_beta(p, 0, -0.1, 0.0), std::out_of_range);
    EXPECT_THROW(eval_beta(p, 0, 2.0, 0.0), std::out_of_range);
    EXPECT_THROW(eval_mu(p, 0, 2.5, 0.0), std::out_of_range);
    EXPECT_THROW(eval_chi(p, 5, 0.0), std::out_of_range);
}

TEST(EvalChi, IgnoresAge)
{
    ModelSpec s    = constant_spec(1.0);
    s.chi.spatial  = spatial::Constant{0.5};
    s.chi.density  = density::Exponential{1.0};
    auto p         = instantiate(s, 5);
    EXPECT_DOUBLE_EQ(eval_chi(p, 1, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(eval_chi(p, 1, 2.0), 0.5 * std::exp(-2.0));
}

TEST(DensityResponse, EqualsOneAtZeroPopulation)
{
    EXPECT_EQ(evaluate(DensityResponse{density::Constant{}}, 0.0), 1.0);
    EXPECT_EQ(evaluate(DensityResponse{density::Saturating{0.3}}, 0.0), 1.0);
    EXPECT_EQ(evaluate(DensityResponse{density::Exponential{2.0}}, 0.0), 1.0);
    EXPECT_EQ(evaluate(DensityResponse{density::LinearThreshold{0.5, 3.0}}, 0.0), 1.0);
    EXPECT_EQ(evaluate(DensityResponse{density::LinearThreshold{-0.5, 3.0}}, 0.0), 1.0);
}

TEST(DensityResponse, LinearThresholdSaturatesAtCap)
{
    DensityResponse r = density::LinearThreshold{0.5, 2.0};
    EXPECT_DOUBLE_EQ(evaluate(r, 1.0), 1.5);
    EXPECT_DOUBLE_EQ(evaluate(r, 2.0), 2.0);
    EXPECT_DOUBLE_EQ(evaluate(r, 50.0), 2.0);
    DensityResponse down = density::LinearThreshold{-1.0, 5.0};
    EXPECT_EQ(evaluate(down, 3.0), 0.0);
}

TEST(AgeProfile, TableInterpolatesAndIsFlatOutside)
{
    AgeProfile t = age::Table{{0.0, 1.0, 3.0}, {2.0, 4.0, 0.0}};
    EXPECT_DOUBLE_EQ(evaluate(t, 0.5), 3.0);
    EXPECT_DOUBLE_EQ(evaluate(t, 2.0), 2.0);
    EXPECT_DOUBLE_EQ(evaluate(t, 9.0), 0.0);
}

TEST(SpatialProfile, CosineModes)
{
    SpatialProfile c = spatial::Cosine{1.0, {{0.5, 1}, {0.25, 2}}};
    EXPECT_DOUBLE_EQ(evaluate(c, 0.0, 2.0), 1.75);
    EXPECT_NEAR(evaluate(c, 2.0, 2.0), 1.0 - 0.5 + 0.25, 1e-15);
}

TEST(RateLaw, EvaluationsStayWithinDeclaredBounds)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        ModelSpec s    = constant_spec(1.0 + 5.0 * u01(rng));
        s.a_max        = 1.0 + 4.0 * u01(rng);
        s.beta.spatial = spatial::Cosine{2.0, {{u01(rng), 1}, {0.5 * u01(rng), 3}}};
        s.beta.age     = age::Exponential{1.0 + u01(rng), u01(rng) - 0.3};
        s.beta.density = density::Saturating{0.5 + u01(rng)};
        s.mu.age       = age::Table{{0.0, 0.5 * s.a_max, s.a_max}, {1.0, 0.5 + u01(rng), 2.0}};
        s.mu.density   = density::LinearThreshold{u01(rng), 3.0};
        s.chi.spatial  = spatial::Constant{0.4};
        s.chi.density  = density::LinearThreshold{0.5, 2.0};
        const std::size_t n = 17;
        auto p              = instantiate(s, n);
        const double bsup = p.beta.supremum(p.a_max), binf = p.beta.infimum(p.a_max);
        const double msup = p.mu.supremum(p.a_max), minf = p.mu.infimum(p.a_max);
        const double csup = p.chi.supremum(p.a_max);
        EXPECT_LE(csup, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (int k = 0; k < 20; ++k) {
                double a = s.a_max * k / 20.0;
                double P = 10.0 * u01(rng);
                double b = eval_beta(p, i, a, P);
                double m = eval_mu(p, i, a, P);
                double c = eval_chi(p, i, P);
                EXPECT_GE(b, 0.0);
                EXPECT_LE(b, bsup * (1 + 1e-14));
                EXPECT_GE(b, binf * (1 - 1e-14));
                EXPECT_LE(m, msup * (1 + 1e-14));
                EXPECT_GE(m, p.mu_lower * (1 - 1e-14));
                EXPECT_GE(m, minf * (1 - 1e-14));
                EXPECT_GT(c, 0.0);
                EXPECT_LE(c, 1.0);
            }
        }
    }
}

TEST(Instantiate, RejectsInvalidModels)
{
    ModelSpec s = constant_spec(1.0);
    s.diffusion = 0.0;
    EXPECT_THROW(instantiate(s, 5), ConfigError);

    s              = constant_spec(1.0);
    s.chi.spatial  = spatial::Constant{1.5};
    EXPECT_THROW(instantiate(s, 5), ConfigError);

    s           = constant_spec(1.0);
    s.mortality = spatial::Constant{-1.0};
    EXPECT_THROW(instantiate(s, 5), ConfigError);

    s          = constant_spec(1.0);
    s.mu_lower = 2.0; // above the infimum 1
    EXPECT_THROW(instantiate(s, 5), ConfigError);

    s            = constant_spec(1.0);
    s.mu.density = density::Saturating{1.0}; // infimum 0
    EXPECT_THROW(instantiate(s, 5), ConfigError);

    EXPECT_THROW(instantiate(constant_spec(1.0), 2), ConfigError);
}

TEST(Instantiate, MuLowerDefaultsToInfimum)
{
    ModelSpec s    = constant_spec(1.0);
    s.mu.spatial   = spatial::Cosine{2.0, {{0.5, 1}}};
    auto p         = instantiate(s, 9);
    EXPECT_DOUBLE_EQ(p.mu_lower, 1.5);
    s.mu_lower = 0.5;
    EXPECT_DOUBLE_EQ(instantiate(s, 9).mu_lower, 0.5);
}

TEST(Instantiate, ResolventSettlementDefaultsToE)
{
    ModelSpec s  = constant_spec(1.0);
    s.settlement = spatial::Constant{0.7};
    auto p       = instantiate(s, 5);
    EXPECT_EQ(p.resolvent_settlement, p.e);
    s.resolvent_settlement = spatial::Constant{0.2};
    EXPECT_DOUBLE_EQ(instantiate(s, 5).resolvent_settlement[3], 0.2);
}

TEST(BoundConstants, BenchmarkValues)
{
    auto b = bound_constants(instantiate(constant_spec(6.0), 9));
    EXPECT_DOUBLE_EQ(b.n1, 6.0);
    EXPECT_DOUBLE_EQ(b.n2, 6.0);
    auto z = bound_constants(instantiate(constant_spec(0.0), 9));
    EXPECT_EQ(z.n1, 0.0);
}
