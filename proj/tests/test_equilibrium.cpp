#include "hybridpop/equilibrium.hpp"
#include "hybridpop/solver.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hybridpop;
using hybridpop::testing::constant_spec;
using hybridpop::testing::saturating_spec;
using hybridpop::testing::setup;

TEST(Fkpp, ConstantSupercriticalQuadratic)
{
    auto s   = setup(constant_spec(3.0), 17, 0.01);
    auto sol = solve_fkpp(s.params, s.grid, 0.0);
    // K = 3 up to age quadrature; u = K - 2 exactly for constant K
    const double K = kernel_K(s.params, s.grid, 0.0)[0];
    for (double v : sol.u) {
        EXPECT_NEAR(v, K - 2.0, 1e-12);
        EXPECT_NEAR(v, 1.0, 1e-4);
    }
    EXPECT_LT(sol.residual, 1e-9);
    EXPECT_FALSE(sol.used_fallback);
}

TEST(Fkpp, SubcriticalIsZero)
{
    auto s = setup(constant_spec(1.5), 17, 0.05);
    for (double v : solve_fkpp(s.params, s.grid, 0.0).u) {
        EXPECT_EQ(v, 0.0);
    }
    auto z = setup(constant_spec(0.0), 17, 0.05);
    for (double v : solve_fkpp(z.params, z.grid, 0.0).u) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(Fkpp, HeterogeneousResidualAndFallbackAgree)
{
    ModelSpec spec    = saturating_spec();
    spec.diffusion    = 0.02;
    spec.beta.spatial = spatial::Cosine{6.0, {{4.0, 1}}};
    spec.competition  = spatial::Cosine{1.0, {{0.5, 2}}};
    auto s            = setup(spec, 65, 0.02);
    auto newton       = solve_fkpp(s.params, s.grid, 0.5);
    EXPECT_LT(newton.residual, 1e-9);
    EXPECT_LT(fkpp_residual(s.params, s.grid, 0.5, newton.u), 1e-9);
    EXPECT_GT(newton.u.min(), 0.0);

    FkppOptions opts;
    opts.max_newton = 0;
    auto monotone   = solve_fkpp(s.params, s.grid, 0.5, opts);
    EXPECT_TRUE(monotone.used_fallback);
    for (std::size_t i = 0; i < 65; ++i) {
        EXPECT_NEAR(monotone.u[i], newton.u[i], 1e-8);
    }
}

TEST(Fkpp, NonincreasingInP)
{
    ModelSpec spec    = saturating_spec();
    spec.beta.spatial = spatial::Cosine{6.0, {{2.0, 1}}};
    auto s            = setup(spec, 33, 0.02);
    SpatialField prev = solve_fkpp(s.params, s.grid, 0.0).u;
    for (double P = 0.25; P <= 3.0; P += 0.25) {
        SpatialField cur = solve_fkpp(s.params, s.grid, P).u;
        for (std::size_t i = 0; i < 33; ++i) {
            EXPECT_LE(cur[i], prev[i] + 1e-12);
        }
        prev = cur;
    }
}

TEST(HMap, SaturatingBenchmarkClosedForm)
{
    auto s = setup(saturating_spec(), 17, 0.01);
    for (double P : {0.0, 0.5, 1.0, 1.5}) {
        EXPECT_NEAR(H_map(s.params, s.grid, P), 6.0 / (1.0 + P) - 2.0, 5e-4) << P;
    }
    EXPECT_NEAR(H_map(s.params, s.grid, 1.0), 1.0, 1e-3);
    EXPECT_EQ(H_map(s.params, s.grid, 2.5), 0.0);
}

TEST(PositiveEquilibrium, SaturatingBenchmark)
{
    auto s   = setup(saturating_spec(), 65, 0.02);
    auto rep = positive_equilibrium(s.params, s.grid);
    ASSERT_TRUE(rep.positive);
    EXPECT_NEAR(rep.P_star, 1.0, 1e-3);
    for (double v : rep.u_star) {
        EXPECT_NEAR(v, 1.0, 1e-3);
    }
    for (std::size_t i = 0; i < 65; i += 8) {
        for (std::size_t j = 0; j < s.grid.n_ages(); j += 7) {
            EXPECT_NEAR(rep.w_star(i, j), std::exp(-s.grid.age(j)), 1e-3);
        }
        EXPECT_DOUBLE_EQ(rep.w_star(i, 0), rep.u_star[i]);
    }
    EXPECT_LT(rep.fkpp_residual, 1e-9);
    EXPECT_LT(rep.fixed_point_residual, 1e-12);
    EXPECT_LT(rep.mass_residual, 1e-12);
    EXPECT_TRUE(rep.uniqueness_verified);
    for (std::size_t k = 1; k < rep.H_samples.size(); ++k) {
        EXPECT_LE(rep.H_samples[k].second, rep.H_samples[k - 1].second + 1e-12);
    }
}

TEST(PositiveEquilibrium, SubcriticalIsTrivial)
{
    auto s   = setup(constant_spec(1.0), 33, 0.05);
    auto rep = positive_equilibrium(s.params, s.grid);
    EXPECT_FALSE(rep.positive);
    EXPECT_NEAR(rep.r0, 0.5, 1e-3);
    EXPECT_NE(format_report(rep).find("P_star: absent"), std::string::npos);
}

TEST(PositiveEquilibrium, DensityIndependentUsesOneEvaluation)
{
    auto s   = setup(constant_spec(8.0), 33, 0.02);
    auto rep = positive_equilibrium(s.params, s.grid);
    ASSERT_TRUE(rep.positive);
    EXPECT_EQ(rep.H_samples.size(), 1u);
    EXPECT_DOUBLE_EQ(rep.P_star, rep.H_samples[0].second);
    EXPECT_NEAR(rep.P_star, 6.0, 1e-2);
}

TEST(PositiveEquilibrium, SimulationStaysStationary)
{
    auto s   = setup(saturating_spec(), 65, 0.02);
    auto rep = positive_equilibrium(s.params, s.grid);
    auto st  = make_state(s.params, s.grid, rep.u_star, rep.w_star);
    SimulationOptions opts;
    double drift  = 0.0;
    opts.observer = [&](const PopulationState& x) {
        for (std::size_t i = 0; i < 65; ++i) {
            drift = std::max(drift, std::abs(x.u[i] - rep.u_star[i]) / rep.u_star.max());
        }
    };
    auto traj = simulate(s.params, s.grid, st, 10.0, opts);
    EXPECT_LT(drift, 1e-6);
    EXPECT_LT(p_balance_residual(traj), 1e-6);
    double wdrift = 0.0;
    const auto& w = traj.snapshots.back().w;
    for (std::size_t k = 0; k < w.flat().size(); ++k) {
        wdrift = std::max(wdrift, std::abs(w.flat()[k] - rep.w_star.flat()[k]));
    }
    EXPECT_LT(wdrift, 1e-6);
}
