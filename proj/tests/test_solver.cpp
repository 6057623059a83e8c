#include "hybridpop/error.hpp"
#include "hybridpop/solver.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hybridpop;
using hybridpop::testing::constant_spec;
using hybridpop::testing::setup;

namespace
{

AgeField age_profile(const Discretization& g, double (*f)(double))
{
    AgeField w(g.n_x, g.n_ages());
    for (std::size_t i = 0; i < g.n_x; ++i) {
        for (std::size_t j = 0; j < g.n_ages(); ++j) {
            w(i, j) = f(g.age(j));
        }
    }
    return w;
}

double decay(double a) { return std::exp(-a); }
double one(double) { return 1.0; }

} // namespace

TEST(TotalPopulation, ZeroField)
{
    auto s = setup(constant_spec(1.0), 9, 0.1);
    EXPECT_EQ(total_population(s.grid, zero_state(s.params, s.grid)), 0.0);
}

TEST(TotalPopulation, UnitBox)
{
    ModelSpec spec = constant_spec(1.0);
    spec.a_max     = 1.0;
    auto s         = setup(spec, 9, 0.1);
    auto st        = make_state(s.params, s.grid, SpatialField(9), age_profile(s.grid, one));
    EXPECT_NEAR(total_population(s.grid, st), 1.0, 1e-14);
    EXPECT_NEAR(st.P, 1.0, 1e-14);
}

TEST(TotalPopulation, ExponentialAgeProfileRefines)
{
    double prev_err = 0.0;
    for (double dt : {0.1, 0.05, 0.025}) {
        auto s      = setup(constant_spec(1.0), 5, dt);
        auto st     = make_state(s.params, s.grid, SpatialField(5), age_profile(s.grid, decay));
        double err  = std::abs(total_population(s.grid, st) - (1.0 - std::exp(-s.grid.horizon)));
        if (prev_err > 0.0) {
            EXPECT_NEAR(prev_err / err, 4.0, 0.2);
        }
        prev_err = err;
    }
    EXPECT_LT(prev_err, 1e-4);
}

TEST(Recruitment, ZeroBirthRate)
{
    auto s  = setup(constant_spec(0.0), 9, 0.1);
    auto st = make_state(s.params, s.grid, SpatialField(9), age_profile(s.grid, decay));
    for (double b : recruitment_field(s.params, s.grid, st)) {
        EXPECT_EQ(b, 0.0);
    }
}

TEST(Recruitment, UnitIntegrand)
{
    ModelSpec spec = constant_spec(1.0);
    spec.a_max     = 1.0;
    auto s         = setup(spec, 9, 0.1);
    auto st        = make_state(s.params, s.grid, SpatialField(9), age_profile(s.grid, one));
    for (double b : recruitment_field(s.params, s.grid, st)) {
        EXPECT_NEAR(b, 1.0, 1e-14);
    }
    EXPECT_EQ(recruitment_field(s.params, s.grid, st), st.B);
}

TEST(Recruitment, LinearAgeProfileAgainstExponentialDensity)
{
    ModelSpec spec = constant_spec(1.0);
    spec.beta.age  = age::Table{{0.0, 100.0}, {0.0, 100.0}};
    auto s         = setup(spec, 5, 0.01);
    auto st        = make_state(s.params, s.grid, SpatialField(5), age_profile(s.grid, decay));
    for (double b : recruitment_field(s.params, s.grid, st)) {
        EXPECT_NEAR(b, 1.0, 1e-4);
    }
}

TEST(Step, ZeroStateIsFixed)
{
    auto s    = setup(hybridpop::testing::saturating_spec(), 9, 0.05);
    auto zero = zero_state(s.params, s.grid);
    auto next = step(s.params, s.grid, zero);
    EXPECT_EQ(next.u, zero.u);
    EXPECT_EQ(next.w, zero.w);
    EXPECT_EQ(next.P, 0.0);
    EXPECT_DOUBLE_EQ(next.t, 0.05);
}

TEST(Step, ImplicitEulerDecayOfDispersers)
{
    ModelSpec spec   = constant_spec(0.0);
    spec.competition = spatial::Constant{0.0};
    for (double dt : {0.1, 0.01}) {
        auto s    = setup(spec, 9, dt);
        auto st   = make_state(s.params, s.grid, SpatialField(9, 1.0), AgeField(9, s.grid.n_ages()));
        auto next = step(s.params, s.grid, st);
        for (double v : next.u) {
            EXPECT_NEAR(v, 1.0 / (1.0 + 2.0 * dt), 1e-14);
            EXPECT_NEAR(v, std::exp(-2.0 * dt), 2.5 * dt * dt);
        }
    }
}

TEST(Step, ExactSurvivalForConstantMortality)
{
    ModelSpec spec = constant_spec(0.0);
    spec.a_max     = 3.0;
    auto s         = setup(spec, 5, 0.1);
    Stepper stepper(s.params, s.grid);
    auto st = make_state(s.params, s.grid, SpatialField(5), age_profile(s.grid, one));
    const std::size_t n = 12;
    for (std::size_t k = 0; k < n; ++k) {
        stepper.advance(st);
    }
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = n; j < s.grid.n_ages(); ++j) {
            EXPECT_NEAR(st.w(i, j), std::exp(-static_cast<double>(n) * s.grid.dt), 1e-14);
        }
    }
}

TEST(Step, RenewalUsesNewDisperserDensity)
{
    ModelSpec spec   = constant_spec(0.0);
    spec.chi.spatial = spatial::Constant{0.5};
    spec.settlement  = spatial::Constant{2.0};
    auto s           = setup(spec, 5, 0.1);
    auto st          = make_state(s.params, s.grid, SpatialField(5, 1.0), AgeField(5, s.grid.n_ages()));
    auto next        = step(s.params, s.grid, st);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_DOUBLE_EQ(next.w(i, 0), 0.5 * 2.0 * next.u[i]);
    }
}

TEST(Step, TailMassViolationIsReported)
{
    auto s  = setup(constant_spec(1.0), 5, 0.1);
    auto st = make_state(s.params, s.grid, SpatialField(5), age_profile(s.grid, one));
    EXPECT_THROW(step(s.params, s.grid, st), NumericalError);
}

TEST(Step, BlowUpGuard)
{
    auto s = setup(constant_spec(1.0), 5, 0.1);
    StepperOptions opts;
    opts.blowup_threshold = 1.0;
    Stepper stepper(s.params, s.grid, opts);
    auto st = make_state(s.params, s.grid, SpatialField(5, 50.0), AgeField(5, s.grid.n_ages()));
    EXPECT_THROW(stepper.advance(st), NumericalError);
}

TEST(Step, ShapeMismatchRejected)
{
    auto s = setup(constant_spec(1.0), 5, 0.1);
    EXPECT_THROW(make_state(s.params, s.grid, SpatialField(4), AgeField(5, s.grid.n_ages())), std::invalid_argument);
}

TEST(Simulate, ZeroInitialStaysZero)
{
    auto s    = setup(hybridpop::testing::saturating_spec(), 9, 0.05);
    auto traj = simulate(s.params, s.grid, zero_state(s.params, s.grid), 2.0);
    for (std::size_t n = 0; n < traj.P_series.size(); ++n) {
        EXPECT_EQ(traj.P_series[n], 0.0);
        EXPECT_EQ(traj.max_u_series[n], 0.0);
    }
    EXPECT_EQ(p_balance_residual(traj), 0.0);
    EXPECT_EQ(traj.snapshots.size(), 2u);
}

TEST(Simulate, SnapshotsAtOutputTimes)
{
    auto s = setup(constant_spec(1.0), 9, 0.1);
    SimulationOptions opts;
    opts.output_times = {1.0, 0.5, 0.52, 2.0};
    auto traj = simulate(s.params, s.grid, zero_state(s.params, s.grid), 2.0, opts);
    ASSERT_EQ(traj.snapshots.size(), 3u);
    EXPECT_NEAR(traj.snapshots[0].t, 0.5, 1e-12);
    EXPECT_NEAR(traj.snapshots[1].t, 1.0, 1e-12);
    EXPECT_NEAR(traj.snapshots[2].t, 2.0, 1e-12);
    EXPECT_EQ(traj.P_series.size(), 21u);
}

TEST(Simulate, SubcriticalDisperserMaximumDecays)
{
    auto s  = setup(constant_spec(1.0), 17, 0.05);
    auto st = make_state(s.params, s.grid, SpatialField(17, 1.0), age_profile(s.grid, decay));
    auto tr = simulate(s.params, s.grid, st, 20.0);
    EXPECT_LT(tr.max_u_series.back(), 1e-3 * tr.max_u_series.front());
}

TEST(Simulate, SerialAndParallelTrajectoriesAreBitwiseIdentical)
{
    auto s = setup(hybridpop::testing::saturating_spec(), 33, 0.05);
    SpatialField u(33);
    for (std::size_t i = 0; i < 33; ++i) {
        u[i] = 0.5 + 0.4 * std::cos(3.0 * s.grid.x(i));
    }
    auto st = make_state(s.params, s.grid, u, age_profile(s.grid, decay));
    SimulationOptions a, b;
    a.stepper.policy = kernels::Policy::serial;
    b.stepper.policy = kernels::Policy::parallel;
    auto ta          = simulate(s.params, s.grid, st, 3.0, a);
    auto tb          = simulate(s.params, s.grid, st, 3.0, b);
    EXPECT_EQ(ta.P_series, tb.P_series);
    EXPECT_EQ(ta.snapshots.back().w, tb.snapshots.back().w);
    EXPECT_EQ(ta.snapshots.back().u, tb.snapshots.back().u);
}

TEST(Simulate, PositivityFromRandomNonnegativeData)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        ModelSpec spec   = hybridpop::testing::saturating_spec();
        spec.diffusion   = 0.01 + u01(rng);
        spec.mortality   = spatial::Cosine{1.0, {{0.9 * u01(rng), 2}}};
        spec.competition = spatial::Constant{0.5 + u01(rng)};
        auto s           = setup(spec, 17, 0.05);
        SpatialField u(17);
        for (auto& v : u) {
            v = u01(rng) < 0.3 ? 0.0 : 3.0 * u01(rng);
        }
        auto st = make_state(s.params, s.grid, u, age_profile(s.grid, decay));
        SimulationOptions opts;
        bool ok      = true;
        opts.observer = [&](const PopulationState& x) {
            for (double v : x.u) {
                ok = ok && v >= 0.0;
            }
            for (double v : x.w.flat()) {
                ok = ok && v >= 0.0;
            }
        };
        simulate(s.params, s.grid, st, 5.0, opts);
        EXPECT_TRUE(ok);
    }
}

TEST(CharacteristicOracle, InitialTimeReturnsInitialData)
{
    ModelSpec spec = constant_spec(1.0);
    spec.a_max     = 2.0;
    auto s         = setup(spec, 5, 0.1);
    auto w0        = age_profile(s.grid, decay);
    EXPECT_DOUBLE_EQ(characteristic_oracle(s.params, s.grid, w0, {}, {0.0}, 2, 0.7, 0.0), w0(2, 7));
    EXPECT_DOUBLE_EQ(characteristic_oracle(s.params, s.grid, w0, {}, {0.0}, 2, 0.0, 0.0), 1.0);
}

TEST(CharacteristicOracle, InitialBranchConstantMortality)
{
    ModelSpec spec = constant_spec(1.0);
    spec.a_max     = 3.0;
    auto s         = setup(spec, 5, 0.1);
    auto w0        = age_profile(s.grid, one);
    for (std::size_t j = 0; j < s.grid.n_ages(); ++j) {
        w0(1, j) = 1.0 + s.grid.age(j);
    }
    std::vector<double> P(20, 0.3);
    double v = characteristic_oracle(s.params, s.grid, w0, {}, P, 1, 2.0, 1.2);
    EXPECT_NEAR(v, (1.0 + 0.8) * std::exp(-1.2), 1e-13);
}

TEST(CharacteristicOracle, RenewalBranchConstantMortality)
{
    auto s  = setup(constant_spec(1.0), 5, 0.1);
    auto w0 = age_profile(s.grid, decay);
    std::vector<SpatialField> u_hist;
    std::vector<double> P_hist;
    for (int n = 0; n <= 20; ++n) {
        u_hist.emplace_back(5, 1.0 + 0.1 * n);
        P_hist.push_back(0.5);
    }
    double v = characteristic_oracle(s.params, s.grid, w0, u_hist, P_hist, 3, 0.5, 2.0);
    EXPECT_NEAR(v, (1.0 + 0.1 * 15) * std::exp(-0.5), 1e-13);
}

TEST(CharacteristicOracle, SeamAndCoverageErrors)
{
    auto s  = setup(constant_spec(1.0), 5, 0.1);
    auto w0 = age_profile(s.grid, decay);
    std::vector<SpatialField> u_hist(11, SpatialField(5, 1.0));
    std::vector<double> P_hist(11, 0.0);
    EXPECT_THROW(characteristic_oracle(s.params, s.grid, w0, u_hist, P_hist, 0, 0.5, 0.5), std::invalid_argument);
    EXPECT_THROW(characteristic_oracle(s.params, s.grid, w0, u_hist, P_hist, 0, 0.5, 3.0), std::invalid_argument);
    EXPECT_THROW(characteristic_oracle(s.params, s.grid, w0, u_hist, P_hist, 9, 0.5, 0.2), std::out_of_range);
}
