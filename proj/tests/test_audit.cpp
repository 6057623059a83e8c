#include "hybridpop/audit.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace hybridpop;
using hybridpop::testing::constant_spec;
using hybridpop::testing::setup;

TEST(Audit, DensityIndependentLawsPassWeakly)
{
    auto s   = setup(constant_spec(4.0), 33, 0.05);
    auto rep = audit_assumptions(s.params, s.grid);
    for (const char* name : {"A1", "A2", "A3", "A4(i)", "A4(ii)", "A4(iii)", "A5", "A6", "A7"}) {
        EXPECT_TRUE(rep.holds(name)) << name;
    }
    EXPECT_TRUE(rep.get("A4(iii)").weakly_monotone);
    EXPECT_TRUE(rep.get("A6").weakly_monotone);
    EXPECT_TRUE(rep.get("A7").weakly_monotone);
    EXPECT_TRUE(rep.a4());
    EXPECT_DOUBLE_EQ(rep.P_probe_max, 40.0); // 10 N1, N1 = 4
    EXPECT_NE(format_report(rep).find("weakly monotone"), std::string::npos);
}

TEST(Audit, SaturatingBirthRate)
{
    auto s   = setup(hybridpop::testing::saturating_spec(), 33, 0.05);
    auto rep = audit_assumptions(s.params, s.grid);
    EXPECT_TRUE(rep.holds("A6"));
    EXPECT_TRUE(rep.holds("A7"));
    EXPECT_FALSE(rep.get("A7").weakly_monotone);
    EXPECT_TRUE(rep.holds("A4(i)")); // s / (1 + s P1) increases along the scaled family
}

TEST(Audit, DecreasingSettlementFailsA4iii)
{
    ModelSpec spec   = constant_spec(4.0);
    spec.chi.density = density::Saturating{2.0};
    auto s           = setup(spec, 33, 0.05);
    auto rep         = audit_assumptions(s.params, s.grid);
    EXPECT_FALSE(rep.holds("A4(iii)"));
    ASSERT_TRUE(rep.get("A4(iii)").first_violation.has_value());
    const auto& v = *rep.get("A4(iii)").first_violation;
    EXPECT_GT(v.before, v.after);
    EXPECT_TRUE(rep.holds("A6"));
    EXPECT_FALSE(rep.a4());
}

TEST(Audit, IncreasingSettlementFailsA6)
{
    ModelSpec spec   = constant_spec(4.0);
    spec.chi.spatial = spatial::Constant{0.5};
    spec.chi.density = density::LinearThreshold{0.5, 2.0};
    auto s           = setup(spec, 17, 0.05);
    auto rep         = audit_assumptions(s.params, s.grid);
    EXPECT_TRUE(rep.holds("A4(iii)"));
    EXPECT_FALSE(rep.holds("A6"));
}

TEST(Audit, StrongBirthInhibitionFailsA4i)
{
    ModelSpec spec    = constant_spec(4.0);
    spec.beta.density = density::Exponential{2.0};
    auto s            = setup(spec, 17, 0.05);
    auto rep          = audit_assumptions(s.params, s.grid);
    EXPECT_FALSE(rep.holds("A4(i)"));
    EXPECT_TRUE(rep.holds("A6"));
}

TEST(Audit, GammaForMortality)
{
    auto s = setup(constant_spec(1.0), 17, 0.05);
    EXPECT_NEAR(audit_assumptions(s.params, s.grid).get("A4(ii)").value, 1.0, 1e-12);

    ModelSpec spec  = constant_spec(1.0);
    spec.mu.density = density::LinearThreshold{0.1, 100.0};
    auto t          = setup(spec, 17, 0.05);
    auto rep        = audit_assumptions(t.params, t.grid);
    EXPECT_TRUE(rep.holds("A4(ii)"));
    EXPECT_GT(rep.get("A4(ii)").value, 1.0);
    EXPECT_TRUE(rep.holds("A6"));
}

TEST(Audit, NonpositiveCompetitionFailsA1)
{
    ModelSpec spec   = constant_spec(1.0);
    spec.competition = spatial::Cosine{0.5, {{0.5, 1}}};
    auto s           = setup(spec, 17, 0.05);
    auto rep         = audit_assumptions(s.params, s.grid);
    EXPECT_FALSE(rep.holds("A1"));
    EXPECT_EQ(rep.get("A1").first_violation->x_index, 16u);
}

TEST(Audit, Deterministic)
{
    auto s = setup(hybridpop::testing::saturating_spec(), 65, 0.02);
    EXPECT_EQ(format_report(audit_assumptions(s.params, s.grid)), format_report(audit_assumptions(s.params, s.grid)));
}

TEST(Audit, ConfiguredProbeRange)
{
    auto s = setup(constant_spec(1.0), 17, 0.05);
    ProbeLattice lat;
    lat.P_probe_max = 3.0;
    EXPECT_DOUBLE_EQ(audit_assumptions(s.params, s.grid, lat).P_probe_max, 3.0);
}
