#include "hybridpop/audit.hpp"
#include "hybridpop/tables.hpp"
#include "hybridpop/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hybridpop
{
namespace
{

enum class Direction { nonincreasing, nondecreasing };

// Finite-difference sign scan along P with a round-off allowance.
class MonotoneScan
{
public:
    explicit MonotoneScan(Direction dir)
        : dir_(dir)
    {
    }

    void feed(std::size_t x, double a, double P, double P_next, double before, double after)
    {
        const double tol  = 1e-12 * std::max({1.0, std::abs(before), std::abs(after)});
        const double diff = after - before;
        if (std::abs(diff) > tol) {
            strict_ = true;
        }
        const bool bad = dir_ == Direction::nonincreasing ? diff > tol : diff < -tol;
        if (bad && !first_) {
            first_ = Violation{x, a, P, P_next, before, after};
        }
    }

    AuditEntry entry(std::string name, std::string note) const
    {
        AuditEntry e;
        e.name            = std::move(name);
        e.holds           = !first_;
        e.weakly_monotone = !strict_;
        e.first_violation = first_;
        e.value           = std::numeric_limits<double>::quiet_NaN();
        e.note            = std::move(note);
        return e;
    }

private:
    Direction dir_;
    bool strict_ = false;
    std::optional<Violation> first_;
};

AuditEntry simple(std::string name, bool holds, std::string note, std::optional<Violation> v = std::nullopt)
{
    AuditEntry e;
    e.name            = std::move(name);
    e.holds           = holds;
    e.first_violation = v;
    e.value           = std::numeric_limits<double>::quiet_NaN();
    e.note            = std::move(note);
    return e;
}

} // namespace

const AuditEntry& AssumptionReport::get(const std::string& name) const
{
    for (const auto& e : entries) {
        if (e.name == name) {
            return e;
        }
    }
    throw std::out_of_range("no audit entry named " + name);
}

AssumptionReport audit_assumptions(const ModelParams& params, const Discretization& grid, const ProbeLattice& lattice)
{
    AssumptionReport rep;
    const auto bounds = bound_constants(params);
    double P_max      = 10.0;
    if (lattice.P_probe_max) {
        P_max = *lattice.P_probe_max;
    }
    else if (bounds.n1 > 0.0 && std::isfinite(bounds.n1)) {
        P_max = 10.0 * bounds.n1;
    }
    rep.P_probe_max = P_max;

    // lattice
    const std::size_t nxp = std::min(lattice.n_x_probe, grid.n_x);
    std::vector<std::size_t> xs(nxp);
    for (std::size_t k = 0; k < nxp; ++k) {
        xs[k] = static_cast<std::size_t>(std::llround(static_cast<double>(k) * static_cast<double>(grid.n_x - 1) /
                                                      static_cast<double>(nxp - 1)));
    }
    const double A = params.finite_horizon() ? params.a_max : grid.horizon;
    std::vector<double> as(lattice.n_a_probe);
    for (std::size_t k = 0; k < as.size(); ++k) {
        as[k] = A * static_cast<double>(k) / static_cast<double>(as.size());
    }
    std::vector<double> Ps(lattice.n_P_probe);
    for (std::size_t k = 0; k < Ps.size(); ++k) {
        Ps[k] = P_max * static_cast<double>(k) / static_cast<double>(Ps.size() - 1);
    }

    // A1
    {
        std::optional<Violation> v;
        for (std::size_t i = 0; i < grid.n_x && !v; ++i) {
            if (!(params.m[i] > 0.0 && params.e[i] > 0.0 && params.c[i] > 0.0)) {
                v = Violation{i, 0.0, 0.0, 0.0, std::min({params.m[i], params.e[i], params.c[i]}), 0.0};
            }
        }
        rep.entries.push_back(simple("A1", !v, "m, e, c positive at every node", v));
    }
    // A2, A3, A5 on the lattice
    {
        std::optional<Violation> chi_bad, rate_bad, mu_low;
        for (std::size_t i : xs) {
            for (double P : Ps) {
                const double c = params.chi(i, 0.0, P);
                if (!(c > 0.0 && c <= 1.0) && !chi_bad) {
                    chi_bad = Violation{i, 0.0, P, P, c, c};
                }
                for (double a : as) {
                    const double b = params.beta(i, a, P);
                    const double m = params.mu(i, a, P);
                    if (!(std::isfinite(b) && b >= 0.0 && std::isfinite(m) && m >= 0.0) && !rate_bad) {
                        rate_bad = Violation{i, a, P, P, b, m};
                    }
                    if (m < params.mu_lower * (1.0 - 1e-12) && !mu_low) {
                        mu_low = Violation{i, a, P, P, m, params.mu_lower};
                    }
                }
            }
        }
        rep.entries.push_back(simple("A2", !chi_bad, "chi in (0, 1]", chi_bad));
        const bool bounded = std::isfinite(params.beta.supremum(params.a_max)) && std::isfinite(params.mu.supremum(params.a_max));
        rep.entries.push_back(simple("A3", !rate_bad && bounded, "beta, mu nonnegative and bounded", rate_bad));
        const bool a5 = params.mu_lower > 0.0 && !mu_low && std::isfinite(params.chi.supremum(params.a_max));
        rep.entries.push_back(
            simple("A5", a5, "chi bounded, mu >= mu_lower = " + to_text(params.mu_lower) + " > 0", mu_low));
    }

    // scaled family w_s = s exp(-mu_lower a): P(w_s) = s P1
    const RateTables tables(params, grid);
    double P1       = 0.0;
    double beta_int = 0.0; // sum_j alpha_j beta_age(a_j) exp(-mu_lower a_j)
    {
        const auto aw = tables.age_weights();
        for (std::size_t j = 0; j < grid.n_ages(); ++j) {
            const double profile = std::exp(-params.mu_lower * grid.age(j));
            P1 += aw[j] * profile;
            beta_int += tables.beta_age_weights()[j] * profile;
        }
        P1 *= params.length;
    }
    std::vector<double> ss(Ps.size());
    for (std::size_t k = 0; k < Ps.size(); ++k) {
        ss[k] = Ps[k] / P1;
    }

    // A4(i)
    {
        MonotoneScan scan(Direction::nondecreasing);
        for (std::size_t i : xs) {
            for (std::size_t k = 0; k + 1 < Ps.size(); ++k) {
                const double b0 = ss[k] * params.beta.spatial()[i] * params.beta.density_factor(Ps[k]) * beta_int;
                const double b1 = ss[k + 1] * params.beta.spatial()[i] * params.beta.density_factor(Ps[k + 1]) * beta_int;
                scan.feed(i, 0.0, Ps[k], Ps[k + 1], b0, b1);
            }
        }
        rep.entries.push_back(scan.entry("A4(i)", "recruitment nondecreasing along scaled densities s exp(-mu_lower a)"));
    }
    // A4(ii)
    {
        double gamma = 0.0;
        for (std::size_t i : xs) {
            for (double a : as) {
                for (std::size_t k = 0; k + 1 < Ps.size(); ++k) {
                    const double g = (ss[k + 1] * params.mu(i, a, Ps[k + 1]) - ss[k] * params.mu(i, a, Ps[k])) /
                                     (ss[k + 1] - ss[k]);
                    gamma = std::max(gamma, g);
                }
            }
        }
        AuditEntry e = simple("A4(ii)", std::isfinite(gamma), "gamma making gamma w - mu(P(w)) w nondecreasing along scaled densities");
        e.value      = gamma;
        rep.entries.push_back(e);
    }
    // A4(iii), A6
    {
        MonotoneScan chi_up(Direction::nondecreasing);
        MonotoneScan beta_down(Direction::nonincreasing);
        MonotoneScan mu_up(Direction::nondecreasing);
        MonotoneScan chi_down(Direction::nonincreasing);
        for (std::size_t i : xs) {
            for (std::size_t k = 0; k + 1 < Ps.size(); ++k) {
                const double c0 = params.chi(i, 0.0, Ps[k]);
                const double c1 = params.chi(i, 0.0, Ps[k + 1]);
                chi_up.feed(i, 0.0, Ps[k], Ps[k + 1], c0, c1);
                chi_down.feed(i, 0.0, Ps[k], Ps[k + 1], c0, c1);
                for (double a : as) {
                    beta_down.feed(i, a, Ps[k], Ps[k + 1], params.beta(i, a, Ps[k]), params.beta(i, a, Ps[k + 1]));
                    mu_up.feed(i, a, Ps[k], Ps[k + 1], params.mu(i, a, Ps[k]), params.mu(i, a, Ps[k + 1]));
                }
            }
        }
        rep.entries.push_back(chi_up.entry("A4(iii)", "chi nondecreasing in P"));
        auto b = beta_down.entry("", "");
        auto m = mu_up.entry("", "");
        auto c = chi_down.entry("", "");
        AuditEntry a6;
        a6.name            = "A6";
        a6.holds           = b.holds && m.holds && c.holds;
        a6.weakly_monotone = b.weakly_monotone && m.weakly_monotone && c.weakly_monotone;
        a6.first_violation = b.first_violation ? b.first_violation : m.first_violation ? m.first_violation : c.first_violation;
        a6.value           = std::numeric_limits<double>::quiet_NaN();
        a6.note            = std::string("beta nonincreasing ") + (b.holds ? "yes" : "no") + ", mu nondecreasing " +
                  (m.holds ? "yes" : "no") + ", chi nonincreasing " + (c.holds ? "yes" : "no");
        rep.entries.push_back(a6);
    }
    // A7
    {
        MonotoneScan f1(Direction::nonincreasing);
        MonotoneScan f2(Direction::nonincreasing);
        SpatialField prev1 = tables.discounted_recruitment(Ps[0], 0.0);
        SpatialField prev2 = tables.settled_lifetime(Ps[0]);
        for (std::size_t k = 0; k + 1 < Ps.size(); ++k) {
            SpatialField next1 = tables.discounted_recruitment(Ps[k + 1], 0.0);
            SpatialField next2 = tables.settled_lifetime(Ps[k + 1]);
            for (std::size_t i : xs) {
                f1.feed(i, 0.0, Ps[k], Ps[k + 1], prev1[i], next1[i]);
                f2.feed(i, 0.0, Ps[k], Ps[k + 1], prev2[i], next2[i]);
            }
            prev1 = std::move(next1);
            prev2 = std::move(next2);
        }
        auto a = f1.entry("", "");
        auto b = f2.entry("", "");
        AuditEntry a7;
        a7.name            = "A7";
        a7.holds           = a.holds && b.holds;
        a7.weakly_monotone = a.weakly_monotone && b.weakly_monotone;
        a7.first_violation = a.first_violation ? a.first_violation : b.first_violation;
        a7.value           = std::numeric_limits<double>::quiet_NaN();
        a7.note            = "age integrals of beta chi S and chi S nonincreasing in P";
        rep.entries.push_back(a7);
    }
    return rep;
}

std::string format_report(const AssumptionReport& report)
{
    std::ostringstream os;
    os << "P_probe_max: " << to_text(report.P_probe_max) << '\n';
    for (const auto& e : report.entries) {
        os << e.name << ": " << (e.holds ? "holds" : "fails");
        if (e.holds && e.weakly_monotone) {
            os << " (weakly monotone)";
        }
        if (!std::isnan(e.value)) {
            os << ", value " << to_text(e.value);
        }
        os << "; " << e.note;
        if (e.first_violation) {
            const auto& v = *e.first_violation;
            os << "; first violation at node " << v.x_index << ", a = " << to_text(v.a) << ", P = " << to_text(v.P)
               << " -> " << to_text(v.P_next) << ": " << to_text(v.before) << " -> " << to_text(v.after);
        }
        os << '\n';
    }
    return os.str();
}

} // namespace hybridpop
