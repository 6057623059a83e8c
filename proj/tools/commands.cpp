#include "commands.hpp"
#include "io.hpp"

#include "hybridpop/audit.hpp"
#include "hybridpop/descriptors.hpp"
#include "hybridpop/equilibrium.hpp"
#include "hybridpop/error.hpp"
#include "hybridpop/spectral.hpp"
#include "hybridpop/text.hpp"
#include "hybridpop/verify.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

namespace hybridpop::app
{
namespace
{

struct Overrides {
    std::string config;
    std::optional<std::string> output;
    bool plot = false;
    std::optional<std::size_t> n_x;
    std::optional<double> dt, tail_tol, eigen_tol;
    std::optional<double> t_end, blowup_threshold, negativity_tol;
    std::optional<std::string> u0, w0;
    std::optional<double> k_min, k_max, root_tol;
    std::optional<std::size_t> k_count;
    std::optional<double> fp_tol, fkpp_tol;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> suite;
    std::optional<double> extinct_tol, monotone_tol, convergence_tol, property_tol, bounds_t_end;
    std::optional<std::size_t> property_steps;
    bool relax_age_bound = false;
    std::optional<double> P_probe_max;
};

template <class T>
void apply(const std::optional<T>& from, T& to)
{
    if (from) {
        to = *from;
    }
}

RunConfig resolve(const Overrides& o)
{
    RunConfig c = load_config(o.config);
    if (o.output) {
        c.directory = *o.output;
    }
    c.plot = c.plot || o.plot;
    apply(o.n_x, c.n_x);
    apply(o.dt, c.dt);
    apply(o.tail_tol, c.tail_tol);
    apply(o.eigen_tol, c.eigen_tol);
    apply(o.t_end, c.t_end);
    apply(o.blowup_threshold, c.blowup_threshold);
    apply(o.negativity_tol, c.negativity_tol);
    apply(o.u0, c.initial_u);
    apply(o.w0, c.initial_w);
    apply(o.k_min, c.k_min);
    apply(o.k_max, c.k_max);
    apply(o.k_count, c.k_count);
    apply(o.root_tol, c.root_tol);
    apply(o.fp_tol, c.fp_tol);
    apply(o.fkpp_tol, c.fkpp_tol);
    apply(o.seed, c.seed);
    if (o.suite) {
        c.suite.clear();
        std::string_view s = *o.suite;
        while (!s.empty()) {
            const auto k = s.find(',');
            c.suite.emplace_back(s.substr(0, k));
            s = k == std::string_view::npos ? std::string_view() : s.substr(k + 1);
        }
    }
    apply(o.extinct_tol, c.extinct_tol);
    apply(o.monotone_tol, c.monotone_tol);
    apply(o.convergence_tol, c.convergence_tol);
    apply(o.property_tol, c.property_tol);
    apply(o.bounds_t_end, c.bounds_t_end);
    apply(o.property_steps, c.property_steps);
    c.relax_age_bound = c.relax_age_bound || o.relax_age_bound;
    if (o.P_probe_max) {
        c.P_probe_max = o.P_probe_max;
    }
    return c;
}

struct Context {
    RunConfig config;
    ModelParams params;
    Discretization grid;
    std::string hash;

    Metadata meta(const std::string& command, std::vector<std::string> extra = {}) const
    {
        Metadata m{"hybridpop " + command, "config_hash: " + hash,
                   "n_x: " + std::to_string(grid.n_x) + ", dt: " + to_text(grid.dt) +
                       ", n_ages: " + std::to_string(grid.n_ages()) + ", horizon: " + to_text(grid.horizon)};
        m.insert(m.end(), extra.begin(), extra.end());
        return m;
    }

    void emit(const std::string& stem, const Metadata& m, const Table& t) const
    {
        write_csv(config.directory / (stem + ".csv"), m, t);
        if (config.plot) {
            write_dat(config.directory / (stem + ".dat"), m, t);
        }
    }
};

Context prepare(const Overrides& o)
{
    Context ctx;
    ctx.config = resolve(o);
    if (ctx.config.n_x < 3) {
        throw ConfigError("grid.n_x must be at least 3");
    }
    ctx.params = instantiate(ctx.config.model, ctx.config.n_x);
    ctx.grid   = build_grid(ctx.params, ctx.config.n_x, ctx.config.dt, ctx.config.tail_tol);
    ctx.hash   = config_hash(ctx.config);
    return ctx;
}

EigenOptions eigen_options(const RunConfig& c)
{
    EigenOptions e;
    e.tol = c.eigen_tol;
    return e;
}

std::filesystem::path resolve_path(const RunConfig& c, const std::string& p)
{
    std::filesystem::path path(p);
    return path.is_absolute() ? path : c.base_directory / path;
}

double arg_number(const Call& call, std::size_t k, const std::string& what)
{
    return parse_number(call.args.at(k), what);
}

void expect(const Call& call, std::size_t lo, std::size_t hi, const std::string& what)
{
    if (call.args.size() < lo || call.args.size() > hi) {
        throw ConfigError(what + ": wrong number of arguments for " + call.name);
    }
}

int cmd_simulate(const Context& ctx, std::ostream& out)
{
    const auto& c = ctx.config;
    const PopulationState init = initial_state(c, ctx.params, ctx.grid);
    SimulationOptions opt;
    opt.output_times              = c.output_times;
    opt.stepper.blowup_threshold  = c.blowup_threshold;
    opt.stepper.negativity_tol    = c.negativity_tol;
    const Trajectory traj         = simulate(ctx.params, ctx.grid, init, init.t + c.t_end, opt);

    Table series{{"t", "P", "max_u", "min_u"}, {}, 0};
    for (std::size_t n = 0; n < traj.times.size(); ++n) {
        series.rows.push_back({traj.times[n], traj.P_series[n], traj.max_u_series[n], traj.min_u_series[n]});
    }
    ctx.emit("series", ctx.meta("simulate"), series);
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        const auto& s = traj.snapshots[k];
        char stem[32];
        std::snprintf(stem, sizeof stem, "snapshot_%03zu", k);
        const auto m = ctx.meta("simulate", {"t: " + to_text(s.t) + ", step: " + std::to_string(s.step)});
        ctx.emit(std::string(stem) + "_u", m, spatial_table(ctx.grid, s.u));
        ctx.emit(std::string(stem) + "_w", m, age_table(ctx.grid, s.w));
    }
    const auto& last = traj.snapshots.back();
    out << "config_hash: " << ctx.hash << '\n';
    out << "steps: " << last.step << '\n';
    out << "t_final: " << to_text(last.t) << '\n';
    out << "P_final: " << to_text(last.P) << '\n';
    out << "max_u_final: " << to_text(last.u.max()) << '\n';
    out << "min_u_final: " << to_text(last.u.min()) << '\n';
    out << "clamped: " << last.clamped << '\n';
    out << "p_balance_residual: " << to_text(p_balance_residual(traj)) << '\n';
    out << "snapshots: " << traj.snapshots.size() << '\n';
    return success;
}

int cmd_r0(const Context& ctx, std::ostream& out)
{
    const auto& c = ctx.config;
    SpectralOptions opt;
    opt.eigen    = eigen_options(c);
    opt.root_tol = c.root_tol;
    for (std::size_t k = 0; k < c.k_count; ++k) {
        const double frac = c.k_count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(c.k_count - 1);
        opt.k_samples.push_back(c.k_min + frac * (c.k_max - c.k_min));
    }
    const SpectralReport rep = spectral_report(ctx.params, ctx.grid, opt);
    out << "config_hash: " << ctx.hash << '\n' << format_report(rep);

    Table sweep{{"k", "lambda_hat"}, {}, 0};
    for (const auto& [k, l] : rep.lambda_samples) {
        sweep.rows.push_back({k, l});
    }
    ctx.emit("lambda_sweep", ctx.meta("r0"), sweep);
    ctx.emit("eigenfunction", ctx.meta("r0", {"k: " + (rep.s_L0 ? to_text(*rep.s_L0) : std::string("0"))}),
             spatial_table(ctx.grid, rep.phi, "phi"));
    if (rep.phi_age.n_x() == ctx.grid.n_x) {
        ctx.emit("eigenfunction_age", ctx.meta("r0", {"k: " + to_text(*rep.s_L0)}),
                 age_table(ctx.grid, rep.phi_age, "phi_age"));
    }
    return success;
}

int cmd_equilibrium(const Context& ctx, std::ostream& out)
{
    const auto& c = ctx.config;
    EquilibriumOptions opt;
    opt.fp_tol             = c.fp_tol;
    opt.fkpp.residual_tol  = c.fkpp_tol;
    opt.fkpp.eigen         = eigen_options(c);
    const EquilibriumReport rep = positive_equilibrium(ctx.params, ctx.grid, opt);
    out << "config_hash: " << ctx.hash << '\n' << format_report(rep);
    const auto m = ctx.meta("equilibrium", {"P_star: " + to_text(rep.P_star)});
    ctx.emit("u_star", m, spatial_table(ctx.grid, rep.u_star));
    ctx.emit("w_star", m, age_table(ctx.grid, rep.w_star));
    Table h{{"P", "H"}, {}, 0};
    for (const auto& [P, H] : rep.H_samples) {
        h.rows.push_back({P, H});
    }
    ctx.emit("H_samples", m, h);
    return success;
}

int cmd_verify(const Context& ctx, std::ostream& out)
{
    const auto& c = ctx.config;
    SuiteOptions opt;
    opt.extinction = opt.persistence = opt.bounds = opt.comparison = opt.positivity = false;
    for (const auto& name : c.suite) {
        if (name == "extinction") {
            opt.extinction = true;
        }
        else if (name == "persistence") {
            opt.persistence = true;
        }
        else if (name == "bounds") {
            opt.bounds = true;
        }
        else if (name == "comparison") {
            opt.comparison = true;
        }
        else if (name == "positivity") {
            opt.positivity = true;
        }
        else {
            throw ConfigError("unknown verify check '" + name + "'");
        }
    }
    opt.seed                                 = c.seed;
    opt.bounds_t_end                         = c.bounds_t_end;
    opt.extinction_options.extinct_tol       = c.extinct_tol;
    opt.persistence_options.monotone_tol     = c.monotone_tol;
    opt.persistence_options.convergence_tol  = c.convergence_tol;
    opt.persistence_options.relax_age_bound  = c.relax_age_bound;
    opt.property_options.tolerance           = c.property_tol;
    opt.property_options.n_steps             = c.property_steps;

    const auto verdicts = run_suite(ctx.params, ctx.grid, opt);
    out << "config_hash: " << ctx.hash << '\n' << format_table(verdicts);
    write_verdicts_jsonl(c.directory / "verify.jsonl", ctx.hash, verdicts);
    return suite_passed(verdicts) ? success : verify_failure;
}

int cmd_audit(const Context& ctx, std::ostream& out)
{
    const auto& c = ctx.config;
    ProbeLattice lattice;
    lattice.n_x_probe   = c.probe_n_x;
    lattice.n_a_probe   = c.probe_n_a;
    lattice.n_P_probe   = c.probe_n_P;
    lattice.P_probe_max = c.P_probe_max;
    if (lattice.n_x_probe < 2 || lattice.n_P_probe < 2 || lattice.n_a_probe < 1) {
        throw ConfigError("audit probe lattice needs at least 2 nodes in x and P and 1 in a");
    }
    out << "config_hash: " << ctx.hash << '\n' << format_report(audit_assumptions(ctx.params, ctx.grid, lattice));
    return success;
}

void common_options(CLI::App* sub, Overrides& o)
{
    sub->add_option("-c,--config", o.config, "YAML run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--output", o.output, "output directory (overrides output.directory)");
    sub->add_flag("--plot", o.plot, "also write gnuplot .dat files");
    sub->add_option("--n-x", o.n_x, "spatial nodes");
    sub->add_option("--dt", o.dt, "time and age step");
    sub->add_option("--tail-tol", o.tail_tol, "age truncation tolerance on an infinite horizon");
    sub->add_option("--eigen-tol", o.eigen_tol, "eigenvector residual tolerance");
}

} // namespace

PopulationState initial_state(const RunConfig& c, const ModelParams& params, const Discretization& grid)
{
    const Call cu = parse_call(c.initial_u);
    const Call cw = parse_call(c.initial_w);
    std::optional<SpectralReport> spectral;
    auto eigen = [&]() -> const SpectralReport& {
        if (!spectral) {
            SpectralOptions opt;
            opt.eigen    = eigen_options(c);
            opt.root_tol = c.root_tol;
            spectral     = spectral_report(params, grid, opt);
        }
        return *spectral;
    };

    SpatialField u(grid.n_x);
    const std::string uw = "simulate.initial.u";
    if (cu.name == "constant") {
        expect(cu, 1, 1, uw);
        u = SpatialField(grid.n_x, arg_number(cu, 0, uw));
    }
    else if (cu.name == "cosine-bump") {
        expect(cu, 2, 2, uw);
        const double amp   = arg_number(cu, 0, uw);
        const double modes = arg_number(cu, 1, uw);
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            u[i] = amp * 0.5 * (1.0 + std::cos(modes * std::numbers::pi * grid.x(i) / grid.length));
        }
    }
    else if (cu.name == "equilibrium") {
        expect(cu, 1, 1, uw);
        const auto path = resolve_path(c, cu.args[0]);
        u = spatial_from_table(grid, read_csv(path), path.string());
    }
    else if (cu.name == "eigenfunction") {
        expect(cu, 1, 1, uw);
        const double scale = arg_number(cu, 0, uw);
        const auto& phi    = eigen().phi;
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            u[i] = scale * phi[i];
        }
    }
    else {
        throw ConfigError("unknown initial u '" + cu.name + "'");
    }

    AgeField w(grid.n_x, grid.n_ages());
    const std::string ww = "simulate.initial.w";
    if (cw.name == "constant") {
        expect(cw, 1, 1, ww);
        w = AgeField(grid.n_x, grid.n_ages(), arg_number(cw, 0, ww));
    }
    else if (cw.name == "exp-decay") {
        expect(cw, 1, 2, ww);
        const double amp  = cw.args.size() == 2 ? arg_number(cw, 0, ww) : 1.0;
        const double rate = arg_number(cw, cw.args.size() - 1, ww);
        for (std::size_t i = 0; i < grid.n_x; ++i) {
            for (std::size_t j = 0; j < grid.n_ages(); ++j) {
                w(i, j) = amp * std::exp(-rate * grid.age(j));
            }
        }
    }
    else if (cw.name == "file") {
        expect(cw, 1, 1, ww);
        const auto path = resolve_path(c, cw.args[0]);
        w = age_from_table(grid, read_csv(path), path.string());
    }
    else if (cw.name == "eigenfunction") {
        expect(cw, 1, 1, ww);
        const auto& rep = eigen();
        if (rep.phi_age.n_x() != grid.n_x) {
            throw ConfigError("no age eigenfunction: the growth bound is absent for this model");
        }
        const double scale = arg_number(cw, 0, ww);
        for (std::size_t k = 0; k < w.flat().size(); ++k) {
            w.flat()[k] = scale * rep.phi_age.flat()[k];
        }
    }
    else {
        throw ConfigError("unknown initial w '" + cw.name + "'");
    }
    try {
        return make_state(params, grid, std::move(u), std::move(w));
    }
    catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("initial state: ") + e.what());
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Hybrid reaction-diffusion / age-structured population engine"};
    app.require_subcommand(1);
    Overrides o;

    auto* sim = app.add_subcommand("simulate", "integrate the model and write series and snapshots");
    common_options(sim, o);
    sim->add_option("--t-end", o.t_end, "integration horizon");
    sim->add_option("--u0", o.u0, "initial u spelling");
    sim->add_option("--w0", o.w0, "initial w spelling");
    sim->add_option("--blowup-threshold", o.blowup_threshold, "abort above this value");
    sim->add_option("--negativity-tol", o.negativity_tol, "negatives above -tol are clamped, below abort");

    auto* r0 = app.add_subcommand("r0", "net reproductive rate, principal eigenvalues and growth bound");
    common_options(r0, o);
    r0->add_option("--k-min", o.k_min, "first k of the lambda_hat sweep");
    r0->add_option("--k-max", o.k_max, "last k of the lambda_hat sweep");
    r0->add_option("--k-count", o.k_count, "number of sweep points");
    r0->add_option("--root-tol", o.root_tol, "growth bound bisection tolerance");

    auto* eq = app.add_subcommand("equilibrium", "positive equilibrium by the fixed point of H");
    common_options(eq, o);
    eq->add_option("--fp-tol", o.fp_tol, "|H(P) - P| tolerance");
    eq->add_option("--fkpp-tol", o.fkpp_tol, "elliptic residual tolerance");

    auto* ver = app.add_subcommand("verify", "run the verification suite");
    common_options(ver, o);
    ver->add_option("--seed", o.seed, "seed for the property checks");
    ver->add_option("--suite", o.suite, "comma separated checks");
    ver->add_option("--extinct-tol", o.extinct_tol, "extinction threshold relative to the initial norm");
    ver->add_option("--monotone-tol", o.monotone_tol, "per-step monotonicity tolerance");
    ver->add_option("--convergence-tol", o.convergence_tol, "relative sup-norm gap to the equilibrium");
    ver->add_option("--property-tol", o.property_tol, "comparison and positivity tolerance");
    ver->add_option("--property-steps", o.property_steps, "steps per property run");
    ver->add_option("--bounds-t-end", o.bounds_t_end, "horizon of the bounds run");
    ver->add_flag("--relax-age-bound", o.relax_age_bound, "generic persistence start above M exp(-mu a)");

    auto* aud = app.add_subcommand("audit", "probe the structural assumptions");
    common_options(aud, o);
    aud->add_option("--P-probe-max", o.P_probe_max, "upper end of the P lattice");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp&) {
        out << app.help();
        return success;
    }
    catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return config_error;
    }

    try {
        const Context ctx = prepare(o);
        if (*sim) {
            return cmd_simulate(ctx, out);
        }
        if (*r0) {
            return cmd_r0(ctx, out);
        }
        if (*eq) {
            return cmd_equilibrium(ctx, out);
        }
        if (*ver) {
            return cmd_verify(ctx, out);
        }
        return cmd_audit(ctx, out);
    }
    catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return config_error;
    }
    catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    }
    catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << '\n';
        return config_error;
    }
    catch (const std::filesystem::filesystem_error& e) {
        err << "configuration error: " << e.what() << '\n';
        return config_error;
    }
    catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    }
}

} // namespace hybridpop::app
