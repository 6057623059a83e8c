#include "config.hpp"

#include "hybridpop/descriptors.hpp"
#include "hybridpop/error.hpp"
#include "hybridpop/text.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>

namespace hybridpop::app
{
namespace
{

bool absent(const YAML::Node& n)
{
    return !n.IsDefined() || n.IsNull();
}

class Section
{
public:
    Section(const YAML::Node& node, std::string path, std::initializer_list<const char*> allowed)
        : node_(node)
        , path_(std::move(path))
    {
        if (!present()) {
            return;
        }
        if (!node_.IsMap()) {
            throw ConfigError(path_ + " must be a table");
        }
        std::set<std::string> keys(allowed.begin(), allowed.end());
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!keys.count(key)) {
                throw ConfigError("unknown key " + path_ + "." + key);
            }
        }
    }

    bool present() const { return !absent(node_); }

    YAML::Node child(const char* key) const
    {
        if (!present()) {
            return YAML::Node();
        }
        const YAML::Node& self = node_;
        YAML::Node n           = self[key];
        return n;
    }
    std::string where(const char* key) const { return path_ + "." + key; }

    std::optional<std::string> text(const char* key) const
    {
        const YAML::Node n = child(key);
        if (absent(n)) {
            return std::nullopt;
        }
        if (!n.IsScalar()) {
            throw ConfigError(where(key) + " must be a scalar");
        }
        return n.as<std::string>();
    }

    void number(const char* key, double& out) const
    {
        if (auto t = text(key)) {
            out = to_number(*t, where(key));
        }
    }

    void number(const char* key, std::optional<double>& out) const
    {
        if (auto t = text(key)) {
            out = to_number(*t, where(key));
        }
    }

    template <class Int>
    void count(const char* key, Int& out) const
    {
        if (auto t = text(key)) {
            std::size_t used = 0;
            unsigned long long v = 0;
            try {
                v = std::stoull(*t, &used);
            }
            catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != t->size() || t->front() == '-') {
                throw ConfigError(where(key) + ": expected a nonnegative integer, got '" + *t + "'");
            }
            out = static_cast<Int>(v);
        }
    }

    void flag(const char* key, bool& out) const
    {
        if (auto t = text(key)) {
            if (*t == "true") {
                out = true;
            }
            else if (*t == "false") {
                out = false;
            }
            else {
                throw ConfigError(where(key) + ": expected true or false, got '" + *t + "'");
            }
        }
    }

    static double to_number(const std::string& t, const std::string& what)
    {
        if (t == ".inf" || t == ".Inf" || t == ".INF") {
            return std::numeric_limits<double>::infinity();
        }
        return parse_number(t, what);
    }

private:
    YAML::Node node_;
    std::string path_;
};

void read_rate(const Section& parent, const char* key, RateLawSpec& rate, bool with_age)
{
    const YAML::Node n = parent.child(key);
    if (absent(n)) {
        return;
    }
    const std::string path = parent.where(key);
    if (n.IsScalar()) {
        // shorthand: spatial profile only
        rate.spatial = parse_spatial(n.as<std::string>());
        return;
    }
    const Section s = with_age ? Section(n, path, {"spatial", "age", "density"}) : Section(n, path, {"spatial", "density"});
    if (auto t = s.text("spatial")) {
        rate.spatial = parse_spatial(*t);
    }
    if (auto t = s.text("age")) {
        rate.age = parse_age(*t);
    }
    if (auto t = s.text("density")) {
        rate.density = parse_density(*t);
    }
}

void read_model(const YAML::Node& root, ModelSpec& model)
{
    const Section s(root["model"], "model",
                    {"length", "diffusion", "m", "e", "c", "beta", "mu", "chi", "a_max", "mu_lower",
                     "resolvent_settlement"});
    s.number("length", model.length);
    s.number("diffusion", model.diffusion);
    s.number("a_max", model.a_max);
    s.number("mu_lower", model.mu_lower);
    if (auto t = s.text("m")) {
        model.mortality = parse_spatial(*t);
    }
    if (auto t = s.text("e")) {
        model.settlement = parse_spatial(*t);
    }
    if (auto t = s.text("c")) {
        model.competition = parse_spatial(*t);
    }
    if (auto t = s.text("resolvent_settlement")) {
        model.resolvent_settlement = parse_spatial(*t);
    }
    read_rate(s, "beta", model.beta, true);
    read_rate(s, "mu", model.mu, true);
    read_rate(s, "chi", model.chi, false);
}

std::vector<double> number_list(const Section& s, const char* key)
{
    const YAML::Node n = s.child(key);
    std::vector<double> out;
    if (!n.IsSequence()) {
        throw ConfigError(s.where(key) + " must be a list");
    }
    for (const auto& item : n) {
        out.push_back(Section::to_number(item.as<std::string>(), s.where(key)));
    }
    return out;
}

RunConfig from_node(const YAML::Node& root_in, const std::filesystem::path& base)
{
    const YAML::Node& root = root_in;
    if (root && !root.IsNull() && !root.IsMap()) {
        throw ConfigError("config must be a table at top level");
    }
    const Section top(root, "config", {"model", "grid", "simulate", "r0", "equilibrium", "verify", "audit", "output"});
    RunConfig c;
    c.base_directory = base;
    read_model(root, c.model);

    const Section grid(root["grid"], "grid", {"n_x", "dt", "tail_tol"});
    grid.count("n_x", c.n_x);
    grid.number("dt", c.dt);
    grid.number("tail_tol", c.tail_tol);

    const Section sim(root["simulate"], "simulate",
                      {"t_end", "output_times", "initial", "blowup_threshold", "negativity_tol"});
    sim.number("t_end", c.t_end);
    if (!absent(sim.child("output_times"))) {
        c.output_times = number_list(sim, "output_times");
    }
    sim.number("blowup_threshold", c.blowup_threshold);
    sim.number("negativity_tol", c.negativity_tol);
    const Section init(sim.child("initial"), "simulate.initial", {"u", "w"});
    if (auto t = init.text("u")) {
        c.initial_u = *t;
    }
    if (auto t = init.text("w")) {
        c.initial_w = *t;
    }

    const Section r0(root["r0"], "r0", {"k_min", "k_max", "k_count", "eigen_tol", "root_tol"});
    r0.number("k_min", c.k_min);
    r0.number("k_max", c.k_max);
    r0.count("k_count", c.k_count);
    r0.number("eigen_tol", c.eigen_tol);
    r0.number("root_tol", c.root_tol);

    const Section eq(root["equilibrium"], "equilibrium", {"fp_tol", "fkpp_tol"});
    eq.number("fp_tol", c.fp_tol);
    eq.number("fkpp_tol", c.fkpp_tol);

    const Section ver(root["verify"], "verify",
                      {"suite", "seed", "extinct_tol", "monotone_tol", "convergence_tol", "property_tol",
                       "property_steps", "bounds_t_end", "relax_age_bound"});
    if (const YAML::Node n = ver.child("suite"); !absent(n)) {
        if (!n.IsSequence()) {
            throw ConfigError("verify.suite must be a list");
        }
        c.suite.clear();
        for (const auto& item : n) {
            c.suite.push_back(item.as<std::string>());
        }
    }
    ver.count("seed", c.seed);
    ver.number("extinct_tol", c.extinct_tol);
    ver.number("monotone_tol", c.monotone_tol);
    ver.number("convergence_tol", c.convergence_tol);
    ver.number("property_tol", c.property_tol);
    ver.count("property_steps", c.property_steps);
    ver.number("bounds_t_end", c.bounds_t_end);
    ver.flag("relax_age_bound", c.relax_age_bound);

    const Section aud(root["audit"], "audit", {"n_x_probe", "n_a_probe", "n_P_probe", "P_probe_max"});
    aud.count("n_x_probe", c.probe_n_x);
    aud.count("n_a_probe", c.probe_n_a);
    aud.count("n_P_probe", c.probe_n_P);
    aud.number("P_probe_max", c.P_probe_max);

    const Section out(root["output"], "output", {"directory", "plot"});
    if (auto t = out.text("directory")) {
        c.directory = *t;
    }
    out.flag("plot", c.plot);
    return c;
}

void line(std::ostringstream& os, const char* key, const std::string& value)
{
    os << key << " = " << value << '\n';
}

void line(std::ostringstream& os, const char* key, double value)
{
    line(os, key, to_text(value));
}

void rate_lines(std::ostringstream& os, const std::string& name, const RateLawSpec& r, bool with_age)
{
    os << "model." << name << ".spatial = " << format(r.spatial) << '\n';
    if (with_age) {
        os << "model." << name << ".age = " << format(r.age) << '\n';
    }
    os << "model." << name << ".density = " << format(r.density) << '\n';
}

} // namespace

RunConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_directory)
{
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    }
    catch (const YAML::Exception& e) {
        throw ConfigError(std::string("YAML: ") + e.what());
    }
    try {
        return from_node(root, base_directory);
    }
    catch (const YAML::Exception& e) {
        throw ConfigError(std::string("YAML: ") + e.what());
    }
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    auto base = path.parent_path();
    return parse_config(text.str(), base.empty() ? std::filesystem::path(".") : base);
}

std::string canonical_text(const RunConfig& c)
{
    std::ostringstream os;
    const auto& m = c.model;
    line(os, "model.length", m.length);
    line(os, "model.diffusion", m.diffusion);
    line(os, "model.m", format(m.mortality));
    line(os, "model.e", format(m.settlement));
    line(os, "model.c", format(m.competition));
    rate_lines(os, "beta", m.beta, true);
    rate_lines(os, "mu", m.mu, true);
    rate_lines(os, "chi", m.chi, false);
    line(os, "model.a_max", m.a_max);
    line(os, "model.mu_lower", m.mu_lower ? to_text(*m.mu_lower) : std::string("default"));
    line(os, "model.resolvent_settlement", m.resolvent_settlement ? format(*m.resolvent_settlement) : std::string("e"));
    line(os, "grid.n_x", std::to_string(c.n_x));
    line(os, "grid.dt", c.dt);
    line(os, "grid.tail_tol", c.tail_tol);
    line(os, "simulate.t_end", c.t_end);
    std::string times;
    for (double t : c.output_times) {
        times += (times.empty() ? "" : ", ") + to_text(t);
    }
    line(os, "simulate.output_times", "[" + times + "]");
    line(os, "simulate.initial.u", c.initial_u);
    line(os, "simulate.initial.w", c.initial_w);
    line(os, "simulate.blowup_threshold", c.blowup_threshold);
    line(os, "simulate.negativity_tol", c.negativity_tol);
    line(os, "r0.k_min", c.k_min);
    line(os, "r0.k_max", c.k_max);
    line(os, "r0.k_count", std::to_string(c.k_count));
    line(os, "r0.eigen_tol", c.eigen_tol);
    line(os, "r0.root_tol", c.root_tol);
    line(os, "equilibrium.fp_tol", c.fp_tol);
    line(os, "equilibrium.fkpp_tol", c.fkpp_tol);
    std::string suite;
    for (const auto& s : c.suite) {
        suite += (suite.empty() ? "" : ", ") + s;
    }
    line(os, "verify.suite", "[" + suite + "]");
    line(os, "verify.seed", std::to_string(c.seed));
    line(os, "verify.extinct_tol", c.extinct_tol);
    line(os, "verify.monotone_tol", c.monotone_tol);
    line(os, "verify.convergence_tol", c.convergence_tol);
    line(os, "verify.property_tol", c.property_tol);
    line(os, "verify.property_steps", std::to_string(c.property_steps));
    line(os, "verify.bounds_t_end", c.bounds_t_end);
    line(os, "verify.relax_age_bound", c.relax_age_bound ? "true" : "false");
    line(os, "audit.n_x_probe", std::to_string(c.probe_n_x));
    line(os, "audit.n_a_probe", std::to_string(c.probe_n_a));
    line(os, "audit.n_P_probe", std::to_string(c.probe_n_P));
    line(os, "audit.P_probe_max", c.P_probe_max ? to_text(*c.P_probe_max) : std::string("default"));
    return os.str();
}

std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const RunConfig& config)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_text(config))));
    return buf;
}

} // namespace hybridpop::app
