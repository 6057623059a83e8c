#include "commands.hpp"
#include "config.hpp"
#include "io.hpp"

#include "hybridpop/descriptors.hpp"
#include "hybridpop/error.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hybridpop;
using namespace hybridpop::app;
namespace fs = std::filesystem;

namespace
{

const char* persistence_yaml = R"(
model:
  beta:
    spatial: constant(6)
    density: saturating(1)
grid:
  n_x: 17
  dt: 0.05
simulate:
  t_end: 2
  output_times: [0, 1, 2]
  initial:
    u: cosine-bump(2, 1)
    w: exp-decay(0.5, 1)
verify:
  property_steps: 100
)";

const char* extinction_yaml = R"(
model:
  beta: constant(1)
grid:
  n_x: 17
  dt: 0.05
verify:
  property_steps: 100
)";

class Cli : public ::testing::Test
{
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("hybridpop_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text) const
    {
        std::ofstream(dir_ / name) << text;
        return dir_ / name;
    }

    int call(std::vector<std::string> args)
    {
        args.insert(args.begin(), "hybridpop");
        std::vector<const char*> argv;
        for (const auto& a : args) {
            argv.push_back(a.c_str());
        }
        out_.str("");
        err_.str("");
        return run(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    static std::string slurp(const fs::path& p)
    {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

} // namespace

TEST(Descriptors, RoundTrip)
{
    for (const char* text : {"constant(2.5)", "cosine(1, 0.5@1, -0.25@3)", "table(0=1, 0.5=2, 1=0)"}) {
        EXPECT_EQ(format(parse_spatial(text)), text);
    }
    for (const char* text : {"constant(1)", "exponential(2, 0.5)", "table(0=1, 2=0.5)"}) {
        EXPECT_EQ(format(parse_age(text)), text);
    }
    for (const char* text : {"constant", "saturating(1)", "exponential(0.25)", "linear-threshold(0.5, 2)"}) {
        EXPECT_EQ(format(parse_density(text)), text);
    }
    EXPECT_EQ(format(parse_spatial(" 3 ")), "constant(3)");
    EXPECT_EQ(format(parse_spatial("cosine( 1 ,0.5 @ 2 )")), "cosine(1, 0.5@2)");
}

TEST(Descriptors, Malformed)
{
    EXPECT_THROW(parse_spatial("constant(1"), ConfigError);
    EXPECT_THROW(parse_spatial("constant(1, 2)"), ConfigError);
    EXPECT_THROW(parse_spatial("cosine(1, 0.5)"), ConfigError);
    EXPECT_THROW(parse_spatial("cosine(1, 0.5@1.5)"), ConfigError);
    EXPECT_THROW(parse_spatial("gaussian(1)"), ConfigError);
    EXPECT_THROW(parse_age("exponential(1)"), ConfigError);
    EXPECT_THROW(parse_density("saturating"), ConfigError);
    EXPECT_THROW(parse_density("constant(1)"), ConfigError);
    EXPECT_THROW(parse_number("1.5x", "n"), ConfigError);
    EXPECT_EQ(parse_call("f(a, b)").args.size(), 2u);
    EXPECT_THROW(parse_call("f(a,,b)"), ConfigError);
}

TEST(Config, DefaultsAndOverrides)
{
    const RunConfig empty = parse_config("");
    EXPECT_EQ(empty.n_x, 65u);
    EXPECT_EQ(empty.dt, 0.02);
    EXPECT_EQ(empty.tail_tol, 1e-8);
    EXPECT_TRUE(std::isinf(empty.model.a_max));

    const RunConfig c = parse_config(persistence_yaml);
    EXPECT_EQ(c.n_x, 17u);
    EXPECT_EQ(c.output_times.size(), 3u);
    EXPECT_EQ(format(c.model.beta.density), "saturating(1)");
    EXPECT_EQ(c.initial_u, "cosine-bump(2, 1)");

    const RunConfig f = parse_config("model:\n  a_max: 4\n  chi:\n    spatial: 0.5\n    density: linear-threshold(1, 1)\n");
    EXPECT_EQ(f.model.a_max, 4.0);
    EXPECT_EQ(format(f.model.chi.spatial), "constant(0.5)");
    EXPECT_TRUE(std::isinf(parse_config("model:\n  a_max: .inf\n").model.a_max));
}

TEST(Config, Rejections)
{
    EXPECT_THROW(parse_config("modle:\n  length: 1\n"), ConfigError);
    EXPECT_THROW(parse_config("grid:\n  n_x: -3\n"), ConfigError);
    EXPECT_THROW(parse_config("grid:\n  dt: fast\n"), ConfigError);
    EXPECT_THROW(parse_config("model:\n  chi:\n    age: constant(1)\n"), ConfigError);
    EXPECT_THROW(parse_config("model: [1, 2"), ConfigError);
    EXPECT_THROW(parse_config("output:\n  plot: maybe\n"), ConfigError);
}

TEST(Config, HashTracksResolvedValues)
{
    const RunConfig a = parse_config(persistence_yaml);
    RunConfig b       = parse_config(persistence_yaml);
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
    b.directory = "elsewhere";
    b.plot      = true;
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.seed = 2;
    EXPECT_NE(config_hash(a), config_hash(b));
    // equivalent spellings resolve to the same text
    const RunConfig c = parse_config(std::string(persistence_yaml) + "\n");
    EXPECT_EQ(canonical_text(a), canonical_text(c));
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST_F(Cli, UsageErrorsExitOne)
{
    EXPECT_EQ(call({}), 1);
    EXPECT_EQ(call({"frobnicate"}), 1);
    const auto cfg = write("p.yaml", persistence_yaml);
    EXPECT_EQ(call({"r0", "-c", cfg.string(), "--bogus"}), 1);
    EXPECT_NE(err_.str().find("Usage"), std::string::npos);
    EXPECT_EQ(call({"r0", "-c", (dir_ / "missing.yaml").string()}), 1);
    EXPECT_EQ(call({"--help"}), 0);
}

TEST_F(Cli, ConfigErrorExitsOne)
{
    const auto cfg = write("bad.yaml", "model:\n  beta: wobble(2)\n");
    EXPECT_EQ(call({"r0", "-c", cfg.string(), "-o", dir_.string()}), 1);
    EXPECT_NE(err_.str().find("wobble"), std::string::npos);
}

TEST_F(Cli, NumericalFailureExitsTwo)
{
    // constant w on an infinite horizon pushes mass through the truncated tail
    const auto cfg = write("p.yaml", persistence_yaml);
    EXPECT_EQ(call({"simulate", "-c", cfg.string(), "-o", dir_.string(), "--w0", "constant(1)"}), 2);
    EXPECT_NE(err_.str().find("truncation"), std::string::npos);
}

TEST_F(Cli, R0Benchmark)
{
    const auto cfg = write("p.yaml", persistence_yaml);
    ASSERT_EQ(call({"r0", "-c", cfg.string(), "-o", dir_.string(), "--n-x", "65", "--dt", "0.02"}), 0) << err_.str();
    const std::string text = out_.str();
    const auto r0          = std::stod(text.substr(text.find("r0: ") + 4));
    const auto s           = std::stod(text.substr(text.find("s_L0: ") + 6));
    EXPECT_NEAR(r0, 3.0, 1e-3);
    EXPECT_NEAR(s, 1.0, 1e-3);
    EXPECT_TRUE(fs::exists(dir_ / "lambda_sweep.csv"));
}

TEST_F(Cli, ZeroSimulationWritesZeroSeries)
{
    const auto cfg = write("p.yaml", persistence_yaml);
    ASSERT_EQ(call({"simulate", "-c", cfg.string(), "-o", dir_.string(), "--u0", "constant(0)", "--w0",
                    "constant(0)"}),
              0)
        << err_.str();
    const Table t = read_csv(dir_ / "series.csv");
    ASSERT_EQ(t.columns, (std::vector<std::string>{"t", "P", "max_u", "min_u"}));
    ASSERT_EQ(t.rows.size(), 41u);
    for (const auto& row : t.rows) {
        EXPECT_EQ(row[1], 0.0);
        EXPECT_EQ(row[2], 0.0);
        EXPECT_EQ(row[3], 0.0);
    }
}

TEST_F(Cli, OutputsAreByteIdenticalAndHashed)
{
    const auto cfg = write("p.yaml", persistence_yaml);
    const auto a   = dir_ / "a";
    const auto b   = dir_ / "b";
    ASSERT_EQ(call({"simulate", "-c", cfg.string(), "-o", a.string(), "--plot"}), 0) << err_.str();
    ASSERT_EQ(call({"simulate", "-c", cfg.string(), "-o", b.string(), "--plot"}), 0);
    const std::string hash = config_hash(load_config(cfg));
    std::size_t files      = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        ++files;
        const auto name = entry.path().filename();
        EXPECT_EQ(slurp(entry.path()), slurp(b / name)) << name;
        const std::string head = slurp(entry.path()).substr(0, 64);
        EXPECT_NE(head.find("# config_hash: " + hash), std::string::npos) << name;
    }
    EXPECT_EQ(files, 14u); // series and 3 snapshots of u and w, csv and dat
}

TEST_F(Cli, EquilibriumFilesSeedASimulation)
{
    const auto cfg = write("p.yaml", persistence_yaml);
    ASSERT_EQ(call({"equilibrium", "-c", cfg.string(), "-o", dir_.string()}), 0) << err_.str();
    ASSERT_EQ(call({"simulate", "-c", cfg.string(), "-o", (dir_ / "sim").string(), "--u0", "equilibrium(u_star.csv)",
                    "--w0", "file(w_star.csv)"}),
              0)
        << err_.str();
    const Table u0 = read_csv(dir_ / "u_star.csv");
    const Table u1 = read_csv(dir_ / "sim" / "snapshot_002_u.csv");
    for (std::size_t i = 0; i < u0.rows.size(); ++i) {
        EXPECT_NEAR(u1.rows[i][1], u0.rows[i][1], 1e-9);
    }
}

TEST_F(Cli, EigenfunctionInitialState)
{
    const RunConfig c = parse_config(std::string(persistence_yaml), dir_);
    RunConfig e       = c;
    e.initial_u       = "eigenfunction(0.5)";
    e.initial_w       = "eigenfunction(0.5)";
    const auto params = instantiate(e.model, e.n_x);
    const auto grid   = build_grid(params, e.n_x, e.dt, e.tail_tol);
    const auto s      = initial_state(e, params, grid);
    EXPECT_NEAR(s.u.max(), 0.5, 1e-12);
    EXPECT_NEAR(s.w(0, 0), 0.5, 1e-9); // chi e phi at age zero
    e.initial_u = "cosine-bump(2, 1)";
    const auto b = initial_state(e, params, grid);
    EXPECT_NEAR(b.u[0], 2.0, 1e-12);
    EXPECT_NEAR(b.u[grid.n_x - 1], 0.0, 1e-12);
    e.initial_u = "gaussian(1)";
    EXPECT_THROW(initial_state(e, params, grid), ConfigError);
}

TEST_F(Cli, VerifyExtinctionBenchmark)
{
    const auto cfg = write("e.yaml", extinction_yaml);
    ASSERT_EQ(call({"verify", "-c", cfg.string(), "-o", dir_.string()}), 0) << out_.str() << err_.str();
    EXPECT_NE(out_.str().find("R₀ < 1"), std::string::npos);
    const std::string report = slurp(dir_ / "verify.jsonl");
    EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 5);
    EXPECT_NE(report.find("\"skip_reason\":\"R₀ < 1\""), std::string::npos);
}

TEST_F(Cli, VerifyFailureExitsThree)
{
    // convergence tolerance far below the grid error of the equilibrium
    const auto cfg = write("p.yaml", persistence_yaml);
    EXPECT_EQ(call({"verify", "-c", cfg.string(), "-o", dir_.string(), "--suite", "persistence", "--convergence-tol",
                    "1e-14"}),
              3)
        << out_.str() << err_.str();
    EXPECT_NE(out_.str().find("FAIL"), std::string::npos);
}

TEST_F(Cli, Audit)
{
    const auto cfg = write("p.yaml", persistence_yaml);
    ASSERT_EQ(call({"audit", "-c", cfg.string()}), 0);
    EXPECT_NE(out_.str().find("A7: holds"), std::string::npos);
}
