#include "io.hpp"

#include "hybridpop/descriptors.hpp"
#include "hybridpop/error.hpp"
#include "hybridpop/text.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace hybridpop::app
{
namespace
{

std::ofstream open_out(const std::filesystem::path& path)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    return out;
}

void write_meta(std::ofstream& out, const Metadata& meta)
{
    for (const auto& m : meta) {
        out << "# " << m << '\n';
    }
}

void write_rows(std::ofstream& out, const Table& table, char sep, bool blocks)
{
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (blocks && table.block && r && r % table.block == 0) {
            out << '\n';
        }
        const auto& row = table.rows[r];
        for (std::size_t k = 0; k < row.size(); ++k) {
            out << (k ? std::string(1, sep) : std::string()) << to_text(row[k]);
        }
        out << '\n';
    }
}

bool near(double a, double b, double scale)
{
    return std::abs(a - b) <= 1e-9 * std::max(1.0, scale);
}

} // namespace

void write_csv(const std::filesystem::path& path, const Metadata& meta, const Table& table)
{
    auto out = open_out(path);
    write_meta(out, meta);
    for (std::size_t k = 0; k < table.columns.size(); ++k) {
        out << (k ? "," : "") << table.columns[k];
    }
    out << '\n';
    write_rows(out, table, ',', false);
}

void write_dat(const std::filesystem::path& path, const Metadata& meta, const Table& table)
{
    auto out = open_out(path);
    write_meta(out, meta);
    out << '#';
    for (const auto& c : table.columns) {
        out << ' ' << c;
    }
    out << '\n';
    write_rows(out, table, ' ', true);
}

Table read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    Table t;
    std::string line;
    bool header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (!header) {
            t.columns = cells;
            header    = true;
            continue;
        }
        if (cells.size() != t.columns.size()) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(t.columns.size()) + " columns");
        }
        std::vector<double> row;
        for (const auto& c : cells) {
            row.push_back(parse_number(c, path.string() + ":" + std::to_string(lineno)));
        }
        t.rows.push_back(std::move(row));
    }
    if (!header) {
        throw ConfigError(path.string() + ": no header row");
    }
    return t;
}

Table spatial_table(const Discretization& grid, const SpatialField& u, const std::string& name)
{
    Table t{{"x", name}, {}, 0};
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        t.rows.push_back({grid.x(i), u[i]});
    }
    return t;
}

Table age_table(const Discretization& grid, const AgeField& w, const std::string& name)
{
    Table t{{"x", "a", name}, {}, grid.n_ages()};
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        for (std::size_t j = 0; j < grid.n_ages(); ++j) {
            t.rows.push_back({grid.x(i), grid.age(j), w(i, j)});
        }
    }
    return t;
}

SpatialField spatial_from_table(const Discretization& grid, const Table& table, const std::string& origin)
{
    if (table.columns.size() != 2 || table.rows.size() != grid.n_x) {
        throw ConfigError(origin + ": expected " + std::to_string(grid.n_x) + " rows of (x, value)");
    }
    SpatialField u(grid.n_x);
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        if (!near(table.rows[i][0], grid.x(i), grid.length)) {
            throw ConfigError(origin + ": row " + std::to_string(i) + " is not at grid node x = " + to_text(grid.x(i)));
        }
        u[i] = table.rows[i][1];
    }
    return u;
}

AgeField age_from_table(const Discretization& grid, const Table& table, const std::string& origin)
{
    const std::size_t na = grid.n_ages();
    if (table.columns.size() != 3 || table.rows.size() != grid.n_x * na) {
        throw ConfigError(origin + ": expected " + std::to_string(grid.n_x * na) + " rows of (x, a, value)");
    }
    AgeField w(grid.n_x, na);
    for (std::size_t i = 0; i < grid.n_x; ++i) {
        for (std::size_t j = 0; j < na; ++j) {
            const auto& row = table.rows[i * na + j];
            if (!near(row[0], grid.x(i), grid.length) || !near(row[1], grid.age(j), grid.horizon)) {
                throw ConfigError(origin + ": row " + std::to_string(i * na + j) + " is not at the grid node");
            }
            w(i, j) = row[2];
        }
    }
    return w;
}

void write_verdicts_jsonl(const std::filesystem::path& path, const std::string& config_hash,
                          const std::vector<VerdictReport>& verdicts)
{
    auto out = open_out(path);
    for (const auto& v : verdicts) {
        nlohmann::ordered_json j;
        j["config_hash"] = config_hash;
        j["name"]        = v.name;
        j["passed"]      = v.passed;
        j["skipped"]     = v.skipped;
        if (v.skipped) {
            j["skip_reason"] = v.skip_reason;
        }
        else {
            j["measured"]  = v.measured;
            j["expected"]  = v.expected;
            j["tolerance"] = v.tolerance;
            j["notes"]     = v.notes;
            nlohmann::ordered_json d = nlohmann::ordered_json::object();
            for (const auto& [k, x] : v.details) {
                d[k] = x;
            }
            j["details"] = d;
        }
        out << j.dump() << '\n';
    }
}

} // namespace hybridpop::app
