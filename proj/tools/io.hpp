#pragma once

#include "hybridpop/fields.hpp"
#include "hybridpop/grid.hpp"
#include "hybridpop/verify.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace hybridpop::app
{

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    /// Gnuplot output leaves a blank line every `block` rows (0: never), for surface data.
    std::size_t block = 0;
};

/// Lines written as `# line` ahead of the header row.
using Metadata = std::vector<std::string>;

/// Comma separated, header row, 17 significant digits.
void write_csv(const std::filesystem::path& path, const Metadata& meta, const Table& table);

/// Whitespace separated with the header as a comment.
void write_dat(const std::filesystem::path& path, const Metadata& meta, const Table& table);

/// Reads a CSV written by write_csv. Throws ConfigError on I/O or format problems.
Table read_csv(const std::filesystem::path& path);

Table spatial_table(const Discretization& grid, const SpatialField& u, const std::string& name = "u");
Table age_table(const Discretization& grid, const AgeField& w, const std::string& name = "w");

/// Matches an (x, u) table against the grid nodes.
SpatialField spatial_from_table(const Discretization& grid, const Table& table, const std::string& origin);
/// Matches an (x, a, w) table against the grid nodes, rows ordered by x then a.
AgeField age_from_table(const Discretization& grid, const Table& table, const std::string& origin);

/// One JSON object per line.
void write_verdicts_jsonl(const std::filesystem::path& path, const std::string& config_hash,
                          const std::vector<VerdictReport>& verdicts);

} // namespace hybridpop::app
