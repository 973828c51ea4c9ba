#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "volspill/simulate.hpp"

namespace volspill {

inline constexpr std::string_view kVersion = "0.1.0";

/// Written as the first line of every CSV:
/// "# volspill <version> config_hash=<hex> seed=<n>[ rng=<name>]".
struct Provenance {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string rng;
};

std::string provenance_line(const Provenance& p);

/// 6 significant digits, or round-trip precision (17 digits) when raw.
std::string format_number(double v, bool raw);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(std::ostream& out, const Table& table, const Provenance& prov);
void write_csv_file(const std::filesystem::path& path, const Table& table, const Provenance& prov);

/// Reads a CSV written by write_csv (comment lines skipped). Throws Io.
Table read_csv_file(const std::filesystem::path& path);

Table recovery_table(const RecoveryReport& report, bool raw);
/// date, asset, epsilon, sigma2, xi; plus long-format true rho when present.
Table simulation_table(const Simulation& sim, bool raw);
Table simulated_rho_table(const Simulation& sim, bool raw);

}  // namespace volspill
