#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "volspill/energy.hpp"
#include "volspill/mean_models.hpp"
#include "volspill/simulate.hpp"
#include "volspill/timeseries.hpp"

namespace volspill {

/// Flat key=value file with [sections]. Lines starting with ';' or '#' are
/// comments. Throws InvalidConfig / Io.
struct IniFile {
  std::filesystem::path path;
  std::vector<std::pair<std::string, std::string>> entries;  // "section.key" → value, file order

  static IniFile load(const std::filesystem::path& path);
  static IniFile parse(const std::string& text, std::filesystem::path origin = {});

  const std::string* find(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  /// Entries whose key starts with "section.".
  std::vector<std::pair<std::string, std::string>> section(const std::string& name) const;
  /// Relative paths resolve against the file's directory.
  std::filesystem::path resolve(const std::string& value) const;
  /// FNV-1a (64-bit) over the sorted "key=value" lines, so formatting and
  /// comments do not change it.
  std::uint64_t hash() const;
};

std::string hex_hash(std::uint64_t h);

enum class MeanModel { None, Arma, Var };
enum class UniModel { Garch, Gjr };

struct RunConfig {
  std::vector<std::filesystem::path> inputs;
  LoadOptions load;
  double return_scale = 1.0;

  MeanModel mean = MeanModel::Arma;
  int max_ar = kDefaultMaxArmaOrder;
  int max_ma = kDefaultMaxArmaOrder;
  int max_var_lag = 10;
  Criterion criterion = Criterion::Aic;
  bool mean_constant = true;

  UniModel univariate = UniModel::Garch;
  CorrModel correlation = CorrModel::Dcc;
  bool joint = false;
  std::vector<std::pair<std::string, std::string>> pairs;  // empty: every pair

  std::vector<CrisisWindow> windows;

  std::optional<std::filesystem::path> switch_context;
  std::string eua_column = "eua";

  int diag_lags = 20;
  std::filesystem::path output_dir = "volspill_out";
  std::uint64_t seed = 0;
  bool raw = false;
  std::uint64_t config_hash = 0;
};

RunConfig parse_run_config(const IniFile& ini);
RunConfig load_run_config(const std::filesystem::path& path);

struct DgpConfig {
  Dgp dgp;
  std::size_t replications = 0;  // 0: plain simulation
  std::filesystem::path output_dir = "volspill_sim";
  std::uint64_t config_hash = 0;
};

DgpConfig parse_dgp_config(const IniFile& ini);
DgpConfig load_dgp_config(const std::filesystem::path& path);

/// [coal_efficient], [coal_inefficient], [gas_efficient], [gas_inefficient]
/// with efficiency / emission_factor; [market] fc_coal, fc_gas, rho, sigma_fc,
/// sigma_ec. [prices] column and unit (eur_per_tonne or eur_per_kg).
struct SwitchConfig {
  SwitchContext context;
  std::string price_column = "eua";
  bool price_per_tonne = true;
  std::uint64_t config_hash = 0;
};

SwitchConfig parse_switch_config(const IniFile& ini);
SwitchConfig load_switch_config(const std::filesystem::path& path);

}  // namespace volspill
