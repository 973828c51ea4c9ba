#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "volspill/config.hpp"
#include "volspill/correlation.hpp"
#include "volspill/diagnostics.hpp"
#include "volspill/garch.hpp"
#include "volspill/mean_models.hpp"
#include "volspill/report.hpp"

namespace volspill {

struct SeriesDiagnostics {
  std::string series;  // "price" or "return"
  std::string asset;
  SummaryStats stats;
  TestResult jb;
  AdfResult adf;
  TestResult pp;
  bool serial_tests = false;  // Ljung-Box and ARCH-LM only run on returns
  TestResult q;
  TestResult q2;
  TestResult arch;
};

/// ADF lag search up to floor(12 (n/100)^{1/4}).
SeriesDiagnostics diagnose_series(const std::string& series, const std::string& asset, std::span<const double> x,
                                  int lags, bool serial_tests);
Table diagnostics_table(const std::vector<SeriesDiagnostics>& rows, bool raw);

struct LoadedData {
  PriceFrame prices;   // every column of every input, on common dates
  PriceFrame modeled;  // the configured assets
  ReturnSeries returns;
};

/// Loads inputs and checks every name the config refers to. Throws
/// InvalidConfig before any estimation runs.
LoadedData load_and_validate(const RunConfig& cfg);

struct MeanStage {
  ResidualSeries residuals;
  std::vector<ArmaFit> arma;  // per asset, ARMA mode only
  VarFit var;                 // VAR mode only
};

MeanStage run_mean_stage(const RunConfig& cfg, const ReturnSeries& returns);

struct UnivariateStage {
  std::vector<UnivariateFit> garch;
  std::vector<UnivariateFit> gjr;
  StdResidualPanel panel;  // built from the configured model
};

UnivariateStage run_univariate_stage(const RunConfig& cfg, const ResidualSeries& residuals);

/// One pairwise (or joint) correlation estimate.
struct CorrelationResult {
  std::vector<std::size_t> columns;  // panel columns
  CccFit ccc;
  std::optional<DccFit> dcc;
  std::optional<AgdccFit> gdcc;
  MatrixPath constant_path;  // CCC model only

  const MatrixPath& R_path() const;
  double loglik() const;
  double corr_loglik() const;
};

/// Pair list from the config as panel column indices (every pair when empty).
std::vector<std::pair<std::size_t, std::size_t>> resolve_pairs(const RunConfig& cfg, const std::vector<std::string>& assets);

/// Pairs run concurrently up to worker_count(); results keep config order.
std::vector<CorrelationResult> run_correlation_stage(const RunConfig& cfg, const StdResidualPanel& panel,
                                                     Exec exec = Exec::Parallel);

struct RunOutcome {
  bool complete = false;
  int exit_code = 0;
  std::vector<std::string> files;
  std::vector<std::string> warnings;
  std::string error_stage;
  std::string error_kind;
  std::string error_message;
  std::string error_json;  // machine-readable report, empty on success
};

/// Runs every stage and writes CSVs plus MANIFEST.json into cfg.output_dir.
/// Stage failures are caught and reported; outputs written before the failure
/// stay in place and the manifest marks the run incomplete.
RunOutcome run_pipeline(const RunConfig& cfg);

}  // namespace volspill
