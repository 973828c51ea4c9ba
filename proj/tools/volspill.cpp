#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "volspill/config.hpp"
#include "volspill/energy.hpp"
#include "volspill/errors.hpp"
#include "volspill/pipeline.hpp"
#include "volspill/report.hpp"
#include "volspill/simulate.hpp"

namespace vs = volspill;

namespace {

int fail(const std::string& kind, const std::string& message, int code) {
  nlohmann::ordered_json j = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << j.dump() << '\n';
  return code;
}

vs::DateFormat date_format(const std::string& s) {
  if (s == "iso") return vs::DateFormat::Iso;
  if (s == "dmy") return vs::DateFormat::DayMonthYear;
  throw vs::Error(vs::ErrorKind::InvalidConfig, "date format must be iso or dmy");
}

// Hash of the effective command-line settings for commands without a config file.
std::uint64_t settings_hash(std::vector<std::pair<std::string, std::string>> entries) {
  vs::IniFile ini;
  ini.entries = std::move(entries);
  return ini.hash();
}

void emit(const vs::Table& t, const vs::Provenance& prov, const std::string& out) {
  if (out.empty() || out == "-") {
    vs::write_csv(std::cout, t, prov);
  } else {
    vs::write_csv_file(out, t, prov);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"volspill: volatility spillover and dynamic correlation toolkit"};
  app.set_version_flag("--version", std::string(vs::kVersion));
  app.require_subcommand(1);
  bool raw = false;
  app.add_flag("--raw", raw, "Print numbers at full precision");

  std::string run_config, run_out;
  auto* run = app.add_subcommand("run", "Run the full estimation pipeline from a config file");
  run->add_option("config", run_config, "Run config (key=value with sections)")->required();
  run->add_option("--out", run_out, "Override output.dir");

  std::string diag_csv, diag_date_col, diag_fmt = "iso", diag_out;
  int diag_lags = 20;
  bool diag_returns = false;
  auto* diag = app.add_subcommand("diag", "Descriptive statistics and tests for a price CSV");
  diag->add_option("csv", diag_csv, "Price CSV (date column then one column per asset)")->required();
  diag->add_option("--lags", diag_lags, "Lags for Ljung-Box and ARCH-LM")->check(CLI::PositiveNumber);
  diag->add_option("--date-column", diag_date_col, "Date column name (default: first column)");
  diag->add_option("--date-format", diag_fmt, "iso or dmy");
  diag->add_flag("--returns-only", diag_returns, "Skip the price-level rows");
  diag->add_option("--out", diag_out, "Output CSV (default: stdout)");

  std::string sim_config, sim_out;
  int sim_reps = -1;
  auto* sim = app.add_subcommand("sim", "Simulate a DGP or run a parameter-recovery study");
  sim->add_option("dgp", sim_config, "DGP config")->required();
  sim->add_option("--replications", sim_reps, "Override dgp.replications");
  sim->add_option("--out", sim_out, "Override output.dir");

  std::string reg_ctx, reg_prices, reg_date_col, reg_fmt = "iso", reg_out;
  auto* regime = app.add_subcommand("regime", "Classify carbon prices into switching regimes");
  regime->add_option("context", reg_ctx, "Switch context config")->required();
  regime->add_option("prices", reg_prices, "Price CSV holding the carbon price column")->required();
  regime->add_option("--date-column", reg_date_col, "Date column name (default: first column)");
  regime->add_option("--date-format", reg_fmt, "iso or dmy");
  regime->add_option("--out", reg_out, "Output CSV (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      vs::RunConfig cfg = vs::load_run_config(run_config);
      if (raw) cfg.raw = true;
      if (!run_out.empty()) cfg.output_dir = run_out;
      const vs::RunOutcome r = vs::run_pipeline(cfg);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      if (!r.complete) {
        std::cerr << r.error_json << '\n';
        return r.exit_code;
      }
      std::cout << "wrote " << r.files.size() << " files to " << cfg.output_dir.string() << '\n';
      return 0;
    }

    if (*diag) {
      vs::LoadOptions opts;
      opts.date_column = diag_date_col;
      opts.date_format = date_format(diag_fmt);
      const vs::PriceFrame prices = vs::load_prices(diag_csv, opts);
      const vs::ReturnSeries returns = vs::log_returns(prices);
      std::vector<vs::SeriesDiagnostics> rows;
      for (std::size_t i = 0; i < prices.cols() && !diag_returns; ++i) {
        const Eigen::VectorXd x = prices.values.col(static_cast<Eigen::Index>(i));
        rows.push_back(vs::diagnose_series("price", prices.assets[i], {x.data(), static_cast<std::size_t>(x.size())},
                                           diag_lags, false));
      }
      for (std::size_t i = 0; i < returns.cols(); ++i) {
        const Eigen::VectorXd x = returns.values.col(static_cast<Eigen::Index>(i));
        rows.push_back(vs::diagnose_series("return", returns.assets[i], {x.data(), static_cast<std::size_t>(x.size())},
                                           diag_lags, true));
      }
      const vs::Provenance prov{settings_hash({{"diag.file", std::filesystem::path(diag_csv).filename().string()},
                                               {"diag.lags", std::to_string(diag_lags)}}),
                                0, ""};
      emit(vs::diagnostics_table(rows, raw), prov, diag_out);
      return 0;
    }

    if (*sim) {
      vs::DgpConfig cfg = vs::load_dgp_config(sim_config);
      if (sim_reps >= 0) cfg.replications = static_cast<std::size_t>(sim_reps);
      const std::filesystem::path dir = sim_out.empty() ? cfg.output_dir : std::filesystem::path(sim_out);
      std::filesystem::create_directories(dir);
      const vs::Provenance prov{cfg.config_hash, cfg.dgp.seed, "mt19937_64"};
      if (cfg.replications > 0) {
        const vs::RecoveryReport rep = vs::recovery_study(cfg.dgp, cfg.replications);
        vs::write_csv_file(dir / "recovery.csv", vs::recovery_table(rep, raw), prov);
        for (std::size_t r = 0; r < rep.failure_reasons.size(); ++r) {
          if (!rep.failure_reasons[r].empty()) std::cerr << "replication " << r << ": " << rep.failure_reasons[r] << '\n';
        }
        std::cout << "recovery: " << rep.replications << " replications, " << rep.failures << " failures -> "
                  << (dir / "recovery.csv").string() << '\n';
      } else {
        const vs::Simulation s = vs::simulate(cfg.dgp);
        vs::write_csv_file(dir / "simulation.csv", vs::simulation_table(s, raw), prov);
        if (!s.R.empty()) vs::write_csv_file(dir / "rho_true.csv", vs::simulated_rho_table(s, raw), prov);
        std::cout << "simulated " << s.returns.rows() << " observations -> " << dir.string() << '\n';
      }
      return 0;
    }

    if (*regime) {
      const vs::SwitchConfig sc = vs::load_switch_config(reg_ctx);
      vs::LoadOptions opts;
      opts.date_column = reg_date_col;
      opts.date_format = date_format(reg_fmt);
      opts.asset_columns = {sc.price_column};
      const vs::PriceFrame prices = vs::load_prices(reg_prices, opts);
      const vs::SwitchBand band = vs::switch_prices(sc.context);
      for (const auto& w : band.warnings) std::cerr << "warning: " << w << '\n';
      const double unit = sc.price_per_tonne ? vs::kKgPerTonne : 1.0;
      vs::Table t;
      t.columns = {"date", sc.price_column, "sp_lower", "sp_upper", "regime"};
      for (std::size_t s = 0; s < prices.rows(); ++s) {
        const double p = prices.values(static_cast<Eigen::Index>(s), 0);
        t.rows.push_back({vs::format_date(prices.dates[s]), vs::format_number(p, raw),
                          vs::format_number(band.lower * unit, raw), vs::format_number(band.upper * unit, raw),
                          std::string(vs::to_string(vs::classify_regime(p / unit, band)))});
      }
      emit(t, {sc.config_hash, 0, ""}, reg_out);
      return 0;
    }
  } catch (const vs::Error& e) {
    return fail(std::string(vs::to_string(e.kind())), e.what(), e.kind() == vs::ErrorKind::InvalidConfig ? 2 : 1);
  } catch (const std::exception& e) {
    return fail("Internal", e.what(), 1);
  }
  return 0;
}
