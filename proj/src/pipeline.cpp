#include "volspill/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <set>

#include <json.hpp>

#include "volspill/energy.hpp"
#include "volspill/errors.hpp"

namespace volspill {

namespace {

std::span<const double> col_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

PriceFrame select_columns(const PriceFrame& f, const std::vector<std::string>& names) {
  PriceFrame out;
  out.dates = f.dates;
  out.assets = names;
  out.values.resize(f.values.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    out.values.col(static_cast<Eigen::Index>(i)) = f.values.col(static_cast<Eigen::Index>(f.column(names[i])));
  }
  return out;
}

std::string pair_label(const std::string& a, const std::string& b) { return a + "_" + b; }

const char* status_text(optim::Status s) { return optim::to_string(s).data(); }

}  // namespace

SeriesDiagnostics diagnose_series(const std::string& series, const std::string& asset, std::span<const double> x,
                                  int lags, bool serial_tests) {
  SeriesDiagnostics d;
  d.series = series;
  d.asset = asset;
  d.stats = summary_stats(x);
  d.jb = jarque_bera(x);
  const int max_lag = static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(x.size()) / 100.0, 0.25)));
  d.adf = adf_test(x, std::min(max_lag, std::max(0, static_cast<int>(x.size()) / 4)));
  d.pp = pp_test(x);
  d.serial_tests = serial_tests;
  if (serial_tests) {
    d.q = ljung_box(x, lags, false);
    d.q2 = ljung_box(x, lags, true);
    d.arch = arch_lm(x, lags);
  }
  return d;
}

Table diagnostics_table(const std::vector<SeriesDiagnostics>& rows, bool raw) {
  Table t;
  t.columns = {"series", "asset", "n", "mean", "median", "max", "min", "std_dev", "skewness", "kurtosis",
               "jb_stat", "jb_p", "jb_h", "adf_stat", "adf_p", "adf_h", "adf_lag", "pp_stat", "pp_p", "pp_h",
               "q_stat", "q_p", "q_h", "q2_stat", "q2_p", "q2_h", "arch_stat", "arch_p", "arch_h", "lags"};
  auto f = [&](double v) { return format_number(v, raw); };
  auto h = [](const TestResult& r, double level) { return std::string(r.reject(level) ? "1" : "0"); };
  for (const auto& d : rows) {
    std::vector<std::string> r = {d.series, d.asset, std::to_string(d.stats.n), f(d.stats.mean), f(d.stats.median),
                                  f(d.stats.max), f(d.stats.min), f(d.stats.std_dev), f(d.stats.skewness),
                                  f(d.stats.kurtosis), f(d.jb.statistic), f(d.jb.p_value), h(d.jb, 0.05),
                                  f(d.adf.statistic), f(d.adf.p_value), h(d.adf, 0.01), std::to_string(d.adf.selected_lag),
                                  f(d.pp.statistic), f(d.pp.p_value), h(d.pp, 0.01)};
    if (d.serial_tests) {
      for (const TestResult* t2 : {&d.q, &d.q2, &d.arch}) {
        r.push_back(f(t2->statistic));
        r.push_back(f(t2->p_value));
        r.push_back(h(*t2, 0.05));
      }
      r.push_back(std::to_string(d.q.lags_or_df));
    } else {
      r.insert(r.end(), 10, "");
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

LoadedData load_and_validate(const RunConfig& cfg) {
  LoadOptions opts = cfg.load;
  opts.asset_columns.clear();
  std::vector<PriceFrame> frames;
  for (const auto& path : cfg.inputs) {
    if (!std::filesystem::exists(path)) throw Error(ErrorKind::InvalidConfig, "input file not found: " + path.string());
    frames.push_back(load_prices(path, opts));
  }
  LoadedData data;
  data.prices = frames.size() == 1 ? std::move(frames.front()) : align_common_days(frames);

  const std::vector<std::string> assets = cfg.load.asset_columns.empty() ? data.prices.assets : cfg.load.asset_columns;
  const std::set<std::string> known(data.prices.assets.begin(), data.prices.assets.end());
  for (const auto& a : assets) {
    if (!known.count(a)) throw Error(ErrorKind::InvalidConfig, "asset '" + a + "' is not a column of the inputs");
  }
  const std::set<std::string> modeled(assets.begin(), assets.end());
  if (modeled.size() != assets.size()) throw Error(ErrorKind::InvalidConfig, "input.assets lists an asset twice");
  for (const auto& [a, b] : cfg.pairs) {
    for (const auto& name : {a, b}) {
      if (!modeled.count(name)) throw Error(ErrorKind::InvalidConfig, "pair " + a + ":" + b + " references unknown asset '" + name + "'");
    }
  }
  if (assets.size() < 2) throw Error(ErrorKind::InvalidConfig, "at least two assets are needed for correlation estimates");
  if (cfg.switch_context) {
    if (!std::filesystem::exists(*cfg.switch_context)) {
      throw Error(ErrorKind::InvalidConfig, "switch context not found: " + cfg.switch_context->string());
    }
    const SwitchConfig sc = load_switch_config(*cfg.switch_context);
    const std::string col = sc.price_column.empty() ? cfg.eua_column : sc.price_column;
    if (!known.count(col)) throw Error(ErrorKind::InvalidConfig, "price column '" + col + "' for regimes is missing");
  }

  data.modeled = select_columns(data.prices, assets);
  data.returns = log_returns(data.modeled);
  data.returns.values *= cfg.return_scale;
  if (data.returns.rows() == 0) throw Error(ErrorKind::TooFewObservations, "no returns after alignment");
  for (const auto& w : cfg.windows) {
    try {
      validate_window(w, data.returns.dates.front(), data.returns.dates.back());
    } catch (const Error& e) {
      throw Error(ErrorKind::InvalidConfig, "window '" + w.label + "': " + e.what());
    }
  }
  return data;
}

MeanStage run_mean_stage(const RunConfig& cfg, const ReturnSeries& returns) {
  MeanStage m;
  m.residuals.dates = returns.dates;
  m.residuals.assets = returns.assets;
  m.residuals.values.resize(returns.values.rows(), returns.values.cols());
  switch (cfg.mean) {
    case MeanModel::None: {
      m.residuals.values = returns.values.rowwise() - returns.values.colwise().mean();
      break;
    }
    case MeanModel::Arma: {
      for (Eigen::Index i = 0; i < returns.values.cols(); ++i) {
        const Eigen::VectorXd x = returns.values.col(i);
        ArmaFit fit = select_arma(col_span(x), cfg.max_ar, cfg.max_ma, cfg.criterion, cfg.mean_constant);
        m.residuals.values.col(i) = fit.residuals;
        m.arma.push_back(std::move(fit));
      }
      break;
    }
    case MeanModel::Var: {
      const int p = std::max(1, select_var_order(returns.values, cfg.max_var_lag, cfg.criterion));
      m.var = fit_var(returns.values, p);
      m.residuals.values = m.var.residuals;
      break;
    }
  }
  return m;
}

UnivariateStage run_univariate_stage(const RunConfig& cfg, const ResidualSeries& residuals) {
  UnivariateStage u;
  for (Eigen::Index i = 0; i < residuals.values.cols(); ++i) {
    const Eigen::VectorXd e = residuals.values.col(i);
    u.garch.push_back(fit_garch(col_span(e), GarchSpec::garch11()));
    u.gjr.push_back(fit_garch(col_span(e), GarchSpec::gjr111()));
  }
  u.panel = make_panel(residuals.dates, residuals.assets, cfg.univariate == UniModel::Gjr ? u.gjr : u.garch);
  return u;
}

const MatrixPath& CorrelationResult::R_path() const {
  if (dcc) return dcc->R_path;
  if (gdcc) return gdcc->R_path;
  return constant_path;
}

double CorrelationResult::loglik() const {
  if (dcc) return dcc->loglik;
  if (gdcc) return gdcc->loglik;
  return ccc.loglik;
}

double CorrelationResult::corr_loglik() const {
  if (dcc) return dcc->corr_loglik;
  if (gdcc) return gdcc->corr_loglik;
  return ccc.corr_loglik;
}

std::vector<std::pair<std::size_t, std::size_t>> resolve_pairs(const RunConfig& cfg, const std::vector<std::string>& assets) {
  auto index = [&](const std::string& name) {
    const auto it = std::find(assets.begin(), assets.end(), name);
    if (it == assets.end()) throw Error(ErrorKind::InvalidConfig, "unknown asset '" + name + "'");
    return static_cast<std::size_t>(it - assets.begin());
  };
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (cfg.pairs.empty()) {
    for (std::size_t i = 0; i < assets.size(); ++i) {
      for (std::size_t j = i + 1; j < assets.size(); ++j) out.emplace_back(i, j);
    }
  } else {
    for (const auto& [a, b] : cfg.pairs) out.emplace_back(index(a), index(b));
  }
  return out;
}

std::vector<CorrelationResult> run_correlation_stage(const RunConfig& cfg, const StdResidualPanel& panel, Exec exec) {
  std::vector<std::vector<std::size_t>> groups;
  if (cfg.joint) {
    std::vector<std::size_t> all(static_cast<std::size_t>(panel.cols()));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    groups.push_back(std::move(all));
  } else {
    for (const auto& [i, j] : resolve_pairs(cfg, panel.assets)) groups.push_back({i, j});
  }

  std::vector<CorrelationResult> results(groups.size());
  std::vector<std::exception_ptr> errors(groups.size());
  auto one = [&](std::size_t g) {
    try {
      CorrelationResult r;
      r.columns = groups[g];
      std::vector<Eigen::Index> cols(r.columns.begin(), r.columns.end());
      const StdResidualPanel sub = panel.select(cols);
      r.ccc = fit_ccc(sub);
      switch (cfg.correlation) {
        case CorrModel::None:
        case CorrModel::Ccc: r.constant_path.assign(static_cast<std::size_t>(sub.rows()), r.ccc.R); break;
        case CorrModel::Dcc: r.dcc = fit_dcc(sub); break;
        case CorrModel::Gdcc: r.gdcc = fit_gdcc(sub, false); break;
        case CorrModel::Agdcc: r.gdcc = fit_gdcc(sub, true); break;
      }
      results[g] = std::move(r);
    } catch (...) {
      errors[g] = std::current_exception();
    }
  };
  const auto n = static_cast<long>(groups.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (long g = 0; g < n; ++g) one(static_cast<std::size_t>(g));
  } else {
    for (long g = 0; g < n; ++g) one(static_cast<std::size_t>(g));
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

RunOutcome run_pipeline(const RunConfig& cfg) {
  RunOutcome out;
  const Provenance prov{cfg.config_hash, cfg.seed, ""};
  const bool raw = cfg.raw;
  auto f = [&](double v) { return format_number(v, raw); };
  std::string stage = "config";
  nlohmann::ordered_json stages = nlohmann::ordered_json::array();

  auto emit = [&](const std::string& name, const Table& t) {
    write_csv_file(cfg.output_dir / name, t, prov);
    out.files.push_back(name);
  };
  auto done = [&](const std::string& name) { stages.push_back({{"stage", name}, {"status", "ok"}}); };

  int exit_code = 0;
  try {
    std::filesystem::create_directories(cfg.output_dir);
    const LoadedData data = load_and_validate(cfg);
    done(stage);

    stage = "diagnostics";
    std::vector<SeriesDiagnostics> diag;
    for (std::size_t i = 0; i < data.modeled.cols(); ++i) {
      const Eigen::VectorXd x = data.modeled.values.col(static_cast<Eigen::Index>(i));
      diag.push_back(diagnose_series("price", data.modeled.assets[i], col_span(x), cfg.diag_lags, false));
    }
    for (std::size_t i = 0; i < data.returns.cols(); ++i) {
      const Eigen::VectorXd x = data.returns.values.col(static_cast<Eigen::Index>(i));
      diag.push_back(diagnose_series("return", data.returns.assets[i], col_span(x), cfg.diag_lags, true));
    }
    emit("summary_stats.csv", diagnostics_table(diag, raw));
    done(stage);

    stage = "mean";
    const MeanStage mean = run_mean_stage(cfg, data.returns);
    done(stage);

    stage = "univariate";
    const UnivariateStage uni = run_univariate_stage(cfg, mean.residuals);
    {
      Table t;
      t.columns = {"asset", "model", "omega", "alpha", "gamma", "beta", "persistence", "se_omega", "se_alpha",
                   "se_gamma", "se_beta", "loglik", "status"};
      for (std::size_t i = 0; i < uni.garch.size(); ++i) {
        for (const UnivariateFit* fit : {&uni.garch[i], &uni.gjr[i]}) {
          const bool gjr = fit->spec.o > 0;
          const Eigen::VectorXd& se = fit->std_errors;
          auto se_at = [&](Eigen::Index j) { return j < se.size() ? f(se[j]) : std::string(); };
          t.rows.push_back({uni.panel.assets[i], gjr ? "gjr" : "garch", f(fit->params.omega), f(fit->params.alpha[0]),
                            gjr ? f(fit->params.gamma[0]) : "", f(fit->params.beta[0]), f(fit->persistence),
                            se_at(0), se_at(1), gjr ? se_at(2) : "", se_at(gjr ? 3 : 2), f(fit->loglik),
                            status_text(fit->status)});
          if (!fit->converged()) {
            out.warnings.push_back(uni.panel.assets[i] + " " + (gjr ? "gjr" : "garch") + ": " + status_text(fit->status));
          }
        }
      }
      emit("garch_params.csv", t);
    }
    {
      Table t;
      t.columns = {"asset", "garch_loglik", "gjr_loglik", "mean_model", "ar", "ma", "mean_aic", "mean_loglik"};
      for (std::size_t i = 0; i < uni.garch.size(); ++i) {
        std::vector<std::string> r = {uni.panel.assets[i], f(uni.garch[i].loglik), f(uni.gjr[i].loglik)};
        if (cfg.mean == MeanModel::Arma) {
          const ArmaFit& a = mean.arma[i];
          r.insert(r.end(), {"arma", std::to_string(a.spec.ar), std::to_string(a.spec.ma), f(a.aic), f(a.loglik)});
        } else if (cfg.mean == MeanModel::Var) {
          r.insert(r.end(), {"var", std::to_string(mean.var.order), "0", f(mean.var.aic), f(mean.var.loglik)});
        } else {
          r.insert(r.end(), {"none", "0", "0", "", ""});
        }
        t.rows.push_back(std::move(r));
      }
      emit("loglik.csv", t);
    }
    done(stage);

    stage = "correlation";
    const std::vector<CorrelationResult> corr = run_correlation_stage(cfg, uni.panel);
    const auto& names = uni.panel.assets;
    {
      Table t;
      t.columns = {"pair", "asset_i", "asset_j", "model", "rho_ccc"};
      const bool scalar = cfg.correlation == CorrModel::Dcc;
      const bool diag_model = cfg.correlation == CorrModel::Gdcc || cfg.correlation == CorrModel::Agdcc;
      if (scalar) t.columns.insert(t.columns.end(), {"alpha", "beta", "alpha_plus_beta"});
      if (diag_model) t.columns.insert(t.columns.end(), {"a_i", "a_j", "b_i", "b_j"});
      if (cfg.correlation == CorrModel::Agdcc) t.columns.insert(t.columns.end(), {"g_i", "g_j"});
      t.columns.insert(t.columns.end(), {"loglik", "corr_loglik", "ccc_loglik", "status", "warnings"});
      for (const auto& r : corr) {
        for (std::size_t li = 0; li < r.columns.size(); ++li) {
          for (std::size_t lj = li + 1; lj < r.columns.size(); ++lj) {
            const auto a = static_cast<Eigen::Index>(li), b = static_cast<Eigen::Index>(lj);
            const std::string& ni = names[r.columns[li]];
            const std::string& nj = names[r.columns[lj]];
            std::vector<std::string> row = {pair_label(ni, nj), ni, nj, std::string(to_string(cfg.correlation)),
                                            f(r.ccc.R(a, b))};
            std::string status = "n/a";
            std::string warn;
            if (r.dcc) {
              row.insert(row.end(), {f(r.dcc->alpha()), f(r.dcc->beta()), f(r.dcc->alpha() + r.dcc->beta())});
              status = status_text(r.dcc->status);
              for (const auto& w : r.dcc->warnings) warn += (warn.empty() ? "" : "; ") + w;
            }
            if (r.gdcc) {
              const AgdccParams& p = r.gdcc->params;
              row.insert(row.end(), {f(p.a[a]), f(p.a[b]), f(p.b[a]), f(p.b[b])});
              if (p.g.size() > 0) row.insert(row.end(), {f(p.g[a]), f(p.g[b])});
              status = status_text(r.gdcc->status);
              for (const auto& w : r.gdcc->warnings) warn += (warn.empty() ? "" : "; ") + w;
            }
            row.insert(row.end(), {f(r.loglik()), f(r.corr_loglik()), f(r.ccc.loglik), status, warn});
            if (!warn.empty()) out.warnings.push_back(pair_label(ni, nj) + ": " + warn);
            t.rows.push_back(std::move(row));
          }
        }
      }
      emit("dcc_pairs.csv", t);
    }
    {
      Table t;
      t.columns = {"date", "asset_i", "asset_j", "rho"};
      for (const auto& r : corr) {
        const MatrixPath& R = r.R_path();
        for (std::size_t li = 0; li < r.columns.size(); ++li) {
          for (std::size_t lj = li + 1; lj < r.columns.size(); ++lj) {
            for (std::size_t s = 0; s < R.size(); ++s) {
              t.rows.push_back({format_date(uni.panel.dates[s]), names[r.columns[li]], names[r.columns[lj]],
                                f(R[s](static_cast<Eigen::Index>(li), static_cast<Eigen::Index>(lj)))});
            }
          }
        }
      }
      emit("rho_paths.csv", t);
    }
    done(stage);

    stage = "summaries";
    {
      Table t;
      t.columns = {"pair", "window", "start", "end", "count", "mean", "min", "max"};
      for (const auto& r : corr) {
        for (std::size_t li = 0; li < r.columns.size(); ++li) {
          for (std::size_t lj = li + 1; lj < r.columns.size(); ++lj) {
            const DccSummary s = summarize_dcc(r.R_path(), uni.panel.dates, {li, lj}, cfg.windows);
            const std::string label = pair_label(names[r.columns[li]], names[r.columns[lj]]);
            for (std::size_t w = 0; w < s.windows.size(); ++w) {
              const WindowSummary& ws = s.windows[w];
              const std::string start = w == 0 ? format_date(uni.panel.dates.front()) : format_date(cfg.windows[w - 1].start);
              const std::string end = w == 0 ? format_date(uni.panel.dates.back()) : format_date(cfg.windows[w - 1].end);
              t.rows.push_back({label, ws.label, start, end, std::to_string(ws.count), f(ws.mean), f(ws.min), f(ws.max)});
            }
          }
        }
      }
      emit("dcc_summary.csv", t);
    }
    done(stage);

    if (cfg.switch_context) {
      stage = "regimes";
      const SwitchConfig sc = load_switch_config(*cfg.switch_context);
      const std::string col = sc.price_column.empty() ? cfg.eua_column : sc.price_column;
      const SwitchBand band = switch_prices(sc.context);
      for (const auto& w : band.warnings) out.warnings.push_back(w);
      const double unit = sc.price_per_tonne ? kKgPerTonne : 1.0;
      Table t;
      t.columns = {"date", col, "sp_lower", "sp_upper", "regime"};
      const Eigen::Index c = static_cast<Eigen::Index>(data.prices.column(col));
      for (std::size_t s = 0; s < data.prices.rows(); ++s) {
        const double price = data.prices.values(static_cast<Eigen::Index>(s), c);
        const Regime reg = classify_regime(price / unit, band);
        t.rows.push_back({format_date(data.prices.dates[s]), f(price), f(band.lower * unit), f(band.upper * unit),
                          std::string(to_string(reg))});
      }
      emit("regimes.csv", t);
      done(stage);
    }
    out.complete = true;
  } catch (const Error& e) {
    out.error_stage = stage;
    out.error_kind = std::string(to_string(e.kind()));
    out.error_message = e.what();
    exit_code = e.kind() == ErrorKind::InvalidConfig ? 2 : 1;
  } catch (const std::exception& e) {
    out.error_stage = stage;
    out.error_kind = "Internal";
    out.error_message = e.what();
    exit_code = 1;
  }

  nlohmann::ordered_json manifest;
  manifest["tool"] = "volspill";
  manifest["version"] = std::string(kVersion);
  manifest["config_hash"] = hex_hash(cfg.config_hash);
  manifest["seed"] = cfg.seed;
  manifest["complete"] = out.complete;
  manifest["stages"] = stages;
  manifest["files"] = out.files;
  manifest["warnings"] = out.warnings;
  if (out.complete) {
    manifest["error"] = nullptr;
  } else {
    nlohmann::ordered_json err = {{"stage", out.error_stage}, {"kind", out.error_kind}, {"message", out.error_message}};
    manifest["error"] = err;
    out.error_json = nlohmann::ordered_json{{"error", err}}.dump();
  }
  out.exit_code = exit_code;
  try {
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream m(cfg.output_dir / "MANIFEST.json", std::ios::binary | std::ios::trunc);
    m << manifest.dump(2) << '\n';
  } catch (const std::exception&) {
    if (out.exit_code == 0) out.exit_code = 1;
  }
  return out;
}

}  // namespace volspill
