#include "volspill/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "volspill/errors.hpp"
#include "volspill/ols.hpp"

namespace volspill {

namespace {

constexpr std::array<double, 3> kLevels = {0.01, 0.05, 0.10};

TestResult make_result(double statistic, double p, int df) {
  TestResult r;
  r.statistic = statistic;
  r.p_value = std::clamp(p, 0.0, 1.0);
  r.lags_or_df = df;
  for (double level : kLevels) r.reject_at[level] = r.p_value < level;
  return r;
}

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

void require_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidParams, "series contains non-finite values");
  }
}

// Deterministic regressors for row t of a unit-root regression.
int deterministic_columns(Deterministic spec) {
  switch (spec) {
    case Deterministic::None: return 0;
    case Deterministic::Constant: return 1;
    case Deterministic::Trend: return 2;
  }
  return 0;
}

void fill_deterministic(Eigen::MatrixXd& X, Eigen::Index row, Deterministic spec, double t) {
  if (spec == Deterministic::None) return;
  X(row, 0) = 1.0;
  if (spec == Deterministic::Trend) X(row, 1) = t;
}

}  // namespace

SummaryStats summary_stats(std::span<const double> x) {
  if (x.size() < 4) throw Error(ErrorKind::TooFewObservations, "summary statistics need n >= 4");
  require_finite(x);
  SummaryStats s;
  s.n = x.size();
  const double n = static_cast<double>(x.size());
  s.mean = mean_of(x);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) throw Error(ErrorKind::ZeroVariance, "series has zero variance");
  s.std_dev = std::sqrt(m2 * n / (n - 1.0));
  s.skewness = m3 / std::pow(m2, 1.5);
  s.kurtosis = m4 / (m2 * m2);

  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  const std::size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return s;
}

TestResult jarque_bera(std::span<const double> x) {
  if (x.size() < 8) throw Error(ErrorKind::TooFewObservations, "Jarque-Bera needs n >= 8");
  const SummaryStats s = summary_stats(x);
  const double jb = jarque_bera_statistic(s.n, s.skewness, s.kurtosis);
  return make_result(jb, chi2_sf(jb, 2.0), 2);
}

double jarque_bera_statistic(std::size_t n, double skewness, double kurtosis) {
  const double excess = kurtosis - 3.0;
  return static_cast<double>(n) / 6.0 * (skewness * skewness + excess * excess / 4.0);
}

TestResult ljung_box(std::span<const double> x, int lags, bool squared) {
  const std::size_t n = x.size();
  if (lags < 1 || static_cast<double>(lags) >= static_cast<double>(n) / 2.0) {
    throw Error(ErrorKind::TooManyLags, "Ljung-Box needs 1 <= lags < n/2");
  }
  require_finite(x);
  std::vector<double> z(x.begin(), x.end());
  if (squared) {
    const double mu = mean_of(z);
    for (double& v : z) v = (v - mu) * (v - mu);
  }
  const double mu = mean_of(z);
  for (double& v : z) v -= mu;
  double c0 = 0.0;
  for (double v : z) c0 += v * v;
  if (!(c0 > 0.0)) throw Error(ErrorKind::ZeroVariance, "series has zero variance");

  const double nn = static_cast<double>(n);
  double q = 0.0;
  for (int j = 1; j <= lags; ++j) {
    double cj = 0.0;
    for (std::size_t t = static_cast<std::size_t>(j); t < n; ++t) cj += z[t] * z[t - j];
    const double rho = cj / c0;
    q += rho * rho / (nn - j);
  }
  q *= nn * (nn + 2.0);
  return make_result(q, chi2_sf(q, lags), lags);
}

TestResult arch_lm(std::span<const double> x, int lags) {
  const std::size_t n = x.size();
  if (lags < 1 || static_cast<double>(lags) >= static_cast<double>(n) / 2.0) {
    throw Error(ErrorKind::TooManyLags, "ARCH-LM needs 1 <= lags < n/2");
  }
  require_finite(x);
  const double mu = mean_of(x);
  std::vector<double> e2(n);
  for (std::size_t t = 0; t < n; ++t) e2[t] = (x[t] - mu) * (x[t] - mu);

  const auto rows = static_cast<Eigen::Index>(n - lags);
  Eigen::MatrixXd X(rows, lags + 1);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t t = static_cast<std::size_t>(r) + lags;
    y[r] = e2[t];
    X(r, 0) = 1.0;
    for (int j = 1; j <= lags; ++j) X(r, j) = e2[t - j];
  }
  const double ybar = y.mean();
  const double tss = (y.array() - ybar).square().sum();
  if (!(tss > 0.0)) throw Error(ErrorKind::SingularRegression, "squared series is constant");
  OlsResult fit;
  try {
    fit = ols(X, y);
  } catch (const Error&) {
    throw Error(ErrorKind::SingularRegression, "ARCH-LM auxiliary design is rank deficient");
  }
  const double r2 = 1.0 - fit.rss / tss;
  const double stat = static_cast<double>(rows) * r2;
  return make_result(stat, chi2_sf(stat, lags), lags);
}

AdfResult adf_test(std::span<const double> x, int max_lag, Deterministic spec) {
  const std::size_t n = x.size();
  if (max_lag < 0 || n <= static_cast<std::size_t>(max_lag) + 10) {
    throw Error(ErrorKind::SampleTooShort, "ADF needs n > max_lag + 10");
  }
  require_finite(x);
  if (is_constant(x)) throw Error(ErrorKind::ZeroVariance, "series is constant");

  std::vector<double> dy(n - 1);
  for (std::size_t t = 1; t < n; ++t) dy[t - 1] = x[t] - x[t - 1];
  const int nd = deterministic_columns(spec);

  // Rows of the regression indexed by t in dy (dy[t] = x[t+1]-x[t]); regressors:
  // deterministic, x[t], dy[t-1..t-p].
  auto build = [&](int p, std::size_t first) {
    const auto rows = static_cast<Eigen::Index>(dy.size() - first);
    Eigen::MatrixXd X(rows, nd + 1 + p);
    Eigen::VectorXd y(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const std::size_t t = first + static_cast<std::size_t>(r);
      y[r] = dy[t];
      fill_deterministic(X, r, spec, static_cast<double>(t + 1));
      X(r, nd) = x[t];
      for (int j = 1; j <= p; ++j) X(r, nd + j) = dy[t - j];
    }
    return std::pair{std::move(X), std::move(y)};
  };

  int best_lag = 0;
  double best_aic = std::numeric_limits<double>::infinity();
  for (int p = 0; p <= max_lag; ++p) {
    auto [X, y] = build(p, static_cast<std::size_t>(max_lag));
    const OlsResult fit = ols(X, y);
    const double nobs = static_cast<double>(fit.n);
    const double aic = nobs * std::log(fit.rss / nobs) + 2.0 * static_cast<double>(fit.k);
    if (aic < best_aic - 1e-12) {
      best_aic = aic;
      best_lag = p;
    }
  }

  auto [X, y] = build(best_lag, static_cast<std::size_t>(best_lag));
  const OlsResult fit = ols(X, y);
  const double tau = fit.coef[nd] / fit.std_error(nd);
  AdfResult out;
  static_cast<TestResult&>(out) = make_result(tau, mackinnon_p(tau, spec), best_lag);
  out.selected_lag = best_lag;
  return out;
}

int pp_default_bandwidth(std::size_t n) {
  return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

TestResult pp_test(std::span<const double> x, Deterministic spec, int bandwidth) {
  const std::size_t n = x.size();
  if (n < 12) throw Error(ErrorKind::SampleTooShort, "PP needs at least 12 observations");
  require_finite(x);
  if (is_constant(x)) throw Error(ErrorKind::ZeroVariance, "series is constant");
  const int lags = bandwidth < 0 ? pp_default_bandwidth(n) : bandwidth;
  const int nd = deterministic_columns(spec);

  const auto rows = static_cast<Eigen::Index>(n - 1);
  Eigen::MatrixXd X(rows, nd + 1);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t t = static_cast<std::size_t>(r);
    y[r] = x[t + 1] - x[t];
    fill_deterministic(X, r, spec, static_cast<double>(t + 1));
    X(r, nd) = x[t];
  }
  const OlsResult fit = ols(X, y);
  const double T = static_cast<double>(rows);
  const double se = fit.std_error(nd);
  const double s = std::sqrt(fit.sigma2());
  const double tstat = fit.coef[nd] / se;

  const Eigen::VectorXd& u = fit.residuals;
  const double gamma0 = u.squaredNorm() / T;
  double lrv = gamma0;
  for (int j = 1; j <= lags && j < rows; ++j) {
    const double gj = u.tail(rows - j).dot(u.head(rows - j)) / T;
    lrv += 2.0 * (1.0 - static_cast<double>(j) / (lags + 1.0)) * gj;
  }
  if (!(lrv > 0.0)) throw Error(ErrorKind::ZeroVariance, "long-run variance is not positive");
  const double lambda = std::sqrt(lrv);
  const double zt = std::sqrt(gamma0 / lrv) * tstat - 0.5 * (lrv - gamma0) / lambda * (T * se / s);
  return make_result(zt, mackinnon_p(zt, spec), lags);
}

double chi2_sf(double x, double df) {
  if (!(x > 0.0)) return 1.0;
  boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::cdf(boost::math::complement(dist, x));
}

double chi2_critical(double level, double df) {
  boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::quantile(boost::math::complement(dist, level));
}

double mackinnon_p(double tau, Deterministic spec) {
  // MacKinnon (1994) single-series response surfaces: p = Phi(poly(tau)).
  struct Surface {
    double tau_star, tau_min, tau_max;
    std::array<double, 3> small;
    std::array<double, 4> large;
  };
  static constexpr Surface kNone{-1.04, -19.04, std::numeric_limits<double>::infinity(),
                                 {0.6344, 1.2378, 3.2496e-2},
                                 {0.4797, 9.3557e-1, -0.6999e-1, 3.3066e-2}};
  static constexpr Surface kConst{-1.61, -18.83, 2.74,
                                  {2.1659, 1.4412, 3.8269e-2},
                                  {1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2}};
  static constexpr Surface kTrend{-2.89, -16.18, 0.7,
                                  {3.2512, 1.6047, 4.9588e-2},
                                  {2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2}};
  const Surface& s = spec == Deterministic::None ? kNone : spec == Deterministic::Constant ? kConst : kTrend;
  if (tau > s.tau_max) return 1.0;
  if (tau < s.tau_min) return 0.0;
  double z = 0.0;
  if (tau <= s.tau_star) {
    z = s.small[0] + tau * (s.small[1] + tau * s.small[2]);
  } else {
    z = s.large[0] + tau * (s.large[1] + tau * (s.large[2] + tau * s.large[3]));
  }
  static const boost::math::normal_distribution<double> normal;
  return boost::math::cdf(normal, z);
}

double unit_root_critical_value(double level, Deterministic spec, std::size_t n) {
  // Fuller's finite-sample Dickey-Fuller tau table; columns 1%, 5%, 10%.
  static constexpr std::array<std::size_t, 6> kSizes = {25, 50, 100, 250, 500, 0};
  static constexpr double kNone[6][3] = {{-2.66, -1.95, -1.60}, {-2.62, -1.95, -1.61},
                                         {-2.60, -1.95, -1.61}, {-2.58, -1.95, -1.62},
                                         {-2.58, -1.95, -1.62}, {-2.58, -1.95, -1.62}};
  static constexpr double kConst[6][3] = {{-3.75, -3.00, -2.63}, {-3.58, -2.93, -2.60},
                                          {-3.51, -2.89, -2.58}, {-3.46, -2.88, -2.57},
                                          {-3.44, -2.87, -2.57}, {-3.43, -2.86, -2.57}};
  static constexpr double kTrend[6][3] = {{-4.38, -3.60, -3.24}, {-4.15, -3.50, -3.18},
                                          {-4.04, -3.45, -3.15}, {-3.99, -3.43, -3.13},
                                          {-3.98, -3.42, -3.13}, {-3.96, -3.41, -3.12}};
  int col = -1;
  if (level == 0.01) col = 0;
  if (level == 0.05) col = 1;
  if (level == 0.10) col = 2;
  if (col < 0) throw Error(ErrorKind::InvalidParams, "critical values tabulated at 1%, 5% and 10% only");
  std::size_t row = 0;
  for (std::size_t i = 0; i + 1 < kSizes.size(); ++i) {
    if (n >= kSizes[i]) row = i;
  }
  // Finite n reads at most the T=500 row; the last row is the asymptotic limit.
  const auto& table = spec == Deterministic::None ? kNone : spec == Deterministic::Constant ? kConst : kTrend;
  return table[row][col];
}

}  // namespace volspill
