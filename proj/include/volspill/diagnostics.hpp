#pragma once

#include <map>
#include <span>

namespace volspill {

/// Outcome of a hypothesis test. reject_at holds the decision at the 1%, 5%
/// and 10% levels and always agrees with p_value < level.
struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::map<double, bool> reject_at;
  int lags_or_df = 0;

  bool reject(double level) const { return p_value < level; }
};

/// Moments use 1/n central moments. kurtosis is raw (a normal sample gives
/// about 3). std_dev is the n-1 sample standard deviation.
struct SummaryStats {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;
  double min = 0.0;
  double std_dev = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

enum class Deterministic { None, Constant, Trend };

SummaryStats summary_stats(std::span<const double> x);

TestResult jarque_bera(std::span<const double> x);

/// n/6 · (S² + (K − 3)²/4) with raw kurtosis K.
double jarque_bera_statistic(std::size_t n, double skewness, double kurtosis);

/// Ljung-Box Q over `lags` autocorrelations (biased 1/n estimator). With
/// squared=true the series is centered and squared first.
TestResult ljung_box(std::span<const double> x, int lags, bool squared = false);

/// ARCH LM test: n_eff·R² of x²_t on a constant and `lags` own lags, after
/// centering x.
TestResult arch_lm(std::span<const double> x, int lags);

struct AdfResult : TestResult {
  int selected_lag = 0;
};

/// Augmented Dickey-Fuller t-test with AIC lag selection over 0..max_lag.
AdfResult adf_test(std::span<const double> x, int max_lag, Deterministic spec = Deterministic::Constant);

/// Phillips-Perron Z_t with a Bartlett-kernel long-run variance. bandwidth < 0
/// selects floor(4·(n/100)^{2/9}).
TestResult pp_test(std::span<const double> x, Deterministic spec = Deterministic::Constant,
                   int bandwidth = -1);

/// Bandwidth rule used by pp_test.
int pp_default_bandwidth(std::size_t n);

/// Upper-tail chi-square probability and critical value.
double chi2_sf(double x, double df);
double chi2_critical(double level, double df);

/// MacKinnon response-surface p-value for a single-series Dickey-Fuller tau.
double mackinnon_p(double tau, Deterministic spec);

/// Finite-sample Dickey-Fuller critical value (level in {0.01, 0.05, 0.10}),
/// read at the largest tabulated sample size <= n.
double unit_root_critical_value(double level, Deterministic spec, std::size_t n);

}  // namespace volspill
