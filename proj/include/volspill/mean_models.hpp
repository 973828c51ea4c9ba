#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "volspill/optim.hpp"
#include "volspill/parallel.hpp"
#include "volspill/timeseries.hpp"

namespace volspill {

enum class Criterion { Aic, Bic };

/// Residuals after mean filtering; same dates and length as the returns.
struct ResidualSeries {
  std::vector<Date> dates;
  std::vector<std::string> assets;
  Eigen::MatrixXd values;
};

struct ArmaSpec {
  int ar = 0;
  int ma = 0;
  bool include_constant = true;
};

inline constexpr int kDefaultMaxArmaOrder = 7;

/// x_t = c + Σ φ_i x_{t-i} + e_t + Σ θ_j e_{t-j}, pre-sample x and e set to 0.
struct ArmaFit {
  ArmaSpec spec;
  double constant = 0.0;
  Eigen::VectorXd ar;
  Eigen::VectorXd ma;
  Eigen::VectorXd residuals;
  double sigma2 = 0.0;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  bool stationary = true;  // AR polynomial roots outside the unit circle; reported only
  optim::Status status = optim::Status::Converged;
};

/// r_t = Φ_0 + Σ Φ_j r_{t-j} + ε_t by equation-wise least squares over all T
/// rows, lagged returns before the sample set to 0.
struct VarFit {
  int order = 0;
  Eigen::VectorXd intercept;
  std::vector<Eigen::MatrixXd> lags;  // Φ_1..Φ_p, each k×k
  Eigen::MatrixXd residuals;          // T×k
  Eigen::MatrixXd sigma;              // residual covariance, 1/T
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  bool stable = true;
};

VarFit fit_var(const Eigen::MatrixXd& returns, int p);
inline VarFit fit_var(const ReturnSeries& r, int p) { return fit_var(r.values, p); }

/// argmin over p in 0..p_max; ties go to the smaller order.
int select_var_order(const Eigen::MatrixXd& returns, int p_max, Criterion criterion);
inline int select_var_order(const ReturnSeries& r, int p_max, Criterion c) {
  return select_var_order(r.values, p_max, c);
}

/// Gaussian conditional-sum-of-squares fit. MA coefficients are kept invertible
/// by mapping unconstrained values through partial autocorrelations.
ArmaFit fit_arma(std::span<const double> x, const ArmaSpec& spec);

/// Fits every (p, q) with p <= max_ar, q <= max_ma and returns the best by
/// criterion; ties go to fewer parameters, then to smaller p. Candidates that
/// fail to fit are skipped.
ArmaFit select_arma(std::span<const double> x, int max_ar, int max_ma, Criterion criterion,
                    bool include_constant = true, Exec exec = Exec::Parallel);

/// Maps unconstrained values to coefficients of an invertible MA polynomial
/// 1 + θ_1 z + ... + θ_q z^q.
Eigen::VectorXd ma_from_unconstrained(const Eigen::VectorXd& u);

/// True iff every root of 1 - Σ φ_i z^i lies strictly outside the unit circle.
bool ar_is_stationary(const Eigen::VectorXd& phi);

ResidualSeries residuals_from_var(const ReturnSeries& r, const VarFit& fit);

}  // namespace volspill
