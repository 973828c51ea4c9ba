#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "volspill/garch.hpp"
#include "volspill/optim.hpp"
#include "volspill/timeseries.hpp"

namespace volspill {

/// Standardized residuals ξ (T×k). sigma optionally holds the conditional
/// standard deviations σ_{i,t} that produced them; when present, reported
/// log-likelihoods include the 2·ln|D_t| term.
struct StdResidualPanel {
  std::vector<Date> dates;
  std::vector<std::string> assets;
  Eigen::MatrixXd xi;
  Eigen::MatrixXd sigma;

  Eigen::Index rows() const { return xi.rows(); }
  Eigen::Index cols() const { return xi.cols(); }
  StdResidualPanel select(const std::vector<Eigen::Index>& columns) const;
};

/// Builds a panel from univariate fits that share one sample.
StdResidualPanel make_panel(std::vector<Date> dates, std::vector<std::string> assets,
                            const std::vector<UnivariateFit>& fits);

using MatrixPath = std::vector<Eigen::MatrixXd>;

struct CorrPaths {
  MatrixPath Q;
  MatrixPath R;
};

/// Pearson sample correlation of the columns of ξ (1/T). Throws ZeroVariance.
Eigen::MatrixXd unconditional_corr(const Eigen::MatrixXd& xi);

/// N̄ = T⁻¹ Σ n_t n_t' with n_t = min(ξ_t, 0) elementwise.
Eigen::MatrixXd negative_outer_mean(const Eigen::MatrixXd& xi);

struct CccFit {
  Eigen::MatrixXd R;
  double loglik = 0.0;
  double corr_loglik = 0.0;
};

CccFit fit_ccc(const StdResidualPanel& panel);

/// Scalar DCC(P, Q): α_1..α_P on lagged ξξ', β_1..β_Q on lagged Q.
struct DccParams {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;

  static DccParams scalar(double a, double b) {
    return {Eigen::VectorXd::Constant(1, a), Eigen::VectorXd::Constant(1, b)};
  }
};

/// Q_1 = Q̄ unless q1 is given; lagged values before the sample are Q̄ for both
/// ξξ' and Q. R_t = Q*⁻¹ Q_t Q*⁻¹. Throws InvalidParams unless α, β ≥ 0 and
/// Σα + Σβ < 1.
CorrPaths dcc_filter(const Eigen::MatrixXd& xi, const DccParams& params, const Eigen::MatrixXd& Qbar,
                     const std::optional<Eigen::MatrixXd>& q1 = std::nullopt);

/// Diagonal loadings of G-DCC / AG-DCC. g empty means the symmetric model.
struct AgdccParams {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd g;
};

/// One step of the asymmetric generalized recursion, written with explicit
/// diagonal matrix products:
/// Q_t = (Q̄ − AQ̄A − BQ̄B − GN̄G) + Aξξ'A + BQ_{t−1}B + Gnn'G.
Eigen::MatrixXd agdcc_step_direct(const Eigen::MatrixXd& Qbar, const Eigen::MatrixXd& Nbar, const AgdccParams& p,
                                  const Eigen::VectorXd& xi_prev, const Eigen::MatrixXd& Q_prev);

/// The same step in Hadamard form:
/// (11' − aa' − bb')∘Q̄ + aa'∘ξξ' + bb'∘Q_{t−1} + gg'∘(nn' − N̄).
Eigen::MatrixXd agdcc_step_rearranged(const Eigen::MatrixXd& Qbar, const Eigen::MatrixXd& Nbar, const AgdccParams& p,
                                      const Eigen::VectorXd& xi_prev, const Eigen::MatrixXd& Q_prev);

/// Filters the G-DCC/AG-DCC recursion; Q_1 = Q̄ unless q1 is given. Throws
/// InterceptNotPSD when the intercept matrix is not positive definite.
CorrPaths agdcc_filter(const Eigen::MatrixXd& xi, const AgdccParams& params, const Eigen::MatrixXd& Qbar,
                       const Eigen::MatrixXd& Nbar, const std::optional<Eigen::MatrixXd>& q1 = std::nullopt);

/// L = −½ Σ_t (k ln 2π + 2 ln|D_t| + ln|R_t| + ξ_t' R_t⁻¹ ξ_t). sigma may be
/// empty (D_t = I). Throws NonPositiveDefiniteR naming t.
double dcc_loglik(const Eigen::MatrixXd& xi, const MatrixPath& R_path, const Eigen::MatrixXd& sigma = {});

/// The part that depends on R: −½ Σ_t (ln|R_t| + ξ'R_t⁻¹ξ − ξ'ξ).
double correlation_loglik(const Eigen::MatrixXd& xi, const MatrixPath& R_path);

/// H_t = D_t R_t D_t.
MatrixPath assemble_covariance(const Eigen::MatrixXd& sigma, const MatrixPath& R_path);

struct DccFitOptions {
  std::optional<Eigen::MatrixXd> q1;
  bool keep_q_path = false;
  optim::Options optimizer{};
};

struct DccFit {
  DccParams params;
  Eigen::MatrixXd Qbar;
  MatrixPath Q_path;
  MatrixPath R_path;
  double loglik = 0.0;
  double corr_loglik = 0.0;
  Eigen::VectorXd std_errors;  // [α..., β...], outer product of gradients
  optim::Status status = optim::Status::Converged;
  bool boundary = false;
  std::vector<std::string> warnings;

  double alpha() const { return params.alpha.sum(); }
  double beta() const { return params.beta.sum(); }
};

/// Two-stage QMLE with correlation targeting (Q̄ = sample correlation of ξ).
/// Throws SampleTooShort (T < 250) and NonConvergence.
DccFit fit_dcc(const StdResidualPanel& panel, int p = 1, int q = 1, const DccFitOptions& options = {});

struct AgdccFit {
  AgdccParams params;
  bool asymmetric = false;
  Eigen::MatrixXd Qbar;
  Eigen::MatrixXd Nbar;
  MatrixPath Q_path;
  MatrixPath R_path;
  double loglik = 0.0;
  double corr_loglik = 0.0;
  optim::Status status = optim::Status::Converged;
  std::vector<std::string> warnings;
};

/// Diagonal G-DCC (asymmetric = false) or AG-DCC with a_i² + b_i² + κ g_i² < 1,
/// κ = max eigenvalue of Q̄^{-1/2} N̄ Q̄^{-1/2}. The asymmetric fit starts from
/// the symmetric optimum, so its log-likelihood is never lower.
AgdccFit fit_gdcc(const StdResidualPanel& panel, bool asymmetric, const DccFitOptions& options = {});

struct WindowSummary {
  std::string label;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

struct DccSummary {
  std::size_t i = 0;
  std::size_t j = 0;
  std::vector<WindowSummary> windows;  // first entry is the whole sample
};

/// Mean/min/max of ρ_{ij,t} over the whole sample and each window. Throws
/// EmptyWindow when a window holds no observation.
DccSummary summarize_dcc(const MatrixPath& R_path, const std::vector<Date>& dates, std::pair<std::size_t, std::size_t> pair,
                         const std::vector<CrisisWindow>& windows);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace volspill
