#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "volspill/optim.hpp"

namespace volspill {

/// GJR-GARCH(p, o, q) on |ε|^δ. o = 0 gives plain GARCH(p, q).
struct GarchSpec {
  int p = 1;
  int o = 0;
  int q = 1;
  int delta = 2;

  static GarchSpec garch11() { return {1, 0, 1, 2}; }
  static GarchSpec gjr111() { return {1, 1, 1, 2}; }
  int num_params() const { return 1 + p + o + q; }
};

struct GarchParams {
  double omega = 0.0;
  Eigen::VectorXd alpha;
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;

  /// [ω, α_1..α_p, γ_1..γ_o, β_1..β_q]
  Eigen::VectorXd pack() const;
  static GarchParams unpack(const GarchSpec& spec, const Eigen::VectorXd& v);
};

/// Σα + ½Σγ + Σβ.
double persistence(const GarchParams& params);

enum class VarianceInit {
  SampleVariance,  // pre-sample ε² and σ² set to the sample variance of ε
  Fixed,           // pre-sample values set to FilterInit::value
  Backcast,        // exponentially weighted (λ = 0.7) mean of the first ε²
  History,         // explicit pre-sample ε and σ² (most recent last)
};

/// Pre-sample state of the recursion. Every in-sample σ²_t, including the
/// first, comes from the recursion; only lagged values before t = 0 are set.
struct FilterInit {
  VarianceInit mode = VarianceInit::SampleVariance;
  double value = 0.0;
  std::vector<double> eps_history;
  std::vector<double> sigma2_history;

  static FilterInit fixed(double v) { return {VarianceInit::Fixed, v, {}, {}}; }
};

/// Conditional-variance path σ²_t, length T. For δ = 1 the recursion runs on
/// σ_t and the squared path is returned. The asymmetric indicator is 1 iff the
/// lagged residual is strictly negative. Throws InvalidParams.
Eigen::VectorXd garch_filter(std::span<const double> eps, const GarchParams& params,
                             const GarchSpec& spec, const FilterInit& init = {});

/// Gaussian quasi log-likelihood -½Σ(ln 2π + ln σ²_t + ε²_t/σ²_t) for δ = 2.
/// When grad is non-null it receives the analytic gradient with respect to
/// the packed parameters.
double garch_loglik(std::span<const double> eps, const GarchParams& params, const GarchSpec& spec,
                    const FilterInit& init = {}, Eigen::VectorXd* grad = nullptr);

struct UnivariateFit {
  GarchSpec spec;
  GarchParams params;
  Eigen::VectorXd residuals;  // ε
  Eigen::VectorXd sigma2;
  Eigen::VectorXd std_residuals;
  double loglik = 0.0;
  double persistence = 0.0;
  bool stationary = true;
  Eigen::VectorXd std_errors;  // outer product of gradients, packed order
  optim::Status status = optim::Status::Converged;
  double grad_norm = 0.0;
  int iterations = 0;

  bool converged() const { return status == optim::Status::Converged || status == optim::Status::SmallProgress; }
};

struct GarchFitOptions {
  FilterInit init;
  std::vector<double> start_persistence{0.90, 0.95, 0.98};
  optim::Options optimizer{};
};

/// Gaussian QMLE for δ = 2 over a transformed space that keeps ω > 0, α ≥ 0,
/// α+γ ≥ 0, β ≥ 0 and persistence < 1. Restarts from each start persistence
/// (variance targeted) and keeps the best. Throws SampleTooShort (T < 250),
/// ZeroVariance and InvalidParams; non-convergence is reported in status.
UnivariateFit fit_garch(std::span<const double> eps, const GarchSpec& spec, const GarchFitOptions& options = {});

/// ξ_t = ε_t / σ_t.
Eigen::VectorXd standardized_residuals(const UnivariateFit& fit);

}  // namespace volspill
