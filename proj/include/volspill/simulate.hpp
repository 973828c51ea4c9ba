#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "volspill/correlation.hpp"
#include "volspill/garch.hpp"
#include "volspill/parallel.hpp"
#include "volspill/timeseries.hpp"

namespace volspill {

enum class CorrModel { None, Ccc, Dcc, Gdcc, Agdcc };

std::string_view to_string(CorrModel m) noexcept;

/// Unit-variance innovations. Skewed is Hansen's skewed t with tail ν and
/// skew λ ∈ (−1, 1).
struct ShockDist {
  enum class Kind { Gaussian, StudentT, Skewed };
  Kind kind = Kind::Gaussian;
  double nu = 8.0;
  double lambda = 0.0;
};

struct Dgp {
  std::vector<GarchSpec> specs;
  std::vector<GarchParams> params;
  CorrModel corr = CorrModel::None;
  Eigen::MatrixXd target;  // R for CCC, Q̄ for the dynamic models; empty means identity
  Eigen::MatrixXd nbar;    // N̄ for AG-DCC; empty means the Gaussian value implied by target
  DccParams dcc = DccParams::scalar(0.0, 0.0);
  AgdccParams agdcc;
  ShockDist shocks;
  std::uint64_t seed = 0;
  int T = 1000;
  int burn_in = 1000;

  std::size_t assets() const { return specs.size(); }
};

/// Throws InvalidDgp.
void validate(const Dgp& dgp);

/// E[n n'] for n = min(z, 0), z ~ N(0, R).
Eigen::MatrixXd gaussian_nbar(const Eigen::MatrixXd& R);

struct Simulation {
  ReturnSeries returns;        // ε_t on synthetic weekday dates
  Eigen::MatrixXd sigma2;      // true σ²_{i,t}
  Eigen::MatrixXd xi;          // true ξ_t = ε_t / σ_t
  MatrixPath R;                // true R_t; empty for None
  Eigen::MatrixXd q1;          // true Q at the first sample observation (dynamic models)
  std::vector<FilterInit> presample;  // per asset, for refiltering with History init
  std::string rng = "mt19937_64";
};

/// Deterministic in (dgp.seed, stream). Shocks are R_t^{1/2} z_t with the
/// symmetric square root; the first burn_in draws are discarded.
Simulation simulate(const Dgp& dgp, std::uint64_t stream = 0);

struct ParamRecovery {
  std::string name;
  double truth = 0.0;
  double mean = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  std::size_t count = 0;
};

struct RecoveryReport {
  std::vector<ParamRecovery> params;
  std::size_t replications = 0;
  std::size_t failures = 0;
  std::vector<std::vector<double>> estimates;  // per replication, NaN rows for failures
  std::vector<std::string> failure_reasons;
  std::string rng = "mt19937_64";
};

/// Fits the DGP's own model family to `replications` simulated samples (stream
/// r for replication r). Univariate fits use each asset's spec; the dynamic
/// correlation models add a second-stage fit. Failed or non-converged fits are
/// counted, not thrown. Throws InvalidDgp when replications < 10.
RecoveryReport recovery_study(const Dgp& dgp, std::size_t replications, Exec exec = Exec::Parallel);

}  // namespace volspill
