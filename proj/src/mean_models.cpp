#include "volspill/mean_models.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <Eigen/Eigenvalues>

#include "volspill/errors.hpp"

namespace volspill {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Columns [1, r_{t-1}', ..., r_{t-p}'] with zero pre-sample.
Eigen::MatrixXd var_design(const Eigen::MatrixXd& r, int p) {
  const Eigen::Index T = r.rows(), k = r.cols();
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(T, 1 + k * p);
  X.col(0).setOnes();
  for (int j = 1; j <= p; ++j) {
    if (T > j) X.block(j, 1 + (j - 1) * k, T - j, k) = r.topRows(T - j);
  }
  return X;
}

Eigen::MatrixXd companion(const std::vector<Eigen::MatrixXd>& lags) {
  const auto p = static_cast<Eigen::Index>(lags.size());
  const Eigen::Index k = lags.front().rows();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(k * p, k * p);
  for (Eigen::Index j = 0; j < p; ++j) C.block(0, j * k, k, k) = lags[static_cast<std::size_t>(j)];
  if (p > 1) C.block(k, 0, k * (p - 1), k * (p - 1)).setIdentity();
  return C;
}

// AR coefficients (1 - Σ φ_i z^i convention) from partial autocorrelations.
Eigen::VectorXd levinson_from_pacf(const Eigen::VectorXd& pacf) {
  const Eigen::Index q = pacf.size();
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd prev(q);
  for (Eigen::Index k = 0; k < q; ++k) {
    prev = phi;
    phi[k] = pacf[k];
    for (Eigen::Index j = 0; j < k; ++j) phi[j] = prev[j] - pacf[k] * prev[k - 1 - j];
  }
  return phi;
}

struct CssWork {
  std::span<const double> z;
  int p, q;
  bool constant;
};

// Residuals and (optionally) their derivatives with respect to
// natural parameters [c, φ, θ].
double css_objective(const CssWork& w, double c, const Eigen::VectorXd& phi, const Eigen::VectorXd& theta,
                     Eigen::VectorXd* e_out, Eigen::VectorXd* grad_natural) {
  const std::size_t T = w.z.size();
  const int np = (w.constant ? 1 : 0) + w.p + w.q;
  Eigen::VectorXd e(static_cast<Eigen::Index>(T));
  Eigen::MatrixXd de;
  if (grad_natural) de = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(T), np);
  double ss = 0.0;
  Eigen::VectorXd gacc = Eigen::VectorXd::Zero(np);
  for (std::size_t t = 0; t < T; ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    double v = w.z[t] - c;
    for (int i = 1; i <= w.p; ++i) {
      if (t >= static_cast<std::size_t>(i)) v -= phi[i - 1] * w.z[t - i];
    }
    for (int j = 1; j <= w.q; ++j) {
      if (t >= static_cast<std::size_t>(j)) v -= theta[j - 1] * e[ti - j];
    }
    e[ti] = v;
    ss += v * v;
    if (grad_natural) {
      int col = 0;
      if (w.constant) de(ti, col++) = -1.0;
      for (int i = 1; i <= w.p; ++i, ++col) {
        de(ti, col) = t >= static_cast<std::size_t>(i) ? -w.z[t - i] : 0.0;
      }
      for (int j = 1; j <= w.q; ++j, ++col) {
        de(ti, col) = t >= static_cast<std::size_t>(j) ? -e[ti - j] : 0.0;
      }
      for (int j = 1; j <= w.q; ++j) {
        if (t >= static_cast<std::size_t>(j)) de.row(ti) -= theta[j - 1] * de.row(ti - j);
      }
      gacc += v * de.row(ti).transpose();
    }
  }
  if (e_out) *e_out = std::move(e);
  if (grad_natural) *grad_natural = gacc / ss;  // d/dθ of ½ ln(SS/T)
  return 0.5 * std::log(ss / static_cast<double>(T));
}

}  // namespace

Eigen::VectorXd ma_from_unconstrained(const Eigen::VectorXd& u) {
  const Eigen::VectorXd pacf = u.array().tanh().matrix();
  return -levinson_from_pacf(pacf);
}

bool ar_is_stationary(const Eigen::VectorXd& phi) {
  if (phi.size() == 0) return true;
  std::vector<Eigen::MatrixXd> lags;
  for (Eigen::Index i = 0; i < phi.size(); ++i) lags.push_back(Eigen::MatrixXd::Constant(1, 1, phi[i]));
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion(lags), false);
  return es.eigenvalues().cwiseAbs().maxCoeff() < 1.0;
}

VarFit fit_var(const Eigen::MatrixXd& r, int p) {
  if (p < 0) throw Error(ErrorKind::InvalidParams, "VAR order must be >= 0");
  const Eigen::Index T = r.rows(), k = r.cols();
  if (T <= k * p + 10) throw Error(ErrorKind::SampleTooShort, "VAR needs T > k·p + 10");

  const Eigen::MatrixXd X = var_design(r, p);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) throw Error(ErrorKind::SingularDesign, "VAR design is rank deficient");
  const Eigen::MatrixXd B = qr.solve(r);  // (1+kp)×k

  VarFit fit;
  fit.order = p;
  fit.intercept = B.row(0).transpose();
  for (int j = 0; j < p; ++j) fit.lags.push_back(B.block(1 + j * k, 0, k, k).transpose());
  fit.residuals = r - X * B;
  fit.sigma = fit.residuals.transpose() * fit.residuals / static_cast<double>(T);

  Eigen::LLT<Eigen::MatrixXd> llt(fit.sigma);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::SingularDesign, "residual covariance is singular");
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double Td = static_cast<double>(T);
  const double nparams = static_cast<double>(k * k * p + k);
  fit.aic = logdet + 2.0 * nparams / Td;
  fit.bic = logdet + std::log(Td) * nparams / Td;
  fit.loglik = -0.5 * Td * (static_cast<double>(k) * kLog2Pi + logdet + static_cast<double>(k));
  if (p > 0) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion(fit.lags), false);
    fit.stable = es.eigenvalues().cwiseAbs().maxCoeff() < 1.0;
  }
  return fit;
}

int select_var_order(const Eigen::MatrixXd& r, int p_max, Criterion criterion) {
  if (p_max < 0) throw Error(ErrorKind::InvalidParams, "p_max must be >= 0");
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int p = 0; p <= p_max; ++p) {
    const VarFit fit = fit_var(r, p);
    const double v = criterion == Criterion::Aic ? fit.aic : fit.bic;
    if (v < best_value) {
      best_value = v;
      best = p;
    }
  }
  return best;
}

ArmaFit fit_arma(std::span<const double> x, const ArmaSpec& spec) {
  if (spec.ar < 0 || spec.ma < 0) throw Error(ErrorKind::InvalidParams, "ARMA orders must be >= 0");
  const std::size_t T = x.size();
  if (T <= 10u * static_cast<std::size_t>(spec.ar + spec.ma + 1)) {
    throw Error(ErrorKind::SampleTooShort, "ARMA needs T > 10·(p+q+1)");
  }
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(T);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(T);
  if (!(var > 0.0)) throw Error(ErrorKind::ZeroVariance, "series has zero variance");
  const double scale = std::sqrt(var);

  std::vector<double> z(T);
  for (std::size_t t = 0; t < T; ++t) z[t] = x[t] / scale;
  const CssWork work{z, spec.ar, spec.ma, spec.include_constant};
  const int nc = spec.include_constant ? 1 : 0;
  const int n = nc + spec.ar + spec.ma;

  // Start: least squares AR(p) on the padded design, MA at zero.
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  if (nc + spec.ar > 0) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(T), nc + spec.ar);
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(T));
    if (nc) X.col(0).setOnes();
    for (int i = 1; i <= spec.ar; ++i) {
      for (std::size_t t = static_cast<std::size_t>(i); t < T; ++t) {
        X(static_cast<Eigen::Index>(t), nc + i - 1) = z[t - i];
      }
    }
    x0.head(nc + spec.ar) = X.colPivHouseholderQr().solve(y);
  }

  auto unpack = [&](const Eigen::VectorXd& v, double& c, Eigen::VectorXd& phi, Eigen::VectorXd& u) {
    c = nc ? v[0] : 0.0;
    phi = v.segment(nc, spec.ar);
    u = v.tail(spec.ma);
  };

  const optim::Objective objective = [&](const Eigen::VectorXd& v, Eigen::VectorXd* grad) {
    double c;
    Eigen::VectorXd phi, u;
    unpack(v, c, phi, u);
    const Eigen::VectorXd theta = ma_from_unconstrained(u);
    Eigen::VectorXd gnat;
    const double f = css_objective(work, c, phi, theta, nullptr, grad ? &gnat : nullptr);
    if (grad) {
      grad->resize(n);
      grad->head(nc + spec.ar) = gnat.head(nc + spec.ar);
      if (spec.ma > 0) {
        // Chain rule through the PACF map; its Jacobian is cheap by differences.
        Eigen::MatrixXd J(spec.ma, spec.ma);
        Eigen::VectorXd up = u;
        for (int j = 0; j < spec.ma; ++j) {
          const double h = 1e-7 * std::max(1.0, std::abs(u[j]));
          up[j] = u[j] + h;
          const Eigen::VectorXd tp = ma_from_unconstrained(up);
          up[j] = u[j] - h;
          const Eigen::VectorXd tm = ma_from_unconstrained(up);
          up[j] = u[j];
          J.col(j) = (tp - tm) / (2.0 * h);
        }
        grad->tail(spec.ma) = J.transpose() * gnat.tail(spec.ma);
      }
    }
    return f;
  };

  optim::Options opts;
  opts.max_iterations = 1000;
  const optim::Result res = n > 0 ? optim::minimize_bfgs(objective, x0, opts) : optim::Result{};
  if (n > 0 && !std::isfinite(res.value)) {
    throw Error(ErrorKind::NonConvergence, "ARMA objective is not finite");
  }

  ArmaFit fit;
  fit.spec = spec;
  fit.status = n > 0 ? res.status : optim::Status::Converged;
  double c = 0.0;
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(0), u = Eigen::VectorXd::Zero(0);
  if (n > 0) unpack(res.x, c, phi, u);
  const Eigen::VectorXd theta = ma_from_unconstrained(u);
  if (spec.ma > 0 && u.cwiseAbs().maxCoeff() > 18.0) {
    throw Error(ErrorKind::NonInvertibleMA, "MA polynomial converged to the unit circle");
  }
  Eigen::VectorXd e;
  css_objective(work, c, phi, theta, &e, nullptr);

  fit.constant = c * scale;
  fit.ar = phi;
  fit.ma = theta;
  fit.residuals = e * scale;
  const double Td = static_cast<double>(T);
  fit.sigma2 = fit.residuals.squaredNorm() / Td;
  fit.loglik = -0.5 * Td * (kLog2Pi + std::log(fit.sigma2) + 1.0);
  const double k = static_cast<double>(n + 1);
  fit.aic = -2.0 * fit.loglik + 2.0 * k;
  fit.bic = -2.0 * fit.loglik + std::log(Td) * k;
  fit.stationary = ar_is_stationary(fit.ar);
  return fit;
}

ArmaFit select_arma(std::span<const double> x, int max_ar, int max_ma, Criterion criterion,
                    bool include_constant, Exec exec) {
  if (max_ar < 0 || max_ma < 0) throw Error(ErrorKind::InvalidParams, "maximum orders must be >= 0");
  const int nq = max_ma + 1;
  const int count = (max_ar + 1) * nq;
  std::vector<std::optional<ArmaFit>> fits(static_cast<std::size_t>(count));

  auto run = [&](int idx) {
    try {
      fits[static_cast<std::size_t>(idx)] = fit_arma(x, ArmaSpec{idx / nq, idx % nq, include_constant});
    } catch (const Error&) {
      // Skipped: order too large for the sample or the fit failed.
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (int idx = 0; idx < count; ++idx) run(idx);
  } else {
    for (int idx = 0; idx < count; ++idx) run(idx);
  }

  const ArmaFit* best = nullptr;
  for (const auto& f : fits) {
    if (!f) continue;
    if (!best) {
      best = &*f;
      continue;
    }
    const double v = criterion == Criterion::Aic ? f->aic : f->bic;
    const double b = criterion == Criterion::Aic ? best->aic : best->bic;
    const int size_f = f->spec.ar + f->spec.ma, size_b = best->spec.ar + best->spec.ma;
    if (v < b || (v == b && (size_f < size_b || (size_f == size_b && f->spec.ar < best->spec.ar)))) {
      best = &*f;
    }
  }
  if (!best) throw Error(ErrorKind::NonConvergence, "no ARMA candidate could be fitted");
  return *best;
}

ResidualSeries residuals_from_var(const ReturnSeries& r, const VarFit& fit) {
  return ResidualSeries{r.dates, r.assets, fit.residuals};
}

}  // namespace volspill
