#include "volspill/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "volspill/errors.hpp"

namespace volspill {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kInf = std::numeric_limits<double>::infinity();

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Row-major copy of ξ for tight loops.
struct Flat {
  Eigen::Index T = 0;
  Eigen::Index k = 0;
  std::vector<double> xi;
  std::vector<double> neg;
  std::vector<double> sq;  // ξ'ξ per row

  explicit Flat(const Eigen::MatrixXd& m) : T(m.rows()), k(m.cols()) {
    xi.resize(static_cast<std::size_t>(T * k));
    neg.resize(xi.size());
    sq.assign(static_cast<std::size_t>(T), 0.0);
    for (Eigen::Index t = 0; t < T; ++t) {
      for (Eigen::Index i = 0; i < k; ++i) {
        const double v = m(t, i);
        xi[static_cast<std::size_t>(t * k + i)] = v;
        neg[static_cast<std::size_t>(t * k + i)] = std::min(v, 0.0);
        sq[static_cast<std::size_t>(t)] += v * v;
      }
    }
  }
  const double* row(Eigen::Index t) const { return xi.data() + t * k; }
  const double* nrow(Eigen::Index t) const { return neg.data() + t * k; }
};

// ln|R| + ξ'R⁻¹ξ for R = correlation form of Q. NaN when R is not PD.
double corr_term(const double* Q, const double* x, Eigen::Index k, std::vector<double>& L, std::vector<double>& y) {
  L.resize(static_cast<std::size_t>(k * k));
  y.resize(static_cast<std::size_t>(k));
  if (k == 2) {
    const double d = Q[0] * Q[3];
    if (!(Q[0] > 0.0) || !(Q[3] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double r = Q[1] / std::sqrt(d);
    const double det = 1.0 - r * r;
    if (!(det > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::log(det) + (x[0] * x[0] - 2.0 * r * x[0] * x[1] + x[1] * x[1]) / det;
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(Q[i * k + i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  }
  double logdet = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double sj = std::sqrt(Q[j * k + j]);
    double diag = 1.0;
    for (Eigen::Index m = 0; m < j; ++m) diag -= L[static_cast<std::size_t>(j * k + m)] * L[static_cast<std::size_t>(j * k + m)];
    if (!(diag > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double ljj = std::sqrt(diag);
    L[static_cast<std::size_t>(j * k + j)] = ljj;
    logdet += 2.0 * std::log(ljj);
    for (Eigen::Index i = j + 1; i < k; ++i) {
      double v = Q[i * k + j] / (std::sqrt(Q[i * k + i]) * sj);
      for (Eigen::Index m = 0; m < j; ++m) v -= L[static_cast<std::size_t>(i * k + m)] * L[static_cast<std::size_t>(j * k + m)];
      L[static_cast<std::size_t>(i * k + j)] = v / ljj;
    }
  }
  double quad = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    double v = x[i];
    for (Eigen::Index m = 0; m < i; ++m) v -= L[static_cast<std::size_t>(i * k + m)] * y[static_cast<std::size_t>(m)];
    y[static_cast<std::size_t>(i)] = v / L[static_cast<std::size_t>(i * k + i)];
    quad += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
  }
  return logdet + quad;
}

std::vector<double> flatten(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
  }
  return out;
}

// Scalar DCC(P, Q) recursion into a flat T·k·k buffer.
void scalar_recursion(const Flat& f, const DccParams& p, const std::vector<double>& qbar,
                      const std::vector<double>& q1, std::vector<double>& Q) {
  const Eigen::Index k = f.k, kk = k * k;
  Q.resize(static_cast<std::size_t>(f.T * kk));
  const double c = 1.0 - p.alpha.sum() - p.beta.sum();
  std::copy(q1.begin(), q1.end(), Q.begin());
  for (Eigen::Index t = 1; t < f.T; ++t) {
    double* qt = Q.data() + t * kk;
    for (Eigen::Index m = 0; m < kk; ++m) qt[m] = c * qbar[static_cast<std::size_t>(m)];
    for (Eigen::Index j = 1; j <= p.alpha.size(); ++j) {
      const double a = p.alpha[j - 1];
      if (t - j >= 0) {
        const double* x = f.row(t - j);
        for (Eigen::Index r = 0; r < k; ++r) {
          for (Eigen::Index s = 0; s < k; ++s) qt[r * k + s] += a * x[r] * x[s];
        }
      } else {
        for (Eigen::Index m = 0; m < kk; ++m) qt[m] += a * qbar[static_cast<std::size_t>(m)];
      }
    }
    for (Eigen::Index j = 1; j <= p.beta.size(); ++j) {
      const double b = p.beta[j - 1];
      const double* prev = t - j >= 0 ? Q.data() + (t - j) * kk : qbar.data();
      for (Eigen::Index m = 0; m < kk; ++m) qt[m] += b * prev[m];
    }
  }
}

// Hadamard-form G-DCC/AG-DCC recursion into a flat buffer. Returns false when
// the intercept is not positive definite.
bool agdcc_recursion(const Flat& f, const AgdccParams& p, const Eigen::MatrixXd& Qbar, const Eigen::MatrixXd& Nbar,
                     const std::vector<double>& q1, std::vector<double>& Q) {
  const Eigen::Index k = f.k, kk = k * k;
  const bool asym = p.g.size() == k;
  Eigen::MatrixXd C = Qbar.array() * (1.0 - (p.a * p.a.transpose()).array() - (p.b * p.b.transpose()).array());
  if (asym) C.array() -= (p.g * p.g.transpose()).array() * Nbar.array();
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() != Eigen::Success) return false;
  const std::vector<double> cf = flatten(C);

  Q.resize(static_cast<std::size_t>(f.T * kk));
  std::copy(q1.begin(), q1.end(), Q.begin());
  for (Eigen::Index t = 1; t < f.T; ++t) {
    double* qt = Q.data() + t * kk;
    const double* qp = Q.data() + (t - 1) * kk;
    const double* x = f.row(t - 1);
    const double* n = f.nrow(t - 1);
    for (Eigen::Index r = 0; r < k; ++r) {
      for (Eigen::Index s = 0; s < k; ++s) {
        const Eigen::Index m = r * k + s;
        double v = cf[static_cast<std::size_t>(m)] + p.a[r] * p.a[s] * x[r] * x[s] + p.b[r] * p.b[s] * qp[m];
        if (asym) v += p.g[r] * p.g[s] * n[r] * n[s];
        qt[m] = v;
      }
    }
  }
  return true;
}

// Σ_t (ln|R_t| + ξ'R⁻¹ξ − ξ'ξ); optionally per-observation terms. +inf on failure.
double corr_objective(const Flat& f, const std::vector<double>& Q, std::vector<double>* terms) {
  const Eigen::Index kk = f.k * f.k;
  std::vector<double> L, y;
  double total = 0.0;
  if (terms) terms->resize(static_cast<std::size_t>(f.T));
  for (Eigen::Index t = 0; t < f.T; ++t) {
    const double v = corr_term(Q.data() + t * kk, f.row(t), f.k, L, y) - f.sq[static_cast<std::size_t>(t)];
    if (!std::isfinite(v)) return kInf;
    total += v;
    if (terms) (*terms)[static_cast<std::size_t>(t)] = v;
  }
  return total;
}

CorrPaths to_paths(const std::vector<double>& Q, Eigen::Index T, Eigen::Index k) {
  CorrPaths out;
  out.Q.reserve(static_cast<std::size_t>(T));
  out.R.reserve(static_cast<std::size_t>(T));
  const Eigen::Index kk = k * k;
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::MatrixXd q(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
      for (Eigen::Index s = 0; s < k; ++s) q(r, s) = Q[static_cast<std::size_t>(t * kk + r * k + s)];
    }
    Eigen::MatrixXd R(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
      for (Eigen::Index s = 0; s < k; ++s) R(r, s) = r == s ? 1.0 : q(r, s) / std::sqrt(q(r, r) * q(s, s));
    }
    out.Q.push_back(std::move(q));
    out.R.push_back(std::move(R));
  }
  return out;
}

void validate_dcc(const DccParams& p) {
  bool ok = p.alpha.size() >= 1 && p.beta.size() >= 0;
  for (Eigen::Index i = 0; i < p.alpha.size(); ++i) ok = ok && p.alpha[i] >= 0.0 && std::isfinite(p.alpha[i]);
  for (Eigen::Index i = 0; i < p.beta.size(); ++i) ok = ok && p.beta[i] >= 0.0 && std::isfinite(p.beta[i]);
  ok = ok && p.alpha.sum() + p.beta.sum() < 1.0;
  if (!ok) throw Error(ErrorKind::InvalidParams, "DCC needs alpha, beta >= 0 and sum < 1");
}

std::vector<double> initial_q(const Eigen::MatrixXd& Qbar, const std::optional<Eigen::MatrixXd>& q1) {
  if (q1) {
    if (q1->rows() != Qbar.rows() || q1->cols() != Qbar.cols()) {
      throw Error(ErrorKind::InvalidParams, "Q_1 has the wrong dimension");
    }
    return flatten(*q1);
  }
  return flatten(Qbar);
}

// Slots → softmax logits (last slot is the reference).
Eigen::VectorXd logits_from(const Eigen::VectorXd& slot) {
  const Eigen::Index m = slot.size();
  Eigen::VectorXd u(m - 1);
  for (Eigen::Index n = 0; n + 1 < m; ++n) u[n] = std::log(slot[n] / slot[m - 1]);
  return u;
}

Eigen::VectorXd softmax_with_ref(const Eigen::VectorXd& logits) {
  Eigen::VectorXd z(logits.size() + 1);
  z << logits, 0.0;
  z.array() -= z.maxCoeff();
  Eigen::VectorXd w = z.array().exp().matrix();
  return w / w.sum();
}

double safe_logit(double s) {
  s = std::clamp(s, 1e-15, 1.0 - 1e-15);
  return std::log(s / (1.0 - s));
}

DccParams dcc_from_u(const Eigen::VectorXd& u, int P, int Qn) {
  const double s = logistic(u[0]);
  const Eigen::VectorXd w = softmax_with_ref(u.tail(u.size() - 1));
  DccParams p;
  p.alpha = s * w.head(P);
  p.beta = s * w.tail(Qn);
  return p;
}

Eigen::VectorXd u_from_dcc(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta) {
  Eigen::VectorXd slot(alpha.size() + beta.size());
  slot << alpha, beta;
  Eigen::VectorXd u(slot.size());
  u[0] = safe_logit(slot.sum());
  u.tail(slot.size() - 1) = logits_from(slot);
  return u;
}

double kappa_of(const Eigen::MatrixXd& Qbar, const Eigen::MatrixXd& Nbar) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Qbar);
  const Eigen::MatrixXd inv_sqrt = es.operatorInverseSqrt();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(inv_sqrt * Nbar * inv_sqrt, Eigen::EigenvaluesOnly);
  return std::max(es2.eigenvalues().maxCoeff(), 1e-12);
}

AgdccParams agdcc_from_u(const Eigen::VectorXd& u, Eigen::Index k, bool asym, double kappa) {
  const Eigen::Index per = asym ? 3 : 2;
  AgdccParams p;
  p.a.resize(k);
  p.b.resize(k);
  if (asym) p.g.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto ui = u.segment(i * per, per);
    const double s = logistic(ui[0]);
    const Eigen::VectorXd w = softmax_with_ref(ui.tail(per - 1));
    p.a[i] = std::sqrt(s * w[0]);
    p.b[i] = std::sqrt(s * w[1]);
    if (asym) p.g[i] = std::sqrt(s * w[2] / kappa);
  }
  return p;
}

Eigen::VectorXd u_from_agdcc(const Eigen::VectorXd& a2, const Eigen::VectorXd& b2, const Eigen::VectorXd& kg2) {
  const bool asym = kg2.size() > 0;
  const Eigen::Index k = a2.size(), per = asym ? 3 : 2;
  Eigen::VectorXd u(k * per);
  for (Eigen::Index i = 0; i < k; ++i) {
    Eigen::VectorXd slot(per);
    if (asym) {
      slot << std::max(a2[i], 1e-14), std::max(b2[i], 1e-14), std::max(kg2[i], 1e-14);
    } else {
      slot << std::max(a2[i], 1e-14), std::max(b2[i], 1e-14);
    }
    u[i * per] = safe_logit(slot.sum());
    u.segment(i * per + 1, per - 1) = logits_from(slot);
  }
  return u;
}

// Screens every start with a short run, then continues the best to convergence.
optim::Result multi_start(const optim::Objective& obj, const std::vector<Eigen::VectorXd>& starts,
                          const optim::Options& options) {
  optim::Options screen = options;
  screen.max_iterations = std::min(options.max_iterations, 40);
  optim::Result best;
  best.value = kInf;
  for (const auto& u0 : starts) {
    if (!std::isfinite(obj(u0, nullptr))) continue;
    optim::Result r = optim::minimize_bfgs(obj, u0, screen);
    if (std::isfinite(r.value) && r.value < best.value) best = std::move(r);
  }
  if (!std::isfinite(best.value) || best.converged()) return best;
  optim::Options rest = options;
  rest.max_iterations = std::max(1, options.max_iterations - best.iterations);
  optim::Result r = optim::minimize_bfgs(obj, best.x, rest);
  r.iterations += best.iterations;
  return std::isfinite(r.value) && r.value <= best.value ? r : best;
}

}  // namespace

StdResidualPanel StdResidualPanel::select(const std::vector<Eigen::Index>& columns) const {
  StdResidualPanel out;
  out.dates = dates;
  out.xi.resize(xi.rows(), static_cast<Eigen::Index>(columns.size()));
  if (sigma.size() > 0) out.sigma.resize(sigma.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto cc = static_cast<Eigen::Index>(c);
    out.xi.col(cc) = xi.col(columns[c]);
    if (sigma.size() > 0) out.sigma.col(cc) = sigma.col(columns[c]);
    if (!assets.empty()) out.assets.push_back(assets[static_cast<std::size_t>(columns[c])]);
  }
  return out;
}

StdResidualPanel make_panel(std::vector<Date> dates, std::vector<std::string> assets,
                            const std::vector<UnivariateFit>& fits) {
  if (fits.empty()) throw Error(ErrorKind::InvalidParams, "no univariate fits");
  const Eigen::Index T = fits.front().std_residuals.size();
  StdResidualPanel p;
  p.dates = std::move(dates);
  p.assets = std::move(assets);
  p.xi.resize(T, static_cast<Eigen::Index>(fits.size()));
  p.sigma.resize(T, static_cast<Eigen::Index>(fits.size()));
  for (std::size_t i = 0; i < fits.size(); ++i) {
    if (fits[i].std_residuals.size() != T) throw Error(ErrorKind::InvalidParams, "fits have different lengths");
    p.xi.col(static_cast<Eigen::Index>(i)) = fits[i].std_residuals;
    p.sigma.col(static_cast<Eigen::Index>(i)) = fits[i].sigma2.array().sqrt().matrix();
  }
  return p;
}

Eigen::MatrixXd unconditional_corr(const Eigen::MatrixXd& xi) {
  const Eigen::Index T = xi.rows(), k = xi.cols();
  if (T <= k) throw Error(ErrorKind::SampleTooShort, "unconditional correlation needs T > k");
  const Eigen::RowVectorXd mean = xi.colwise().mean();
  const Eigen::MatrixXd c = xi.rowwise() - mean;
  Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(T);
  Eigen::VectorXd sd = cov.diagonal().array().sqrt();
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(sd[i] > 0.0)) throw Error(ErrorKind::ZeroVariance, "column " + std::to_string(i) + " has zero variance");
  }
  Eigen::MatrixXd R = sd.asDiagonal().inverse() * cov * sd.asDiagonal().inverse();
  for (Eigen::Index i = 0; i < k; ++i) {
    R(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = std::clamp(0.5 * (R(i, j) + R(j, i)), -1.0, 1.0);
      R(i, j) = R(j, i) = v;
    }
  }
  return R;
}

Eigen::MatrixXd negative_outer_mean(const Eigen::MatrixXd& xi) {
  const Eigen::MatrixXd n = xi.cwiseMin(0.0);
  return n.transpose() * n / static_cast<double>(xi.rows());
}

CccFit fit_ccc(const StdResidualPanel& panel) {
  CccFit fit;
  fit.R = unconditional_corr(panel.xi);
  const MatrixPath path(static_cast<std::size_t>(panel.rows()), fit.R);
  fit.loglik = dcc_loglik(panel.xi, path, panel.sigma);
  fit.corr_loglik = correlation_loglik(panel.xi, path);
  return fit;
}

CorrPaths dcc_filter(const Eigen::MatrixXd& xi, const DccParams& params, const Eigen::MatrixXd& Qbar,
                     const std::optional<Eigen::MatrixXd>& q1) {
  validate_dcc(params);
  if (Qbar.rows() != xi.cols() || Qbar.cols() != xi.cols()) throw Error(ErrorKind::InvalidParams, "Qbar dimension");
  const Flat f(xi);
  std::vector<double> Q;
  scalar_recursion(f, params, flatten(Qbar), initial_q(Qbar, q1), Q);
  return to_paths(Q, f.T, f.k);
}

Eigen::MatrixXd agdcc_step_direct(const Eigen::MatrixXd& Qbar, const Eigen::MatrixXd& Nbar, const AgdccParams& p,
                                  const Eigen::VectorXd& xi_prev, const Eigen::MatrixXd& Q_prev) {
  const Eigen::MatrixXd A = p.a.asDiagonal();
  const Eigen::MatrixXd B = p.b.asDiagonal();
  const Eigen::Index k = Qbar.rows();
  const Eigen::MatrixXd G = p.g.size() == k ? Eigen::MatrixXd(p.g.asDiagonal()) : Eigen::MatrixXd::Zero(k, k);
  const Eigen::VectorXd n = xi_prev.cwiseMin(0.0);
  return (Qbar - A.transpose() * Qbar * A - B.transpose() * Qbar * B - G.transpose() * Nbar * G) +
         A.transpose() * xi_prev * xi_prev.transpose() * A + B.transpose() * Q_prev * B +
         G.transpose() * n * n.transpose() * G;
}

Eigen::MatrixXd agdcc_step_rearranged(const Eigen::MatrixXd& Qbar, const Eigen::MatrixXd& Nbar, const AgdccParams& p,
                                      const Eigen::VectorXd& xi_prev, const Eigen::MatrixXd& Q_prev) {
  const Eigen::Index k = Qbar.rows();
  const Eigen::ArrayXXd aa = p.a * p.a.transpose();
  const Eigen::ArrayXXd bb = p.b * p.b.transpose();
  const Eigen::VectorXd n = xi_prev.cwiseMin(0.0);
  Eigen::ArrayXXd out = (1.0 - aa - bb) * Qbar.array() + aa * (xi_prev * xi_prev.transpose()).array() +
                        bb * Q_prev.array();
  if (p.g.size() == k) {
    const Eigen::ArrayXXd gg = p.g * p.g.transpose();
    out += gg * ((n * n.transpose()).array() - Nbar.array());
  }
  return out.matrix();
}

CorrPaths agdcc_filter(const Eigen::MatrixXd& xi, const AgdccParams& params, const Eigen::MatrixXd& Qbar,
                       const Eigen::MatrixXd& Nbar, const std::optional<Eigen::MatrixXd>& q1) {
  const Eigen::Index k = xi.cols();
  if (params.a.size() != k || params.b.size() != k || (params.g.size() != 0 && params.g.size() != k)) {
    throw Error(ErrorKind::InvalidParams, "AG-DCC loadings must have one entry per asset");
  }
  if ((params.a.array() < 0.0).any() || (params.b.array() < 0.0).any() ||
      (params.g.size() > 0 && (params.g.array() < 0.0).any())) {
    throw Error(ErrorKind::InvalidParams, "AG-DCC loadings must be non-negative");
  }
  const Flat f(xi);
  std::vector<double> Q;
  if (!agdcc_recursion(f, params, Qbar, Nbar, initial_q(Qbar, q1), Q)) {
    throw Error(ErrorKind::InterceptNotPSD, "AG-DCC intercept matrix is not positive definite");
  }
  return to_paths(Q, f.T, f.k);
}

double dcc_loglik(const Eigen::MatrixXd& xi, const MatrixPath& R_path, const Eigen::MatrixXd& sigma) {
  const Eigen::Index T = xi.rows(), k = xi.cols();
  if (static_cast<Eigen::Index>(R_path.size()) != T) throw Error(ErrorKind::InvalidParams, "R path length mismatch");
  const bool with_d = sigma.size() > 0;
  if (with_d && (sigma.rows() != T || sigma.cols() != k)) throw Error(ErrorKind::InvalidParams, "sigma shape mismatch");
  double ll = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::LLT<Eigen::MatrixXd> llt(R_path[static_cast<std::size_t>(t)]);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::NonPositiveDefiniteR, "R_t is not positive definite at t=" + std::to_string(t + 1));
    }
    const Eigen::VectorXd x = xi.row(t).transpose();
    const double logdet_r = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double quad = x.dot(llt.solve(x));
    const double logdet_d = with_d ? sigma.row(t).array().log().sum() : 0.0;
    ll += -0.5 * (static_cast<double>(k) * kLog2Pi + 2.0 * logdet_d + logdet_r + quad);
  }
  return ll;
}

double correlation_loglik(const Eigen::MatrixXd& xi, const MatrixPath& R_path) {
  const Eigen::Index T = xi.rows();
  if (static_cast<Eigen::Index>(R_path.size()) != T) throw Error(ErrorKind::InvalidParams, "R path length mismatch");
  double ll = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::LLT<Eigen::MatrixXd> llt(R_path[static_cast<std::size_t>(t)]);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::NonPositiveDefiniteR, "R_t is not positive definite at t=" + std::to_string(t + 1));
    }
    const Eigen::VectorXd x = xi.row(t).transpose();
    ll += -0.5 * (2.0 * llt.matrixLLT().diagonal().array().log().sum() + x.dot(llt.solve(x)) - x.squaredNorm());
  }
  return ll;
}

MatrixPath assemble_covariance(const Eigen::MatrixXd& sigma, const MatrixPath& R_path) {
  if (static_cast<Eigen::Index>(R_path.size()) != sigma.rows()) {
    throw Error(ErrorKind::InvalidParams, "sigma and R paths are not aligned");
  }
  MatrixPath H;
  H.reserve(R_path.size());
  for (std::size_t t = 0; t < R_path.size(); ++t) {
    const auto d = sigma.row(static_cast<Eigen::Index>(t)).transpose().asDiagonal();
    Eigen::MatrixXd h = d * R_path[t] * d;
    h = 0.5 * (h + h.transpose());
    H.push_back(std::move(h));
  }
  return H;
}

DccFit fit_dcc(const StdResidualPanel& panel, int p, int q, const DccFitOptions& options) {
  if (p < 1 || q < 0) throw Error(ErrorKind::InvalidParams, "DCC orders need p >= 1, q >= 0");
  if (panel.rows() < 250) throw Error(ErrorKind::SampleTooShort, "DCC estimation needs T >= 250");
  const Flat f(panel.xi);
  const Eigen::MatrixXd Qbar = unconditional_corr(panel.xi);
  const std::vector<double> qbar = flatten(Qbar);
  const std::vector<double> q1 = initial_q(Qbar, options.q1);
  const double Td = static_cast<double>(f.T);

  auto value = [&](const Eigen::VectorXd& u) {
    if (!u.allFinite()) return kInf;
    const DccParams prm = dcc_from_u(u, p, q);
    std::vector<double> Q;
    scalar_recursion(f, prm, qbar, q1, Q);
    return 0.5 * corr_objective(f, Q, nullptr) / Td;
  };
  const optim::Objective objective = optim::with_numeric_gradient(value);

  struct Start {
    double a, b;
  };
  const std::vector<Start> starts = {{0.02, 0.95}, {0.05, 0.90}, {0.01, 0.60}, {1e-12, 1e-12}};
  std::vector<Eigen::VectorXd> u0;
  for (const Start& s : starts) {
    const Eigen::VectorXd alpha = Eigen::VectorXd::Constant(p, s.a / p);
    const Eigen::VectorXd beta = Eigen::VectorXd::Constant(q, q > 0 ? s.b / q : 0.0);
    u0.push_back(u_from_dcc(alpha, beta));
  }
  const optim::Result best = multi_start(objective, u0, options.optimizer);
  if (!std::isfinite(best.value)) throw Error(ErrorKind::NonConvergence, "no DCC start produced a finite likelihood");

  DccFit fit;
  fit.params = dcc_from_u(best.x, p, q);
  fit.Qbar = Qbar;
  CorrPaths paths = dcc_filter(panel.xi, fit.params, Qbar, options.q1);
  if (options.keep_q_path) fit.Q_path = std::move(paths.Q);
  fit.R_path = std::move(paths.R);
  fit.loglik = dcc_loglik(panel.xi, fit.R_path, panel.sigma);
  fit.corr_loglik = correlation_loglik(panel.xi, fit.R_path);
  fit.status = best.status;

  const double a = fit.alpha(), b = fit.beta();
  fit.boundary = a < 1e-4 || (q > 0 && b < 1e-4) || a + b > 1.0 - 1e-4;
  if (fit.boundary) fit.warnings.push_back("boundary solution");
  if (f.k > 10) fit.warnings.push_back("joint DCC with k > 10 is unreliable");

  // Outer product of per-observation scores in (α, β) space.
  const Eigen::Index np = p + q;
  Eigen::VectorXd theta(np);
  theta << fit.params.alpha, fit.params.beta;
  Eigen::MatrixXd scores(f.T, np);
  bool ok = true;
  for (Eigen::Index j = 0; j < np && ok; ++j) {
    const double h = 1e-6;
    auto terms_at = [&](double delta, std::vector<double>& terms) {
      Eigen::VectorXd th = theta;
      th[j] += delta;
      DccParams prm{th.head(p), th.tail(q)};
      if ((th.array() < 0.0).any() || th.sum() >= 1.0) return false;
      std::vector<double> Q;
      scalar_recursion(f, prm, qbar, q1, Q);
      return std::isfinite(corr_objective(f, Q, &terms));
    };
    std::vector<double> up, dn;
    double span = 2.0 * h;
    bool have_up = terms_at(h, up);
    bool have_dn = terms_at(-h, dn);
    if (!have_dn && have_up) {
      terms_at(0.0, dn);
      span = h;
    } else if (!have_up && have_dn) {
      terms_at(0.0, up);
      span = h;
    } else if (!have_up) {
      ok = false;
      break;
    }
    for (Eigen::Index t = 0; t < f.T; ++t) {
      scores(t, j) = -0.5 * (up[static_cast<std::size_t>(t)] - dn[static_cast<std::size_t>(t)]) / span;
    }
  }
  fit.std_errors = Eigen::VectorXd::Constant(np, std::numeric_limits<double>::quiet_NaN());
  if (ok) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(scores.transpose() * scores);
    if (lu.isInvertible()) {
      const Eigen::MatrixXd cov = lu.inverse();
      for (Eigen::Index j = 0; j < np; ++j) fit.std_errors[j] = std::sqrt(std::max(0.0, cov(j, j)));
    }
  }
  return fit;
}

AgdccFit fit_gdcc(const StdResidualPanel& panel, bool asymmetric, const DccFitOptions& options) {
  if (panel.rows() < 250) throw Error(ErrorKind::SampleTooShort, "G-DCC estimation needs T >= 250");
  const Flat f(panel.xi);
  const Eigen::Index k = f.k;
  const Eigen::MatrixXd Qbar = unconditional_corr(panel.xi);
  const Eigen::MatrixXd Nbar = negative_outer_mean(panel.xi);
  const std::vector<double> q1 = initial_q(Qbar, options.q1);
  const double Td = static_cast<double>(f.T);

  auto make_objective = [&](bool asym, double kappa) {
    return optim::with_numeric_gradient([&, asym, kappa](const Eigen::VectorXd& u) {
      if (!u.allFinite()) return kInf;
      const AgdccParams prm = agdcc_from_u(u, k, asym, kappa);
      std::vector<double> Q;
      if (!agdcc_recursion(f, prm, Qbar, Nbar, q1, Q)) return kInf;
      return 0.5 * corr_objective(f, Q, nullptr) / Td;
    });
  };

  auto run_starts = [&](const optim::Objective& obj, const std::vector<Eigen::VectorXd>& starts) {
    return multi_start(obj, starts, options.optimizer);
  };

  const std::vector<std::pair<double, double>> sym_starts = {{0.02, 0.95}, {0.05, 0.90}, {0.01, 0.60}};
  std::vector<Eigen::VectorXd> starts;
  for (auto [a2, b2] : sym_starts) {
    starts.push_back(u_from_agdcc(Eigen::VectorXd::Constant(k, a2), Eigen::VectorXd::Constant(k, b2), {}));
  }
  const optim::Result sym = run_starts(make_objective(false, 1.0), starts);
  if (!std::isfinite(sym.value)) {
    throw Error(ErrorKind::InterceptNotPSD, "no G-DCC start has a positive definite intercept");
  }

  AgdccFit fit;
  fit.asymmetric = asymmetric;
  fit.Qbar = Qbar;
  fit.Nbar = Nbar;
  optim::Result chosen = sym;
  double kappa = 1.0;
  if (asymmetric) {
    kappa = kappa_of(Qbar, Nbar);
    const AgdccParams sp = agdcc_from_u(sym.x, k, false, 1.0);
    const Eigen::VectorXd a2 = sp.a.array().square(), b2 = sp.b.array().square();
    std::vector<Eigen::VectorXd> astarts;
    astarts.push_back(u_from_agdcc(a2, b2, Eigen::VectorXd::Constant(k, 1e-14)));
    for (auto [s_a, s_b] : sym_starts) {
      astarts.push_back(u_from_agdcc(Eigen::VectorXd::Constant(k, s_a), Eigen::VectorXd::Constant(k, s_b - 0.02),
                                     Eigen::VectorXd::Constant(k, 0.02)));
    }
    const optim::Result asym = run_starts(make_objective(true, kappa), astarts);
    if (!std::isfinite(asym.value)) {
      throw Error(ErrorKind::InterceptNotPSD, "no AG-DCC start has a positive definite intercept");
    }
    chosen = asym;
  }
  fit.params = agdcc_from_u(chosen.x, k, asymmetric, kappa);
  fit.status = chosen.status;
  CorrPaths paths = agdcc_filter(panel.xi, fit.params, Qbar, Nbar, options.q1);
  if (options.keep_q_path) fit.Q_path = std::move(paths.Q);
  fit.R_path = std::move(paths.R);
  fit.loglik = dcc_loglik(panel.xi, fit.R_path, panel.sigma);
  fit.corr_loglik = correlation_loglik(panel.xi, fit.R_path);
  if (k > 10) fit.warnings.push_back("G-DCC with k > 10 is unreliable");
  return fit;
}

DccSummary summarize_dcc(const MatrixPath& R_path, const std::vector<Date>& dates,
                         std::pair<std::size_t, std::size_t> pair, const std::vector<CrisisWindow>& windows) {
  if (R_path.size() != dates.size()) throw Error(ErrorKind::InvalidParams, "R path and dates are not aligned");
  if (R_path.empty()) throw Error(ErrorKind::EmptyWindow, "empty correlation path");
  const auto [i, j] = pair;
  const auto k = static_cast<std::size_t>(R_path.front().rows());
  if (i >= k || j >= k) throw Error(ErrorKind::InvalidParams, "pair index out of range");

  auto summarize = [&](const std::string& label, auto in_window) {
    WindowSummary w;
    w.label = label;
    w.min = kInf;
    w.max = -kInf;
    double sum = 0.0;
    for (std::size_t t = 0; t < R_path.size(); ++t) {
      if (!in_window(dates[t])) continue;
      const double r = R_path[t](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      sum += r;
      w.min = std::min(w.min, r);
      w.max = std::max(w.max, r);
      ++w.count;
    }
    if (w.count == 0) throw Error(ErrorKind::EmptyWindow, "window '" + label + "' holds no observations");
    w.mean = std::clamp(sum / static_cast<double>(w.count), w.min, w.max);
    return w;
  };

  DccSummary out;
  out.i = i;
  out.j = j;
  out.windows.push_back(summarize("Total Sample", [](const Date&) { return true; }));
  for (const auto& win : windows) {
    out.windows.push_back(summarize(win.label, [&](const Date& d) { return !(d < win.start) && !(win.end < d); }));
  }
  return out;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace volspill
