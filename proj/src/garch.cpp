#include "volspill/garch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "volspill/errors.hpp"

namespace volspill {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void validate_spec(const GarchSpec& spec) {
  if (spec.p < 1 || spec.o < 0 || spec.q < 0 || (spec.delta != 1 && spec.delta != 2)) {
    throw Error(ErrorKind::InvalidParams, "GARCH spec needs p >= 1, o >= 0, q >= 0, delta in {1,2}");
  }
}

void validate_params(const GarchParams& prm, const GarchSpec& spec) {
  if (prm.alpha.size() != spec.p || prm.gamma.size() != spec.o || prm.beta.size() != spec.q) {
    throw Error(ErrorKind::InvalidParams, "parameter vector sizes do not match the spec");
  }
  bool ok = prm.omega > 0.0 && std::isfinite(prm.omega);
  for (Eigen::Index i = 0; i < prm.alpha.size(); ++i) ok = ok && prm.alpha[i] >= 0.0;
  for (Eigen::Index j = 0; j < prm.gamma.size(); ++j) {
    const double a = j < prm.alpha.size() ? prm.alpha[j] : 0.0;
    ok = ok && a + prm.gamma[j] >= 0.0 && std::isfinite(prm.gamma[j]);
  }
  for (Eigen::Index k = 0; k < prm.beta.size(); ++k) ok = ok && prm.beta[k] >= 0.0;
  if (!ok) throw Error(ErrorKind::InvalidParams, "GARCH parameters violate sign constraints");
}

double sample_variance(std::span<const double> eps) {
  double m = 0.0;
  for (double e : eps) m += e;
  m /= static_cast<double>(eps.size());
  double v = 0.0;
  for (double e : eps) v += (e - m) * (e - m);
  return v / static_cast<double>(eps.size());
}

double backcast(std::span<const double> eps) {
  const std::size_t n = std::min<std::size_t>(75, eps.size());
  double w = 1.0, wsum = 0.0, acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    acc += w * eps[j] * eps[j];
    wsum += w;
    w *= 0.7;
  }
  return acc / wsum;
}

// Lagged inputs of the recursion over an extended index: positions [0, L)
// hold pre-sample values, position L + t holds in-sample t.
struct Lagged {
  int L = 0;
  std::vector<double> abs_pow;  // |ε|^δ
  std::vector<double> neg_pow;  // |ε|^δ · 1[ε < 0]
  std::vector<double> h;        // σ^δ, filled as the recursion runs
};

Lagged prepare(std::span<const double> eps, const GarchSpec& spec, const FilterInit& init) {
  Lagged lag;
  lag.L = std::max({spec.p, spec.o, spec.q});
  const std::size_t T = eps.size();
  const auto total = static_cast<std::size_t>(lag.L) + T;
  lag.abs_pow.assign(total, 0.0);
  lag.neg_pow.assign(total, 0.0);
  lag.h.assign(total, 0.0);
  const double d = spec.delta;
  auto powd = [&](double a) { return spec.delta == 2 ? a * a : a; };

  if (init.mode == VarianceInit::History) {
    const auto need_e = static_cast<std::size_t>(std::max(spec.p, spec.o));
    const auto need_s = static_cast<std::size_t>(spec.q);
    if (init.eps_history.size() < need_e || init.sigma2_history.size() < need_s) {
      throw Error(ErrorKind::InvalidParams, "pre-sample history shorter than the model orders");
    }
    for (int j = 1; j <= lag.L; ++j) {
      const auto pos = static_cast<std::size_t>(lag.L - j);
      if (static_cast<std::size_t>(j) <= init.eps_history.size()) {
        const double e = init.eps_history[init.eps_history.size() - j];
        lag.abs_pow[pos] = powd(std::abs(e));
        lag.neg_pow[pos] = e < 0.0 ? lag.abs_pow[pos] : 0.0;
      }
      if (static_cast<std::size_t>(j) <= init.sigma2_history.size()) {
        lag.h[pos] = std::pow(init.sigma2_history[init.sigma2_history.size() - j], d / 2.0);
      }
    }
  } else {
    double v = 0.0;
    switch (init.mode) {
      case VarianceInit::SampleVariance: v = sample_variance(eps); break;
      case VarianceInit::Fixed: v = init.value; break;
      case VarianceInit::Backcast: v = backcast(eps); break;
      case VarianceInit::History: break;
    }
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::InvalidParams, "initial variance must be positive");
    const double hv = std::pow(v, d / 2.0);
    for (int j = 0; j < lag.L; ++j) {
      lag.abs_pow[static_cast<std::size_t>(j)] = hv;
      lag.neg_pow[static_cast<std::size_t>(j)] = 0.5 * hv;
      lag.h[static_cast<std::size_t>(j)] = hv;
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t pos = static_cast<std::size_t>(lag.L) + t;
    lag.abs_pow[pos] = powd(std::abs(eps[t]));
    lag.neg_pow[pos] = eps[t] < 0.0 ? lag.abs_pow[pos] : 0.0;
  }
  return lag;
}

// Runs the recursion in place. Optionally accumulates log-likelihood,
// gradient and per-observation scores (δ = 2 only).
double run_recursion(std::span<const double> eps, const GarchParams& prm, const GarchSpec& spec, Lagged& lag,
                     Eigen::VectorXd* grad, Eigen::MatrixXd* scores) {
  const std::size_t T = eps.size();
  const auto L = static_cast<std::size_t>(lag.L);
  const int np = spec.num_params();
  const bool want_grad = grad || scores;
  std::vector<Eigen::VectorXd> dh;
  if (want_grad) {
    dh.assign(L + T, Eigen::VectorXd::Zero(np));
    if (grad) grad->setZero(np);
    if (scores) scores->resize(static_cast<Eigen::Index>(T), np);
  }
  double ll = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t pos = L + t;
    double h = prm.omega;
    for (int i = 1; i <= spec.p; ++i) h += prm.alpha[i - 1] * lag.abs_pow[pos - i];
    for (int j = 1; j <= spec.o; ++j) h += prm.gamma[j - 1] * lag.neg_pow[pos - j];
    for (int k = 1; k <= spec.q; ++k) h += prm.beta[k - 1] * lag.h[pos - k];
    lag.h[pos] = h;
    const double s2 = spec.delta == 2 ? h : h * h;
    if (!(s2 > 0.0) || !std::isfinite(s2)) return -std::numeric_limits<double>::infinity();
    const double e2 = eps[t] * eps[t];
    ll += -0.5 * (kLog2Pi + std::log(s2) + e2 / s2);
    if (want_grad) {
      Eigen::VectorXd& d = dh[pos];
      int c = 0;
      d[c++] = 1.0;
      for (int i = 1; i <= spec.p; ++i) d[c++] = lag.abs_pow[pos - i];
      for (int j = 1; j <= spec.o; ++j) d[c++] = lag.neg_pow[pos - j];
      for (int k = 1; k <= spec.q; ++k) d[c++] = lag.h[pos - k];
      for (int k = 1; k <= spec.q; ++k) d += prm.beta[k - 1] * dh[pos - k];
      const double w = -0.5 * (1.0 / s2 - e2 / (s2 * s2));
      if (grad) *grad += w * d;
      if (scores) scores->row(static_cast<Eigen::Index>(t)) = (w * d).transpose();
    }
  }
  return ll;
}

// Transformed-space map: u = [ln ω, logit(persistence), softmax logits].
struct Reparam {
  GarchSpec spec;
  Eigen::MatrixXd L;  // natural (excluding ω) = L · slots

  explicit Reparam(const GarchSpec& s) : spec(s) {
    const int nn = s.p + s.o + s.q;
    std::vector<Eigen::VectorXd> cols;
    auto col = [&]() { return Eigen::VectorXd::Zero(nn).eval(); };
    const int shared = std::min(s.p, s.o);
    for (int j = 0; j < std::max(s.p, s.o); ++j) {
      if (j < shared) {
        Eigen::VectorXd a = col();  // α/2
        a[j] = 2.0;
        a[s.p + j] = -2.0;
        cols.push_back(a);
        Eigen::VectorXd c = col();  // (α+γ)/2
        c[s.p + j] = 2.0;
        cols.push_back(c);
      } else if (j < s.p) {
        Eigen::VectorXd a = col();
        a[j] = 1.0;
        cols.push_back(a);
      } else {
        Eigen::VectorXd g = col();
        g[s.p + j] = 2.0;
        cols.push_back(g);
      }
    }
    for (int k = 0; k < s.q; ++k) {
      Eigen::VectorXd b = col();
      b[s.p + s.o + k] = 1.0;
      cols.push_back(b);
    }
    L.resize(nn, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) L.col(static_cast<Eigen::Index>(i)) = cols[i];
  }

  Eigen::Index slots() const { return L.cols(); }
  Eigen::Index size() const { return 1 + slots(); }  // ln ω, logit p, (slots-1) logits

  // Natural packed vector and its Jacobian with respect to u.
  Eigen::VectorXd to_natural(const Eigen::VectorXd& u, Eigen::MatrixXd* J = nullptr) const {
    const Eigen::Index m = slots();
    const double omega = std::exp(u[0]);
    const double pers = 1.0 / (1.0 + std::exp(-u[1]));
    Eigen::VectorXd logits = Eigen::VectorXd::Zero(m);
    logits.head(m - 1) = u.tail(m - 1);
    const double mx = logits.maxCoeff();
    Eigen::VectorXd w = (logits.array() - mx).exp().matrix();
    w /= w.sum();
    const Eigen::VectorXd slot = pers * w;
    Eigen::VectorXd nat(1 + L.rows());
    nat[0] = omega;
    nat.tail(L.rows()) = L * slot;
    if (J) {
      Eigen::MatrixXd ds(m, size() - 1);  // d slot / d [logit p, logits]
      ds.col(0) = w * pers * (1.0 - pers);
      for (Eigen::Index n = 0; n + 1 < m; ++n) {
        Eigen::VectorXd c = -pers * w * w[n];
        c[n] += pers * w[n];
        ds.col(n + 1) = c;
      }
      J->setZero(nat.size(), size());
      (*J)(0, 0) = omega;
      J->block(1, 1, L.rows(), size() - 1) = L * ds;
    }
    return nat;
  }

  Eigen::VectorXd from_slots(double omega, const Eigen::VectorXd& slot) const {
    Eigen::VectorXd u(size());
    const double pers = slot.sum();
    u[0] = std::log(omega);
    u[1] = std::log(pers / (1.0 - pers));
    const Eigen::Index m = slots();
    for (Eigen::Index n = 0; n + 1 < m; ++n) u[2 + n] = std::log(slot[n] / slot[m - 1]);
    return u;
  }
};

Eigen::VectorXd start_slots(const Reparam& rp, double target) {
  const GarchSpec& s = rp.spec;
  Eigen::VectorXd slot(rp.slots());
  const int groups = std::max(s.p, s.o);
  const double arch_budget = s.q > 0 ? 0.05 : 0.3;
  const double b = arch_budget / groups;
  Eigen::Index i = 0;
  for (int j = 0; j < groups; ++j) {
    if (j < std::min(s.p, s.o)) {
      slot[i++] = 0.3 * b;
      slot[i++] = 0.7 * b;
    } else {
      slot[i++] = b;
    }
  }
  for (int k = 0; k < s.q; ++k) slot[i++] = (target - arch_budget) / s.q;
  return slot;
}

FilterInit scaled_init(const FilterInit& init, double var) {
  FilterInit out = init;
  out.value = init.value / var;
  const double sd = std::sqrt(var);
  for (double& e : out.eps_history) e /= sd;
  for (double& v : out.sigma2_history) v /= var;
  return out;
}

}  // namespace

Eigen::VectorXd GarchParams::pack() const {
  Eigen::VectorXd v(1 + alpha.size() + gamma.size() + beta.size());
  v << omega, alpha, gamma, beta;
  return v;
}

GarchParams GarchParams::unpack(const GarchSpec& spec, const Eigen::VectorXd& v) {
  if (v.size() != spec.num_params()) throw Error(ErrorKind::InvalidParams, "packed size mismatch");
  GarchParams p;
  p.omega = v[0];
  p.alpha = v.segment(1, spec.p);
  p.gamma = v.segment(1 + spec.p, spec.o);
  p.beta = v.segment(1 + spec.p + spec.o, spec.q);
  return p;
}

double persistence(const GarchParams& prm) {
  return prm.alpha.sum() + 0.5 * prm.gamma.sum() + prm.beta.sum();
}

Eigen::VectorXd garch_filter(std::span<const double> eps, const GarchParams& params, const GarchSpec& spec,
                             const FilterInit& init) {
  validate_spec(spec);
  validate_params(params, spec);
  for (double e : eps) {
    if (!std::isfinite(e)) throw Error(ErrorKind::InvalidParams, "residuals must be finite");
  }
  if (eps.empty()) return {};
  Lagged lag = prepare(eps, spec, init);
  run_recursion(eps, params, spec, lag, nullptr, nullptr);
  const auto T = static_cast<Eigen::Index>(eps.size());
  Eigen::VectorXd out(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const double h = lag.h[static_cast<std::size_t>(lag.L) + static_cast<std::size_t>(t)];
    out[t] = spec.delta == 2 ? h : h * h;
  }
  return out;
}

double garch_loglik(std::span<const double> eps, const GarchParams& params, const GarchSpec& spec,
                    const FilterInit& init, Eigen::VectorXd* grad) {
  validate_spec(spec);
  validate_params(params, spec);
  if (grad && spec.delta != 2) throw Error(ErrorKind::InvalidParams, "analytic gradient needs delta = 2");
  Lagged lag = prepare(eps, spec, init);
  return run_recursion(eps, params, spec, lag, grad, nullptr);
}

UnivariateFit fit_garch(std::span<const double> eps, const GarchSpec& spec, const GarchFitOptions& options) {
  validate_spec(spec);
  if (spec.delta != 2) throw Error(ErrorKind::InvalidParams, "estimation supports delta = 2 only");
  const std::size_t T = eps.size();
  if (T < 250) throw Error(ErrorKind::SampleTooShort, "GARCH estimation needs T >= 250");
  for (double e : eps) {
    if (!std::isfinite(e)) throw Error(ErrorKind::InvalidParams, "residuals must be finite");
  }
  const double var = sample_variance(eps);
  if (!(var > 0.0)) throw Error(ErrorKind::ZeroVariance, "residuals have zero variance");
  const double sd = std::sqrt(var);
  std::vector<double> z(T);
  for (std::size_t t = 0; t < T; ++t) z[t] = eps[t] / sd;
  const FilterInit zinit = scaled_init(options.init, var);
  const Lagged base = prepare(z, spec, zinit);
  const Reparam rp(spec);
  const double Td = static_cast<double>(T);

  const optim::Objective objective = [&](const Eigen::VectorXd& u, Eigen::VectorXd* grad) {
    if (!u.allFinite()) return std::numeric_limits<double>::infinity();
    Eigen::MatrixXd J;
    const Eigen::VectorXd nat = rp.to_natural(u, grad ? &J : nullptr);
    const GarchParams prm = GarchParams::unpack(spec, nat);
    Lagged lag = base;
    Eigen::VectorXd g;
    const double ll = run_recursion(z, prm, spec, lag, grad ? &g : nullptr, nullptr);
    if (!std::isfinite(ll)) return std::numeric_limits<double>::infinity();
    if (grad) *grad = -(J.transpose() * g) / Td;
    return -ll / Td;
  };

  optim::Result best;
  best.value = std::numeric_limits<double>::infinity();
  for (double target : options.start_persistence) {
    const Eigen::VectorXd slot = start_slots(rp, target);
    const double omega0 = std::max(1e-6, 1.0 - slot.sum());
    optim::Result r = optim::minimize_bfgs(objective, rp.from_slots(omega0, slot), options.optimizer);
    if (std::isfinite(r.value) && (r.value < best.value || !std::isfinite(best.value))) best = std::move(r);
  }
  if (!std::isfinite(best.value)) throw Error(ErrorKind::NonConvergence, "no start produced a finite likelihood");

  GarchParams zp = GarchParams::unpack(spec, rp.to_natural(best.x));
  Eigen::MatrixXd scores;
  {
    Lagged lag = base;
    run_recursion(z, zp, spec, lag, nullptr, &scores);
  }

  UnivariateFit fit;
  fit.spec = spec;
  fit.params = zp;
  fit.params.omega = zp.omega * var;
  fit.residuals = Eigen::Map<const Eigen::VectorXd>(eps.data(), static_cast<Eigen::Index>(T));
  fit.sigma2 = garch_filter(eps, fit.params, spec, options.init);
  fit.std_residuals = (fit.residuals.array() / fit.sigma2.array().sqrt()).matrix();
  fit.loglik = -best.value * Td - Td * std::log(sd);
  fit.persistence = persistence(fit.params);
  fit.stationary = fit.persistence < 1.0;
  fit.status = best.status;
  fit.grad_norm = best.grad_norm;
  fit.iterations = best.iterations;

  const Eigen::MatrixXd opg = scores.transpose() * scores;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(opg);
  fit.std_errors = Eigen::VectorXd::Constant(spec.num_params(), std::numeric_limits<double>::quiet_NaN());
  if (lu.isInvertible()) {
    const Eigen::MatrixXd cov = lu.inverse();
    for (Eigen::Index i = 0; i < cov.rows(); ++i) fit.std_errors[i] = std::sqrt(std::max(0.0, cov(i, i)));
    fit.std_errors[0] *= var;
  }
  return fit;
}

Eigen::VectorXd standardized_residuals(const UnivariateFit& fit) {
  return (fit.residuals.array() / fit.sigma2.array().sqrt()).matrix();
}

}  // namespace volspill
