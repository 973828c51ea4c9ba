#include "volspill/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/gamma.hpp>

#include "volspill/errors.hpp"

namespace volspill {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidDgp, what); }

Eigen::MatrixXd target_or_identity(const Dgp& dgp) {
  const auto k = static_cast<Eigen::Index>(dgp.assets());
  return dgp.target.size() == 0 ? Eigen::MatrixXd::Identity(k, k) : dgp.target;
}

Eigen::MatrixXd nbar_of(const Dgp& dgp) {
  return dgp.nbar.size() == 0 ? gaussian_nbar(target_or_identity(dgp)) : dgp.nbar;
}

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& R) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd to_corr(const Eigen::MatrixXd& Q) {
  const Eigen::VectorXd inv = Q.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd R = inv.asDiagonal() * Q * inv.asDiagonal();
  R.diagonal().setOnes();
  return R;
}

class ShockDraw {
 public:
  explicit ShockDraw(const ShockDist& d) : d_(d), chi_(d.nu) {
    if (d.kind != ShockDist::Kind::Gaussian) {
      scale_ = std::sqrt((d.nu - 2.0) / d.nu);
    }
    if (d.kind == ShockDist::Kind::Skewed) {
      const double nu = d.nu, lam = d.lambda;
      const double c = std::exp(boost::math::lgamma((nu + 1.0) / 2.0) - boost::math::lgamma(nu / 2.0)) /
                       std::sqrt(std::numbers::pi * (nu - 2.0));
      a_ = 4.0 * lam * c * (nu - 2.0) / (nu - 1.0);
      b_ = std::sqrt(1.0 + 3.0 * lam * lam - a_ * a_);
    }
  }

  double operator()(std::mt19937_64& rng) {
    const double z = normal_(rng);
    if (d_.kind == ShockDist::Kind::Gaussian) return z;
    const double t = z / std::sqrt(chi_(rng) / d_.nu) * scale_;
    if (d_.kind == ShockDist::Kind::StudentT) return t;
    const double u = uniform_(rng);
    const double lam = d_.lambda;
    const double x = u < (1.0 - lam) / 2.0 ? -(1.0 - lam) * std::abs(t) : (1.0 + lam) * std::abs(t);
    return (x - a_) / b_;
  }

 private:
  ShockDist d_;
  std::normal_distribution<double> normal_;
  std::chi_squared_distribution<double> chi_;
  std::uniform_real_distribution<double> uniform_;
  double scale_ = 1.0, a_ = 0.0, b_ = 1.0;
};

std::vector<Date> weekdays(std::size_t n) {
  std::vector<Date> out;
  out.reserve(n);
  std::chrono::sys_days d{std::chrono::year{2000} / std::chrono::January / 3};
  while (out.size() < n) {
    const std::chrono::weekday wd{d};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.emplace_back(d);
    d += std::chrono::days{1};
  }
  return out;
}

// Long-run level of σ^δ used to seed the burn-in.
double unconditional_level(const GarchSpec& spec, const GarchParams& p) {
  const double e_abs = spec.delta == 2 ? 1.0 : std::sqrt(2.0 / std::numbers::pi);
  const double den = 1.0 - e_abs * (p.alpha.sum() + 0.5 * p.gamma.sum()) - p.beta.sum();
  return den > 1e-6 ? p.omega / den : p.omega;
}

}  // namespace

std::string_view to_string(CorrModel m) noexcept {
  switch (m) {
    case CorrModel::None: return "none";
    case CorrModel::Ccc: return "ccc";
    case CorrModel::Dcc: return "dcc";
    case CorrModel::Gdcc: return "gdcc";
    case CorrModel::Agdcc: return "agdcc";
  }
  return "unknown";
}

Eigen::MatrixXd gaussian_nbar(const Eigen::MatrixXd& R) {
  const Eigen::Index k = R.rows();
  Eigen::MatrixXd N(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const double r = std::clamp(R(i, j) / std::sqrt(R(i, i) * R(j, j)), -1.0, 1.0);
      const double e = (r * (std::numbers::pi / 2.0 + std::asin(r)) + std::sqrt(1.0 - r * r)) / (2.0 * std::numbers::pi);
      N(i, j) = e * std::sqrt(R(i, i) * R(j, j));
    }
  }
  return N;
}

void validate(const Dgp& dgp) {
  const std::size_t k = dgp.assets();
  if (k == 0 || dgp.params.size() != k) invalid("need one GARCH spec and parameter set per asset");
  if (dgp.T < 1) invalid("T must be positive");
  if (dgp.burn_in < 500) invalid("burn_in must be at least 500");
  for (std::size_t i = 0; i < k; ++i) {
    const GarchSpec& s = dgp.specs[i];
    const GarchParams& p = dgp.params[i];
    if (s.p < 1 || s.o < 0 || s.q < 0 || (s.delta != 1 && s.delta != 2)) invalid("asset " + std::to_string(i) + ": bad spec");
    if (p.alpha.size() != s.p || p.gamma.size() != s.o || p.beta.size() != s.q) {
      invalid("asset " + std::to_string(i) + ": parameter sizes do not match the spec");
    }
    bool ok = p.omega > 0.0 && (p.alpha.array() >= 0.0).all() && (p.beta.array() >= 0.0).all();
    for (Eigen::Index j = 0; j < p.gamma.size(); ++j) ok = ok && (j < p.alpha.size() ? p.alpha[j] : 0.0) + p.gamma[j] >= 0.0;
    if (!ok) invalid("asset " + std::to_string(i) + ": parameters violate sign constraints");
    if (persistence(p) >= 1.0) invalid("asset " + std::to_string(i) + ": persistence must be below 1");
  }
  const auto& sh = dgp.shocks;
  if (sh.kind != ShockDist::Kind::Gaussian && !(sh.nu > 2.0)) invalid("shock degrees of freedom must exceed 2");
  if (sh.kind == ShockDist::Kind::Skewed && !(std::abs(sh.lambda) < 1.0)) invalid("skew must lie in (-1, 1)");
  if (dgp.corr == CorrModel::None) return;

  const auto kk = static_cast<Eigen::Index>(k);
  const Eigen::MatrixXd target = target_or_identity(dgp);
  if (target.rows() != kk || target.cols() != kk) invalid("correlation target has the wrong dimension");
  if (!target.isApprox(target.transpose(), 1e-12)) invalid("correlation target is not symmetric");
  if ((target.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12) invalid("correlation target needs a unit diagonal");
  if (min_eigenvalue(target) <= 0.0) invalid("correlation target is not positive definite");
  if (dgp.corr == CorrModel::Dcc) {
    const DccParams& p = dgp.dcc;
    if (p.alpha.size() < 1 || (p.alpha.array() < 0.0).any() || (p.beta.array() < 0.0).any() ||
        p.alpha.sum() + p.beta.sum() >= 1.0) {
      invalid("DCC needs alpha, beta >= 0 and alpha + beta < 1");
    }
  }
  if (dgp.corr == CorrModel::Gdcc || dgp.corr == CorrModel::Agdcc) {
    const AgdccParams& p = dgp.agdcc;
    const bool asym = dgp.corr == CorrModel::Agdcc;
    if (p.a.size() != kk || p.b.size() != kk || (asym && p.g.size() != kk)) invalid("G-DCC loadings need one entry per asset");
    Eigen::MatrixXd C = target.array() * (1.0 - (p.a * p.a.transpose()).array() - (p.b * p.b.transpose()).array());
    if (asym) C.array() -= (p.g * p.g.transpose()).array() * nbar_of(dgp).array();
    if (min_eigenvalue(C) <= 0.0) invalid("G-DCC intercept is not positive definite");
  }
}

Simulation simulate(const Dgp& dgp, std::uint64_t stream) {
  validate(dgp);
  const std::size_t k = dgp.assets();
  const auto kk = static_cast<Eigen::Index>(k);
  const std::size_t burn = static_cast<std::size_t>(dgp.burn_in);
  const std::size_t N = burn + static_cast<std::size_t>(dgp.T);

  std::seed_seq ss{static_cast<std::uint32_t>(dgp.seed), static_cast<std::uint32_t>(dgp.seed >> 32),
                   static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 rng(ss);
  ShockDraw draw(dgp.shocks);

  const bool dynamic = dgp.corr == CorrModel::Dcc || dgp.corr == CorrModel::Gdcc || dgp.corr == CorrModel::Agdcc;
  const Eigen::MatrixXd Qbar = target_or_identity(dgp);
  const Eigen::MatrixXd Nbar = dgp.corr == CorrModel::Agdcc ? nbar_of(dgp) : Eigen::MatrixXd();
  const Eigen::MatrixXd ccc_root = dgp.corr == CorrModel::Ccc ? sym_sqrt(Qbar) : Eigen::MatrixXd();
  AgdccParams ag = dgp.agdcc;
  if (dgp.corr == CorrModel::Gdcc) ag.g.resize(0);

  Eigen::MatrixXd xi(N, kk), eps(N, kk), h(N, kk);
  std::vector<Eigen::MatrixXd> Q;
  MatrixPath R;
  if (dynamic) Q.reserve(N);
  if (dgp.corr != CorrModel::None) R.reserve(static_cast<std::size_t>(dgp.T));

  std::vector<double> level(k);
  for (std::size_t i = 0; i < k; ++i) level[i] = unconditional_level(dgp.specs[i], dgp.params[i]);

  Eigen::VectorXd z(kk);
  for (std::size_t t = 0; t < N; ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    for (Eigen::Index i = 0; i < kk; ++i) z[i] = draw(rng);

    Eigen::VectorXd x;
    if (dynamic) {
      Eigen::MatrixXd q;
      if (t == 0) {
        q = Qbar;
      } else if (dgp.corr == CorrModel::Dcc) {
        const DccParams& p = dgp.dcc;
        q = (1.0 - p.alpha.sum() - p.beta.sum()) * Qbar;
        for (Eigen::Index j = 1; j <= p.alpha.size(); ++j) {
          if (ti - j >= 0) {
            const Eigen::VectorXd v = xi.row(ti - j).transpose();
            q += p.alpha[j - 1] * v * v.transpose();
          } else {
            q += p.alpha[j - 1] * Qbar;
          }
        }
        for (Eigen::Index j = 1; j <= p.beta.size(); ++j) {
          q += p.beta[j - 1] * (ti - j >= 0 ? Q[static_cast<std::size_t>(ti - j)] : Qbar);
        }
      } else {
        const Eigen::MatrixXd nb = ag.g.size() > 0 ? Nbar : Eigen::MatrixXd::Zero(kk, kk);
        q = agdcc_step_direct(Qbar, nb, ag, xi.row(ti - 1).transpose(), Q.back());
      }
      Q.push_back(q);
      const Eigen::MatrixXd Rt = to_corr(q);
      x = sym_sqrt(Rt) * z;
      if (t >= burn) R.push_back(Rt);
    } else if (dgp.corr == CorrModel::Ccc) {
      x = ccc_root * z;
      if (t >= burn) R.push_back(Qbar);
    } else {
      x = z;
    }
    xi.row(ti) = x.transpose();

    for (std::size_t i = 0; i < k; ++i) {
      const GarchSpec& s = dgp.specs[i];
      const GarchParams& p = dgp.params[i];
      const auto ii = static_cast<Eigen::Index>(i);
      auto powd = [&](double a) { return s.delta == 2 ? a * a : std::abs(a); };
      double v = p.omega;
      for (int j = 1; j <= s.p; ++j) {
        v += p.alpha[j - 1] * (ti - j >= 0 ? powd(eps(ti - j, ii)) : level[i]);
      }
      for (int j = 1; j <= s.o; ++j) {
        v += p.gamma[j - 1] * (ti - j >= 0 ? (eps(ti - j, ii) < 0.0 ? powd(eps(ti - j, ii)) : 0.0) : 0.5 * level[i]);
      }
      for (int j = 1; j <= s.q; ++j) v += p.beta[j - 1] * (ti - j >= 0 ? h(ti - j, ii) : level[i]);
      h(ti, ii) = v;
      const double sd = s.delta == 2 ? std::sqrt(v) : v;
      eps(ti, ii) = sd * x[ii];
    }
  }

  Simulation out;
  out.returns.dates = weekdays(static_cast<std::size_t>(dgp.T));
  for (std::size_t i = 0; i < k; ++i) out.returns.assets.push_back("x" + std::to_string(i + 1));
  out.returns.values = eps.bottomRows(dgp.T);
  out.xi = xi.bottomRows(dgp.T);
  out.sigma2.resize(dgp.T, kk);
  for (std::size_t i = 0; i < k; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const GarchSpec& s = dgp.specs[i];
    for (Eigen::Index t = 0; t < dgp.T; ++t) {
      const double v = h(static_cast<Eigen::Index>(burn) + t, ii);
      out.sigma2(t, ii) = s.delta == 2 ? v : v * v;
    }
    FilterInit init;
    init.mode = VarianceInit::History;
    const int m = std::max({s.p, s.o, s.q});
    for (int j = m; j >= 1; --j) {
      const auto row = static_cast<Eigen::Index>(burn) - j;
      init.eps_history.push_back(eps(row, ii));
      init.sigma2_history.push_back(s.delta == 2 ? h(row, ii) : h(row, ii) * h(row, ii));
    }
    out.presample.push_back(std::move(init));
  }
  out.R = std::move(R);
  if (dynamic) out.q1 = Q[burn];
  return out;
}

RecoveryReport recovery_study(const Dgp& dgp, std::size_t replications, Exec exec) {
  validate(dgp);
  if (replications < 10) invalid("recovery study needs at least 10 replications");
  const std::size_t k = dgp.assets();

  RecoveryReport rep;
  rep.replications = replications;
  std::vector<double> truth;
  for (std::size_t i = 0; i < k; ++i) {
    const std::string pre = "x" + std::to_string(i + 1) + ".";
    const GarchParams& p = dgp.params[i];
    rep.params.push_back({pre + "omega", p.omega});
    for (Eigen::Index j = 0; j < p.alpha.size(); ++j) rep.params.push_back({pre + "alpha" + std::to_string(j + 1), p.alpha[j]});
    for (Eigen::Index j = 0; j < p.gamma.size(); ++j) rep.params.push_back({pre + "gamma" + std::to_string(j + 1), p.gamma[j]});
    for (Eigen::Index j = 0; j < p.beta.size(); ++j) rep.params.push_back({pre + "beta" + std::to_string(j + 1), p.beta[j]});
  }
  const Eigen::MatrixXd target = target_or_identity(dgp);
  switch (dgp.corr) {
    case CorrModel::None: break;
    case CorrModel::Ccc:
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
          rep.params.push_back({"rho" + std::to_string(i + 1) + std::to_string(j + 1),
                                target(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
        }
      }
      break;
    case CorrModel::Dcc:
      for (Eigen::Index j = 0; j < dgp.dcc.alpha.size(); ++j) rep.params.push_back({"dcc.alpha" + std::to_string(j + 1), dgp.dcc.alpha[j]});
      for (Eigen::Index j = 0; j < dgp.dcc.beta.size(); ++j) rep.params.push_back({"dcc.beta" + std::to_string(j + 1), dgp.dcc.beta[j]});
      break;
    case CorrModel::Gdcc:
    case CorrModel::Agdcc:
      for (std::size_t i = 0; i < k; ++i) rep.params.push_back({"gdcc.a" + std::to_string(i + 1), dgp.agdcc.a[static_cast<Eigen::Index>(i)]});
      for (std::size_t i = 0; i < k; ++i) rep.params.push_back({"gdcc.b" + std::to_string(i + 1), dgp.agdcc.b[static_cast<Eigen::Index>(i)]});
      if (dgp.corr == CorrModel::Agdcc) {
        for (std::size_t i = 0; i < k; ++i) rep.params.push_back({"gdcc.g" + std::to_string(i + 1), dgp.agdcc.g[static_cast<Eigen::Index>(i)]});
      }
      break;
  }
  const std::size_t np = rep.params.size();
  rep.estimates.assign(replications, std::vector<double>(np, kNaN));
  rep.failure_reasons.assign(replications, "");

  auto one = [&](std::size_t r) {
    try {
      const Simulation sim = simulate(dgp, r);
      std::vector<double> est;
      std::vector<UnivariateFit> fits;
      for (std::size_t i = 0; i < k; ++i) {
        const Eigen::VectorXd e = sim.returns.values.col(static_cast<Eigen::Index>(i));
        UnivariateFit f = fit_garch(std::span<const double>(e.data(), static_cast<std::size_t>(e.size())), dgp.specs[i]);
        if (!f.converged()) throw Error(ErrorKind::NonConvergence, "asset " + std::to_string(i + 1) + ": " + std::string(optim::to_string(f.status)));
        const Eigen::VectorXd packed = f.params.pack();
        est.insert(est.end(), packed.data(), packed.data() + packed.size());
        fits.push_back(std::move(f));
      }
      if (dgp.corr != CorrModel::None) {
        const StdResidualPanel panel = make_panel(sim.returns.dates, sim.returns.assets, fits);
        if (dgp.corr == CorrModel::Ccc) {
          const CccFit c = fit_ccc(panel);
          for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) est.push_back(c.R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
          }
        } else if (dgp.corr == CorrModel::Dcc) {
          const DccFit d = fit_dcc(panel, static_cast<int>(dgp.dcc.alpha.size()), static_cast<int>(dgp.dcc.beta.size()));
          if (!optim::converged(d.status)) throw Error(ErrorKind::NonConvergence, "DCC: " + std::string(optim::to_string(d.status)));
          est.insert(est.end(), d.params.alpha.data(), d.params.alpha.data() + d.params.alpha.size());
          est.insert(est.end(), d.params.beta.data(), d.params.beta.data() + d.params.beta.size());
        } else {
          const AgdccFit g = fit_gdcc(panel, dgp.corr == CorrModel::Agdcc);
          if (!optim::converged(g.status)) throw Error(ErrorKind::NonConvergence, "G-DCC: " + std::string(optim::to_string(g.status)));
          est.insert(est.end(), g.params.a.data(), g.params.a.data() + g.params.a.size());
          est.insert(est.end(), g.params.b.data(), g.params.b.data() + g.params.b.size());
          est.insert(est.end(), g.params.g.data(), g.params.g.data() + g.params.g.size());
        }
      }
      rep.estimates[r] = std::move(est);
    } catch (const std::exception& e) {
      rep.failure_reasons[r] = e.what();
    }
  };

  const auto n = static_cast<long>(replications);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (long r = 0; r < n; ++r) one(static_cast<std::size_t>(r));
  } else {
    for (long r = 0; r < n; ++r) one(static_cast<std::size_t>(r));
  }

  for (std::size_t j = 0; j < np; ++j) {
    ParamRecovery& pr = rep.params[j];
    double sum = 0.0, sq = 0.0;
    for (std::size_t r = 0; r < replications; ++r) {
      if (!rep.failure_reasons[r].empty()) continue;
      const double e = rep.estimates[r][j];
      sum += e;
      sq += (e - pr.truth) * (e - pr.truth);
      ++pr.count;
    }
    if (pr.count > 0) {
      pr.mean = sum / static_cast<double>(pr.count);
      pr.bias = pr.mean - pr.truth;
      pr.rmse = std::sqrt(sq / static_cast<double>(pr.count));
    } else {
      pr.mean = pr.bias = pr.rmse = kNaN;
    }
  }
  for (const auto& reason : rep.failure_reasons) {
    if (!reason.empty()) ++rep.failures;
  }
  return rep;
}

}  // namespace volspill
