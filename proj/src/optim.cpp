#include "volspill/optim.hpp"

#include <cmath>
#include <limits>

namespace volspill::optim {

std::string_view to_string(Status s) noexcept {
  switch (s) {
    case Status::Converged: return "converged";
    case Status::SmallProgress: return "small_progress";
    case Status::MaxIterations: return "max_iterations";
    case Status::LineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + step;
    const double fp = f(xp);
    xp[i] = x[i] - step;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

Objective with_numeric_gradient(std::function<double(const Eigen::VectorXd&)> f, double h) {
  return [f = std::move(f), h](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    const double v = f(x);
    if (grad) *grad = numeric_gradient(f, x, h);
    return v;
  };
}

Result minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const Options& options) {
  const Eigen::Index n = x0.size();
  Result res;
  res.x = std::move(x0);
  res.gradient.resize(n);
  res.value = f(res.x, &res.gradient);
  if (!std::isfinite(res.value) || !res.gradient.allFinite()) {
    res.status = Status::LineSearchFailed;
    res.grad_norm = std::numeric_limits<double>::infinity();
    return res;
  }

  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  int stalls = 0;
  Eigen::VectorXd g_new(n);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    res.iterations = iter;
    res.grad_norm = res.gradient.lpNorm<Eigen::Infinity>();
    if (res.grad_norm < options.grad_tol) {
      res.status = Status::Converged;
      return res;
    }

    Eigen::VectorXd dir = -hinv * res.gradient;
    double slope = res.gradient.dot(dir);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      dir = -res.gradient;
      slope = -res.gradient.squaredNorm();
    }
    const double dnorm = dir.lpNorm<Eigen::Infinity>();
    if (dnorm > options.max_step) {
      dir *= options.max_step / dnorm;
      slope *= options.max_step / dnorm;
    }

    double t = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new(n);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = res.x + t * dir;
      f_new = f(x_new, nullptr);
      if (std::isfinite(f_new) && f_new <= res.value + 1e-4 * t * slope) {
        // A point on the edge of the feasible region can have a finite value
        // but no finite gradient; keep shrinking in that case.
        f(x_new, &g_new);
        if (g_new.allFinite()) {
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (scaled) {
        // Retry once from steepest descent before giving up.
        hinv.setIdentity();
        scaled = false;
        continue;
      }
      res.status = Status::LineSearchFailed;
      return res;
    }

    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - res.gradient;
    const double change = std::abs(res.value - f_new);
    const double prev = res.value;

    res.x = x_new;
    res.value = f_new;
    res.gradient = g_new;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        hinv = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      hinv = (I - rho * s * y.transpose()) * hinv * (I - rho * y * s.transpose()) +
             rho * s * s.transpose();
    }

    if (change <= options.f_tol * std::max(1.0, std::abs(prev))) {
      if (++stalls >= 3) {
        res.grad_norm = res.gradient.lpNorm<Eigen::Infinity>();
        res.iterations = iter + 1;
        res.status = res.grad_norm < options.grad_tol ? Status::Converged : Status::SmallProgress;
        return res;
      }
    } else {
      stalls = 0;
    }
  }
  res.grad_norm = res.gradient.lpNorm<Eigen::Infinity>();
  res.iterations = options.max_iterations;
  res.status = res.grad_norm < options.grad_tol ? Status::Converged : Status::MaxIterations;
  return res;
}

}  // namespace volspill::optim
