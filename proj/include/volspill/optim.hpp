#pragma once

#include <functional>
#include <string_view>

#include <Eigen/Dense>

namespace volspill::optim {

/// Objective to minimize. When `grad` is non-null the callee fills it. Return
/// +inf (or NaN) for infeasible points; the line search backs away from them.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

enum class Status {
  Converged,         // gradient max-norm below tolerance
  SmallProgress,     // relative objective change below f_tol for several iterations
  MaxIterations,
  LineSearchFailed,
};

std::string_view to_string(Status s) noexcept;

inline bool converged(Status s) noexcept { return s == Status::Converged || s == Status::SmallProgress; }

struct Options {
  int max_iterations = 500;
  double grad_tol = 1e-6;
  double f_tol = 1e-13;
  double max_step = 5.0;  // infinity-norm cap on a single step
};

struct Result {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  double grad_norm = 0.0;  // max-norm
  int iterations = 0;
  Status status = Status::MaxIterations;

  bool converged() const { return optim::converged(status); }
};

/// Quasi-Newton minimization with an inverse-Hessian BFGS update and Armijo
/// backtracking.
Result minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const Options& options = {});

/// Central-difference gradient with step h·max(1,|x_i|).
Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double h = 1e-5);

/// Wraps a value-only function into an Objective using numeric_gradient.
Objective with_numeric_gradient(std::function<double(const Eigen::VectorXd&)> f, double h = 1e-5);

}  // namespace volspill::optim
