#pragma once

#include <Eigen/Dense>

namespace volspill {

struct OlsResult {
  Eigen::VectorXd coef;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd xtx_inv;  // (X'X)^{-1}
  double rss = 0.0;
  Eigen::Index n = 0;
  Eigen::Index k = 0;

  double sigma2() const { return rss / static_cast<double>(n - k); }
  double std_error(Eigen::Index j) const;
};

/// Least squares of y on X. Throws SingularDesign when X has deficient column
/// rank (relative threshold 1e-10 on the pivoted QR diagonal).
OlsResult ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

}  // namespace volspill
