#include "volspill/ols.hpp"

#include <cmath>

#include "volspill/errors.hpp"

namespace volspill {

double OlsResult::std_error(Eigen::Index j) const { return std::sqrt(sigma2() * xtx_inv(j, j)); }

OlsResult ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() <= X.cols()) throw Error(ErrorKind::SampleTooShort, "regression has no degrees of freedom");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) throw Error(ErrorKind::SingularDesign, "design matrix is rank deficient");

  OlsResult out;
  out.n = X.rows();
  out.k = X.cols();
  out.coef = qr.solve(y);
  out.residuals = y - X * out.coef;
  out.rss = out.residuals.squaredNorm();
  // (X'X)^{-1} = P R^{-1} R^{-T} P'
  const Eigen::Index k = X.cols();
  Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Eigen::MatrixXd rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd inner = rinv * rinv.transpose();
  out.xtx_inv = qr.colsPermutation() * inner * qr.colsPermutation().transpose();
  return out;
}

}  // namespace volspill
