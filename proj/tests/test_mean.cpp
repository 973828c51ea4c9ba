#include <doctest.h>

#include "helpers.hpp"
#include "volspill/mean_models.hpp"

using namespace volspill;
using testutil::error_kind;

namespace {

std::vector<double> ar2(std::size_t n, double p1, double p2, std::uint64_t seed) {
  auto e = testutil::normal_sample(n + 200, seed);
  std::vector<double> x(e.size(), 0.0);
  for (std::size_t t = 2; t < x.size(); ++t) x[t] = p1 * x[t - 1] + p2 * x[t - 2] + e[t];
  return {x.begin() + 200, x.end()};
}

}  // namespace

TEST_SUITE("mean") {
  TEST_CASE("VAR(0) residuals are the demeaned returns") {
    Eigen::MatrixXd r(50, 2);
    auto a = testutil::normal_sample(100, 1);
    for (int t = 0; t < 50; ++t) {
      r(t, 0) = a[t];
      r(t, 1) = a[50 + t] + 1.0;
    }
    auto fit = fit_var(r, 0);
    Eigen::MatrixXd demeaned = r.rowwise() - r.colwise().mean();
    CHECK((fit.residuals - demeaned).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(select_var_order(r, 0, Criterion::Aic) == 0);
  }

  TEST_CASE("VAR recovers an AR(1) coefficient") {
    auto e = testutil::normal_sample(5000, 2);
    Eigen::MatrixXd r(5000, 1);
    r(0, 0) = e[0];
    for (int t = 1; t < 5000; ++t) r(t, 0) = 0.5 * r(t - 1, 0) + e[t];
    auto fit = fit_var(r, 1);
    const double se = std::sqrt((1.0 - 0.25) / 5000.0);
    CHECK(std::abs(fit.lags[0](0, 0) - 0.5) < 3.0 * se);
  }

  TEST_CASE("VAR residuals are orthogonal to the regressors") {
    auto a = testutil::normal_sample(3 * 400, 3);
    Eigen::MatrixXd r = Eigen::Map<Eigen::MatrixXd>(a.data(), 400, 3);
    auto fit = fit_var(r, 2);
    REQUIRE(fit.lags.size() == 2);
    CHECK(fit.lags[0].rows() == 3);
    CHECK(fit.lags[0].cols() == 3);
    for (int lag = 1; lag <= 2; ++lag) {
      for (int j = 0; j < 3; ++j) {
        Eigen::VectorXd reg = Eigen::VectorXd::Zero(400);
        reg.tail(400 - lag) = r.col(j).head(400 - lag);
        CHECK((fit.residuals.transpose() * reg).cwiseAbs().maxCoeff() < 1e-8);
      }
    }
    CHECK(fit.residuals.colwise().sum().cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("VAR order selection") {
    int hits = 0;
    for (int rep = 0; rep < 20; ++rep) {
      auto a = testutil::normal_sample(2 * 1000, 100 + rep);
      Eigen::MatrixXd r = Eigen::Map<Eigen::MatrixXd>(a.data(), 1000, 2);
      hits += select_var_order(r, 4, Criterion::Bic) == 0;
    }
    CHECK(hits >= 18);

    hits = 0;
    for (int rep = 0; rep < 10; ++rep) {
      auto e = testutil::normal_sample(2 * 2000, 200 + rep);
      Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2000, 2);
      for (int t = 2; t < 2000; ++t) {
        r(t, 0) = 0.3 * r(t - 1, 0) + 0.3 * r(t - 2, 0) + e[t];
        r(t, 1) = 0.2 * r(t - 1, 1) - 0.3 * r(t - 2, 1) + 0.1 * r(t - 1, 0) + e[2000 + t];
      }
      hits += select_var_order(r, 6, Criterion::Bic) == 2;
    }
    CHECK(hits >= 8);
  }

  TEST_CASE("VAR errors") {
    Eigen::MatrixXd r = Eigen::MatrixXd::Ones(30, 2);
    r.col(1) *= 2.0;
    CHECK(error_kind([&] { fit_var(r, 0); }) == ErrorKind::SingularDesign);
    CHECK(error_kind([&] { fit_var(Eigen::MatrixXd::Random(20, 2), 5); }) == ErrorKind::SampleTooShort);
  }

  TEST_CASE("ARMA(0,0) residuals are the demeaned series") {
    auto x = testutil::normal_sample(300, 5);
    auto fit = fit_arma(x, {0, 0, true});
    double mean = 0.0;
    for (double v : x) mean += v / 300.0;
    for (std::size_t t = 0; t < x.size(); ++t) CHECK(fit.residuals[t] == doctest::Approx(x[t] - mean).epsilon(1e-10));
  }

  TEST_CASE("AR(2) recovery") {
    auto x = ar2(5000, 0.4, 0.3, 6);
    auto fit = fit_arma(x, {2, 0, true});
    // Asymptotic standard error of each AR(2) coefficient is √((1 − φ2²)/n).
    const double se = std::sqrt((1.0 - 0.09) / 5000.0);
    CHECK(std::abs(fit.ar[0] - 0.4) < 3.0 * se);
    CHECK(std::abs(fit.ar[1] - 0.3) < 3.0 * se);
    CHECK(fit.stationary);
  }

  TEST_CASE("MA(1) recovery") {
    auto e = testutil::normal_sample(4001, 7);
    std::vector<double> x(4000);
    for (int t = 0; t < 4000; ++t) x[t] = e[t + 1] + 0.5 * e[t];
    auto fit = fit_arma(x, {0, 1, true});
    CHECK(std::abs(fit.ma[0] - 0.5) < 3.0 * std::sqrt((1 - 0.25) / 4000.0));
  }

  TEST_CASE("ARMA residuals whiten the data") {
    auto x = ar2(2000, 0.5, 0.0, 8);
    auto fit = select_arma(x, 2, 2, Criterion::Bic, true, Exec::Serial);
    CHECK(fit.spec.ar + fit.spec.ma >= 1);
    CHECK(fit.residuals.size() == 2000);
    CHECK(fit.aic < fit_arma(x, {0, 0, true}).aic);
  }

  TEST_CASE("ARMA grid: serial and parallel agree exactly") {
    auto x = ar2(800, 0.3, 0.2, 9);
    auto a = select_arma(x, 3, 3, Criterion::Aic, true, Exec::Serial);
    auto b = select_arma(x, 3, 3, Criterion::Aic, true, Exec::Parallel);
    CHECK(a.spec.ar == b.spec.ar);
    CHECK(a.spec.ma == b.spec.ma);
    CHECK(a.aic == b.aic);
    CHECK(a.residuals == b.residuals);
  }

  TEST_CASE("invertible MA map") {
    Eigen::VectorXd u(3);
    u << 5.0, -4.0, 3.0;
    auto th = ma_from_unconstrained(u);
    // 1 + θ1 z + θ2 z² + θ3 z³ must have no roots inside the unit disc; use the AR check on −θ.
    CHECK(ar_is_stationary(-th));
    CHECK(ar_is_stationary(Eigen::Vector2d(0.4, 0.3)));
    CHECK_FALSE(ar_is_stationary(Eigen::VectorXd::Constant(1, 1.2)));
  }

  TEST_CASE("ARMA errors") {
    std::vector<double> x(30, 1.0);
    CHECK(error_kind([&] { fit_arma(x, {2, 2, true}); }) == ErrorKind::SampleTooShort);
    std::vector<double> c(100, 1.0);
    CHECK(error_kind([&] { fit_arma(c, {0, 0, true}); }) == ErrorKind::ZeroVariance);
  }
}
