#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "volspill/diagnostics.hpp"
#include "volspill/ols.hpp"

using namespace volspill;
using testutil::error_kind;

TEST_SUITE("diagnostics") {
  TEST_CASE("two-point sample") {
    std::vector<double> x{-1, 1, -1, 1};
    auto s = summary_stats(x);
    CHECK(s.skewness == doctest::Approx(0.0));
    CHECK(s.kurtosis == doctest::Approx(1.0));
    CHECK(s.mean == 0.0);
    CHECK(s.median == 0.0);
    CHECK(s.min == -1.0);
    CHECK(s.max == 1.0);
  }

  TEST_CASE("normal kurtosis is near 3") {
    auto x = testutil::normal_sample(1000000, 11);
    CHECK(std::abs(summary_stats(x).kurtosis - 3.0) < 0.05);
  }

  TEST_CASE("degenerate inputs") {
    std::vector<double> c(10, 2.0);
    CHECK(error_kind([&] { summary_stats(c); }) == ErrorKind::ZeroVariance);
    CHECK(error_kind([&] { jarque_bera(c); }) == ErrorKind::ZeroVariance);
    CHECK(error_kind([&] { arch_lm(c, 2); }) == ErrorKind::SingularRegression);
    CHECK(error_kind([&] { summary_stats(std::vector<double>{1, 2, 3}); }) == ErrorKind::TooFewObservations);
    CHECK(error_kind([&] { ljung_box(std::vector<double>(20, 0.5), 10); }) == ErrorKind::TooManyLags);
    std::vector<double> c30(30, 1.0);
    CHECK(error_kind([&] { adf_test(c30, 2); }) == ErrorKind::ZeroVariance);
    CHECK(error_kind([&] { adf_test(c30, 25); }) == ErrorKind::SampleTooShort);
    CHECK(error_kind([&] { pp_test(c30); }).has_value());
  }

  TEST_CASE("jarque-bera statistic") {
    CHECK(jarque_bera_statistic(1000, 0.0, 3.0) == 0.0);
    const double jb = jarque_bera_statistic(2371, 0.0233, 9.4841);
    CHECK(std::abs(jb - 4152.0) / 4152.0 < 0.002);
    CHECK(chi2_sf(0.0, 2) == doctest::Approx(1.0));
  }

  TEST_CASE("jarque-bera rejects t(4)") {
    std::mt19937_64 rng(5);
    std::student_t_distribution<double> t(4.0);
    std::vector<double> x(5000);
    for (auto& v : x) v = t(rng);
    auto r = jarque_bera(x);
    CHECK(r.reject_at.at(0.05));
    CHECK(r.reject(0.05));
  }

  TEST_CASE("chi-square critical value") {
    CHECK(chi2_critical(0.05, 20) == doctest::Approx(31.41).epsilon(5e-4));
    CHECK(chi2_sf(chi2_critical(0.01, 7), 7) == doctest::Approx(0.01));
  }

  TEST_CASE("ljung-box matches a direct loop") {
    auto x = testutil::normal_sample(500, 3);
    CHECK(ljung_box(x, 20).statistic == doctest::Approx(oracle::ljung_box(x, 20)).epsilon(1e-12));
    CHECK(ljung_box(x, 20).lags_or_df == 20);
  }

  TEST_CASE("ljung-box is zero when every autocorrelation vanishes") {
    // The lag-1 product pairs a nonzero with zeros only; x has mean 0.
    std::vector<double> x(40, 0.0);
    x.front() = 1.0;
    x.back() = -1.0;
    CHECK(ljung_box(x, 5).statistic == doctest::Approx(0.0));
  }

  TEST_CASE("ljung-box rejects AR(1)") {
    auto e = testutil::normal_sample(2000, 4);
    std::vector<double> x(e.size());
    x[0] = e[0];
    for (std::size_t t = 1; t < x.size(); ++t) x[t] = 0.5 * x[t - 1] + e[t];
    CHECK(ljung_box(x, 20).reject_at.at(0.01));
  }

  TEST_CASE("reject_at agrees with the p-value") {
    auto x = testutil::normal_sample(300, 8);
    for (const auto& r : {ljung_box(x, 10), ljung_box(x, 10, true), arch_lm(x, 5), jarque_bera(x)}) {
      for (auto [level, rej] : r.reject_at) CHECK(rej == (r.p_value < level));
    }
  }

  TEST_CASE("arch-lm rejects a GARCH path") {
    auto d = testutil::garch_dgp(3000, 21, 0.1, 0.1, 0.8);
    auto sim = simulate(d);
    auto x = testutil::to_vec(sim.returns.values.col(0));
    CHECK(arch_lm(x, 5).reject_at.at(0.05));
  }

  TEST_CASE("unit root critical values") {
    CHECK(unit_root_critical_value(0.01, Deterministic::Constant, 2371) == -3.44);
    CHECK(unit_root_critical_value(0.05, Deterministic::Constant, 2371) == doctest::Approx(-2.87));
    CHECK(error_kind([] { unit_root_critical_value(0.02, Deterministic::Constant, 100); }) == ErrorKind::InvalidParams);
  }

  TEST_CASE("adf and pp separate white noise from a random walk") {
    auto e = testutil::normal_sample(2000, 17);
    std::vector<double> walk(e.size());
    double s = 0.0;
    for (std::size_t t = 0; t < e.size(); ++t) walk[t] = s += e[t];
    CHECK(adf_test(e, 10).reject(0.01));
    CHECK_FALSE(adf_test(walk, 10).reject(0.05));
    CHECK(pp_test(e).reject(0.01));
    CHECK_FALSE(pp_test(walk).reject(0.05));
    CHECK(pp_default_bandwidth(2000) == 7);
  }

  TEST_CASE("adf and pp agree on white noise") {
    auto e = testutil::normal_sample(5000, 23);
    CHECK(adf_test(e, 8).reject(0.05) == pp_test(e).reject(0.05));
  }

  TEST_CASE("mackinnon p-value is monotone") {
    CHECK(mackinnon_p(-4.0, Deterministic::Constant) < mackinnon_p(-3.0, Deterministic::Constant));
    CHECK(mackinnon_p(-3.44, Deterministic::Constant) == doctest::Approx(0.01).epsilon(0.15));
  }

  TEST_CASE("ols") {
    Eigen::MatrixXd X(5, 2);
    X << 1, 0, 1, 1, 1, 2, 1, 3, 1, 4;
    Eigen::VectorXd y = 2.0 + 3.0 * X.col(1).array();
    auto r = ols(X, y);
    CHECK(r.coef[0] == doctest::Approx(2.0));
    CHECK(r.coef[1] == doctest::Approx(3.0));
    CHECK(r.rss == doctest::Approx(0.0).epsilon(1e-20));
    Eigen::MatrixXd bad(5, 2);
    bad << 1, 2, 1, 2, 1, 2, 1, 2, 1, 2;
    CHECK(error_kind([&] { ols(bad, y); }) == ErrorKind::SingularDesign);
  }
}
