#include <doctest.h>

#include "helpers.hpp"
#include "volspill/garch.hpp"

using namespace volspill;
using testutil::error_kind;
using testutil::garch_params;

TEST_SUITE("garch") {
  TEST_CASE("no dynamics gives constant variance") {
    auto eps = testutil::normal_sample(50, 1);
    auto s = garch_filter(eps, garch_params(0.3, 0.0, 0.0), GarchSpec::garch11());
    for (Eigen::Index t = 0; t < s.size(); ++t) CHECK(s[t] == 0.3);
  }

  TEST_CASE("hand recursion") {
    std::vector<double> eps{1.0, 0.5, -2.0};
    auto s = garch_filter(eps, garch_params(0.1, 0.2, 0.7), GarchSpec::garch11(), FilterInit::fixed(1.0));
    CHECK(s[0] == doctest::Approx(1.0));
    CHECK(s[1] == doctest::Approx(1.0));
    CHECK(s[2] == doctest::Approx(0.1 + 0.2 * 0.25 + 0.7));
  }

  TEST_CASE("negative shock adds exactly gamma") {
    auto p = garch_params(0.1, 0.05, 0.8, 0.1);
    auto up = garch_filter(std::vector<double>{1.0, 0.0}, p, GarchSpec::gjr111(), FilterInit::fixed(1.0));
    auto down = garch_filter(std::vector<double>{-1.0, 0.0}, p, GarchSpec::gjr111(), FilterInit::fixed(1.0));
    CHECK(down[1] - up[1] == doctest::Approx(0.1).epsilon(1e-12));
    auto zero = garch_filter(std::vector<double>{0.0, 0.0}, p, GarchSpec::gjr111(), FilterInit::fixed(1.0));
    CHECK(zero[1] == doctest::Approx(0.1 + 0.8 * zero[0]));
  }

  TEST_CASE("filter and loglik match a direct loop") {
    auto eps = testutil::normal_sample(400, 2);
    auto p = garch_params(0.05, 0.07, 0.85, 0.06);
    auto s = garch_filter(eps, p, GarchSpec::gjr111(), FilterInit::fixed(1.3));
    auto o = oracle::gjr_filter(eps, 0.05, 0.07, 0.06, 0.85, 1.3);
    for (std::size_t t = 0; t < eps.size(); ++t) CHECK(s[t] == doctest::Approx(o[t]).epsilon(1e-13));
    CHECK(garch_loglik(eps, p, GarchSpec::gjr111(), FilterInit::fixed(1.3)) ==
          doctest::Approx(oracle::gaussian_garch_loglik(eps, o)).epsilon(1e-12));
  }

  TEST_CASE("analytic gradient matches finite differences") {
    auto eps = testutil::normal_sample(300, 3);
    auto spec = GarchSpec::gjr111();
    auto p = garch_params(0.1, 0.05, 0.8, 0.08);
    Eigen::VectorXd g;
    garch_loglik(eps, p, spec, {}, &g);
    auto f = [&](const Eigen::VectorXd& v) { return garch_loglik(eps, GarchParams::unpack(spec, v), spec); };
    auto fd = optim::numeric_gradient(f, p.pack(), 1e-6);
    for (Eigen::Index i = 0; i < g.size(); ++i) CHECK(g[i] == doctest::Approx(fd[i]).epsilon(1e-5));
  }

  TEST_CASE("pack and persistence") {
    auto p = garch_params(0.1, 0.05, 0.8, 0.1);
    CHECK(persistence(p) == doctest::Approx(0.9));
    auto q = GarchParams::unpack(GarchSpec::gjr111(), p.pack());
    CHECK(q.omega == 0.1);
    CHECK(q.gamma[0] == 0.1);
    CHECK(error_kind([] { garch_filter(std::vector<double>{1.0}, garch_params(-0.1, 0.1, 0.8), GarchSpec::garch11()); }) ==
          ErrorKind::InvalidParams);
  }

  TEST_CASE("presample history reproduces the simulated variance") {
    auto d = testutil::garch_dgp(1000, 4);
    d.specs = {GarchSpec::gjr111()};
    d.params = {garch_params(0.05, 0.03, 0.88, 0.08)};
    auto sim = simulate(d);
    auto eps = testutil::to_vec(sim.returns.values.col(0));
    auto s = garch_filter(eps, d.params[0], d.specs[0], sim.presample[0]);
    CHECK((s - sim.sigma2.col(0)).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("recovery on a simulated path") {
    auto sim = simulate(testutil::garch_dgp(5000, 5));
    auto eps = testutil::to_vec(sim.returns.values.col(0));
    auto fit = fit_garch(eps, GarchSpec::garch11());
    REQUIRE(fit.converged());
    CHECK(std::abs(fit.params.omega - 0.05) < 3.0 * fit.std_errors[0]);
    CHECK(std::abs(fit.params.alpha[0] - 0.05) < 3.0 * fit.std_errors[1]);
    CHECK(std::abs(fit.params.beta[0] - 0.90) < 3.0 * fit.std_errors[2]);
    CHECK(fit.persistence == doctest::Approx(0.95).epsilon(0.03));
    CHECK(fit.stationary);

    auto xi = standardized_residuals(fit);
    const double m2 = xi.squaredNorm() / static_cast<double>(xi.size());
    CHECK(m2 > 0.8);
    CHECK(m2 < 1.2);
  }

  TEST_CASE("GJR on symmetric data finds no asymmetry") {
    auto sim = simulate(testutil::garch_dgp(5000, 6));
    auto eps = testutil::to_vec(sim.returns.values.col(0));
    auto fit = fit_garch(eps, GarchSpec::gjr111());
    REQUIRE(fit.converged());
    CHECK(std::abs(fit.params.gamma[0]) < 3.0 * fit.std_errors[2]);
    CHECK(fit.loglik >= fit_garch(eps, GarchSpec::garch11()).loglik - 1e-6);
  }

  TEST_CASE("rescaling the data rescales omega") {
    auto sim = simulate(testutil::garch_dgp(2000, 7));
    auto eps = testutil::to_vec(sim.returns.values.col(0));
    auto a = fit_garch(eps, GarchSpec::garch11());
    for (auto& e : eps) e *= 10.0;
    auto b = fit_garch(eps, GarchSpec::garch11());
    CHECK(b.params.omega == doctest::Approx(100.0 * a.params.omega).epsilon(1e-3));
    CHECK(b.params.alpha[0] == doctest::Approx(a.params.alpha[0]).epsilon(1e-3));
    CHECK(b.params.beta[0] == doctest::Approx(a.params.beta[0]).epsilon(1e-3));
  }

  TEST_CASE("constant-variance fit standardizes by sqrt omega") {
    UnivariateFit f;
    f.residuals = Eigen::Vector3d(1.0, -2.0, 0.5);
    f.sigma2 = Eigen::Vector3d::Constant(4.0);
    auto xi = standardized_residuals(f);
    CHECK(xi[1] == -1.0);
  }

  TEST_CASE("fit errors") {
    std::vector<double> short_eps(100, 0.1);
    CHECK(error_kind([&] { fit_garch(short_eps, GarchSpec::garch11()); }) == ErrorKind::SampleTooShort);
    std::vector<double> flat(300, 0.0);
    CHECK(error_kind([&] { fit_garch(flat, GarchSpec::garch11()); }) == ErrorKind::ZeroVariance);
  }
}
