#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "volspill/errors.hpp"
#include "volspill/simulate.hpp"

namespace testutil {

// Kind of the volspill::Error thrown by f, or nullopt when it returns normally.
inline std::optional<volspill::ErrorKind> error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const volspill::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline volspill::GarchParams garch_params(double omega, double alpha, double beta, double gamma = -1.0) {
  volspill::GarchParams p;
  p.omega = omega;
  p.alpha = Eigen::VectorXd::Constant(1, alpha);
  p.beta = Eigen::VectorXd::Constant(1, beta);
  if (gamma >= 0.0) p.gamma = Eigen::VectorXd::Constant(1, gamma);
  return p;
}

inline volspill::Dgp garch_dgp(int T, std::uint64_t seed, double omega = 0.05, double alpha = 0.05, double beta = 0.90) {
  volspill::Dgp d;
  d.specs = {volspill::GarchSpec::garch11()};
  d.params = {garch_params(omega, alpha, beta)};
  d.T = T;
  d.seed = seed;
  return d;
}

inline volspill::Dgp dcc_dgp(int T, std::uint64_t seed, double a = 0.02, double b = 0.95, double rho = 0.5) {
  volspill::Dgp d;
  d.specs = {volspill::GarchSpec::garch11(), volspill::GarchSpec::garch11()};
  d.params = {garch_params(0.05, 0.05, 0.90), garch_params(0.05, 0.05, 0.90)};
  d.corr = volspill::CorrModel::Dcc;
  d.target = Eigen::MatrixXd::Constant(2, 2, rho);
  d.target.diagonal().setOnes();
  d.dcc = volspill::DccParams::scalar(a, b);
  d.T = T;
  d.seed = seed;
  return d;
}

inline std::vector<double> normal_sample(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> x(n);
  for (auto& v : x) v = z(rng);
  return x;
}

inline std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline oracle::Mat to_mat(const Eigen::MatrixXd& m) {
  oracle::Mat out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  }
  return out;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("volspill_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Price CSV from simulated returns read as percent: P_0 = 100,
// P_t = P_{t-1} exp(r_t / 100).
inline std::string prices_csv(const volspill::Simulation& sim, const std::vector<std::string>& names) {
  std::string out = "date";
  for (const auto& n : names) out += "," + n;
  out += "\n";
  const auto& r = sim.returns;
  std::vector<double> level(names.size(), 100.0);
  auto row = [&](const volspill::Date& d) {
    out += volspill::format_date(d);
    char buf[40];
    for (double l : level) {
      std::snprintf(buf, sizeof buf, ",%.17g", l);
      out += buf;
    }
    out += "\n";
  };
  row(volspill::Date{std::chrono::year{1999} / std::chrono::December / 31});
  for (std::size_t t = 0; t < r.rows(); ++t) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      level[i] *= std::exp(r.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) / 100.0);
    }
    row(r.dates[t]);
  }
  return out;
}

}  // namespace testutil
