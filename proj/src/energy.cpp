#include "volspill/energy.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "volspill/errors.hpp"

namespace volspill {

namespace {

void check_plant(const PlantParams& p, const char* name) {
  if (!(p.efficiency > 0.0 && p.efficiency < 1.0) || !(p.emission_factor >= 0.0) || !std::isfinite(p.emission_factor)) {
    throw Error(ErrorKind::InvalidParams, std::string(name) + ": need 0 < efficiency < 1 and emission factor >= 0");
  }
}

double checked_ratio(double num, double den, double scale, const char* which) {
  if (std::abs(den) <= 1e-12 * scale) {
    throw Error(ErrorKind::DegenerateDenominator,
                std::string(which) + ": plants have equal emission-to-efficiency ratios");
  }
  return num / den;
}

}  // namespace

void validate(const PlantParams& plant) { check_plant(plant, "plant"); }

void validate(const SwitchContext& ctx) {
  check_plant(ctx.coal_efficient, "coal_efficient");
  check_plant(ctx.coal_inefficient, "coal_inefficient");
  check_plant(ctx.gas_efficient, "gas_efficient");
  check_plant(ctx.gas_inefficient, "gas_inefficient");
  if (ctx.coal_efficient.efficiency < ctx.coal_inefficient.efficiency ||
      ctx.gas_efficient.efficiency < ctx.gas_inefficient.efficiency) {
    throw Error(ErrorKind::InvalidParams, "efficient plant must not be less efficient than the inefficient one");
  }
  if (!(ctx.fc_coal >= 0.0) || !(ctx.fc_gas >= 0.0)) throw Error(ErrorKind::InvalidParams, "fuel costs must be >= 0");
  if (!(ctx.rho >= -1.0 && ctx.rho <= 1.0)) throw Error(ErrorKind::InvalidParams, "rho must lie in [-1, 1]");
  if (!(ctx.sigma_fc >= 0.0) || !(ctx.sigma_ec >= 0.0)) throw Error(ErrorKind::InvalidParams, "sigma must be >= 0");
}

double marginal_cost(const PlantParams& plant, double fc, double ec) {
  check_plant(plant, "plant");
  return fc / plant.efficiency + plant.emission_factor / plant.efficiency * ec;
}

double marginal_cost_variance(const PlantParams& plant, double sigma_fc, double sigma_ec, double rho) {
  check_plant(plant, "plant");
  if (!(sigma_fc >= 0.0) || !(sigma_ec >= 0.0)) throw Error(ErrorKind::InvalidParams, "sigma must be >= 0");
  if (!(rho >= -1.0 && rho <= 1.0)) throw Error(ErrorKind::InvalidParams, "rho must lie in [-1, 1]");
  const double n = plant.efficiency, ef = plant.emission_factor;
  const double v = sigma_fc * sigma_fc / (n * n) + ef * ef * sigma_ec * sigma_ec / (n * n) +
                   2.0 * (1.0 / n) * (ef / n) * rho * sigma_fc * sigma_ec;
  return std::max(v, 0.0);
}

double switch_price_upper(const SwitchContext& ctx) {
  validate(ctx);
  const double ne = ctx.coal_efficient.efficiency, ni = ctx.gas_inefficient.efficiency;
  const double efc = ctx.coal_efficient.emission_factor, efg = ctx.gas_inefficient.emission_factor;
  const double den = ni * efc - ne * efg;
  return checked_ratio(ne * ctx.fc_gas - ni * ctx.fc_coal, den, ni * efc + ne * efg, "SP_u");
}

double switch_price_lower(const SwitchContext& ctx) {
  validate(ctx);
  const double ni = ctx.coal_inefficient.efficiency, ne = ctx.gas_efficient.efficiency;
  const double efc = ctx.coal_inefficient.emission_factor, efg = ctx.gas_efficient.emission_factor;
  const double den = ne * efc - ni * efg;
  return checked_ratio(ni * ctx.fc_gas - ne * ctx.fc_coal, den, ne * efc + ni * efg, "SP_l");
}

SwitchBand switch_prices(const SwitchContext& ctx) {
  SwitchBand band;
  band.lower = switch_price_lower(ctx);
  band.upper = switch_price_upper(ctx);
  if (band.lower > band.upper) {
    std::ostringstream msg;
    msg << "SP_l (" << band.lower << ") exceeds SP_u (" << band.upper << "); portfolio ordering is inconsistent";
    band.warnings.push_back(msg.str());
  }
  return band;
}

std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::DecoupledCoal: return "decoupled_coal";
    case Regime::Coupled: return "coupled";
    case Regime::DecoupledGas: return "decoupled_gas";
  }
  return "unknown";
}

Regime classify_regime(double eua, const SwitchBand& band) {
  if (eua < band.lower) return Regime::DecoupledCoal;
  if (eua > band.upper) return Regime::DecoupledGas;
  return Regime::Coupled;
}

Regime classify_regime(double eua, const SwitchContext& ctx) { return classify_regime(eua, switch_prices(ctx)); }

std::vector<Regime> classify_path(const std::vector<double>& eua, const SwitchContext& ctx) {
  const SwitchBand band = switch_prices(ctx);
  std::vector<Regime> out;
  out.reserve(eua.size());
  for (double p : eua) out.push_back(classify_regime(p, band));
  return out;
}

double marginal_cost_variance_mc(const PlantParams& plant, double fc_mean, double ec_mean, double sigma_fc,
                                 double sigma_ec, double rho, std::size_t draws, std::uint64_t seed, Exec exec) {
  check_plant(plant, "plant");
  if (draws < 2) throw Error(ErrorKind::InvalidParams, "need at least two draws");
  constexpr int kChunks = 64;
  struct Moments {
    double n = 0.0, mean = 0.0, m2 = 0.0;
  };
  std::vector<Moments> parts(kChunks);
  const double c = std::sqrt(std::max(0.0, 1.0 - rho * rho));

  auto run_chunk = [&](int chunk) {
    const std::size_t begin = draws * static_cast<std::size_t>(chunk) / kChunks;
    const std::size_t end = draws * static_cast<std::size_t>(chunk + 1) / kChunks;
    std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(chunk)};
    std::mt19937_64 rng(ss);
    std::normal_distribution<double> z;
    Moments m;
    for (std::size_t d = begin; d < end; ++d) {
      const double z1 = z(rng), z2 = z(rng);
      const double fc = fc_mean + sigma_fc * z1;
      const double ec = ec_mean + sigma_ec * (rho * z1 + c * z2);
      const double mc = fc / plant.efficiency + plant.emission_factor / plant.efficiency * ec;
      m.n += 1.0;
      const double delta = mc - m.mean;
      m.mean += delta / m.n;
      m.m2 += delta * (mc - m.mean);
    }
    parts[static_cast<std::size_t>(chunk)] = m;
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (int chunk = 0; chunk < kChunks; ++chunk) run_chunk(chunk);
  } else {
    for (int chunk = 0; chunk < kChunks; ++chunk) run_chunk(chunk);
  }

  Moments total;
  for (const Moments& m : parts) {
    if (m.n == 0.0) continue;
    const double n = total.n + m.n;
    const double delta = m.mean - total.mean;
    total.mean += delta * m.n / n;
    total.m2 += m.m2 + delta * delta * total.n * m.n / n;
    total.n = n;
  }
  return total.m2 / (total.n - 1.0);
}

}  // namespace volspill
