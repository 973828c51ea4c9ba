#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "volspill/parallel.hpp"

namespace volspill {

enum class Fuel { Coal, Gas };

/// Efficiency n in GJ_e/GJ, emission factor EF in kg CO₂/GJ.
struct PlantParams {
  Fuel fuel = Fuel::Coal;
  double efficiency = 0.4;
  double emission_factor = 0.0;
};

/// Extreme plants of a generation portfolio plus fuel-cost and carbon-cost
/// market data. Fuel costs in €/GJ; σ_fc is the fuel-cost volatility used by
/// the variance helpers.
struct SwitchContext {
  PlantParams coal_efficient{Fuel::Coal, 0.45, 95.0};
  PlantParams coal_inefficient{Fuel::Coal, 0.35, 95.0};
  PlantParams gas_efficient{Fuel::Gas, 0.58, 56.0};
  PlantParams gas_inefficient{Fuel::Gas, 0.40, 56.0};
  double fc_coal = 0.0;
  double fc_gas = 0.0;
  double rho = 0.0;
  double sigma_fc = 0.0;
  double sigma_ec = 0.0;
};

/// Throws InvalidParams unless 0 < n < 1 and EF ≥ 0.
void validate(const PlantParams& plant);
/// Per-plant checks plus efficient ≥ inefficient per fuel, fuel costs ≥ 0,
/// ρ ∈ [−1, 1] and σ ≥ 0.
void validate(const SwitchContext& ctx);

/// MC = FC/n + (EF/n)·EC in €/GJ_e, with EC in €/kg CO₂.
double marginal_cost(const PlantParams& plant, double fc, double ec);

/// σ²_MC = σ²_FC/n² + EF²σ²_EC/n² + 2(1/n)(EF/n)ρσ_FCσ_EC.
double marginal_cost_variance(const PlantParams& plant, double sigma_fc, double sigma_ec, double rho);

/// Carbon price (€/kg CO₂) at which the most efficient coal plant and the
/// least efficient gas plant have equal marginal cost. Throws
/// DegenerateDenominator when the emission-to-efficiency ratios coincide.
double switch_price_upper(const SwitchContext& ctx);

/// Carbon price at which the least efficient coal plant and the most efficient
/// gas plant have equal marginal cost.
double switch_price_lower(const SwitchContext& ctx);

struct SwitchBand {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::string> warnings;  // set when lower > upper
};

SwitchBand switch_prices(const SwitchContext& ctx);

enum class Regime { DecoupledCoal, Coupled, DecoupledGas };

std::string_view to_string(Regime r) noexcept;

/// DecoupledCoal below SP_l, DecoupledGas above SP_u, Coupled on the closed
/// interval between them.
Regime classify_regime(double eua, const SwitchContext& ctx);
Regime classify_regime(double eua, const SwitchBand& band);

std::vector<Regime> classify_path(const std::vector<double>& eua, const SwitchContext& ctx);

// Unit helpers.
constexpr double kKgPerTonne = 1000.0;
constexpr double kGjPerMwh = 3.6;
inline double per_kg_to_per_tonne(double eur_per_kg) { return eur_per_kg * kKgPerTonne; }
inline double per_tonne_to_per_kg(double eur_per_t) { return eur_per_t / kKgPerTonne; }
inline double per_gj_to_per_mwh(double eur_per_gj) { return eur_per_gj * kGjPerMwh; }
inline double per_mwh_to_per_gj(double eur_per_mwh) { return eur_per_mwh / kGjPerMwh; }

/// Sample variance of MC over `draws` bivariate normal (FC, EC) pairs. Draws
/// are split into fixed chunks, each seeded from (seed, chunk), so the serial
/// and parallel paths return identical values.
double marginal_cost_variance_mc(const PlantParams& plant, double fc_mean, double ec_mean, double sigma_fc,
                                 double sigma_ec, double rho, std::size_t draws, std::uint64_t seed,
                                 Exec exec = Exec::Parallel);

}  // namespace volspill
