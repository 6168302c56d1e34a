#pragma once

// Every tolerance, grid size and bracket in one place. Defaults live here
// and in config/tolerances.json; a JSON file may override any subset.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ipdsaw {

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

struct Tolerances {
  double identity = 1e-10;            // log Z, representation vs brute force
  double floor = 1e-9;                // f~ considered zero below this
  double collapsed_ceiling = 1e-9;    // f~ bound above beta_c
  double extended_minimum = 1e-6;     // f~ bound below beta_c
  double critical_residual = 1e-12;   // |Gamma(beta_c) - 1|
  double route_agreement = 1e-10;     // Gamma root vs cubic root
  double beta_c_nu_window = 0.05;     // |beta_c^nu - 1|
  double beta_c_u_reference = 1.2188;
  double beta_c_u_tolerance = 1e-3;
  double g_zero = 1e-12;              // g(0) = -log c
  double monotone_slack = 1e-9;
  double concavity_slack = 1e-6;
  double decay_max_relative_gap = 0.1;
  Bracket decay_exponent{1.5, 2.5};
  Bracket order_slope{1.3, 1.7};
  double growth_constant = 1e-3;
  double total_variation = 0.01;
  Bracket scaling_extended{0.85, 1.05};
  Bracket scaling_collapsed{0.35, 0.65};
  Bracket scaling_critical{0.5, 0.85};
  int alpha_grid = 512;
  int brute_force_cutoff = 14;
  std::uint64_t cell_budget = 2'000'000'000ULL;
  int entropy_n_max = 64;
  int entropy_area_factor = 8;
  std::vector<int> order_n_max{64, 128, 256};  // finite-N sequence for the order drift
  std::vector<double> order_eps{0.1, 0.15, 0.2, 0.3, 0.4};
};

inline void to_json(nlohmann::json& j, const Bracket& b) { j = nlohmann::json::array({b.lo, b.hi}); }

inline void from_json(const nlohmann::json& j, Bracket& b) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("bracket must be a two-element array");
  b.lo = j[0].get<double>();
  b.hi = j[1].get<double>();
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Tolerances, identity, floor, collapsed_ceiling, extended_minimum,
                                                critical_residual, route_agreement, beta_c_nu_window,
                                                beta_c_u_reference, beta_c_u_tolerance, g_zero, monotone_slack,
                                                concavity_slack, decay_max_relative_gap, decay_exponent, order_slope,
                                                growth_constant, total_variation, scaling_extended, scaling_collapsed,
                                                scaling_critical, alpha_grid, brute_force_cutoff, cell_budget,
                                                entropy_n_max, entropy_area_factor, order_n_max, order_eps)

inline Tolerances load_tolerances(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read tolerances file " + path.string());
  const auto j = nlohmann::json::parse(in);
  for (const auto& [key, value] : j.items()) {
    static const nlohmann::json known = Tolerances{};
    if (!known.contains(key)) throw std::invalid_argument("unknown tolerance key '" + key + "'");
  }
  return j.get<Tolerances>();
}

}  // namespace ipdsaw
