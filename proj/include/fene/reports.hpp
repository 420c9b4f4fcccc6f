#pragma once

#include <json.hpp>
#include <string>

#include "fene/config.hpp"
#include "fene/coupled_sim.hpp"
#include "fene/fokker_planck.hpp"
#include "fene/probes.hpp"

namespace fene::harness {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json to_json(const ProbeReport& r);
Json to_json(const coupled::PicardReport& r);
Json to_json(const coupled::BlowupReport& r);
Json config_json(const RunConfig& cfg);

// Single-point Fokker-Planck run summary.
struct FpSummary {
  double horizon = 0;
  double max_mass_step_drift = 0;
  double max_identity_residual = 0;
  double min_cfl_margin = 0;
  double required_constant = 0;      // smallest constant that satisfies the certificate
  double checked_constant = -1;      // constant checked during the run, negative if none
  double worst_certificate_ratio = 0;
  double decay_rate = 0;             // fitted rate of ||rho - 1||^2 over the second half
  double decay_oracle = 0;           // 2 lambda_1 from the dense eigensolve
};
Json to_json(const FpSummary& s);

// Coupled run summary with the small-data bound sup size <= 32 c0.
Json simulation_json(const coupled::SimulationResult& r, const coupled::SimConfig& cfg,
                     const coupled::BlowupReport& blowup);

// Header plus rows at 17 significant digits.
void write_fp_csv(std::ostream& os, const fp::FpSolution& sol, const std::vector<double>& exponents);

// Adds "schema" and writes with a trailing newline.
void write_json(const std::string& path, Json body);
void write_text(const std::string& path, const std::string& text);

}  // namespace fene::harness
