#pragma once

#include <istream>
#include <string>
#include <vector>

#include "fene/coupled_sim.hpp"

namespace fene::harness {

// Everything a CLI run needs: the coupled configuration plus the settings of
// the single-point Fokker-Planck run.
struct RunConfig {
  coupled::SimConfig sim;
  // zero | shear | extension | rotation | oscillating | random
  std::string fp_drift = "zero";
  double fp_amplitude = 1.0;
  // r1 | random
  std::string fp_init = "r1";
  double fp_perturbation = 0.1;
  std::vector<double> fp_exponents{2.0};
  // Negative: report the smallest constant that works instead of checking one.
  double certificate_constant = -1.0;
};

// Sets one field from text; throws ConfigError naming the key on unknown keys or bad values.
void set_field(RunConfig& cfg, const std::string& key, const std::string& value);
// "key=value"
void apply_assignment(RunConfig& cfg, const std::string& assignment);
// Flat "key = value" lines, '#' starts a comment.  Validates the result.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
// The inverse of parse_config, one key per line.
std::string format_config(const RunConfig& cfg);

// Drift time series for the single-point run.
fp::DriftSignal make_drift_signal(const std::string& kind, double amplitude, std::uint64_t seed);

}  // namespace fene::harness
