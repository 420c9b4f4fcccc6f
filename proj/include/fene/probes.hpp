#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fene/polymer_space.hpp"

namespace fene::harness {

struct ProbeOptions {
  std::uint64_t seed = 1;
  int nx = 64;
  // Non-positive selects the probe's own default ensemble size.
  int ensemble = 0;
  // radial and angular resolution of the configuration mesh
  int n_r = 16;
};

struct ProbeScale {
  std::string label;  // e.g. "p=2 j=3" or "nx=64"
  double value;
};

struct ProbeReport {
  std::string kind;
  std::string property;  // the inequality or identity being exercised
  int ensemble = 0;
  std::uint64_t seed = 0;
  std::vector<int> resolutions;
  std::vector<ProbeScale> scales;
  // identity probes: largest residual; constant probes: largest measured ratio
  double constant = 0;
  double reference = 0;  // oracle or threshold the constant is judged against, 0 if none
  bool stable = true;
  bool passed = true;
  std::string verdict;
  std::vector<std::string> notes;
};

const std::vector<std::string>& probe_kinds();
// Throws ConfigError for an unknown kind.
ProbeReport run_probe(const std::string& kind, const ProbeOptions& opts);

// 1/lambda_1 for the discrete weighted Laplacian of the mesh, by dense eigensolve.
double poincare_oracle(const polymer::BallMesh& mesh);

// Least-squares slope of y against x.
double fitted_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fene::harness
