#pragma once

#include "fene/lp_analysis.hpp"

namespace fene::fluid {

struct FluidParams {
  double nu = 0.1;
  double dt = 1e-3;
  bool dealias = true;

  static FluidParams make(double nu, double dt, bool dealias = true);
};

struct StepReport {
  double cfl = 0;  // max|v| dt / h
  bool cfl_exceeded = false;
};

// div(v (x) u) = (v . grad) u for divergence-free v; 2-vector result.
lp::SpectralField convection(const lp::SpectralField& v, const lp::SpectralField& u, bool dealias = true);

// One exponential-Euler step of  d_t u - nu Delta u = P(forcing - v . grad u):
//   u_hat <- e^{-z} u_hat + dt phi(z) P(N)_hat,  z = nu |xi|^2 dt,  phi(z) = (1 - e^{-z}) / z.
// u and v must be divergence free.
lp::SpectralField linear_ns_step(const lp::SpectralField& u, const lp::SpectralField& v,
                                 const lp::SpectralField& forcing, const FluidParams& params,
                                 StepReport* report = nullptr);

// Nonlinear step: the advecting field is u itself.
lp::SpectralField ns_step(const lp::SpectralField& u, const lp::SpectralField& forcing,
                          const FluidParams& params, StepReport* report = nullptr);

// P = Delta^{-1} div(forcing - div(u (x) u)), zero mean.
lp::SpectralField pressure_field(const lp::SpectralField& u, const lp::SpectralField& forcing,
                                 bool dealias = true);

// (sin x1 cos x2, -cos x1 sin x2) scaled by amplitude
lp::SpectralField taylor_green(const lp::FrequencyLattice& lat, double amplitude = 1.0);

double cfl_number(const lp::SpectralField& v, double dt);

}  // namespace fene::fluid
