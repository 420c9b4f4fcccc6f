#include "fene/fluid_solver.hpp"

#include <cmath>

#include "fene/errors.hpp"

namespace fene::fluid {

using lp::cplx;
using lp::SpectralField;

FluidParams FluidParams::make(double nu, double dt, bool dealias) {
  if (!(nu > 0) || !std::isfinite(nu)) throw ConfigError("viscosity must be positive");
  if (!(dt > 0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
  return {nu, dt, dealias};
}

namespace {

void require_vector(const SpectralField& f, const char* what) {
  if (f.components() != 2) throw PreconditionError(std::string(what) + " must be a 2-vector field");
}

void require_solenoidal(const SpectralField& u, const char* what) {
  const double scale = std::max(lp::sup_norm(u), 1.0);
  if (lp::spectral_divergence(u) > 1e-8 * scale)
    throw PreconditionError(std::string(what) + " is not divergence free");
}

}  // namespace

SpectralField convection(const SpectralField& v, const SpectralField& u, bool dealias) {
  require_vector(v, "advecting field");
  require_vector(u, "velocity");
  auto prod = dealias ? lp::dealiased_product : lp::grid_product;
  std::vector<SpectralField> out;
  for (int i = 0; i < 2; ++i) {
    const SpectralField ui = u.component(i);
    out.push_back(lp::partial(prod(v.component(0), ui), 0) + lp::partial(prod(v.component(1), ui), 1));
  }
  return SpectralField::stack(out);
}

double cfl_number(const SpectralField& v, double dt) {
  return lp::sup_norm(v) * dt / v.lattice().spacing();
}

SpectralField linear_ns_step(const SpectralField& u, const SpectralField& v,
                             const SpectralField& forcing, const FluidParams& params,
                             StepReport* report) {
  require_vector(u, "velocity");
  require_vector(forcing, "forcing");
  if (!(u.lattice() == v.lattice()) || !(u.lattice() == forcing.lattice()))
    throw PreconditionError("fields live on different lattices");
  require_solenoidal(u, "velocity");
  require_solenoidal(v, "advecting field");

  const double cfl = cfl_number(v, params.dt);
  if (report) *report = {cfl, cfl > 1.0};

  const SpectralField rhs = lp::leray_project(forcing - convection(v, u, params.dealias));
  const auto& lat = u.lattice();
  std::vector<std::vector<cplx>> out(2, std::vector<cplx>(lat.spectral_size()));
  for (std::size_t q = 0; q < lat.spectral_size(); ++q) {
    const double k2 = double(lat.xi1(q)) * lat.xi1(q) + double(lat.xi2(q)) * lat.xi2(q);
    const double z = params.nu * k2 * params.dt;
    const double decay = std::exp(-z);
    const double phi = z == 0 ? 1.0 : -std::expm1(-z) / z;
    for (int c = 0; c < 2; ++c)
      out[c][q] = decay * u.spectrum(c)[q] + params.dt * phi * rhs.spectrum(c)[q];
  }
  SpectralField next = SpectralField::from_spectrum(lat, std::move(out));
  for (int c = 0; c < 2; ++c)
    for (double x : next.values(c))
      if (!std::isfinite(x)) throw NumericalError("non-finite velocity");
  return next;
}

SpectralField ns_step(const SpectralField& u, const SpectralField& forcing,
                      const FluidParams& params, StepReport* report) {
  return linear_ns_step(u, u, forcing, params, report);
}

SpectralField pressure_field(const SpectralField& u, const SpectralField& forcing, bool dealias) {
  return lp::inverse_laplacian(lp::divergence(forcing - convection(u, u, dealias)));
}

SpectralField taylor_green(const lp::FrequencyLattice& lat, double amplitude) {
  return SpectralField::sample(
      lat, [=](double x, double y) { return amplitude * std::sin(x) * std::cos(y); },
      [=](double x, double y) { return -amplitude * std::cos(x) * std::sin(y); });
}

}  // namespace fene::fluid
