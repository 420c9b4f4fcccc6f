#include "fene/fokker_planck.hpp"

#include <cmath>
#include <string>

#include "fene/errors.hpp"

namespace fene::fp {

using polymer::BallMesh;
using polymer::ConfigDistribution;
using polymer::Face;

namespace {

double face_drift(const Face& f, const Drift& a) {
  return f.drift[0] * a(0, 0) + f.drift[1] * a(0, 1) + f.drift[2] * a(1, 0) +
         f.drift[3] * a(1, 1);
}

}  // namespace

FpOperator::FpOperator(std::shared_ptr<const BallMesh> mesh) : mesh_(std::move(mesh)) {
  const int n = mesh_->cells();
  std::vector<Eigen::Triplet<double>> t;
  for (const Face& f : mesh_->faces()) {
    t.emplace_back(f.a, f.a, -f.weight);
    t.emplace_back(f.b, f.b, -f.weight);
    t.emplace_back(f.a, f.b, f.weight);
    t.emplace_back(f.b, f.a, f.weight);
  }
  stiffness_.resize(n, n);
  stiffness_.setFromTriplets(t.begin(), t.end());
}

void FpOperator::drift_flux(const Drift& a, std::span<const double> rho,
                            std::span<double> net) const {
  std::fill(net.begin(), net.end(), 0.0);
  for (const Face& f : mesh_->faces()) {
    const double g = face_drift(f, a);
    const double flux = g * (g > 0 ? rho[f.a] : rho[f.b]);
    net[f.a] -= flux;
    net[f.b] += flux;
  }
}

void FpOperator::rate(const Drift& a, std::span<const double> rho, std::span<double> out) const {
  drift_flux(a, rho, out);
  Eigen::Map<const Eigen::VectorXd> r(rho.data(), rho.size());
  const Eigen::VectorXd k = stiffness_ * r;
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = (out[c] + k[c]) / mesh_->mass(c);
}

double FpOperator::drift_dt_limit(const Drift& a) const {
  std::vector<double> out(mesh_->cells(), 0.0);
  for (const Face& f : mesh_->faces()) {
    const double g = face_drift(f, a);
    out[g > 0 ? f.a : f.b] += std::abs(g);
  }
  double lim = std::numeric_limits<double>::infinity();
  for (int c = 0; c < mesh_->cells(); ++c)
    if (out[c] > 0) lim = std::min(lim, mesh_->mass(c) / out[c]);
  return lim;
}

double FpOperator::drift_work(const Drift& a, std::span<const double> rho) const {
  double acc = 0;
  for (const Face& f : mesh_->faces())
    acc += face_drift(f, a) * (rho[f.b] * rho[f.b] - rho[f.a] * rho[f.a]);
  return acc;
}

FpStepper::FpStepper(std::shared_ptr<const FpOperator> op, double dt) : op_(std::move(op)), dt_(dt) {
  if (!(dt > 0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
  const int n = op_->mesh().cells();
  Eigen::SparseMatrix<double> sys = -dt * op_->stiffness();
  for (int c = 0; c < n; ++c) sys.coeffRef(c, c) += op_->mesh().mass(c);
  solver_.compute(sys);
  if (solver_.info() != Eigen::Success) throw NumericalError("diffusion factorization failed");
}

void FpStepper::step(std::span<double> rho, const Drift& a) const {
  const auto& mesh = op_->mesh();
  const int n = mesh.cells();
  if (rho.size() != static_cast<std::size_t>(n)) throw PreconditionError("distribution size mismatch");
  if (dt_ > op_->drift_dt_limit(a) * (1 + 1e-12))
    throw NumericalError("time step " + std::to_string(dt_) + " exceeds the drift limit " +
                         std::to_string(op_->drift_dt_limit(a)));
  thread_local Eigen::VectorXd b, x;
  thread_local std::vector<double> net;
  b.resize(n);
  net.resize(n);
  op_->drift_flux(a, rho, net);
  for (int c = 0; c < n; ++c) b[c] = mesh.mass(c) * rho[c] + dt_ * net[c];
  x = solver_.solve(b);
  for (int c = 0; c < n; ++c) {
    if (!std::isfinite(x[c])) throw NumericalError("non-finite Fokker-Planck state");
    rho[c] = x[c];
  }
}

ConfigDistribution fp_step(const FpStepper& stepper, ConfigDistribution rho, const Drift& a) {
  stepper.step(rho, a);
  return rho;
}

namespace {

double energy(const BallMesh& mesh, std::span<const double> rho, double p) {
  return std::pow(polymer::weighted_norm(mesh, rho, p), p);
}

double certificate_lhs(const FpRecord& r, std::size_t q, double p) {
  return r.energy[q] + 2 * (p - 1) / p * r.dissipation[q];
}

}  // namespace

FpSolution fp_solve(const FpStepper& stepper, ConfigDistribution rho, const DriftSignal& drift,
                    double horizon, const CertificateOptions& opts, int record_every) {
  const auto& op = stepper.op();
  const auto& mesh = op.mesh();
  const double dt = stepper.dt();
  const long steps = std::lround(horizon / dt);
  if (steps < 1 || std::abs(steps * dt - horizon) > 1e-9 * horizon)
    throw ConfigError("horizon must be a positive multiple of the time step");
  const auto& ps = opts.exponents;

  FpSolution sol;
  sol.min_cfl_margin = std::numeric_limits<double>::infinity();
  FpRecord rec;
  rec.mass = polymer::mass(mesh, rho);
  for (double p : ps) {
    rec.energy.push_back(energy(mesh, rho, p));
    rec.dissipation.push_back(0.0);
  }
  const FpRecord first = rec;
  sol.history.push_back(rec);
  double l1 = 0;
  for (int c = 0; c < mesh.cells(); ++c) l1 += mesh.mass(c) * std::abs(rho[c]);
  const double mass_scale = std::max(l1, 1e-300);

  auto rhs2 = [&](const Drift& a, std::span<const double> r) {
    return -2 * polymer::dissipation_seminorm(mesh, r, 2) + op.drift_work(a, r);
  };

  Drift a_now = drift(0.0);
  for (long n = 0; n < steps; ++n) {
    const double t = n * dt;
    const Drift a_next = drift(t + dt);
    sol.min_cfl_margin = std::min(sol.min_cfl_margin, op.drift_dt_limit(a_now) / dt);

    const double e_before = energy(mesh, rho, 2);
    const double rhs_before = rhs2(a_now, rho);
    const double m_before = polymer::mass(mesh, rho);
    stepper.step(rho, a_now);
    const double m_after = polymer::mass(mesh, rho);
    const double e_after = energy(mesh, rho, 2);
    const double rhs_after = rhs2(a_now, rho);

    const double drift_step = std::abs(m_after - m_before) / mass_scale;
    sol.max_mass_step_drift = std::max(sol.max_mass_step_drift, drift_step);
    if (drift_step > opts.mass_tolerance)
      throw CertificateViolation("mass drift " + std::to_string(drift_step) + " in one step", t + dt);
    sol.max_identity_residual =
        std::max(sol.max_identity_residual,
                 std::abs(e_after - e_before - 0.5 * dt * (rhs_before + rhs_after)));

    rec.t = (n + 1) * dt;
    rec.mass = m_after;
    rec.drift_sq_integral += 0.5 * dt * (a_now.squaredNorm() + a_next.squaredNorm());
    for (std::size_t q = 0; q < ps.size(); ++q) {
      rec.energy[q] = energy(mesh, rho, ps[q]);
      rec.dissipation[q] += dt * polymer::dissipation_seminorm(mesh, rho, ps[q]);
      if (opts.constant > 0) {
        const double bound =
            opts.constant * std::exp(opts.constant * rec.drift_sq_integral) * first.energy[q];
        const double ratio = certificate_lhs(rec, q, ps[q]) / bound;
        sol.worst_certificate_ratio = std::max(sol.worst_certificate_ratio, ratio);
        if (ratio > 1 + 1e-12)
          throw CertificateViolation("energy certificate violated for p = " + std::to_string(ps[q]),
                                     rec.t);
      }
    }
    if ((n + 1) % record_every == 0 || n + 1 == steps) sol.history.push_back(rec);
    a_now = a_next;
  }
  sol.final = std::move(rho);
  return sol;
}

double required_certificate_constant(const FpSolution& sol, const std::vector<double>& exponents) {
  double worst = 0;
  const FpRecord& first = sol.history.front();
  for (const FpRecord& r : sol.history) {
    for (std::size_t q = 0; q < exponents.size(); ++q) {
      const double need = certificate_lhs(r, q, exponents[q]) / first.energy[q];
      const double i = r.drift_sq_integral;
      if (i == 0) {
        worst = std::max(worst, need);
        continue;
      }
      double lo = 0, hi = std::max(need, 1e-300);
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mid * std::exp(mid * i) >= need ? hi : lo) = mid;
      }
      worst = std::max(worst, hi);
    }
  }
  return worst;
}

}  // namespace fene::fp
