// Runs every acceptance criterion at its stated tolerance and time budget and
// prints one line per criterion.  Exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "fene/config.hpp"
#include "fene/coupled_sim.hpp"
#include "fene/errors.hpp"
#include "fene/probes.hpp"

using namespace fene;
using namespace fene::harness;

namespace {

struct Outcome {
  bool ok;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out{false, ""};
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool pass = out.ok && in_time;
  if (!pass) ++failures;
  std::printf("[%s] %2d %-34s %s; %.2f s (budget %.0f s)%s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              out.detail.c_str(), secs, budget_s, in_time ? "" : " OVER BUDGET");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome probe_outcome(const ProbeReport& r, const char* f) { return {r.passed, fmt(f, r.constant, r.reference)}; }

coupled::SimConfig reference_config() {
  coupled::SimConfig c;
  c.nx = 64;
  c.n_r = 16;
  c.n_theta = 16;
  c.dt = 5e-3;
  c.c0 = 1e-3;
  c.init = "random";
  c.seed = 1;
  return c;
}

// positive distribution 1 + amp * noise / max|noise|, noise mean zero
polymer::ConfigDistribution perturbed(const polymer::BallMesh& mesh, std::uint64_t seed, double amp) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  polymer::ConfigDistribution v(mesh.cells());
  for (double& x : v) x = g(rng);
  const double m = polymer::mass(mesh, v);
  double top = 0;
  for (double& x : v) top = std::max(top, std::abs(x -= m));
  for (double& x : v) x = 1 + amp * x / top;
  return v;
}

double sup_integral_at(int nx, double horizon, double c0) {
  auto c = reference_config();
  c.nx = nx;
  c.horizon = horizon;
  c.c0 = c0;
  c.record_every = 10;
  return coupled::simulate(c).history.back().u_sup_sq_integral;
}

}  // namespace

int main() {
  std::printf("acceptance run\n");

  criterion(1, "partition and reconstruction", 1, [] {
    ProbeOptions o;
    o.nx = 128;
    o.ensemble = 5;
    return probe_outcome(run_probe("partition", o), "max residual %.2e (< %.0e)");
  });

  criterion(2, "Bony identity, 20 pairs", 5, [] {
    ProbeOptions o;
    o.nx = 128;
    o.ensemble = 20;
    return probe_outcome(run_probe("bony", o), "max relative residual %.2e (< %.0e)");
  });

  criterion(3, "Bernstein scaling", 10, [] {
    ProbeOptions o;
    o.nx = 256;
    o.ensemble = 10;
    const auto r = run_probe("bernstein", o);
    double lo = INFINITY;
    for (const auto& s : r.scales) lo = std::min(lo, s.value);
    return Outcome{r.passed, fmt("ratio / 2^j in [%.3f, %.3f] for j = 1..5, p = 2, 4", lo, r.constant)};
  });

  criterion(4, "heat decay per block", 10, [] {
    ProbeOptions o;
    o.nx = 256;
    o.ensemble = 10;
    const auto r = run_probe("heat", o);
    return Outcome{r.passed, fmt("fitted rate spread %.2f%% over j = 1..5 (< 20%%)", 100 * r.constant)};
  });

  criterion(5, "Fokker-Planck mass and energy", 30, [] {
    auto mesh = std::make_shared<polymer::BallMesh>(32, 32, 1.0);
    fp::FpStepper stepper(std::make_shared<fp::FpOperator>(mesh), 1e-4);
    const double amp = 0.5;
    const auto rho0 = polymer::sample_distribution(*mesh, [](double x, double y) { return 1 + 0.3 * x * y + 0.2 * x; });
    const auto sol = fp::fp_solve(stepper, rho0, make_drift_signal("oscillating", amp, 0), 1.0, {}, 100);
    const bool ok = sol.max_mass_step_drift < 1e-12 && sol.max_identity_residual < 1e-6;
    return Outcome{ok, fmt("mass drift/step %.2e, energy identity residual %.2e over 1e4 steps, |A| = %.1f",
                           sol.max_mass_step_drift, sol.max_identity_residual, amp)};
  });

  criterion(6, "energy certificate, p = 2, 4", 60, [] {
    auto mesh = std::make_shared<polymer::BallMesh>(16, 16, 1.0);
    fp::FpStepper stepper(std::make_shared<fp::FpOperator>(mesh), 1e-3);
    const std::vector<double> ps{2, 4};
    // calibration ensemble: random drifts and random initial data
    double needed = 0;
    for (std::uint64_t s = 0; s < 8; ++s) {
      fp::CertificateOptions opts;
      opts.exponents = ps;
      const auto sol = fp::fp_solve(stepper, perturbed(*mesh, 100 + s, 0.8),
                                    make_drift_signal("random", 3.0, 200 + s), 1.0, opts, 10);
      needed = std::max(needed, fp::required_certificate_constant(sol, ps));
    }
    const double margin = 2.0;
    fp::CertificateOptions opts;
    opts.exponents = ps;
    opts.constant = margin * needed;
    int violations = 0;
    double worst = 0;
    for (const std::string kind : {"zero", "shear", "extension", "rotation", "oscillating"})
      for (double amp : {1.0, 4.0}) {
        try {
          const auto sol = fp::fp_solve(stepper, perturbed(*mesh, 7, 0.8), make_drift_signal(kind, amp, 0), 1.0,
                                        opts, 10);
          worst = std::max(worst, sol.worst_certificate_ratio);
        } catch (const CertificateViolation&) {
          ++violations;
        }
      }
    return Outcome{violations == 0, fmt("calibrated C = %.3f, %g violations on 10 signals, worst LHS/RHS %.3f",
                                        opts.constant, violations, worst)};
  });

  criterion(7, "weighted Poincare supremum", 30, [] {
    ProbeOptions o;
    o.n_r = 16;
    o.ensemble = 100;
    const auto r = run_probe("poincare", o);
    return Outcome{r.passed, fmt("sup ratio %.5f vs oracle %.5f (%.2f%% below)", r.constant, r.reference,
                                 100 * (1 - r.constant / r.reference))};
  });

  criterion(8, "Taylor-Green decay", 60, [] {
    auto c = reference_config();
    c.nx = 64;
    c.nu = 0.1;
    c.dt = 1e-3;
    coupled::CoupledSolver solver(c);
    auto u = fluid::taylor_green(solver.lattice());
    const auto u0 = u;
    const auto zero = lp::SpectralField::zeros(solver.lattice(), 2);
    for (int n = 0; n < 1000; ++n) u = solver.advance_fluid(u, u, zero);
    const double err = lp::sup_norm(u - std::exp(-2 * c.nu * 1.0) * u0) / lp::sup_norm(u0);
    return Outcome{err < 1e-4, fmt("relative error %.2e at t = 1 (< 1e-4)", err)};
  });

  criterion(9, "equilibrium fixed point", 60, [] {
    auto c = reference_config();
    c.nx = 32;
    c.init = "equilibrium";
    c.horizon = 1000 * c.dt;
    c.record_every = 10;
    const auto res = coupled::simulate(c);
    const auto& h = res.history;
    const auto first = h.values(h.rows().front());
    double worst = 0;
    for (const auto& r : h.rows()) {
      const auto v = h.values(r);
      for (std::size_t q = 1; q < v.size(); ++q) worst = std::max(worst, std::abs(v[q] - first[q]));
    }
    return Outcome{res.completed && worst < 1e-10 && h.rows().size() == 101,
                   fmt("largest column change %.2e over 1000 steps (< 1e-10)", worst)};
  });

  criterion(10, "Picard contraction", 600, [] {
    auto c = reference_config();
    c.horizon = 0.25;
    coupled::CoupledSolver solver(c);
    const auto st = solver.initial_state();
    const auto r = coupled::picard_solve(solver, st.u, st.rho, c.horizon, c.picard_iterations).report;
    const double diff = std::max(r.direct_u_difference, r.direct_psi_difference);
    const bool ok = !r.aborted && r.worst_late_ratio <= 0.5 && diff >= 0 && diff < 1e-4;
    return Outcome{ok, fmt("worst A_n/A_{n-1} (n >= 3) %.3f, direct difference %.2e", r.worst_late_ratio, diff)};
  });

  double integral64 = 0;
  criterion(11, "small-data bound, T = 5", 900, [&] {
    auto c = reference_config();
    c.horizon = 5;
    c.record_every = 10;
    const auto full = coupled::simulate(c);
    c.c0 /= 2;
    const auto half = coupled::simulate(c);
    integral64 = full.history.back().u_sup_sq_integral;
    const double ratio = half.sup_size / full.sup_size;
    const double bound = full.sup_size / (2 * c.c0);
    const bool ok = full.completed && half.completed && bound <= 32 && ratio >= 0.4 && ratio <= 0.6;
    return Outcome{ok, fmt("sup size / c0 = %.3f (<= 32), halved-data response ratio %.3f", bound, ratio)};
  });

  criterion(12, "velocity integral refinement", 900, [&] {
    if (integral64 == 0) integral64 = sup_integral_at(64, 5, 1e-3);
    const double coarse = sup_integral_at(32, 5, 1e-3);
    const double rel = std::abs(coarse - integral64) / integral64;
    const bool ok = std::isfinite(integral64) && rel < 0.05;
    return Outcome{ok, fmt("int |u|_inf^2 = %.6e (64^2), %.6e (32^2), difference %.2f%%; not a blow-up certificate",
                           integral64, coarse, 100 * rel)};
  });

  std::printf("%d failure(s)\n", failures);
  return failures;
}
