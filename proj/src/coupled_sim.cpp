#include "fene/coupled_sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <random>
#include <sstream>

#include "fene/errors.hpp"

namespace fene::coupled {

using lp::SpectralField;
using polymer::PolymerField;

namespace {

void config_fail(const std::string& field, const std::string& why) {
  throw ConfigError(field + ": " + why);
}

// Runs body(i) for i < n in parallel and rethrows the first exception afterwards.
template <class F>
void parallel_points(std::size_t n, F&& body) {
  std::exception_ptr err;
  std::mutex m;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(m);
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace

void SimConfig::validate() const {
  try {
    lp::FrequencyLattice lat(nx);
  } catch (const ConfigError& e) {
    config_fail("nx", e.what());
  }
  if (n_r < 2) config_fail("n_r", "must be >= 2");
  if (n_theta < 4) config_fail("n_theta", "must be >= 4");
  if (!(k > 0)) config_fail("k", "must be > 0");
  if (k < 1 && !moment_quadrature) config_fail("moment_quadrature", "k < 1 needs the moment stress quadrature");
  if (!(nu > 0)) config_fail("nu", "must be > 0");
  try {
    lp::BesovParams::make(s, p, r).require_simulation_regularity();
  } catch (const ConfigError& e) {
    config_fail("p/r/s", e.what());
  }
  if (!(dt > 0)) config_fail("dt", "must be > 0");
  if (!(horizon > 0)) config_fail("T", "must be > 0");
  const double q = horizon / dt;
  if (std::abs(q - std::round(q)) > 1e-9 * q) config_fail("T", "must be a multiple of dt");
  if (!(c0 >= 0)) config_fail("c0", "must be >= 0");
  if (init != "equilibrium" && init != "taylor-green" && init != "random")
    config_fail("init", "expected equilibrium, taylor-green or random, got '" + init + "'");
  if (!(band >= 1) || band >= nx / 2) config_fail("band", "must lie in [1, nx/2)");
  if (!(velocity_share >= 0 && velocity_share <= 1)) config_fail("velocity_share", "must lie in [0, 1]");
  if (!(u_ceiling > 0)) config_fail("u_ceiling", "must be > 0");
  if (!(psi_ceiling > 0)) config_fail("psi_ceiling", "must be > 0");
  if (record_every < 1) config_fail("record_every", "must be >= 1");
  if (picard_iterations < 1) config_fail("picard_iterations", "must be >= 1");
}

long SimConfig::steps() const { return std::lround(horizon / dt); }

PolymerField advect_polymer(const PolymerField& rho, const SpectralField& u, double dt) {
  if (u.components() != 2 || !(u.lattice() == rho.lattice()))
    throw PreconditionError("advecting velocity does not match the polymer field");
  const int n = rho.lattice().n();
  const double h = rho.lattice().spacing();
  const int nc = rho.cells();
  PolymerField out(rho.lattice(), rho.mesh_ptr(), 0.0);
  const auto u1 = u.values(0), u2 = u.values(1);
  parallel_points(rho.points(), [&](std::size_t x) {
    const int i = static_cast<int>(x / n), j = static_cast<int>(x % n);
    const double fi = i - dt * u1[x] / h, fj = j - dt * u2[x] / h;
    const double i0 = std::floor(fi), j0 = std::floor(fj);
    const double wi = fi - i0, wj = fj - j0;
    const int ia = ((static_cast<int>(i0) % n) + n) % n, ib = (ia + 1) % n;
    const int ja = ((static_cast<int>(j0) % n) + n) % n, jb = (ja + 1) % n;
    const double w[4] = {(1 - wi) * (1 - wj), (1 - wi) * wj, wi * (1 - wj), wi * wj};
    const double* src[4] = {rho.at(static_cast<std::size_t>(ia) * n + ja).data(),
                            rho.at(static_cast<std::size_t>(ia) * n + jb).data(),
                            rho.at(static_cast<std::size_t>(ib) * n + ja).data(),
                            rho.at(static_cast<std::size_t>(ib) * n + jb).data()};
    double* dst = out.at(x).data();
    for (int c = 0; c < nc; ++c)
      dst[c] = w[0] * src[0][c] + w[1] * src[1][c] + w[2] * src[2][c] + w[3] * src[3][c];
  });
  return out;
}

std::vector<fp::Drift> velocity_gradients(const SpectralField& u) {
  if (u.components() != 2) throw PreconditionError("velocity must be a 2-vector field");
  SpectralField d[2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) d[i][j] = lp::partial(u.component(i), j);
  std::vector<fp::Drift> out(u.lattice().size());
  for (std::size_t x = 0; x < out.size(); ++x)
    out[x] << d[0][0].values()[x], d[0][1].values()[x], d[1][0].values()[x], d[1][1].values()[x];
  return out;
}

CoupledSolver::CoupledSolver(const SimConfig& cfg)
    : cfg_((cfg.validate(), cfg)),
      lattice_(cfg.nx),
      partition_(lattice_),
      mesh_(std::make_shared<polymer::BallMesh>(
          cfg.n_r, cfg.n_theta, cfg.k,
          cfg.moment_quadrature ? polymer::StressQuadrature::moment : polymer::StressQuadrature::midpoint)),
      stepper_(std::make_shared<fp::FpStepper>(std::make_shared<fp::FpOperator>(mesh_), cfg.dt)),
      fluid_(fluid::FluidParams::make(cfg.nu, cfg.dt, cfg.dealias)),
      besov_(lp::BesovParams::make(cfg.s, cfg.p, cfg.r)) {}

MicroMacroState CoupledSolver::equilibrium_state() const {
  return {0.0, SpectralField::zeros(lattice_, 2), PolymerField(lattice_, mesh_, 1.0)};
}

MicroMacroState CoupledSolver::initial_state() const {
  MicroMacroState st = equilibrium_state();
  if (cfg_.init == "equilibrium" || cfg_.c0 == 0) return st;
  if (cfg_.init == "taylor-green") {
    SpectralField tg = fluid::taylor_green(lattice_);
    st.u = std::sqrt(cfg_.c0) / lp::besov_norm(tg, besov_, partition_) * tg;
    return st;
  }

  std::mt19937_64 rng(cfg_.seed);
  SpectralField u = lp::random_solenoidal(lattice_, rng, cfg_.band);
  const double un = lp::besov_norm(u, besov_, partition_);
  st.u = std::sqrt(cfg_.c0 * cfg_.velocity_share) / un * u;

  // mean-zero shapes in R, each modulated by its own random field in x
  const auto& mesh = *mesh_;
  std::vector<std::vector<double>> shapes;
  shapes.push_back(polymer::sample_distribution(mesh, [](double a, double) { return a; }));
  shapes.push_back(polymer::sample_distribution(mesh, [](double, double b) { return b; }));
  shapes.push_back(polymer::sample_distribution(mesh, [](double a, double b) { return a * a - b * b; }));
  shapes.push_back(polymer::sample_distribution(mesh, [](double a, double b) { return a * b; }));
  shapes.push_back(polymer::sample_distribution(mesh, [](double a, double b) { return a * a + b * b; }));
  for (auto& g : shapes) {
    const double m = polymer::mass(mesh, g);
    for (double& v : g) v -= m;
  }
  PolymerField dev(lattice_, mesh_, 0.0);
  for (const auto& g : shapes) {
    const SpectralField a = lp::random_field(lattice_, rng, cfg_.band);
    for (std::size_t x = 0; x < dev.points(); ++x) {
      auto row = dev.at(x);
      for (int c = 0; c < dev.cells(); ++c) row[c] += a.values()[x] * g[c];
    }
  }
  const double pn = polymer::polymer_besov_norm(dev, besov_, partition_);
  dev *= std::sqrt(cfg_.c0 * (1 - cfg_.velocity_share)) / pn;
  st.rho += dev;
  const double lowest = *std::min_element(st.rho.data().begin(), st.rho.data().end());
  if (lowest < 0) throw ConfigError("c0: initial distribution becomes negative; reduce c0");
  return st;
}

PolymerField CoupledSolver::advance_polymer(const PolymerField& rho, const SpectralField& u_adv) const {
  PolymerField out = advect_polymer(rho, u_adv, cfg_.dt);
  const auto grads = velocity_gradients(u_adv);
  parallel_points(out.points(), [&](std::size_t x) { stepper_->step(out.at(x), grads[x]); });
  return out;
}

SpectralField CoupledSolver::forcing(const PolymerField& rho) const {
  return polymer::stress_divergence(polymer::stress_tensor(rho));
}

SpectralField CoupledSolver::advance_fluid(const SpectralField& u, const SpectralField& v,
                                           const SpectralField& force, fluid::StepReport* report) const {
  return fluid::linear_ns_step(u, v, force, fluid_, report);
}

double CoupledSolver::drift_margin(const SpectralField& u) const {
  const auto grads = velocity_gradients(u);
  double m = std::numeric_limits<double>::infinity();
  for (const auto& a : grads) m = std::min(m, stepper_->op().drift_dt_limit(a));
  return m / cfg_.dt;
}

MicroMacroState coupled_step(const MicroMacroState& state, const CoupledSolver& solver,
                             fluid::StepReport* report) {
  PolymerField rho = solver.advance_polymer(state.rho, state.u);
  SpectralField force = solver.forcing(rho);
  SpectralField u = solver.advance_fluid(state.u, state.u, force, report);
  return {state.t + solver.config().dt, std::move(u), std::move(rho)};
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& NormHistory::columns() {
  static const std::vector<std::string> c = {
      "t",          "u_besov",         "u_sup",    "u_lp",         "psi_besov",
      "psi_full_besov", "psi_dissipation", "u_sup_sq_integral", "u_upper_sq_integral",
      "mass_drift", "cfl_margin",      "grad_trace", "lp_rate",    "lp_source"};
  return c;
}

std::vector<double> NormHistory::values(const NormRecord& r) const {
  return {r.t,          r.u_besov,        r.u_sup,          r.u_lp,
          r.psi_besov,  r.psi_full_besov, r.psi_dissipation, r.u_sup_sq_integral,
          r.u_upper_sq_integral, r.mass_drift, r.cfl_margin, r.grad_trace,
          r.lp_rate,    r.lp_source};
}

void NormHistory::write_csv(std::ostream& os) const {
  const auto& cols = columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  std::ostringstream line;
  line << std::setprecision(17);
  for (const auto& r : rows_) {
    line.str("");
    const auto v = values(r);
    for (std::size_t i = 0; i < v.size(); ++i) line << (i ? "," : "") << v[i];
    os << line.str() << "\n";
  }
}

namespace {

double abs_pow(double x, double p) { return p == 2 ? x * x : std::pow(std::abs(x), p); }

// Block norms and x-integrated dissipation of rho - 1, plus the block norms of rho itself.
struct PolymerMeasures {
  std::vector<double> dev_norms, full_norms, dissipation;
};

PolymerMeasures measure_polymer(const PolymerField& rho, const lp::DyadicPartition& part, double p,
                                bool with_dissipation) {
  PolymerMeasures out;
  const PolymerField dev = polymer::deviation(rho);
  const auto& mesh = rho.mesh();
  const double area = rho.lattice().cell_area();
  const int nc = rho.cells();
  polymer::for_each_block(dev, part, false, [&](int j, const PolymerField& b) {
    const double n = polymer::mixed_norm(b, p);
    out.dev_norms.push_back(n);
    if (j == -1) {
      // the low block of the constant 1 is 1 itself
      double acc = 0;
      for (std::size_t x = 0; x < b.points(); ++x) {
        const double* v = b.data().data() + x * nc;
        for (int c = 0; c < nc; ++c) acc += mesh.mass(c) * abs_pow(v[c] + 1.0, p);
      }
      out.full_norms.push_back(std::pow(acc * area, 1 / p));
    } else {
      out.full_norms.push_back(n);
    }
    if (with_dissipation) {
      std::vector<double> per(b.points());
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t x = 0; x < static_cast<std::ptrdiff_t>(b.points()); ++x)
        per[x] = polymer::dissipation_seminorm(mesh, b.at(x), p);
      double acc = 0;
      for (double v : per) acc += v;
      out.dissipation.push_back(acc * area);
    }
  });
  return out;
}

double max_grad_trace(const SpectralField& u) {
  double m = 0;
  for (const auto& a : velocity_gradients(u)) m = std::max(m, std::abs(a.trace()));
  return m;
}

}  // namespace

SimulationResult simulate(const SimConfig& cfg) {
  CoupledSolver solver(cfg);
  return simulate(solver, solver.initial_state());
}

SimulationResult simulate(const CoupledSolver& solver, MicroMacroState state) {
  const SimConfig& cfg = solver.config();
  const auto& part = solver.partition();
  const auto& bes = solver.besov();
  const double p = bes.p;
  const long steps = cfg.steps();

  SimulationResult res;
  NormRecord rec;
  std::vector<double> diss_integral;
  double prev_t = 0;
  double prev_lp_pow = 0;
  double prev_sup_sq = 0;
  double sup_u = 0, sup_psi = 0;

  auto record = [&](const MicroMacroState& st, bool first) {
    rec.t = st.t;
    const double dt_rec = st.t - prev_t;
    rec.u_besov = lp::besov_norm(st.u, bes, part);
    rec.u_lp = lp::lebesgue_norm(st.u, p);
    const double upper = lp::besov_norm(st.u, bes.shifted(1), part);
    if (!first) rec.u_upper_sq_integral += dt_rec * upper * upper;
    const auto pm = measure_polymer(st.rho, part, p, true);
    rec.psi_besov = lp::sequence_norm(pm.dev_norms, part.j_min(), bes.s, bes.r);
    rec.psi_full_besov = lp::sequence_norm(pm.full_norms, part.j_min(), bes.s, bes.r);
    if (diss_integral.empty()) diss_integral.assign(pm.dissipation.size(), 0.0);
    if (!first)
      for (std::size_t j = 0; j < diss_integral.size(); ++j) diss_integral[j] += dt_rec * pm.dissipation[j];
    std::vector<double> e(diss_integral.size());
    for (std::size_t j = 0; j < e.size(); ++j) e[j] = std::pow(diss_integral[j], 1 / p);
    rec.psi_dissipation = lp::sequence_norm(e, part.j_min(), bes.s, bes.r);
    rec.mass_drift = polymer::max_mass_defect(st.rho);
    const double fluid_cfl = fluid::cfl_number(st.u, cfg.dt);
    rec.cfl_margin = 1 - std::max(fluid_cfl, 1 / solver.drift_margin(st.u));
    rec.grad_trace = max_grad_trace(st.u);
    const double lp_pow = std::pow(rec.u_lp, p);
    rec.lp_rate = first ? 0.0 : (lp_pow - prev_lp_pow) / dt_rec;
    const SpectralField tau = polymer::stress_tensor(st.rho);
    const SpectralField pressure = fluid::pressure_field(st.u, polymer::stress_divergence(tau), cfg.dealias);
    const SpectralField tau_dev = polymer::stress_tensor(polymer::deviation(st.rho));
    const double up2 = std::pow(rec.u_lp, p - 2);
    rec.lp_source = (std::pow(lp::lebesgue_norm(pressure, p), 2) + std::pow(lp::lebesgue_norm(tau_dev, p), 2)) * up2;
    prev_t = st.t;
    prev_lp_pow = lp_pow;

    const double size = rec.u_besov * rec.u_besov + rec.psi_besov * rec.psi_besov;
    if (first) {
      res.initial_size = size;
      res.global_bound_data = rec.u_besov + rec.psi_besov;
    }
    res.sup_size = std::max(res.sup_size, size);
    sup_u = std::max(sup_u, rec.u_besov);
    sup_psi = std::max(sup_psi, rec.psi_besov);
    res.history.push(rec);

    const auto vals = res.history.values(rec);
    if (!std::all_of(vals.begin(), vals.end(), [](double v) { return std::isfinite(v); })) {
      res.completed = false;
      res.diagnostic = "non-finite norm at t = " + std::to_string(st.t);
    } else if (rec.u_besov > cfg.u_ceiling) {
      res.completed = false;
      res.diagnostic = "velocity norm exceeded the ceiling at t = " + std::to_string(st.t);
    } else if (rec.psi_besov > cfg.psi_ceiling) {
      res.completed = false;
      res.diagnostic = "polymer norm exceeded the ceiling at t = " + std::to_string(st.t);
    }
  };

  prev_sup_sq = std::pow(lp::sup_norm(state.u), 2);
  record(state, true);
  for (long n = 0; n < steps && res.completed; ++n) {
    state = coupled_step(state, solver);
    const double sup_sq = std::pow(lp::sup_norm(state.u), 2);
    rec.u_sup_sq_integral += 0.5 * cfg.dt * (prev_sup_sq + sup_sq);
    rec.u_sup = std::sqrt(sup_sq);
    prev_sup_sq = sup_sq;
    if ((n + 1) % cfg.record_every == 0 || n + 1 == steps) record(state, false);
  }
  const auto& last = res.history.back();
  res.global_bound_lhs = sup_u + cfg.nu * std::sqrt(last.u_upper_sq_integral) + sup_psi + last.psi_dissipation;
  res.final_state = std::move(state);
  return res;
}

// ---------------------------------------------------------------------------

namespace {

struct PolymerDiffNorms {
  double besov = 0;                 // ||d||_{B^{s-1}(L^p)}
  std::vector<double> dissipation;  // per block
};

PolymerDiffNorms polymer_difference(const PolymerField& a, const PolymerField& b,
                                    const lp::DyadicPartition& part, const lp::BesovParams& bes) {
  const PolymerField d = a - b;
  const auto sum = polymer::block_summary(d, bes.p, part, false, true);
  return {lp::sequence_norm(sum.norms, part.j_min(), bes.s, bes.r), sum.dissipation};
}

double sequence_from_integrals(const std::vector<double>& integrals, const lp::DyadicPartition& part,
                               const lp::BesovParams& bes) {
  std::vector<double> e(integrals.size());
  for (std::size_t j = 0; j < e.size(); ++j) e[j] = std::pow(integrals[j], 1 / bes.p);
  return lp::sequence_norm(e, part.j_min(), bes.s, bes.r);
}

bool finite_and_below(double v, double ceiling) { return std::isfinite(v) && v <= ceiling; }

}  // namespace

PicardResult picard_solve(const CoupledSolver& solver, const SpectralField& u0, const PolymerField& rho0,
                          double horizon, int n_iters, bool compare_direct) {
  const SimConfig& cfg = solver.config();
  const auto& part = solver.partition();
  const auto& bes = solver.besov();
  const lp::BesovParams lower = bes.shifted(-1);
  const double dt = cfg.dt;
  const long steps = std::lround(horizon / dt);
  if (steps < 1 || std::abs(steps * dt - horizon) > 1e-9 * horizon)
    throw ConfigError("T: Picard horizon must be a positive multiple of dt");
  if (n_iters < 1) throw ConfigError("picard_iterations: must be >= 1");

  PicardResult out;
  PicardReport& rep = out.report;
  const double u0n = lp::besov_norm(u0, bes, part);
  const double p0n = polymer::polymer_besov_norm(polymer::deviation(rho0), bes, part);
  rep.data_size = u0n * u0n + p0n * p0n;

  using Traj = std::vector<SpectralField>;
  // iterate 0 is constant in time
  const SpectralField u_init0 = lp::low_pass(u0, 0, part);
  const PolymerField rho_init0 = polymer::polymer_low_pass(rho0, 0, part);
  Traj u_prev(steps + 1, u_init0);
  Traj f_prev(steps + 1, solver.forcing(rho_init0));
  Traj u_prev2;  // iterate n - 1, drives the re-evolution of psi^n

  for (int n = 0; n < n_iters; ++n) {
    // iterate n + 1 driven by (u^n, div tau^n); psi^n re-evolved alongside for B_n
    SpectralField u = lp::low_pass(u0, n + 1, part);
    PolymerField rho = polymer::polymer_low_pass(rho0, n + 1, part);
    PolymerField rho_old = polymer::polymer_low_pass(rho0, n, part);
    Traj u_next{u}, f_next{solver.forcing(rho)};
    u_next.reserve(steps + 1);
    f_next.reserve(steps + 1);

    double a_sup = 0, a_int = 0, b_sup = 0;
    double u_sup_sq = 0, u_upper = 0, psi_sup_sq = 0;
    std::vector<double> b_diss;
    auto account = [&](long k) {
      const SpectralField du = u - u_prev[k];
      const double dl = lp::besov_norm(du, lower, part);
      a_sup = std::max(a_sup, dl * dl);
      const double un = lp::besov_norm(u, bes, part);
      u_sup_sq = std::max(u_sup_sq, un * un);
      const auto pd = polymer_difference(rho, rho_old, part, lower);
      b_sup = std::max(b_sup, pd.besov * pd.besov);
      const double pn = polymer::polymer_besov_norm(polymer::deviation(rho), bes, part);
      psi_sup_sq = std::max(psi_sup_sq, pn * pn);
      if (k > 0) {
        const double ds = lp::besov_norm(du, bes, part);
        a_int += dt * ds * ds;
        const double up = lp::besov_norm(u, bes.shifted(1), part);
        u_upper += dt * up * up;
        if (b_diss.empty()) b_diss.assign(pd.dissipation.size(), 0.0);
        for (std::size_t j = 0; j < b_diss.size(); ++j) b_diss[j] += dt * pd.dissipation[j];
      }
      if (!finite_and_below(un, cfg.u_ceiling) || !finite_and_below(pn, cfg.psi_ceiling)) {
        rep.aborted = true;
        rep.diagnostic = "iterate " + std::to_string(n + 1) + " exceeded the norm ceiling at t = " +
                         std::to_string(k * dt);
      }
    };

    account(0);
    for (long k = 0; k < steps && !rep.aborted; ++k) {
      rho = solver.advance_polymer(rho, u_prev[k]);
      if (n > 0) rho_old = solver.advance_polymer(rho_old, u_prev2[k]);
      u = solver.advance_fluid(u, u_prev[k], f_prev[k + 1]);
      u_next.push_back(u);
      f_next.push_back(solver.forcing(rho));
      account(k + 1);
    }
    if (rep.aborted) break;

    const double e = b_diss.empty() ? 0.0 : sequence_from_integrals(b_diss, part, lower);
    rep.a.push_back(a_sup + a_int);
    rep.b.push_back(b_sup + e * e);
    rep.u_sup_sq.push_back(u_sup_sq);
    rep.u_upper_sq.push_back(u_upper);
    rep.psi_sup_sq.push_back(psi_sup_sq);

    u_prev2 = std::move(u_prev);
    u_prev = std::move(u_next);
    f_prev = std::move(f_next);
    out.final_iterate = MicroMacroState{horizon, u, rho};
  }

  // uniform bounds: later iterates may not exceed twice the level of iterates 1 and 2
  const std::size_t ni = rep.u_sup_sq.size();
  for (std::size_t i = 0; i < ni; ++i) {
    const std::size_t ref_end = std::min<std::size_t>(2, ni);
    double ru = 0, rw = 0, rp = 0;
    for (std::size_t q = 0; q < ref_end; ++q) {
      ru = std::max(ru, rep.u_sup_sq[q]);
      rw = std::max(rw, rep.u_upper_sq[q]);
      rp = std::max(rp, rep.psi_sup_sq[q]);
    }
    rep.uniform_bound.push_back(rep.u_sup_sq[i] <= 2 * ru + 1e-300 && rep.u_upper_sq[i] <= 2 * rw + 1e-300 &&
                                rep.psi_sup_sq[i] <= 2 * rp + 1e-300);
  }
  // ratios between differences already at round-off level carry no information
  const double floor = 1e-24 * (rep.a.empty() ? 0.0 : *std::max_element(rep.a.begin(), rep.a.end()));
  for (std::size_t i = 3; i < rep.a.size(); ++i)
    if (rep.a[i - 1] > floor && rep.a[i] > floor) rep.worst_late_ratio = std::max(rep.worst_late_ratio, rep.a[i] / rep.a[i - 1]);
  rep.threshold_horizon = rep.worst_late_ratio > 0 ? horizon * 0.5 / rep.worst_late_ratio
                                                   : std::numeric_limits<double>::infinity();

  if (compare_direct && !rep.aborted && !rep.a.empty()) {
    MicroMacroState st{0.0, u0, rho0};
    for (long k = 0; k < steps; ++k) st = coupled_step(st, solver);
    rep.direct_u_difference = lp::besov_norm(st.u - out.final_iterate->u, lower, part);
    rep.direct_psi_difference = polymer::polymer_besov_norm(st.rho - out.final_iterate->rho, lower, part);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// value of the velocity integral at the first record with t >= target
double integral_at(const NormHistory& h, double target) {
  for (const auto& r : h.rows())
    if (r.t >= target - 1e-12) return r.u_sup_sq_integral;
  return h.back().u_sup_sq_integral;
}

std::string growth_trend(const NormHistory& h) {
  const double t = h.back().t;
  if (t <= 0) return "linear";
  const double first = integral_at(h, 0.5 * t);
  const double second = h.back().u_sup_sq_integral - first;
  if (first <= 0 && second <= 0) return "decelerating";
  const double ratio = second / std::max(first, 1e-300);
  if (ratio > 1.05) return "accelerating";
  if (ratio < 0.95) return "decelerating";
  return "linear";
}

}  // namespace

BlowupReport blowup_monitor(const NormHistory& history, const NormHistory* refined) {
  if (history.empty()) throw PreconditionError("empty history");
  BlowupReport rep;
  rep.velocity_integral = history.back().u_sup_sq_integral;
  for (const auto& r : history.rows()) rep.psi_sup_besov = std::max(rep.psi_sup_besov, r.psi_full_besov);
  rep.psi_dissipation = history.back().psi_dissipation;
  rep.velocity_trend = growth_trend(history);
  const auto& rows = history.rows();
  const double mid_max = [&] {
    double m = 0;
    for (std::size_t i = 0; i <= rows.size() / 2; ++i) m = std::max(m, rows[i].psi_full_besov);
    return m;
  }();
  rep.psi_trend = rep.psi_sup_besov > 1.05 * mid_max ? "growing" : "bounded";
  if (refined && !refined->empty()) {
    const bool both = rep.velocity_trend == "accelerating" && growth_trend(*refined) == "accelerating";
    rep.suspected = both && refined->back().u_sup_sq_integral > 1.05 * rep.velocity_integral;
  }
  rep.note = "trend report only; a finite run cannot certify blow-up";
  return rep;
}

}  // namespace fene::coupled
