#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fene/fluid_solver.hpp"
#include "fene/fokker_planck.hpp"
#include "fene/polymer_space.hpp"

namespace fene::coupled {

struct SimConfig {
  int nx = 64;
  int n_r = 16;
  int n_theta = 16;
  double k = 1.0;
  double nu = 0.1;
  double p = 2;
  double r = 2;
  double s = 2.5;
  double dt = 5e-3;
  double horizon = 1.0;
  // Initial-data scale: ||u0||^2_{B^s} + ||psi0 - psi_inf||^2_{B^s(L^p)} = c0.
  double c0 = 1e-3;
  std::string init = "random";  // equilibrium | taylor-green | random
  std::uint64_t seed = 1;
  // Largest wavenumber in random initial data.
  double band = 4;
  // Share of c0 carried by the velocity.
  double velocity_share = 0.5;
  bool dealias = true;
  bool moment_quadrature = true;
  double u_ceiling = 1e6;
  double psi_ceiling = 1e6;
  // Norms are evaluated every record_every steps.
  int record_every = 1;
  int picard_iterations = 12;

  // Throws ConfigError naming the offending field.
  void validate() const;
  long steps() const;
};

struct MicroMacroState {
  double t = 0;
  lp::SpectralField u;
  polymer::PolymerField rho;
};

// Semi-Lagrangian transport: rho(x) <- rho at x - dt u(x), bilinear in x, cell-wise.
polymer::PolymerField advect_polymer(const polymer::PolymerField& rho, const lp::SpectralField& u,
                                     double dt);

// A(x)_ij = d_j u_i(x) at every grid point.
std::vector<fp::Drift> velocity_gradients(const lp::SpectralField& u);

class CoupledSolver {
 public:
  explicit CoupledSolver(const SimConfig& cfg);

  const SimConfig& config() const { return cfg_; }
  const lp::FrequencyLattice& lattice() const { return lattice_; }
  const lp::DyadicPartition& partition() const { return partition_; }
  std::shared_ptr<const polymer::BallMesh> mesh() const { return mesh_; }
  const fp::FpStepper& stepper() const { return *stepper_; }
  const fluid::FluidParams& fluid() const { return fluid_; }
  const lp::BesovParams& besov() const { return besov_; }

  MicroMacroState initial_state() const;
  MicroMacroState equilibrium_state() const;

  // Transport by u_adv followed by the per-point Fokker-Planck step with drift grad u_adv.
  polymer::PolymerField advance_polymer(const polymer::PolymerField& rho,
                                        const lp::SpectralField& u_adv) const;
  // div tau(rho)
  lp::SpectralField forcing(const polymer::PolymerField& rho) const;
  lp::SpectralField advance_fluid(const lp::SpectralField& u, const lp::SpectralField& v,
                                  const lp::SpectralField& force,
                                  fluid::StepReport* report = nullptr) const;

  // Smallest Fokker-Planck drift limit over the grid, divided by dt.
  double drift_margin(const lp::SpectralField& u) const;

 private:
  SimConfig cfg_;
  lp::FrequencyLattice lattice_;
  lp::DyadicPartition partition_;
  std::shared_ptr<const polymer::BallMesh> mesh_;
  std::shared_ptr<fp::FpStepper> stepper_;
  fluid::FluidParams fluid_;
  lp::BesovParams besov_;
};

// advect -> Fokker-Planck with grad u -> stress -> fluid step forced by div tau.
MicroMacroState coupled_step(const MicroMacroState& state, const CoupledSolver& solver,
                             fluid::StepReport* report = nullptr);

struct NormRecord {
  double t = 0;
  double u_besov = 0;             // ||u||_{B^s_{p,r}}
  double u_sup = 0;               // ||u||_inf
  double u_lp = 0;                // ||u||_{L^p}
  double psi_besov = 0;           // ||psi - psi_inf||_{B^s_{p,r}(L^p)}
  double psi_full_besov = 0;      // ||psi||_{B^s_{p,r}(L^p)}
  double psi_dissipation = 0;     // E^s_{p,r}(t) of psi - psi_inf
  double u_sup_sq_integral = 0;   // int_0^t ||u||_inf^2
  double u_upper_sq_integral = 0; // int_0^t ||u||_{B^{s+1}}^2
  double mass_drift = 0;          // max_x |int_B psi(x) - 1|
  double cfl_margin = 0;          // 1 - max(fluid CFL, dt / drift limit)
  double grad_trace = 0;          // max_x |tr grad u|
  double lp_rate = 0;             // measured d/dt ||u||_{L^p}^p
  double lp_source = 0;           // ||P||_p^2 ||u||_p^{p-2} + ||tau~||_p^2 ||u||_p^{p-2}
};

class NormHistory {
 public:
  static const std::vector<std::string>& columns();
  void push(const NormRecord& r) { rows_.push_back(r); }
  const std::vector<NormRecord>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  const NormRecord& back() const { return rows_.back(); }
  std::vector<double> values(const NormRecord& r) const;
  // header row plus one row per record, 17 significant digits
  void write_csv(std::ostream& os) const;

 private:
  std::vector<NormRecord> rows_;
};

struct SimulationResult {
  NormHistory history;
  std::optional<MicroMacroState> final_state;
  bool completed = true;
  std::string diagnostic;
  // ||u0||^2_{B^s} + ||psi0 - psi_inf||^2 as measured
  double initial_size = 0;
  // sup_t (||u||^2_{B^s} + ||psi - psi_inf||^2_{B^s(L^p)})
  double sup_size = 0;
  // sup ||u|| + nu ||u||_{L^2 B^{s+1}} + sup ||psi~|| + ||psi~||_E and the matching data size
  double global_bound_lhs = 0;
  double global_bound_data = 0;
};

SimulationResult simulate(const SimConfig& cfg);
SimulationResult simulate(const CoupledSolver& solver, MicroMacroState state);

struct PicardReport {
  // velocity difference: sup ||u^{n+1} - u^n||^2_{B^{s-1}} + int ||u^{n+1} - u^n||^2_{B^s}
  std::vector<double> a;
  // polymer difference: sup ||psi^{n+1} - psi^n||^2_{B^{s-1}(L^p)} + E^{s-1} of the difference, squared
  std::vector<double> b;
  // per iterate n >= 1: sup ||u^n||^2_{B^s}, int ||u^n||^2_{B^{s+1}}, sup ||psi~^n||^2
  std::vector<double> u_sup_sq, u_upper_sq, psi_sup_sq;
  std::vector<bool> uniform_bound;
  double data_size = 0;            // ||u0||^2_{B^s} + ||psi0 - psi_inf||^2_{B^s(L^p)}
  double worst_late_ratio = 0;     // max_{n >= 3} A_n / A_{n-1}
  double threshold_horizon = 0;    // horizon at which the measured ratio would reach 1/2
  double direct_u_difference = -1; // ||u^N(T) - u_direct(T)||_{B^{s-1}}
  double direct_psi_difference = -1;
  bool aborted = false;
  std::string diagnostic;
};

struct PicardResult {
  PicardReport report;
  std::optional<MicroMacroState> final_iterate;  // empty when aborted before iterate 1
};

PicardResult picard_solve(const CoupledSolver& solver, const lp::SpectralField& u0,
                          const polymer::PolymerField& rho0, double horizon, int n_iters,
                          bool compare_direct = true);

struct BlowupReport {
  double velocity_integral = 0;  // int_0^T ||u||_inf^2
  double psi_sup_besov = 0;      // sup_t ||psi||_{B^s(L^p)}
  double psi_dissipation = 0;    // E^s_{p,r}(T)
  std::string velocity_trend;    // decelerating | linear | accelerating
  std::string psi_trend;         // bounded | growing
  bool suspected = false;
  std::string note;
};

// With a refined history (same run at dt/2), flags super-linear growth of the
// velocity integral that strengthens under refinement.  Never certifies blow-up.
BlowupReport blowup_monitor(const NormHistory& history, const NormHistory* refined = nullptr);

}  // namespace fene::coupled
