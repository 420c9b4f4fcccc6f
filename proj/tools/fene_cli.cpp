#include <CLI11.hpp>
#include <omp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "fene/config.hpp"
#include "fene/errors.hpp"
#include "fene/probes.hpp"
#include "fene/reports.hpp"

using namespace fene;
using namespace fene::harness;

namespace {

enum Exit { kPass = 0, kUsage = 1, kCertificate = 2, kNumerical = 3 };

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  long seed = -1;
  std::string out = ".";
  int threads = 0;
};

RunConfig resolve(const Common& c) {
  RunConfig base;
  if (!c.config_path.empty()) {
    std::ifstream in(c.config_path);
    if (!in) throw ConfigError("config: cannot open '" + c.config_path + "'");
    std::stringstream text;
    text << in.rdbuf();
    for (const auto& s : c.sets) text << "\n" << s;
    if (c.seed >= 0) text << "\nseed = " << c.seed;
    return parse_config(text);
  }
  std::stringstream text;
  for (const auto& s : c.sets) text << s << "\n";
  if (c.seed >= 0) text << "seed = " << c.seed << "\n";
  return parse_config(text);
}

std::string out_path(const Common& c, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(c.out, ec);
  if (ec) throw ConfigError("out: cannot create '" + c.out + "': " + ec.message());
  return (std::filesystem::path(c.out) / name).string();
}

int run_validate(const std::string& kind, const ProbeOptions& opts, const Common& c) {
  const ProbeReport rep = run_probe(kind, opts);
  write_json(out_path(c, "probe_" + kind + ".json"), to_json(rep));
  std::cout << kind << ": " << (rep.passed ? "pass" : "FAIL") << " constant=" << rep.constant << " ("
            << rep.verdict << ")\n";
  return rep.passed ? kPass : kCertificate;
}

int run_fp(const Common& c) {
  const RunConfig cfg = resolve(c);
  const auto& s = cfg.sim;
  if (!(cfg.fp_perturbation > -1 && cfg.fp_perturbation < 1))
    throw ConfigError("fp_perturbation: must lie in (-1, 1) to keep the distribution positive");
  auto mesh = std::make_shared<polymer::BallMesh>(
      s.n_r, s.n_theta, s.k, s.moment_quadrature ? polymer::StressQuadrature::moment : polymer::StressQuadrature::midpoint);
  fp::FpStepper stepper(std::make_shared<fp::FpOperator>(mesh), s.dt);

  polymer::ConfigDistribution rho0;
  if (cfg.fp_init == "r1") {
    rho0 = polymer::sample_distribution(*mesh, [&](double x, double) { return 1 + cfg.fp_perturbation * x; });
  } else {
    std::mt19937_64 rng(s.seed);
    std::normal_distribution<double> g;
    polymer::ConfigDistribution noise(mesh->cells());
    for (double& v : noise) v = g(rng);
    const double m = polymer::mass(*mesh, noise);
    double top = 0;
    for (double& v : noise) top = std::max(top, std::abs(v -= m));
    rho0.resize(noise.size());
    for (std::size_t i = 0; i < noise.size(); ++i) rho0[i] = 1 + cfg.fp_perturbation * noise[i] / top;
  }

  fp::CertificateOptions opts;
  opts.exponents = cfg.fp_exponents;
  opts.constant = cfg.certificate_constant;
  const auto drift = make_drift_signal(cfg.fp_drift, cfg.fp_amplitude, s.seed);
  fp::FpSolution sol;
  try {
    sol = fp::fp_solve(stepper, rho0, drift, s.horizon, opts, s.record_every);
  } catch (const CertificateViolation& e) {
    std::cerr << "certificate violation at t = " << e.time << ": " << e.what() << "\n";
    return kCertificate;
  }

  FpSummary sum;
  sum.horizon = s.horizon;
  sum.max_mass_step_drift = sol.max_mass_step_drift;
  sum.max_identity_residual = sol.max_identity_residual;
  sum.min_cfl_margin = sol.min_cfl_margin;
  sum.required_constant = fp::required_certificate_constant(sol, cfg.fp_exponents);
  sum.checked_constant = cfg.certificate_constant;
  sum.worst_certificate_ratio = sol.worst_certificate_ratio;
  sum.decay_oracle = 2 / poincare_oracle(*mesh);
  sum.decay_rate = NAN;
  const auto two = std::find(cfg.fp_exponents.begin(), cfg.fp_exponents.end(), 2.0);
  if (two != cfg.fp_exponents.end()) {
    // ||rho||^2 = mass^2 + ||rho - mass||^2
    const std::size_t q = two - cfg.fp_exponents.begin();
    std::vector<double> t, y;
    for (const auto& r : sol.history)
      if (r.t >= 0.5 * s.horizon) {
        const double dev = r.energy[q] - r.mass * r.mass;
        if (dev > 0) {
          t.push_back(r.t);
          y.push_back(std::log(dev));
        }
      }
    if (t.size() >= 2) sum.decay_rate = -fitted_slope(t, y);
  }
  {
    std::ofstream f(out_path(c, "fp_history.csv"), std::ios::binary);
    write_fp_csv(f, sol, cfg.fp_exponents);
  }
  Json j = to_json(sum);
  j["config"] = config_json(cfg);
  write_json(out_path(c, "fp_summary.json"), j);
  std::cout << "fp: mass drift " << sum.max_mass_step_drift << ", required constant " << sum.required_constant
            << ", decay rate " << sum.decay_rate << " (oracle " << sum.decay_oracle << ")\n";
  return kPass;
}

int run_couple(const Common& c) {
  const RunConfig cfg = resolve(c);
  const auto res = coupled::simulate(cfg.sim);
  const auto blowup = coupled::blowup_monitor(res.history);
  {
    std::ofstream f(out_path(c, "history.csv"), std::ios::binary);
    res.history.write_csv(f);
  }
  Json j = simulation_json(res, cfg.sim, blowup);
  j["config"] = config_json(cfg);
  write_json(out_path(c, "summary.json"), j);
  std::cout << "couple: " << (res.completed ? "completed" : res.diagnostic) << ", sup size " << res.sup_size
            << " (initial " << res.initial_size << ")\n";
  if (!res.completed) return kNumerical;
  return j["bound_satisfied"].get<bool>() ? kPass : kCertificate;
}

int run_picard(const Common& c) {
  const RunConfig cfg = resolve(c);
  coupled::CoupledSolver solver(cfg.sim);
  const auto st = solver.initial_state();
  const auto res = coupled::picard_solve(solver, st.u, st.rho, cfg.sim.horizon, cfg.sim.picard_iterations);
  Json j = to_json(res.report);
  j["config"] = config_json(cfg);
  write_json(out_path(c, "picard.json"), j);
  std::cout << "picard: worst late ratio " << res.report.worst_late_ratio << ", direct difference "
            << res.report.direct_u_difference << "\n";
  if (res.report.aborted) return kNumerical;
  return res.report.worst_late_ratio <= 0.5 ? kPass : kCertificate;
}

void add_common(CLI::App* app, Common& c, bool with_config) {
  if (with_config) {
    app->add_option("--config", c.config_path, "flat key = value configuration file");
    app->add_option("--set", c.sets, "override, key=value")->take_all();
  }
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--threads", c.threads, "OpenMP thread count");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FENE micro-macro solver and inequality probes"};
  app.require_subcommand(1);

  Common validate_common, fp_common, couple_common, picard_common;
  std::string kind;
  ProbeOptions popts;
  auto* validate = app.add_subcommand("validate", "run an inequality probe and write a JSON report");
  validate->add_option("kind", kind, "probe kind")->required();
  validate->add_option("--nx", popts.nx, "lattice size");
  validate->add_option("--ensemble", popts.ensemble, "ensemble size");
  validate->add_option("--n_r", popts.n_r, "configuration mesh resolution");
  add_common(validate, validate_common, false);

  auto* fp_cmd = app.add_subcommand("fp", "single-point Fokker-Planck run");
  add_common(fp_cmd, fp_common, true);
  auto* couple = app.add_subcommand("couple", "coupled micro-macro run");
  add_common(couple, couple_common, true);
  auto* picard = app.add_subcommand("picard", "Picard iteration diagnostics");
  add_common(picard, picard_common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    auto run = [](const Common& c, auto&& body) {
      if (c.threads > 0) omp_set_num_threads(c.threads);
      return body();
    };
    if (*validate) {
      if (validate_common.seed >= 0) popts.seed = static_cast<std::uint64_t>(validate_common.seed);
      return run(validate_common, [&] { return run_validate(kind, popts, validate_common); });
    }
    if (*fp_cmd) return run(fp_common, [&] { return run_fp(fp_common); });
    if (*couple) return run(couple_common, [&] { return run_couple(couple_common); });
    if (*picard) return run(picard_common, [&] { return run_picard(picard_common); });
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kUsage;
  } catch (const CertificateViolation& e) {
    std::cerr << "certificate violation at t = " << e.time << ": " << e.what() << "\n";
    return kCertificate;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
