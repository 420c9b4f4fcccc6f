#include "fene/reports.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fene/errors.hpp"

namespace fene::harness {

namespace {

// JSON has no infinity; keep the value readable
Json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? Json("nan") : Json(v > 0 ? "inf" : "-inf");
}

}  // namespace

Json to_json(const ProbeReport& r) {
  Json j;
  j["kind"] = r.kind;
  j["property"] = r.property;
  j["domain"] = "periodic torus [0, 2pi)^2";
  j["seed"] = r.seed;
  j["ensemble"] = r.ensemble;
  j["resolutions"] = r.resolutions;
  Json scales = Json::array();
  for (const auto& s : r.scales) scales.push_back({{"label", s.label}, {"value", number(s.value)}});
  j["scales"] = scales;
  j["constant"] = number(r.constant);
  j["reference"] = number(r.reference);
  j["stable"] = r.stable;
  j["passed"] = r.passed;
  j["verdict"] = r.verdict;
  j["notes"] = r.notes;
  return j;
}

Json to_json(const coupled::PicardReport& r) {
  Json j;
  j["kind"] = "picard";
  j["property"] = "contraction of successive linearized iterates";
  auto arr = [](const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(number(x));
    return a;
  };
  j["velocity_difference"] = arr(r.a);
  j["polymer_difference"] = arr(r.b);
  j["u_sup_sq"] = arr(r.u_sup_sq);
  j["u_upper_sq_integral"] = arr(r.u_upper_sq);
  j["psi_sup_sq"] = arr(r.psi_sup_sq);
  j["uniform_bound"] = Json(std::vector<bool>(r.uniform_bound.begin(), r.uniform_bound.end()));
  j["data_size"] = number(r.data_size);
  j["worst_late_ratio"] = number(r.worst_late_ratio);
  j["contractive"] = r.worst_late_ratio <= 0.5;
  j["threshold_horizon"] = number(r.threshold_horizon);
  j["direct_u_difference"] = number(r.direct_u_difference);
  j["direct_psi_difference"] = number(r.direct_psi_difference);
  j["aborted"] = r.aborted;
  j["diagnostic"] = r.diagnostic;
  return j;
}

Json to_json(const coupled::BlowupReport& r) {
  return {{"velocity_integral", number(r.velocity_integral)},
          {"psi_sup_besov", number(r.psi_sup_besov)},
          {"psi_dissipation", number(r.psi_dissipation)},
          {"velocity_trend", r.velocity_trend},
          {"psi_trend", r.psi_trend},
          {"suspected", r.suspected},
          {"note", r.note}};
}

Json config_json(const RunConfig& cfg) {
  const auto& s = cfg.sim;
  return {{"nx", s.nx},
          {"n_r", s.n_r},
          {"n_theta", s.n_theta},
          {"k", s.k},
          {"nu", s.nu},
          {"p", s.p},
          {"r", number(s.r)},
          {"s", s.s},
          {"dt", s.dt},
          {"T", s.horizon},
          {"c0", s.c0},
          {"init", s.init},
          {"seed", s.seed},
          {"band", s.band},
          {"velocity_share", s.velocity_share},
          {"dealias", s.dealias},
          {"moment_quadrature", s.moment_quadrature},
          {"u_ceiling", s.u_ceiling},
          {"psi_ceiling", s.psi_ceiling},
          {"record_every", s.record_every},
          {"picard_iterations", s.picard_iterations},
          {"fp_drift", cfg.fp_drift},
          {"fp_amplitude", cfg.fp_amplitude},
          {"fp_init", cfg.fp_init},
          {"fp_perturbation", cfg.fp_perturbation},
          {"fp_exponents", cfg.fp_exponents},
          {"certificate_constant", cfg.certificate_constant}};
}

Json to_json(const FpSummary& s) {
  return {{"kind", "fokker-planck"},
          {"property", "energy certificate E_p + 2(p-1)/p D_p <= C exp(C int |A|^2) E_p(0)"},
          {"horizon", s.horizon},
          {"max_mass_step_drift", number(s.max_mass_step_drift)},
          {"max_identity_residual", number(s.max_identity_residual)},
          {"min_cfl_margin", number(s.min_cfl_margin)},
          {"required_constant", number(s.required_constant)},
          {"checked_constant", number(s.checked_constant)},
          {"worst_certificate_ratio", number(s.worst_certificate_ratio)},
          {"decay_rate", number(s.decay_rate)},
          {"decay_oracle", number(s.decay_oracle)}};
}

Json simulation_json(const coupled::SimulationResult& r, const coupled::SimConfig& cfg,
                     const coupled::BlowupReport& blowup) {
  Json j;
  j["kind"] = "coupled";
  j["completed"] = r.completed;
  j["diagnostic"] = r.diagnostic;
  j["initial_size"] = number(r.initial_size);
  j["sup_size"] = number(r.sup_size);
  j["bound_factor"] = 32;
  j["bound_satisfied"] = r.sup_size <= 32 * std::max(cfg.c0, r.initial_size);
  j["global_bound_lhs"] = number(r.global_bound_lhs);
  j["global_bound_data"] = number(r.global_bound_data);
  j["columns"] = coupled::NormHistory::columns();
  j["blowup"] = to_json(blowup);
  return j;
}

void write_fp_csv(std::ostream& os, const fp::FpSolution& sol, const std::vector<double>& exponents) {
  os << "t,mass,drift_sq_integral";
  for (double p : exponents) os << ",energy_p" << p;
  for (double p : exponents) os << ",dissipation_p" << p;
  os << "\n" << std::setprecision(17);
  for (const auto& r : sol.history) {
    os << r.t << "," << r.mass << "," << r.drift_sq_integral;
    for (double e : r.energy) os << "," << e;
    for (double d : r.dissipation) os << "," << d;
    os << "\n";
  }
}

void write_json(const std::string& path, Json body) {
  Json out;
  out["schema"] = kSchemaVersion;
  for (auto& [k, v] : body.items()) out[k] = v;
  write_text(path, out.dump(2) + "\n");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("out: cannot write '" + path + "'");
  f << text;
}

}  // namespace fene::harness
