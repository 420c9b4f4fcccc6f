#include "fene/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "fene/errors.hpp"

namespace fene::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out))
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

long to_int(const std::string& key, const std::string& v) {
  long out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

}  // namespace

void set_field(RunConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  auto& s = cfg.sim;
  if (key == "nx") s.nx = static_cast<int>(to_int(key, v));
  else if (key == "n_r") s.n_r = static_cast<int>(to_int(key, v));
  else if (key == "n_theta") s.n_theta = static_cast<int>(to_int(key, v));
  else if (key == "k") s.k = to_double(key, v);
  else if (key == "nu") s.nu = to_double(key, v);
  else if (key == "p") s.p = to_double(key, v);
  else if (key == "r") s.r = v == "inf" ? lp::BesovParams::infinity : to_double(key, v);
  else if (key == "s") s.s = to_double(key, v);
  else if (key == "dt") s.dt = to_double(key, v);
  else if (key == "T") s.horizon = to_double(key, v);
  else if (key == "c0") s.c0 = to_double(key, v);
  else if (key == "init") s.init = v == "random-seeded" ? "random" : v;
  else if (key == "seed") {
    const long x = to_int(key, v);
    if (x < 0) throw ConfigError("seed: must be non-negative");
    s.seed = static_cast<std::uint64_t>(x);
  }
  else if (key == "band") s.band = to_double(key, v);
  else if (key == "velocity_share") s.velocity_share = to_double(key, v);
  else if (key == "dealias") s.dealias = to_bool(key, v);
  else if (key == "moment_quadrature") s.moment_quadrature = to_bool(key, v);
  else if (key == "u_ceiling") s.u_ceiling = to_double(key, v);
  else if (key == "psi_ceiling") s.psi_ceiling = to_double(key, v);
  else if (key == "record_every") s.record_every = static_cast<int>(to_int(key, v));
  else if (key == "picard_iterations") s.picard_iterations = static_cast<int>(to_int(key, v));
  else if (key == "fp_drift") cfg.fp_drift = v;
  else if (key == "fp_amplitude") cfg.fp_amplitude = to_double(key, v);
  else if (key == "fp_init") cfg.fp_init = v;
  else if (key == "fp_perturbation") cfg.fp_perturbation = to_double(key, v);
  else if (key == "fp_exponents") {
    std::vector<double> ps;
    std::stringstream ss(v);
    for (std::string item; std::getline(ss, item, ',');) {
      const double p = to_double(key, trim(item));
      if (p < 2) throw ConfigError("fp_exponents: exponents must be >= 2");
      ps.push_back(p);
    }
    if (ps.empty()) throw ConfigError("fp_exponents: empty list");
    cfg.fp_exponents = ps;
  }
  else if (key == "certificate_constant") cfg.certificate_constant = to_double(key, v);
  else throw ConfigError(key + ": unknown configuration key");
}

void apply_assignment(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(assignment + ": expected key=value");
  set_field(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

RunConfig parse_config(std::istream& in, RunConfig cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.find('=') == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    apply_assignment(cfg, line);
  }
  cfg.sim.validate();
  if (cfg.fp_drift != "zero" && cfg.fp_drift != "shear" && cfg.fp_drift != "extension" &&
      cfg.fp_drift != "rotation" && cfg.fp_drift != "oscillating" && cfg.fp_drift != "random")
    throw ConfigError("fp_drift: unknown drift '" + cfg.fp_drift + "'");
  if (cfg.fp_init != "r1" && cfg.fp_init != "random") throw ConfigError("fp_init: expected r1 or random");
  return cfg;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  return parse_config(in, std::move(base));
}

std::string format_config(const RunConfig& cfg) {
  const auto& s = cfg.sim;
  std::ostringstream os;
  os.precision(17);
  os << "nx = " << s.nx << "\nn_r = " << s.n_r << "\nn_theta = " << s.n_theta << "\nk = " << s.k
     << "\nnu = " << s.nu << "\np = " << s.p << "\nr = " << (std::isinf(s.r) ? std::string("inf") : std::to_string(s.r))
     << "\ns = " << s.s << "\ndt = " << s.dt << "\nT = " << s.horizon << "\nc0 = " << s.c0
     << "\ninit = " << s.init << "\nseed = " << s.seed << "\nband = " << s.band
     << "\nvelocity_share = " << s.velocity_share << "\ndealias = " << (s.dealias ? "true" : "false")
     << "\nmoment_quadrature = " << (s.moment_quadrature ? "true" : "false") << "\nu_ceiling = " << s.u_ceiling
     << "\npsi_ceiling = " << s.psi_ceiling << "\nrecord_every = " << s.record_every
     << "\npicard_iterations = " << s.picard_iterations << "\nfp_drift = " << cfg.fp_drift
     << "\nfp_amplitude = " << cfg.fp_amplitude << "\nfp_init = " << cfg.fp_init
     << "\nfp_perturbation = " << cfg.fp_perturbation << "\nfp_exponents = ";
  for (std::size_t i = 0; i < cfg.fp_exponents.size(); ++i) os << (i ? "," : "") << cfg.fp_exponents[i];
  os << "\ncertificate_constant = " << cfg.certificate_constant << "\n";
  return os.str();
}

fp::DriftSignal make_drift_signal(const std::string& kind, double amp, std::uint64_t seed) {
  if (kind == "zero") return [](double) { return fp::Drift::Zero().eval(); };
  if (kind == "shear") return [amp](double) { return fp::Drift{{0, amp}, {0, 0}}; };
  if (kind == "extension") return [amp](double) { return fp::Drift{{amp, 0}, {0, -amp}}; };
  if (kind == "rotation") return [amp](double) { return fp::Drift{{0, amp}, {-amp, 0}}; };
  if (kind == "oscillating")
    return [amp](double t) {
      const double c = std::cos(4 * t), s = std::sin(4 * t);
      return fp::Drift{{amp * c, amp * s}, {amp * s, -amp * c}};
    };
  if (kind == "random") {
    // trace-free combination of a few random frequencies
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::array<double, 12> c{};
    for (double& x : c) x = g(rng);
    return [amp, c](double t) {
      double a[3] = {0, 0, 0};
      for (int m = 0; m < 3; ++m)
        for (int q = 0; q < 2; ++q) a[m] += c[4 * m + 2 * q] * std::sin((q + 1) * t + c[4 * m + 2 * q + 1]);
      const double scale = amp / std::sqrt(3.0);
      return fp::Drift{{scale * a[0], scale * a[1]}, {scale * a[2], -scale * a[0]}};
    };
  }
  throw ConfigError("fp_drift: unknown drift '" + kind + "'");
}

}  // namespace fene::harness
