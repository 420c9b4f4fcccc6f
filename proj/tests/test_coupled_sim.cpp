#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fene/coupled_sim.hpp"
#include "fene/errors.hpp"

using namespace fene;
using namespace fene::coupled;
using lp::SpectralField;
using polymer::PolymerField;

namespace {

SimConfig small_config() {
  SimConfig c;
  c.nx = 16;
  c.n_r = 8;
  c.n_theta = 8;
  c.dt = 1e-2;
  c.horizon = 0.1;
  c.c0 = 1e-3;
  c.band = 3;
  return c;
}

double max_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0;
  for (int c = 0; c < a.components(); ++c)
    for (std::size_t i = 0; i < a.values(c).size(); ++i)
      m = std::max(m, std::abs(a.values(c)[i] - b.values(c)[i]));
  return m;
}

double max_diff(const PolymerField& a, const PolymerField& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

// grid translation by one point along the first axis
SpectralField shift(const SpectralField& u) {
  const int n = u.lattice().n();
  std::vector<std::vector<double>> out;
  for (int c = 0; c < u.components(); ++c) {
    std::vector<double> v(u.values(c).size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v[((i + 1) % n) * n + j] = u.values(c)[i * n + j];
    out.push_back(std::move(v));
  }
  return SpectralField::from_values(u.lattice(), out);
}

PolymerField shift(const PolymerField& f) {
  const int n = f.lattice().n();
  PolymerField out = f;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto src = f.at(i * n + j);
      std::copy(src.begin(), src.end(), out.at(((i + 1) % n) * n + j).begin());
    }
  return out;
}

}  // namespace

TEST_CASE("configuration validation names the field") {
  auto expect = [](SimConfig c, const std::string& field) {
    try {
      c.validate();
      FAIL("accepted an invalid " << field);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).rfind(field, 0) == 0);
    }
  };
  SimConfig c = small_config();
  CHECK_NOTHROW(c.validate());
  CHECK(c.steps() == 10);
  auto bad = c;
  bad.nx = 24;
  expect(bad, "nx");
  bad = c;
  bad.init = "vortex";
  expect(bad, "init");
  bad = c;
  bad.horizon = 0.105;
  expect(bad, "T");
  bad = c;
  bad.s = 1.0;
  expect(bad, "p/r/s");
  bad = c;
  bad.k = 0.5;
  bad.moment_quadrature = false;
  expect(bad, "moment_quadrature");
}

TEST_CASE("integer-shift transport is exact") {
  SimConfig c = small_config();
  CoupledSolver solver(c);
  const auto st = solver.initial_state();
  const double h = solver.lattice().spacing();
  const auto u = SpectralField::sample(
      solver.lattice(), [&](double, double) { return h / c.dt; }, [](double, double) { return 0.0; });
  CHECK(max_diff(advect_polymer(st.rho, u, c.dt), shift(st.rho)) < 1e-15);
}

TEST_CASE("equilibrium is a fixed point of the coupled step") {
  SimConfig c = small_config();
  c.init = "equilibrium";
  c.horizon = 0.2;
  auto res = simulate(c);
  REQUIRE(res.completed);
  const auto& rows = res.history.rows();
  REQUIRE(rows.size() == 21);
  for (const auto& r : rows) {
    CHECK(r.u_besov == 0);
    CHECK(r.psi_besov < 1e-13);
    CHECK(r.u_sup_sq_integral == 0);
    CHECK(r.mass_drift < 1e-13);
  }
  CHECK(std::abs(rows.back().psi_full_besov - rows.front().psi_full_besov) < 1e-12);
}

TEST_CASE("initial data carries the requested size and unit mass") {
  SimConfig c = small_config();
  CoupledSolver solver(c);
  const auto st = solver.initial_state();
  CHECK(polymer::max_mass_defect(st.rho) < 1e-13);
  const double un = lp::besov_norm(st.u, solver.besov(), solver.partition());
  const double pn = polymer::polymer_besov_norm(polymer::deviation(st.rho), solver.besov(), solver.partition());
  CHECK(un * un == doctest::Approx(c.c0 * c.velocity_share).epsilon(1e-12));
  CHECK(pn * pn == doctest::Approx(c.c0 * (1 - c.velocity_share)).epsilon(1e-12));
  CHECK(lp::lebesgue_norm(lp::divergence(st.u), 2) < 1e-13);

  c.c0 = 1e6;
  CHECK_THROWS_AS(CoupledSolver(c).initial_state(), ConfigError);
}

TEST_CASE("mass stays at one per point during a coupled run") {
  SimConfig c = small_config();
  auto res = simulate(c);
  REQUIRE(res.completed);
  for (const auto& r : res.history.rows()) CHECK(r.mass_drift < 1e-10);
  CHECK(res.initial_size == doctest::Approx(c.c0).epsilon(1e-12));
  CHECK(res.sup_size >= res.initial_size);
}

TEST_CASE("coupled step commutes with grid translation") {
  SimConfig c = small_config();
  CoupledSolver solver(c);
  const auto st = solver.initial_state();
  const auto a = coupled_step(st, solver);
  const auto b = coupled_step({0.0, shift(st.u), shift(st.rho)}, solver);
  CHECK(max_diff(shift(a.u), b.u) < 1e-14);
  CHECK(max_diff(shift(a.rho), b.rho) < 1e-14);
}

TEST_CASE("one-step defect against two half steps is second order") {
  auto defect = [](double dt) {
    SimConfig c = small_config();
    c.c0 = 1e-2;
    c.dt = dt;
    c.horizon = dt;
    CoupledSolver full(c);
    c.dt = dt / 2;
    c.horizon = dt;
    CoupledSolver half(c);
    const auto st = full.initial_state();
    const auto a = coupled_step(st, full);
    const auto b = coupled_step(coupled_step(st, half), half);
    return max_diff(a.u, b.u);
  };
  const double ratio = defect(2e-3) / defect(1e-3);
  CHECK(ratio == doctest::Approx(4).epsilon(0.1));
}

TEST_CASE("ceiling stops the run with a partial history") {
  SimConfig c = small_config();
  c.u_ceiling = 1e-3;
  auto res = simulate(c);
  CHECK_FALSE(res.completed);
  CHECK(res.diagnostic.find("ceiling") != std::string::npos);
  CHECK(res.history.rows().size() == 1);
}

TEST_CASE("history CSV round-trips at full precision") {
  NormHistory h;
  NormRecord r;
  r.t = 0.1;
  r.u_besov = 1.0 / 3.0;
  h.push(r);
  std::ostringstream os;
  h.write_csv(os);
  std::istringstream is(os.str());
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  CHECK(header.rfind("t,u_besov,u_sup,", 0) == 0);
  CHECK(std::count(header.begin(), header.end(), ',') + 1 == static_cast<long>(NormHistory::columns().size()));
  const auto second = row.substr(row.find(',') + 1);
  CHECK(std::stod(second.substr(0, second.find(','))) == 1.0 / 3.0);
}

TEST_CASE("Picard iteration from equilibrium data is trivial") {
  SimConfig c = small_config();
  c.horizon = 0.05;
  CoupledSolver solver(c);
  const auto st = solver.equilibrium_state();
  auto res = picard_solve(solver, st.u, st.rho, c.horizon, 3);
  REQUIRE_FALSE(res.report.aborted);
  for (double a : res.report.a) CHECK(a == 0);
  for (double b : res.report.b) CHECK(b < 1e-26);
  CHECK(res.report.direct_u_difference == 0);
}

TEST_CASE("Picard iterates contract to the direct solution") {
  SimConfig c = small_config();
  c.horizon = 0.05;
  CoupledSolver solver(c);
  const auto st = solver.initial_state();
  auto res = picard_solve(solver, st.u, st.rho, c.horizon, 8);
  const auto& rep = res.report;
  REQUIRE_FALSE(rep.aborted);
  REQUIRE(rep.a.size() == 8);
  CHECK(rep.worst_late_ratio <= 0.5);
  CHECK(rep.direct_u_difference < 1e-8);
  CHECK(rep.direct_psi_difference < 1e-8);
  for (bool u : rep.uniform_bound) CHECK(u);
  CHECK(rep.data_size == doctest::Approx(c.c0).epsilon(1e-12));
}

TEST_CASE("blow-up monitor reports trends without certifying") {
  NormHistory lin, acc;
  for (int i = 0; i <= 10; ++i) {
    NormRecord r;
    r.t = 0.1 * i;
    r.u_sup_sq_integral = r.t;
    lin.push(r);
    r.u_sup_sq_integral = r.t * r.t * r.t;
    acc.push(r);
  }
  auto a = blowup_monitor(lin);
  CHECK(a.velocity_trend == "linear");
  CHECK(a.velocity_integral == doctest::Approx(1.0));
  auto b = blowup_monitor(acc);
  CHECK(b.velocity_trend == "accelerating");
  CHECK_FALSE(b.suspected);
  NormHistory refined;
  for (auto r : acc.rows()) {
    r.u_sup_sq_integral *= 2;
    refined.push(r);
  }
  CHECK(blowup_monitor(acc, &refined).suspected);
  CHECK_FALSE(blowup_monitor(lin, &lin).suspected);

  SimConfig c = small_config();
  c.init = "equilibrium";
  CHECK(blowup_monitor(simulate(c).history).velocity_integral == 0);
}
