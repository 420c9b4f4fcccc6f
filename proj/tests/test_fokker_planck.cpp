#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "fene/errors.hpp"
#include "fene/fokker_planck.hpp"

using namespace fene;
using namespace fene::fp;

namespace {

std::shared_ptr<FpOperator> make_op(int n_r, int n_theta, double k = 1.0) {
  return std::make_shared<FpOperator>(std::make_shared<polymer::BallMesh>(n_r, n_theta, k));
}

double smallest_nonzero_eigenvalue(const FpOperator& op) {
  const int n = op.mesh().cells();
  Eigen::MatrixXd k = -Eigen::MatrixXd(op.stiffness());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < n; ++c) m(c, c) = op.mesh().mass(c);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, m);
  return es.eigenvalues()(1);
}

Drift mat(double a11, double a12, double a21, double a22) {
  Drift a;
  a << a11, a12, a21, a22;
  return a;
}

}  // namespace

TEST_CASE("equilibrium is a fixed point without drift") {
  auto op = make_op(16, 16);
  FpStepper st(op, 1e-3);
  polymer::ConfigDistribution rho(op->mesh().cells(), 1.0);
  for (int i = 0; i < 10; ++i) rho = fp_step(st, rho, Drift::Zero());
  for (double v : rho) CHECK(std::abs(v - 1) < 1e-13);
}

TEST_CASE("diffusion is symmetric and non-positive in the weighted inner product") {
  auto op = make_op(8, 12);
  Eigen::MatrixXd k(op->stiffness());
  CHECK((k - k.transpose()).norm() < 1e-14);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd x(k.rows());
    for (int i = 0; i < x.size(); ++i) x[i] = nd(rng);
    CHECK(x.dot(k * x) <= 1e-14);
    const std::vector<double> xv(x.data(), x.data() + x.size());
    CHECK(-x.dot(k * x) == doctest::Approx(polymer::dissipation_seminorm(op->mesh(), xv, 2)).epsilon(1e-12));
  }
  CHECK((k * Eigen::VectorXd::Ones(k.rows())).norm() < 1e-13);
}

TEST_CASE("mass is conserved step by step over 10^4 steps") {
  auto op = make_op(32, 32);
  FpStepper st(op, 1e-4);
  auto rho = polymer::sample_distribution(op->mesh(), [](double x, double y) { return 1 + 0.3 * x * y + 0.2 * x; });
  CertificateOptions o;
  auto sol = fp_solve(st, rho, [](double t) { return mat(0.4 * std::sin(3 * t), 1.0, 0.0, -0.4 * std::sin(3 * t)); }, 1.0, o, 1000);
  CHECK(sol.max_mass_step_drift < 1e-12);
  CHECK(std::abs(sol.history.back().mass - sol.history.front().mass) < 1e-11);
}

TEST_CASE("discrete energy identity at p = 2") {
  auto op = make_op(32, 32);
  FpStepper st(op, 1e-4);
  auto rho = polymer::sample_distribution(op->mesh(), [](double x, double) { return 1 + 0.1 * x; });
  CertificateOptions o;
  auto sol = fp_solve(st, rho, [](double) { return mat(0.5, 0.3, 0.0, -0.5); }, 0.05, o);
  CHECK(sol.max_identity_residual < 1e-6);
  // residual is first order in dt
  FpStepper coarse(op, 1e-3);
  auto sol2 = fp_solve(coarse, rho, [](double) { return mat(0.5, 0.3, 0.0, -0.5); }, 0.05, o);
  CHECK(sol2.max_identity_residual / sol.max_identity_residual == doctest::Approx(10).epsilon(0.2));
}

TEST_CASE("relaxation without drift decays at the first eigenvalue") {
  auto op = make_op(16, 16);
  const double lambda = smallest_nonzero_eigenvalue(*op);
  FpStepper st(op, 1e-4);
  auto rho = polymer::sample_distribution(op->mesh(), [](double x, double) { return 1 + 0.1 * x; });
  CertificateOptions o;
  auto sol = fp_solve(st, rho, [](double) { return Drift::Zero().eval(); }, 1.0, o, 100);
  const auto& h = sol.history;
  for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i].energy[0] <= h[i - 1].energy[0]);
  const auto& mid = h[h.size() / 2];
  const double rate = -0.5 * std::log((h.back().energy[0] - 1) / (mid.energy[0] - 1)) / (h.back().t - mid.t);
  CHECK(rate == doctest::Approx(lambda).epsilon(0.1));
}

TEST_CASE("extensional drift relaxes to a stretched steady state") {
  auto op = make_op(16, 16);
  FpStepper st(op, 1e-3);
  polymer::ConfigDistribution rho(op->mesh().cells(), 1.0);
  const Drift a = mat(0.5, 0, 0, -0.5);
  CertificateOptions o;
  auto sol = fp_solve(st, rho, [&](double) { return a; }, 5.0, o, 1000);
  auto next = fp_step(st, sol.final, a);
  double diff = 0;
  for (std::size_t c = 0; c < next.size(); ++c) diff = std::max(diff, std::abs(next[c] - sol.final[c]));
  CHECK(diff < 1e-10);
  auto tau = polymer::stress_at(op->mesh(), sol.final);
  CHECK(tau[0] > tau[2]);
  CHECK(std::abs(tau[1]) < 1e-12);
}

TEST_CASE("upwind drift keeps the distribution non-negative at the step limit") {
  auto op = make_op(16, 16);
  const Drift a = mat(0, 3.0, 0, 0);
  FpStepper st(op, 0.99 * op->drift_dt_limit(a));
  auto rho = polymer::sample_distribution(op->mesh(), [](double x, double y) { return x > 0.3 && y > 0 ? 5.0 : 0.0; });
  for (int i = 0; i < 200; ++i) {
    st.step(rho, a);
    for (double v : rho) REQUIRE(v >= -1e-14);
  }
  FpStepper too_big(op, 2 * op->drift_dt_limit(a));
  CHECK_THROWS_AS(too_big.step(rho, a), NumericalError);
}

TEST_CASE("certificate constant and violation reporting") {
  auto op = make_op(16, 16);
  FpStepper st(op, 1e-3);
  polymer::ConfigDistribution rho(op->mesh().cells(), 1.0);
  auto shear = [](double) { return mat(0, 2.0, 0, 0); };
  CertificateOptions o;
  o.exponents = {2, 4};
  auto sol = fp_solve(st, rho, shear, 0.5, o);
  const double c = required_certificate_constant(sol, o.exponents);
  CHECK(c >= 1.0);
  o.constant = c * 1.001;
  CHECK_NOTHROW(fp_solve(st, rho, shear, 0.5, o));
  o.constant = 0.9;
  CHECK_THROWS_AS(fp_solve(st, rho, shear, 0.5, o), CertificateViolation);
  CHECK_THROWS_AS(fp_solve(st, rho, shear, 0.5005, o), ConfigError);
}
