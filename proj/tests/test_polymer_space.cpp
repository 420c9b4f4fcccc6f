#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "fene/errors.hpp"
#include "fene/polymer_space.hpp"

using namespace fene::polymer;
using std::numbers::pi;

namespace {

// 1/lambda_1 of the discrete weighted Laplacian, from a dense generalized eigensolve.
double poincare_oracle(const BallMesh& mesh) {
  const int n = mesh.cells();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (const Face& f : mesh.faces()) {
    k(f.a, f.a) += f.weight;
    k(f.b, f.b) += f.weight;
    k(f.a, f.b) -= f.weight;
    k(f.b, f.a) -= f.weight;
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < n; ++c) m(c, c) = mesh.mass(c);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, m);
  return 1.0 / es.eigenvalues()(1);
}

// Gauss-Legendre nodes on [-1, 1]
const double gl_x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                        0.9061798459386640};
const double gl_w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                        0.4786286704993665, 0.2369268850561891};

// integral over a polar cell of f(r, theta) r dr dtheta, composite 5-point rule
template <class F>
double cell_integral(double r0, double r1, double t0, double t1, F f) {
  const int sub = 8;
  double acc = 0;
  for (int a = 0; a < sub; ++a)
    for (int b = 0; b < sub; ++b) {
      const double ra = r0 + (r1 - r0) * a / sub, rb = r0 + (r1 - r0) * (a + 1) / sub;
      const double ta = t0 + (t1 - t0) * b / sub, tb = t0 + (t1 - t0) * (b + 1) / sub;
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
          const double r = 0.5 * (ra + rb) + 0.5 * (rb - ra) * gl_x[i];
          const double t = 0.5 * (ta + tb) + 0.5 * (tb - ta) * gl_x[j];
          acc += 0.25 * (rb - ra) * (tb - ta) * gl_w[i] * gl_w[j] * f(r, t) * r;
        }
    }
  return acc;
}

}  // namespace

TEST_CASE("equilibrium weight for k = 1") {
  EquilibriumWeight w(1.0);
  CHECK(w.normalization() == doctest::Approx(pi / 2).epsilon(1e-15));
  CHECK(equilibrium_weight(0, 0, 1) == doctest::Approx(2 / pi).epsilon(1e-15));
  CHECK_THROWS_AS(equilibrium_weight(0.9, 0.5, 1), fene::DomainError);
  CHECK_THROWS_AS(EquilibriumWeight(0), fene::ConfigError);
  CHECK(w.radial(1.0) == 0.0);
}

TEST_CASE("mesh volumes and equal equilibrium masses") {
  for (double k : {0.5, 1.0, 3.0}) {
    BallMesh mesh(16, 16, k);
    double vol = 0, m = 0;
    for (int c = 0; c < mesh.cells(); ++c) {
      vol += mesh.volume(c);
      m += mesh.mass(c);
      CHECK(mesh.mass(c) == doctest::Approx(1.0 / mesh.cells()).epsilon(1e-12));
    }
    CHECK(vol == doctest::Approx(pi).epsilon(1e-13));
    CHECK(m == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mesh.psi_on_edges().back() == 0.0);
  }
  CHECK_THROWS_AS(BallMesh(1, 16, 1), fene::ConfigError);
  CHECK_THROWS_AS(BallMesh(16, 16, 0.5, StressQuadrature::midpoint), fene::ConfigError);
}

TEST_CASE("weighted norm of R1 converges to sqrt(1/6)") {
  double prev = 1;
  for (int n : {16, 32, 64}) {
    BallMesh mesh(n, n, 1);
    auto rho = sample_distribution(mesh, [](double x, double) { return x; });
    const double err = std::abs(weighted_norm(mesh, rho, 2) - std::sqrt(1.0 / 6));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 2e-3);
}

TEST_CASE("Dirichlet energy of R1 converges to 1") {
  double prev = 1;
  for (int n : {16, 32, 64}) {
    BallMesh mesh(n, n, 1);
    auto rho = sample_distribution(mesh, [](double x, double) { return x; });
    const double err = std::abs(dissipation_seminorm(mesh, rho, 2) - 1.0);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 0.03);
}

TEST_CASE("equilibrium stress is the identity") {
  for (double k : {0.5, 1.0, 2.5}) {
    BallMesh mesh(16, 16, k);
    ConfigDistribution one(mesh.cells(), 1.0);
    auto t = stress_at(mesh, one);
    CHECK(t[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(t[1]) < 1e-13);
    CHECK(t[2] == doctest::Approx(1.0).epsilon(1e-12));
  }
  BallMesh mid(64, 64, 1, StressQuadrature::midpoint);
  ConfigDistribution one(mid.cells(), 1.0);
  CHECK(stress_at(mid, one)[0] == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("face drift coefficients integrate div(A R psi_inf) over each cell") {
  // integer k keeps the integrand polynomial so the Gauss oracle is exact
  const double k = 2;
  BallMesh mesh(6, 8, k);
  EquilibriumWeight w(k);
  const double a[4] = {0.3, -0.7, 1.1, 0.4};  // not trace free on purpose
  std::vector<double> net(mesh.cells(), 0.0);
  for (const Face& f : mesh.faces()) {
    double g = 0;
    for (int q = 0; q < 4; ++q) g += f.drift[q] * a[q];
    net[f.a] += g;
    net[f.b] -= g;
  }
  const double dth = 2 * pi / 8;
  auto edges = mesh.ring_edges();
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 8; ++j) {
      const double expect = cell_integral(edges[i], edges[i + 1], j * dth, (j + 1) * dth,
                                          [&](double r, double t) {
        const double x = r * std::cos(t), y = r * std::sin(t);
        const double ax = a[0] * x + a[1] * y, ay = a[2] * x + a[3] * y;
        const double psi = w.radial(r);
        // d/dR psi_inf = -2k R (1-r^2)^(k-1) / Z
        const double dpsi = -2 * k * std::pow(1 - r * r, k - 1) / w.normalization();
        return (a[0] + a[3]) * psi + dpsi * (ax * x + ay * y);
      });
      CHECK(net[mesh.index(i, j)] == doctest::Approx(expect).epsilon(1e-11));
    }
}

TEST_CASE("Poincare ratio is bounded by the eigensolve oracle") {
  BallMesh mesh(16, 16, 1);
  const double oracle = poincare_oracle(mesh);
  auto r1 = sample_distribution(mesh, [](double x, double) { return x; });
  const double ratio = poincare_ratio(mesh, r1, 2);
  CHECK(ratio <= oracle * (1 + 1e-12));
  CHECK(ratio > 0.8 * oracle);
  ConfigDistribution one(mesh.cells(), 1.0);
  CHECK_THROWS_AS(poincare_ratio(mesh, one, 2), fene::PreconditionError);
}

TEST_CASE("boundary fraction integral of the equilibrium") {
  BallMesh mesh(64, 32, 1);
  ConfigDistribution one(mesh.cells(), 1.0);
  // int psi_inf / (1 - r) = (2/pi) int (1 + r) 2 pi r dr = 10/3
  CHECK(boundary_fraction_integral(mesh, one) == doctest::Approx(10.0 / 3).epsilon(0.02));
}

TEST_CASE("polymer blocks reconstruct the field and norms are consistent") {
  fene::lp::FrequencyLattice lat(16);
  fene::lp::DyadicPartition part(lat);
  auto mesh = std::make_shared<BallMesh>(4, 8, 1);
  PolymerField f(lat, mesh);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (double& v : f.data()) v = 1 + 0.1 * nd(rng);
  PolymerField sum(lat, mesh, 0.0);
  for_each_block(f, part, false, [&](int, const PolymerField& b) { sum += b; });
  double err = 0;
  for (std::size_t i = 0; i < f.data().size(); ++i) err = std::max(err, std::abs(sum.data()[i] - f.data()[i]));
  CHECK(err < 1e-12);

  PolymerField eq(lat, mesh, 1.0);
  CHECK(mixed_norm(eq, 2) == doctest::Approx(2 * pi).epsilon(1e-13));
  CHECK(mixed_norm(eq, 4) == doctest::Approx(std::sqrt(2 * pi)).epsilon(1e-13));
  CHECK(polymer_besov_norm(deviation(eq), fene::lp::BesovParams::make(2.5, 2, 2), part) < 1e-14);
  CHECK(fene::lp::sup_norm(stress_divergence(stress_tensor(eq))) < 1e-12);
  CHECK(max_mass_defect(eq) < 1e-14);

  // a single block matches the scalar block of each cell slice
  auto blk = polymer_block(f, 1, part);
  std::vector<double> slice(lat.size());
  for (std::size_t x = 0; x < lat.size(); ++x) slice[x] = f.at(x)[5];
  auto sb = fene::lp::dyadic_block(fene::lp::SpectralField::from_values(lat, {slice}), 1, part);
  for (std::size_t x = 0; x < lat.size(); ++x) CHECK(blk.at(x)[5] == doctest::Approx(sb.values()[x]).epsilon(1e-12));
}
