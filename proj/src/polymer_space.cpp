#include "fene/polymer_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fene/errors.hpp"
#include "fene/fft.hpp"

namespace fene::polymer {

using std::numbers::pi;

namespace {

// Sum of f(i) for i < n, evaluated in parallel but added in index order.
template <class F>
double ordered_sum(std::size_t n, F&& f) {
  std::vector<double> part(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) part[i] = f(i);
  double acc = 0;
  for (double v : part) acc += v;
  return acc;
}

// Antiderivative in w = r^2 of w (1 - w)^(k-1).
double stress_radial_primitive(double w, double k) {
  const double q = 1.0 - w;
  return -w * std::pow(q, k) / k - std::pow(q, k + 1) / (k * (k + 1));
}

}  // namespace

EquilibriumWeight::EquilibriumWeight(double k) : k_(k), z_(pi / (k + 1)) {
  if (!(k > 0) || !std::isfinite(k)) throw ConfigError("spring exponent k must be > 0");
}

double EquilibriumWeight::radial(double r) const {
  if (r >= 1) return 0.0;
  return std::pow(1 - r * r, k_) / z_;
}

double EquilibriumWeight::operator()(double r1, double r2) const {
  const double r2s = r1 * r1 + r2 * r2;
  if (!(r2s < 1)) throw DomainError("configuration point outside the open unit disk");
  return std::pow(1 - r2s, k_) / z_;
}

double EquilibriumWeight::mass_within(double r) const {
  if (r >= 1) return 1.0;
  return 1 - std::pow(1 - r * r, k_ + 1);
}

double EquilibriumWeight::radial_moment(double a, double b) const {
  return (std::pow(1 - a * a, k_ + 1) - std::pow(1 - std::min(b, 1.0) * std::min(b, 1.0), k_ + 1)) /
         (2 * (k_ + 1) * z_);
}

double equilibrium_weight(double r1, double r2, double k) { return EquilibriumWeight(k)(r1, r2); }

BallMesh::BallMesh(int n_r, int n_theta, double k, StressQuadrature q)
    : n_r_(n_r), n_theta_(n_theta), weight_(k), quad_(q) {
  if (n_r < 2 || n_theta < 4) throw ConfigError("disk mesh needs n_r >= 2 and n_theta >= 4");
  if (k < 1 && q == StressQuadrature::midpoint)
    throw ConfigError("k < 1 needs the moment stress quadrature");

  const double dth = 2 * pi / n_theta;
  edges_.resize(n_r + 1);
  for (int i = 0; i <= n_r; ++i)
    edges_[i] = std::sqrt(1 - std::pow(1 - double(i) / n_r, 1 / (k + 1)));
  edges_[0] = 0;
  edges_[n_r] = 1;
  for (int i = 0; i < n_r; ++i) centers_.push_back(0.5 * (edges_[i] + edges_[i + 1]));
  for (double r : edges_) psi_edges_.push_back(weight_.radial(r));

  const int nc = cells();
  vol_.resize(nc);
  mass_.resize(nc);
  x1_.resize(nc);
  x2_.resize(nc);
  stress_.resize(nc);
  const double zk = 2 * k / weight_.normalization();
  for (int i = 0; i < n_r; ++i) {
    const double a = edges_[i], b = edges_[i + 1];
    const double ring_mass = weight_.mass_within(b) - weight_.mass_within(a);
    const double radial = 0.5 * (stress_radial_primitive(b * b, k) - stress_radial_primitive(a * a, k));
    for (int j = 0; j < n_theta; ++j) {
      const int c = index(i, j);
      const double t0 = j * dth, t1 = (j + 1) * dth, tc = (j + 0.5) * dth;
      vol_[c] = 0.5 * dth * (b * b - a * a);
      mass_[c] = ring_mass / n_theta;
      x1_[c] = centers_[i] * std::cos(tc);
      x2_[c] = centers_[i] * std::sin(tc);
      if (q == StressQuadrature::moment) {
        const double icc = 0.5 * (t1 - t0) + 0.25 * (std::sin(2 * t1) - std::sin(2 * t0));
        const double iss = 0.5 * (t1 - t0) - 0.25 * (std::sin(2 * t1) - std::sin(2 * t0));
        const double ics = 0.5 * (std::pow(std::sin(t1), 2) - std::pow(std::sin(t0), 2));
        stress_[c] = {zk * radial * icc, zk * radial * ics, zk * radial * iss};
      } else {
        const double f = zk * std::pow(1 - centers_[i] * centers_[i], k - 1) * vol_[c];
        stress_[c] = {f * x1_[c] * x1_[c], f * x1_[c] * x2_[c], f * x2_[c] * x2_[c]};
      }
    }
  }

  // radial faces between ring i-1 and ring i
  for (int i = 1; i < n_r; ++i) {
    const double r = edges_[i];
    const double pr = psi_edges_[i];
    const double w = pr * r * dth / (centers_[i] - centers_[i - 1]);
    for (int j = 0; j < n_theta; ++j) {
      const double t0 = j * dth, t1 = (j + 1) * dth;
      const double icc = 0.5 * (t1 - t0) + 0.25 * (std::sin(2 * t1) - std::sin(2 * t0));
      const double iss = 0.5 * (t1 - t0) - 0.25 * (std::sin(2 * t1) - std::sin(2 * t0));
      const double ics = 0.5 * (std::pow(std::sin(t1), 2) - std::pow(std::sin(t0), 2));
      const double g = pr * r * r;
      faces_.push_back({index(i - 1, j), index(i, j), w, {g * icc, g * ics, g * ics, g * iss}});
    }
  }
  // angular faces inside ring i, from sector j to j + 1
  for (int i = 0; i < n_r; ++i) {
    const double a = edges_[i], b = edges_[i + 1];
    const double psi_avg = mass_[index(i, 0)] / vol_[index(i, 0)];
    const double w = psi_avg * (b - a) / (centers_[i] * dth);
    const double mom = weight_.radial_moment(a, b);
    for (int j = 0; j < n_theta; ++j) {
      const double t = (j + 1) * dth;
      const double s = std::sin(t), c = std::cos(t);
      faces_.push_back({index(i, j), index(i, (j + 1) % n_theta), w,
                        {-mom * s * c, -mom * s * s, mom * c * c, mom * s * c}});
    }
  }
}

double BallMesh::min_width() const {
  double m = 1;
  const double dth = 2 * pi / n_theta_;
  for (int i = 0; i < n_r_; ++i)
    m = std::min({m, edges_[i + 1] - edges_[i], centers_[i] * dth});
  return m;
}

ConfigDistribution sample_distribution(const BallMesh& mesh,
                                       const std::function<double(double, double)>& f) {
  ConfigDistribution rho(mesh.cells());
  for (int c = 0; c < mesh.cells(); ++c) rho[c] = f(mesh.x1(c), mesh.x2(c));
  return rho;
}

namespace {

void require_size(const BallMesh& mesh, std::span<const double> rho) {
  if (rho.size() != static_cast<std::size_t>(mesh.cells()))
    throw PreconditionError("distribution size does not match the mesh");
}

double abs_pow(double x, double p) { return p == 2 ? x * x : std::pow(std::abs(x), p); }

double half_power(double x, double p) {
  return p == 2 ? x : std::copysign(std::pow(std::abs(x), 0.5 * p), x);
}

double dissipation_raw(const BallMesh& mesh, const double* rho, double p) {
  double acc = 0;
  for (const Face& f : mesh.faces()) {
    const double d = half_power(rho[f.b], p) - half_power(rho[f.a], p);
    acc += f.weight * d * d;
  }
  return acc;
}

double weighted_pow(const BallMesh& mesh, const double* rho, double p) {
  double acc = 0;
  const auto m = mesh.masses();
  for (std::size_t c = 0; c < m.size(); ++c) acc += m[c] * abs_pow(rho[c], p);
  return acc;
}

}  // namespace

double mass(const BallMesh& mesh, std::span<const double> rho) {
  require_size(mesh, rho);
  double acc = 0;
  for (int c = 0; c < mesh.cells(); ++c) acc += mesh.mass(c) * rho[c];
  return acc;
}

double weighted_norm(const BallMesh& mesh, std::span<const double> rho, double p) {
  require_size(mesh, rho);
  if (std::isinf(p)) {
    double m = 0;
    for (double v : rho) m = std::max(m, std::abs(v));
    return m;
  }
  return std::pow(weighted_pow(mesh, rho.data(), p), 1 / p);
}

double dissipation_seminorm(const BallMesh& mesh, std::span<const double> rho, double p) {
  require_size(mesh, rho);
  return dissipation_raw(mesh, rho.data(), p);
}

double boundary_fraction_integral(const BallMesh& mesh, std::span<const double> rho) {
  require_size(mesh, rho);
  double acc = 0;
  for (int c = 0; c < mesh.cells(); ++c)
    acc += std::abs(rho[c]) * mesh.mass(c) / (1 - mesh.center_radius(c));
  return acc;
}

double poincare_ratio(const BallMesh& mesh, std::span<const double> rho, double p) {
  require_size(mesh, rho);
  double scale = 0;
  for (int c = 0; c < mesh.cells(); ++c) scale += mesh.mass(c) * std::abs(rho[c]);
  if (std::abs(mass(mesh, rho)) > 1e-10 * std::max(scale, 1e-300))
    throw PreconditionError("Poincare ratio needs a zero-mass distribution");
  const double num = weighted_pow(mesh, rho.data(), p);
  const double den = dissipation_raw(mesh, rho.data(), p);
  if (den == 0) return num == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

std::array<double, 3> stress_at(const BallMesh& mesh, std::span<const double> rho) {
  require_size(mesh, rho);
  std::array<double, 3> t{0, 0, 0};
  for (int c = 0; c < mesh.cells(); ++c) {
    const auto& w = mesh.stress_weights(c);
    for (int q = 0; q < 3; ++q) t[q] += w[q] * rho[c];
  }
  return t;
}

PolymerField::PolymerField(const lp::FrequencyLattice& lat, std::shared_ptr<const BallMesh> mesh,
                           double fill)
    : lattice_(lat), mesh_(std::move(mesh)), data_(lat.size() * mesh_->cells(), fill) {}

namespace {
void require_same(const PolymerField& a, const PolymerField& b) {
  if (!(a.lattice() == b.lattice()) || a.cells() != b.cells())
    throw PreconditionError("polymer field shapes differ");
}
}  // namespace

PolymerField& PolymerField::operator+=(const PolymerField& o) {
  require_same(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

PolymerField& PolymerField::operator-=(const PolymerField& o) {
  require_same(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

PolymerField& PolymerField::operator*=(double a) {
  for (double& v : data_) v *= a;
  return *this;
}

PolymerField operator-(PolymerField a, const PolymerField& b) { return a -= b; }
PolymerField operator+(PolymerField a, const PolymerField& b) { return a += b; }

PolymerField deviation(PolymerField f) {
  for (double& v : f.data()) v -= 1.0;
  return f;
}

double mixed_norm(const PolymerField& f, double p) {
  if (std::isinf(p)) throw DomainError("mixed norm needs finite p");
  const int nc = f.cells();
  const double s = ordered_sum(f.points(), [&](std::size_t x) {
    return weighted_pow(f.mesh(), f.data().data() + x * nc, p);
  });
  return std::pow(s * f.lattice().cell_area(), 1 / p);
}

double sup_mixed_norm(const PolymerField& f, double p) {
  double m = 0;
  for (std::size_t x = 0; x < f.points(); ++x) m = std::max(m, weighted_norm(f.mesh(), f.at(x), p));
  return m;
}

double max_mass_defect(const PolymerField& f) {
  double m = 0;
  for (std::size_t x = 0; x < f.points(); ++x) m = std::max(m, std::abs(mass(f.mesh(), f.at(x)) - 1));
  return m;
}

namespace {

std::vector<lp::cplx> polymer_spectrum(const PolymerField& f) {
  std::vector<lp::cplx> s(f.lattice().spectral_size() * f.cells());
  lp::fft::forward_many(f.lattice().n(), f.cells(), f.data().data(), s.data());
  return s;
}

void synthesize(const std::vector<lp::cplx>& spec, std::span<const double> table, PolymerField& out) {
  const int nc = out.cells();
  std::vector<lp::cplx> tmp(spec.size());
  for (std::size_t k = 0; k < table.size(); ++k) {
    const double m = table[k];
    for (int c = 0; c < nc; ++c) tmp[k * nc + c] = spec[k * nc + c] * m;
  }
  lp::fft::inverse_many(out.lattice().n(), nc, tmp.data(), out.data().data());
}

}  // namespace

PolymerField polymer_multiplier(const PolymerField& f, std::span<const double> table) {
  if (table.size() != f.lattice().spectral_size())
    throw PreconditionError("multiplier table has wrong size");
  PolymerField out(f.lattice(), f.mesh_ptr(), 0.0);
  synthesize(polymer_spectrum(f), table, out);
  return out;
}

PolymerField polymer_block(const PolymerField& f, int j, const lp::DyadicPartition& part,
                           bool homogeneous) {
  return polymer_multiplier(f, part.block(j, homogeneous));
}

PolymerField polymer_low_pass(const PolymerField& f, int j, const lp::DyadicPartition& part) {
  return polymer_multiplier(f, part.low_pass_table(j));
}

void for_each_block(const PolymerField& f, const lp::DyadicPartition& part, bool homogeneous,
                    const std::function<void(int, const PolymerField&)>& visit) {
  if (!(part.lattice() == f.lattice())) throw PreconditionError("partition lattice differs");
  const auto spec = polymer_spectrum(f);
  PolymerField block(f.lattice(), f.mesh_ptr(), 0.0);
  for (int j = part.j_min(); j <= part.j_max(); ++j) {
    synthesize(spec, part.block(j, homogeneous), block);
    visit(j, block);
  }
}

BlockSummary block_summary(const PolymerField& f, double p, const lp::DyadicPartition& part,
                           bool homogeneous, bool with_dissipation) {
  BlockSummary out;
  const int nc = f.cells();
  const double area = f.lattice().cell_area();
  for_each_block(f, part, homogeneous, [&](int, const PolymerField& b) {
    out.norms.push_back(mixed_norm(b, p));
    if (with_dissipation) {
      const double d = ordered_sum(f.points(), [&](std::size_t x) {
        return dissipation_raw(b.mesh(), b.data().data() + x * nc, p);
      });
      out.dissipation.push_back(d * area);
    }
  });
  return out;
}

double polymer_besov_norm(const PolymerField& f, const lp::BesovParams& b,
                          const lp::DyadicPartition& part) {
  const auto sum = block_summary(f, b.p, part, b.homogeneous, false);
  return lp::sequence_norm(sum.norms, part.j_min(), b.s, b.r);
}

lp::SpectralField stress_tensor(const PolymerField& f) {
  const auto& lat = f.lattice();
  std::vector<std::vector<double>> t(3, std::vector<double>(lat.size()));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t x = 0; x < static_cast<std::ptrdiff_t>(f.points()); ++x) {
    const auto s = stress_at(f.mesh(), f.at(x));
    for (int q = 0; q < 3; ++q) t[q][x] = s[q];
  }
  return lp::SpectralField::from_values(lat, std::move(t));
}

lp::SpectralField stress_divergence(const lp::SpectralField& tau) {
  if (tau.components() != 3) throw PreconditionError("stress field needs 3 components");
  auto t11 = tau.component(0), t12 = tau.component(1), t22 = tau.component(2);
  return lp::SpectralField::stack({lp::partial(t11, 0) + lp::partial(t12, 1),
                                   lp::partial(t12, 0) + lp::partial(t22, 1)});
}

}  // namespace fene::polymer
