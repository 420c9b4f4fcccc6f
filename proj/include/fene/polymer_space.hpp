#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "fene/lp_analysis.hpp"

namespace fene::polymer {

// psi_inf(R) = (1 - |R|^2)^k / Z on the unit disk, Z = pi / (k + 1).
class EquilibriumWeight {
 public:
  explicit EquilibriumWeight(double k);
  double k() const { return k_; }
  double normalization() const { return z_; }
  // Value as a function of |R|; zero on the rim.
  double radial(double r) const;
  // Throws DomainError off the open disk.
  double operator()(double r1, double r2) const;
  // Integral of psi_inf over the disk of radius r.
  double mass_within(double r) const;
  // Integral of r psi_inf(r) dr over [a, b] (no angular factor).
  double radial_moment(double a, double b) const;

 private:
  double k_;
  double z_;
};

double equilibrium_weight(double r1, double r2, double k);

// How the stress integral absorbs the factor (1 - r^2)^(k-1).  Midpoint
// evaluates it at the cell centre and is only allowed for k >= 1; moment
// integrates it exactly over every cell (a one-node Jacobi-weighted rule).
enum class StressQuadrature { midpoint, moment };

// Flux between two cells.  weight is psi_inf * face area / centre distance;
// drift holds c such that the face integral of (A R . n) psi_inf equals
// c[0] A11 + c[1] A12 + c[2] A21 + c[3] A22, with n pointing from a to b.
struct Face {
  int a;
  int b;
  double weight;
  std::array<double, 4> drift;
};

// Polar tensor mesh of the unit disk.  Ring edges are chosen so every ring
// carries the same equilibrium mass.  Cell c = ring * n_theta + sector.
class BallMesh {
 public:
  BallMesh(int n_r, int n_theta, double k, StressQuadrature q = StressQuadrature::moment);

  int n_r() const { return n_r_; }
  int n_theta() const { return n_theta_; }
  int cells() const { return n_r_ * n_theta_; }
  int index(int ring, int sector) const { return ring * n_theta_ + sector; }
  const EquilibriumWeight& weight() const { return weight_; }
  StressQuadrature stress_quadrature() const { return quad_; }

  std::span<const double> ring_edges() const { return edges_; }
  std::span<const double> ring_centers() const { return centers_; }
  double volume(int c) const { return vol_[c]; }
  // Exact integral of psi_inf over the cell.
  double mass(int c) const { return mass_[c]; }
  std::span<const double> masses() const { return mass_; }
  double center_radius(int c) const { return centers_[c / n_theta_]; }
  double x1(int c) const { return x1_[c]; }
  double x2(int c) const { return x2_[c]; }
  // psi_inf on the radial faces, including the origin and the rim (where it is 0).
  std::span<const double> psi_on_edges() const { return psi_edges_; }
  std::span<const Face> faces() const { return faces_; }
  // Stress weights (tau11, tau12, tau22) per cell, already scaled by 2k/Z.
  const std::array<double, 3>& stress_weights(int c) const { return stress_[c]; }
  double min_width() const;

 private:
  int n_r_;
  int n_theta_;
  EquilibriumWeight weight_;
  StressQuadrature quad_;
  std::vector<double> edges_, centers_, psi_edges_;
  std::vector<double> vol_, mass_, x1_, x2_;
  std::vector<Face> faces_;
  std::vector<std::array<double, 3>> stress_;
};

// Values of rho = psi / psi_inf per cell.
using ConfigDistribution = std::vector<double>;

ConfigDistribution sample_distribution(const BallMesh& mesh,
                                       const std::function<double(double, double)>& f);

double mass(const BallMesh& mesh, std::span<const double> rho);
// (sum |rho|^p psi_inf vol)^(1/p)
double weighted_norm(const BallMesh& mesh, std::span<const double> rho, double p);
// Two-point discrete form of the integral of psi_inf |grad(sgn(rho)|rho|^(p/2))|^2.
double dissipation_seminorm(const BallMesh& mesh, std::span<const double> rho, double p);
// sum |rho| psi_inf vol / (1 - |R_c|)
double boundary_fraction_integral(const BallMesh& mesh, std::span<const double> rho);
// weighted_norm^p / dissipation_seminorm; rho must have zero mass.
double poincare_ratio(const BallMesh& mesh, std::span<const double> rho, double p);
// (tau11, tau12, tau22)
std::array<double, 3> stress_at(const BallMesh& mesh, std::span<const double> rho);

// rho(x, R) on a periodic grid; point-major storage so each point's cells are contiguous.
class PolymerField {
 public:
  PolymerField(const lp::FrequencyLattice& lat, std::shared_ptr<const BallMesh> mesh,
               double fill = 1.0);

  const lp::FrequencyLattice& lattice() const { return lattice_; }
  const BallMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const BallMesh> mesh_ptr() const { return mesh_; }
  std::size_t points() const { return lattice_.size(); }
  int cells() const { return mesh_->cells(); }
  std::span<double> at(std::size_t point) {
    return {data_.data() + point * cells(), static_cast<std::size_t>(cells())};
  }
  std::span<const double> at(std::size_t point) const {
    return {data_.data() + point * cells(), static_cast<std::size_t>(cells())};
  }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  PolymerField& operator+=(const PolymerField& o);
  PolymerField& operator-=(const PolymerField& o);
  PolymerField& operator*=(double a);

 private:
  lp::FrequencyLattice lattice_;
  std::shared_ptr<const BallMesh> mesh_;
  std::vector<double> data_;
};

PolymerField operator-(PolymerField a, const PolymerField& b);
PolymerField operator+(PolymerField a, const PolymerField& b);
// rho - 1, the distribution of psi - psi_inf
PolymerField deviation(PolymerField f);

// L^p in x of the weighted norm in R.
double mixed_norm(const PolymerField& f, double p);
double sup_mixed_norm(const PolymerField& f, double p);
// Largest |mass(x) - 1| over the grid.
double max_mass_defect(const PolymerField& f);

// Applies a spectral multiplier in x to every cell at once.
PolymerField polymer_multiplier(const PolymerField& f, std::span<const double> table);
PolymerField polymer_block(const PolymerField& f, int j, const lp::DyadicPartition& part,
                           bool homogeneous = false);
PolymerField polymer_low_pass(const PolymerField& f, int j, const lp::DyadicPartition& part);

// Calls visit(j, block) for every block j, transforming f only once.
void for_each_block(const PolymerField& f, const lp::DyadicPartition& part, bool homogeneous,
                    const std::function<void(int, const PolymerField&)>& visit);

// Per-block mixed norms and per-block x-integrated dissipation in one pass.
struct BlockSummary {
  std::vector<double> norms;        // ||Delta_j rho||_{L^p(L^p)}
  std::vector<double> dissipation;  // int_x dissipation_seminorm(Delta_j rho(x), p) dx
};
BlockSummary block_summary(const PolymerField& f, double p, const lp::DyadicPartition& part,
                           bool homogeneous = false, bool with_dissipation = true);

double polymer_besov_norm(const PolymerField& f, const lp::BesovParams& b,
                          const lp::DyadicPartition& part);

// Components (tau11, tau12, tau22).
lp::SpectralField stress_tensor(const PolymerField& f);
lp::SpectralField stress_divergence(const lp::SpectralField& tau);

}  // namespace fene::polymer
