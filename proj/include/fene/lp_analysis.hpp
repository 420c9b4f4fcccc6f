#pragma once

#include <limits>
#include <random>
#include <vector>

#include "fene/spectral_field.hpp"

namespace fene::lp {

// Smooth radial bump: 1 on |xi| <= 3/4, 0 on |xi| >= 4/3.
double bump_low(double r);
// Annular bump: bump_low(r/2) - bump_low(r), supported in 3/4 < r < 8/3.
double bump_annulus(double r);

// Littlewood-Paley partition of unity on a lattice.  Block -1 is the low
// bump; block j >= 0 is the annular bump at scale 2^j.  Homogeneous blocks use
// the annular bump at every scale (block -1 is then the annulus at scale 1/2)
// and never see the zero mode.
class DyadicPartition {
 public:
  explicit DyadicPartition(const FrequencyLattice& lat);

  const FrequencyLattice& lattice() const { return lattice_; }
  int j_max() const { return j_max_; }
  int j_min() const { return -1; }

  // Spectral-layout table of the block multiplier.
  const std::vector<double>& block(int j, bool homogeneous = false) const;
  // Table of the low-pass multiplier S_j (sum of blocks below j).
  std::vector<double> low_pass_table(int j) const;

 private:
  FrequencyLattice lattice_;
  int j_max_;
  std::vector<std::vector<double>> blocks_;       // index j + 1
  std::vector<std::vector<double>> homogeneous_;  // index j + 1
};

struct BesovParams {
  double s = 0;
  double p = 2;
  double r = 2;
  bool homogeneous = false;

  // Requires 2 <= p < inf and r >= p.
  static BesovParams make(double s, double p, double r, bool homogeneous = false);
  // Additionally requires s > d/p + 1 (d = 2), the regime of the coupled solver.
  void require_simulation_regularity() const;
  BesovParams shifted(double ds) const {
    BesovParams b = *this;
    b.s += ds;
    return b;
  }
  static constexpr double infinity = std::numeric_limits<double>::infinity();
};

SpectralField dyadic_block(const SpectralField& u, int j, const DyadicPartition& part,
                           bool homogeneous = false);
SpectralField low_pass(const SpectralField& u, int j, const DyadicPartition& part);

// Lebesgue norms use cell-average quadrature; vector fields are measured by
// their pointwise Euclidean length.
double lebesgue_norm(const SpectralField& u, double p);
double sup_norm(const SpectralField& u);

// Combines per-block norms into the l^r sequence norm with weights 2^{js}.
double sequence_norm(const std::vector<double>& block_norms, int j_first, double s, double r);
std::vector<double> block_norms(const SpectralField& u, double p, const DyadicPartition& part,
                                bool homogeneous = false);
double besov_norm(const SpectralField& u, const BesovParams& b, const DyadicPartition& part);

SpectralField heat_semigroup(const SpectralField& u, double t, double nu = 1.0);

SpectralField partial(const SpectralField& u, int axis);
SpectralField gradient(const SpectralField& scalar);
SpectralField divergence(const SpectralField& v);
// max over xi of |xi . v_hat(xi)|
double spectral_divergence(const SpectralField& v);
SpectralField leray_project(const SpectralField& v);
// grad Delta^{-1} div f, zero mode set to zero
SpectralField pressure_gradient(const SpectralField& f);
// Delta^{-1} g with the zero mode set to zero
SpectralField inverse_laplacian(const SpectralField& g);

// Product of two scalars with 3/2 zero padding: the exact convolution of the
// non-Nyquist modes, truncated back to the lattice.
SpectralField dealiased_product(const SpectralField& a, const SpectralField& b);
// Plain grid product (aliased), used when dealiasing is switched off.
SpectralField grid_product(const SpectralField& a, const SpectralField& b);

SpectralField paraproduct(const SpectralField& u, const SpectralField& v,
                          const DyadicPartition& part);
SpectralField remainder(const SpectralField& u, const SpectralField& v,
                        const DyadicPartition& part);

// u . grad(Delta_j g) - Delta_j(u . grad g) for a velocity u and scalar g.
SpectralField transport_commutator(const SpectralField& u, const SpectralField& g, int j,
                                   const DyadicPartition& part);
// u . grad g with dealiased products
SpectralField advective_derivative(const SpectralField& u, const SpectralField& g);

// Gaussian field with independent coefficients on the modes 0 < |xi| <= k_max,
// amplitude (1 + |xi|^2)^(-decay/2).  Coefficients are drawn in a fixed order
// over the square |xi_i| <= k_max, so the same seed gives the same
// trigonometric polynomial on every lattice that resolves it.
SpectralField random_field(const FrequencyLattice& lat, std::mt19937_64& rng, double k_max,
                           double decay = 0.0, double k_min = 0.0);
// Divergence-free random velocity built from a random stream function.
SpectralField random_solenoidal(const FrequencyLattice& lat, std::mt19937_64& rng, double k_max,
                                double decay = 0.0);

}  // namespace fene::lp
