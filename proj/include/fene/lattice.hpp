#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>

namespace fene::lp {

// Frequency lattice of the periodic square [0, 2pi)^2 sampled on an n x n grid.
//
// Physical values are stored row-major: index i*n + j holds x = (i h, j h).
// Spectra use the real-to-complex layout: index i*(n/2+1) + k holds the
// coefficient of exp(i(xi1 x1 + xi2 x2)) with xi1 = wave(i), xi2 = k.
class FrequencyLattice {
 public:
  explicit FrequencyLattice(int n);

  int n() const { return n_; }
  int cols() const { return n_ / 2 + 1; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t spectral_size() const { return static_cast<std::size_t>(n_) * cols(); }

  double spacing() const { return 2.0 * std::numbers::pi / n_; }
  double cell_area() const { return spacing() * spacing(); }

  // Signed wavenumber for a first-axis spectral row.
  int wave(int i) const { return i < n_ / 2 ? i : i - n_; }
  int xi1(std::size_t s) const { return wave(static_cast<int>(s / cols())); }
  int xi2(std::size_t s) const { return static_cast<int>(s % cols()); }
  double abs_xi(std::size_t s) const { return std::hypot(xi1(s), xi2(s)); }
  bool nyquist(std::size_t s) const {
    return xi1(s) == -n_ / 2 || xi2(s) == n_ / 2;
  }
  double max_abs_frequency() const { return std::sqrt(2.0) * n_ / 2; }

  bool operator==(const FrequencyLattice& o) const { return n_ == o.n_; }

 private:
  int n_;
};

}  // namespace fene::lp
