#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "fene/lattice.hpp"

namespace fene::lp {

using cplx = std::complex<double>;

// Real scalar or vector field on the torus, holding grid values and Fourier
// coefficients that are kept consistent by construction.
class SpectralField {
 public:
  SpectralField() : lattice_(16) {}

  static SpectralField from_values(const FrequencyLattice& lat,
                                   std::vector<std::vector<double>> comps);
  // Coefficients are projected onto the Hermitian-consistent subspace first.
  static SpectralField from_spectrum(const FrequencyLattice& lat,
                                     std::vector<std::vector<cplx>> comps);
  static SpectralField zeros(const FrequencyLattice& lat, int ncomp = 1);
  static SpectralField sample(const FrequencyLattice& lat,
                              const std::function<double(double, double)>& f);
  static SpectralField sample(const FrequencyLattice& lat,
                              const std::function<double(double, double)>& f1,
                              const std::function<double(double, double)>& f2);

  const FrequencyLattice& lattice() const { return lattice_; }
  int components() const { return static_cast<int>(values_.size()); }
  std::span<const double> values(int c = 0) const { return values_.at(c); }
  std::span<const cplx> spectrum(int c = 0) const { return spectrum_.at(c); }
  SpectralField component(int c) const;
  static SpectralField stack(const std::vector<SpectralField>& scalars);

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double a);

 private:
  SpectralField(FrequencyLattice lat, std::vector<std::vector<double>> v,
                std::vector<std::vector<cplx>> s)
      : lattice_(lat), values_(std::move(v)), spectrum_(std::move(s)) {}

  FrequencyLattice lattice_;
  std::vector<std::vector<double>> values_;
  std::vector<std::vector<cplx>> spectrum_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

// Multiplies every component's spectrum by a real table in spectral layout.
SpectralField apply_multiplier(const SpectralField& u, std::span<const double> table);
SpectralField apply_multiplier(const SpectralField& u,
                               const std::function<double(int, int)>& symbol);

}  // namespace fene::lp
