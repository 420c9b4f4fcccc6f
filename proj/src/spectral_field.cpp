#include "fene/spectral_field.hpp"

#include <stdexcept>

#include "fene/errors.hpp"
#include "fene/fft.hpp"

namespace fene::lp {

FrequencyLattice::FrequencyLattice(int n) : n_(n) {
  if (n < 16 || (n & (n - 1)) != 0)
    throw ConfigError("lattice size must be a power of two >= 16, got " + std::to_string(n));
}

namespace {

void hermitian_project(const FrequencyLattice& lat, std::vector<cplx>& s) {
  const int n = lat.n();
  const int cols = lat.cols();
  for (int k : {0, n / 2}) {
    for (int i = 0; i <= n / 2; ++i) {
      const int ip = (n - i) % n;
      cplx& a = s[static_cast<std::size_t>(i) * cols + k];
      cplx& b = s[static_cast<std::size_t>(ip) * cols + k];
      if (ip == i) {
        a = a.real();
      } else {
        const cplx m = 0.5 * (a + std::conj(b));
        a = m;
        b = std::conj(m);
      }
    }
  }
}

void require_same(const SpectralField& a, const SpectralField& b) {
  if (!(a.lattice() == b.lattice()) || a.components() != b.components())
    throw PreconditionError("field shapes differ");
}

}  // namespace

SpectralField SpectralField::from_values(const FrequencyLattice& lat,
                                         std::vector<std::vector<double>> comps) {
  std::vector<std::vector<cplx>> spec;
  for (auto& v : comps) {
    if (v.size() != lat.size()) throw PreconditionError("value array has wrong size");
    std::vector<cplx> s(lat.spectral_size());
    fft::forward(lat.n(), v.data(), s.data());
    spec.push_back(std::move(s));
  }
  return SpectralField(lat, std::move(comps), std::move(spec));
}

SpectralField SpectralField::from_spectrum(const FrequencyLattice& lat,
                                           std::vector<std::vector<cplx>> comps) {
  std::vector<std::vector<double>> vals;
  for (auto& s : comps) {
    if (s.size() != lat.spectral_size()) throw PreconditionError("spectrum has wrong size");
    hermitian_project(lat, s);
    std::vector<double> v(lat.size());
    fft::inverse(lat.n(), s.data(), v.data());
    vals.push_back(std::move(v));
  }
  return SpectralField(lat, std::move(vals), std::move(comps));
}

SpectralField SpectralField::zeros(const FrequencyLattice& lat, int ncomp) {
  return SpectralField(lat, std::vector<std::vector<double>>(ncomp, std::vector<double>(lat.size())),
                       std::vector<std::vector<cplx>>(ncomp, std::vector<cplx>(lat.spectral_size())));
}

SpectralField SpectralField::sample(const FrequencyLattice& lat,
                                    const std::function<double(double, double)>& f) {
  const int n = lat.n();
  const double h = lat.spacing();
  std::vector<double> v(lat.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(i) * n + j] = f(i * h, j * h);
  return from_values(lat, {std::move(v)});
}

SpectralField SpectralField::sample(const FrequencyLattice& lat,
                                    const std::function<double(double, double)>& f1,
                                    const std::function<double(double, double)>& f2) {
  return stack({sample(lat, f1), sample(lat, f2)});
}

SpectralField SpectralField::component(int c) const {
  return SpectralField(lattice_, {values_.at(c)}, {spectrum_.at(c)});
}

SpectralField SpectralField::stack(const std::vector<SpectralField>& scalars) {
  if (scalars.empty()) throw PreconditionError("nothing to stack");
  SpectralField out = SpectralField(scalars[0].lattice_, {}, {});
  for (const auto& f : scalars) {
    if (!(f.lattice_ == out.lattice_)) throw PreconditionError("lattices differ");
    for (int c = 0; c < f.components(); ++c) {
      out.values_.push_back(f.values_[c]);
      out.spectrum_.push_back(f.spectrum_[c]);
    }
  }
  return out;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same(*this, o);
  for (int c = 0; c < components(); ++c) {
    for (std::size_t i = 0; i < values_[c].size(); ++i) values_[c][i] += o.values_[c][i];
    for (std::size_t i = 0; i < spectrum_[c].size(); ++i) spectrum_[c][i] += o.spectrum_[c][i];
  }
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same(*this, o);
  for (int c = 0; c < components(); ++c) {
    for (std::size_t i = 0; i < values_[c].size(); ++i) values_[c][i] -= o.values_[c][i];
    for (std::size_t i = 0; i < spectrum_[c].size(); ++i) spectrum_[c][i] -= o.spectrum_[c][i];
  }
  return *this;
}

SpectralField& SpectralField::operator*=(double a) {
  for (auto& v : values_)
    for (double& x : v) x *= a;
  for (auto& s : spectrum_)
    for (cplx& x : s) x *= a;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

SpectralField apply_multiplier(const SpectralField& u, std::span<const double> table) {
  const auto& lat = u.lattice();
  if (table.size() != lat.spectral_size()) throw PreconditionError("multiplier table has wrong size");
  std::vector<std::vector<cplx>> out;
  for (int c = 0; c < u.components(); ++c) {
    auto s = u.spectrum(c);
    std::vector<cplx> r(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) r[i] = s[i] * table[i];
    out.push_back(std::move(r));
  }
  return SpectralField::from_spectrum(lat, std::move(out));
}

SpectralField apply_multiplier(const SpectralField& u,
                               const std::function<double(int, int)>& symbol) {
  const auto& lat = u.lattice();
  std::vector<double> table(lat.spectral_size());
  for (std::size_t s = 0; s < table.size(); ++s) table[s] = symbol(lat.xi1(s), lat.xi2(s));
  return apply_multiplier(u, table);
}

}  // namespace fene::lp
