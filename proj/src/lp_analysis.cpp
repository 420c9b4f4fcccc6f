#include "fene/lp_analysis.hpp"

#include <algorithm>
#include <cmath>

#include "fene/errors.hpp"
#include "fene/fft.hpp"

namespace fene::lp {
namespace {

double smooth_step_half(double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; }

// 0 for t <= 0, 1 for t >= 1, smooth in between
double smooth_step(double t) {
  const double a = smooth_step_half(t);
  const double b = smooth_step_half(1.0 - t);
  return a / (a + b);
}

}  // namespace

double bump_low(double r) { return smooth_step((4.0 / 3.0 - r) / (4.0 / 3.0 - 0.75)); }

double bump_annulus(double r) { return bump_low(0.5 * r) - bump_low(r); }

DyadicPartition::DyadicPartition(const FrequencyLattice& lat) : lattice_(lat), j_max_(0) {
  const double top = lat.max_abs_frequency();
  while (std::ldexp(0.75, j_max_) <= top) ++j_max_;
  if (j_max_ < 1) throw ConfigError("lattice too small to hold blocks -1, 0, 1");

  const std::size_t len = lat.spectral_size();
  for (int j = -1; j <= j_max_; ++j) {
    std::vector<double> b(len), h(len);
    for (std::size_t s = 0; s < len; ++s) {
      const double r = lat.abs_xi(s);
      b[s] = j < 0 ? bump_low(r) : bump_annulus(std::ldexp(r, -j));
      h[s] = bump_annulus(std::ldexp(r, -j));
    }
    blocks_.push_back(std::move(b));
    homogeneous_.push_back(std::move(h));
  }
}

const std::vector<double>& DyadicPartition::block(int j, bool homogeneous) const {
  if (j < -1 || j > j_max_)
    throw DomainError("block index " + std::to_string(j) + " outside [-1, " +
                      std::to_string(j_max_) + "]");
  return homogeneous ? homogeneous_[j + 1] : blocks_[j + 1];
}

std::vector<double> DyadicPartition::low_pass_table(int j) const {
  if (j < 0) throw DomainError("low-pass index must be >= 0");
  std::vector<double> t(lattice_.spectral_size(), 0.0);
  for (int q = -1; q <= std::min(j - 1, j_max_); ++q) {
    const auto& b = blocks_[q + 1];
    for (std::size_t s = 0; s < t.size(); ++s) t[s] += b[s];
  }
  return t;
}

BesovParams BesovParams::make(double s, double p, double r, bool homogeneous) {
  if (!(p >= 2) || std::isinf(p)) throw ConfigError("Besov exponent p must satisfy 2 <= p < inf");
  if (!(r >= p)) throw ConfigError("Besov exponent r must satisfy r >= p");
  if (!std::isfinite(s)) throw ConfigError("Besov regularity s must be finite");
  return BesovParams{s, p, r, homogeneous};
}

void BesovParams::require_simulation_regularity() const {
  if (!(s > 2.0 / p + 1.0))
    throw ConfigError("regularity s must exceed d/p + 1 = " + std::to_string(2.0 / p + 1.0));
}

SpectralField dyadic_block(const SpectralField& u, int j, const DyadicPartition& part,
                           bool homogeneous) {
  return apply_multiplier(u, part.block(j, homogeneous));
}

SpectralField low_pass(const SpectralField& u, int j, const DyadicPartition& part) {
  return apply_multiplier(u, part.low_pass_table(j));
}

double lebesgue_norm(const SpectralField& u, double p) {
  const std::size_t len = u.lattice().size();
  const int nc = u.components();
  const bool inf = std::isinf(p);
  double acc = 0;
  for (std::size_t i = 0; i < len; ++i) {
    double m2 = 0;
    for (int c = 0; c < nc; ++c) m2 += u.values(c)[i] * u.values(c)[i];
    const double m = std::sqrt(m2);
    if (inf)
      acc = std::max(acc, m);
    else
      acc += p == 2 ? m2 : std::pow(m, p);
  }
  if (inf) return acc;
  return std::pow(acc * u.lattice().cell_area(), 1.0 / p);
}

double sup_norm(const SpectralField& u) { return lebesgue_norm(u, BesovParams::infinity); }

double sequence_norm(const std::vector<double>& block_norms, int j_first, double s, double r) {
  double acc = 0;
  for (std::size_t q = 0; q < block_norms.size(); ++q) {
    const double w = std::exp2(s * (j_first + static_cast<int>(q))) * block_norms[q];
    if (std::isinf(r))
      acc = std::max(acc, w);
    else
      acc += std::pow(w, r);
  }
  return std::isinf(r) ? acc : std::pow(acc, 1.0 / r);
}

std::vector<double> block_norms(const SpectralField& u, double p, const DyadicPartition& part,
                                bool homogeneous) {
  std::vector<double> out;
  for (int j = part.j_min(); j <= part.j_max(); ++j)
    out.push_back(lebesgue_norm(dyadic_block(u, j, part, homogeneous), p));
  return out;
}

double besov_norm(const SpectralField& u, const BesovParams& b, const DyadicPartition& part) {
  return sequence_norm(block_norms(u, b.p, part, b.homogeneous), part.j_min(), b.s, b.r);
}

SpectralField heat_semigroup(const SpectralField& u, double t, double nu) {
  if (t < 0) throw DomainError("heat semigroup time must be >= 0");
  return apply_multiplier(u, [&](int a, int b) { return std::exp(-nu * t * (a * a + b * b)); });
}

SpectralField partial(const SpectralField& u, int axis) {
  const auto& lat = u.lattice();
  const int n = lat.n();
  std::vector<std::vector<cplx>> out;
  for (int c = 0; c < u.components(); ++c) {
    auto s = u.spectrum(c);
    std::vector<cplx> r(s.size());
    for (std::size_t q = 0; q < s.size(); ++q) {
      const int k = axis == 0 ? lat.xi1(q) : lat.xi2(q);
      const bool nyq = axis == 0 ? k == -n / 2 : k == n / 2;
      r[q] = nyq ? cplx{} : cplx(0, k) * s[q];
    }
    out.push_back(std::move(r));
  }
  return SpectralField::from_spectrum(lat, std::move(out));
}

SpectralField gradient(const SpectralField& scalar) {
  if (scalar.components() != 1) throw PreconditionError("gradient expects a scalar field");
  return SpectralField::stack({partial(scalar, 0), partial(scalar, 1)});
}

SpectralField divergence(const SpectralField& v) {
  if (v.components() != 2) throw PreconditionError("divergence expects a 2-vector field");
  return partial(v.component(0), 0) + partial(v.component(1), 1);
}

double spectral_divergence(const SpectralField& v) {
  if (v.components() != 2) throw PreconditionError("divergence expects a 2-vector field");
  const auto& lat = v.lattice();
  double m = 0;
  for (std::size_t q = 0; q < lat.spectral_size(); ++q)
    m = std::max(m, std::abs(double(lat.xi1(q)) * v.spectrum(0)[q] +
                             double(lat.xi2(q)) * v.spectrum(1)[q]));
  return m;
}

namespace {

// xi (xi . f_hat) / |xi|^2, zero mode dropped
std::vector<std::vector<cplx>> gradient_part(const SpectralField& f) {
  if (f.components() != 2) throw PreconditionError("expected a 2-vector field");
  const auto& lat = f.lattice();
  std::vector<std::vector<cplx>> g(2, std::vector<cplx>(lat.spectral_size()));
  for (std::size_t q = 0; q < lat.spectral_size(); ++q) {
    const double a = lat.xi1(q), b = lat.xi2(q);
    const double k2 = a * a + b * b;
    if (k2 == 0) continue;
    const cplx d = (a * f.spectrum(0)[q] + b * f.spectrum(1)[q]) / k2;
    g[0][q] = a * d;
    g[1][q] = b * d;
  }
  return g;
}

}  // namespace

SpectralField leray_project(const SpectralField& v) {
  auto g = gradient_part(v);
  for (int c = 0; c < 2; ++c)
    for (std::size_t q = 0; q < g[c].size(); ++q) g[c][q] = v.spectrum(c)[q] - g[c][q];
  return SpectralField::from_spectrum(v.lattice(), std::move(g));
}

SpectralField pressure_gradient(const SpectralField& f) {
  return SpectralField::from_spectrum(f.lattice(), gradient_part(f));
}

SpectralField inverse_laplacian(const SpectralField& g) {
  return apply_multiplier(g, [](int a, int b) {
    const double k2 = a * a + b * b;
    return k2 == 0 ? 0.0 : -1.0 / k2;
  });
}

SpectralField dealiased_product(const SpectralField& a, const SpectralField& b) {
  if (a.components() != 1 || b.components() != 1 || !(a.lattice() == b.lattice()))
    throw PreconditionError("dealiased_product expects two scalars on one lattice");
  const auto& lat = a.lattice();
  const int n = lat.n();
  const int m = 3 * n / 2;
  const int mc = m / 2 + 1;
  const std::size_t plen = static_cast<std::size_t>(m) * mc;
  const std::size_t glen = static_cast<std::size_t>(m) * m;

  auto pad = [&](std::span<const cplx> s, std::vector<double>& grid) {
    std::vector<cplx> p(plen);
    for (std::size_t q = 0; q < s.size(); ++q) {
      if (lat.nyquist(q)) continue;
      const int row = (lat.xi1(q) + m) % m;
      p[static_cast<std::size_t>(row) * mc + lat.xi2(q)] = s[q];
    }
    grid.resize(glen);
    fft::inverse(m, p.data(), grid.data());
  };
  std::vector<double> ga, gb;
  pad(a.spectrum(), ga);
  pad(b.spectrum(), gb);
  for (std::size_t i = 0; i < glen; ++i) ga[i] *= gb[i];
  std::vector<cplx> prod(plen);
  fft::forward(m, ga.data(), prod.data());

  std::vector<cplx> out(lat.spectral_size());
  for (std::size_t q = 0; q < out.size(); ++q) {
    if (lat.nyquist(q)) continue;
    const int row = (lat.xi1(q) + m) % m;
    out[q] = prod[static_cast<std::size_t>(row) * mc + lat.xi2(q)];
  }
  return SpectralField::from_spectrum(lat, {std::move(out)});
}

SpectralField grid_product(const SpectralField& a, const SpectralField& b) {
  if (a.components() != 1 || b.components() != 1 || !(a.lattice() == b.lattice()))
    throw PreconditionError("grid_product expects two scalars on one lattice");
  std::vector<double> v(a.lattice().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] * b.values()[i];
  return SpectralField::from_values(a.lattice(), {std::move(v)});
}

namespace {

void require_scalar_pair(const SpectralField& u, const SpectralField& v) {
  if (u.components() != 1 || v.components() != 1)
    throw PreconditionError("paraproducts act on scalar fields");
}

std::vector<SpectralField> all_blocks(const SpectralField& u, const DyadicPartition& part) {
  std::vector<SpectralField> b;
  for (int j = -1; j <= part.j_max(); ++j) b.push_back(dyadic_block(u, j, part));
  return b;
}

}  // namespace

SpectralField paraproduct(const SpectralField& u, const SpectralField& v,
                          const DyadicPartition& part) {
  require_scalar_pair(u, v);
  SpectralField acc = SpectralField::zeros(u.lattice());
  for (int j = 1; j <= part.j_max(); ++j)
    acc += dealiased_product(low_pass(u, j - 1, part), dyadic_block(v, j, part));
  return acc;
}

SpectralField remainder(const SpectralField& u, const SpectralField& v,
                        const DyadicPartition& part) {
  require_scalar_pair(u, v);
  const auto bu = all_blocks(u, part);
  const auto bv = all_blocks(v, part);
  const int nb = static_cast<int>(bu.size());
  SpectralField acc = SpectralField::zeros(u.lattice());
  for (int q = 0; q < nb; ++q) {
    SpectralField near = bv[q];
    if (q > 0) near += bv[q - 1];
    if (q + 1 < nb) near += bv[q + 1];
    acc += dealiased_product(bu[q], near);
  }
  return acc;
}

SpectralField advective_derivative(const SpectralField& u, const SpectralField& g) {
  if (u.components() != 2 || g.components() != 1)
    throw PreconditionError("advective derivative expects a velocity and a scalar");
  return dealiased_product(u.component(0), partial(g, 0)) +
         dealiased_product(u.component(1), partial(g, 1));
}

SpectralField transport_commutator(const SpectralField& u, const SpectralField& g, int j,
                                   const DyadicPartition& part) {
  return advective_derivative(u, dyadic_block(g, j, part)) -
         dyadic_block(advective_derivative(u, g), j, part);
}

SpectralField random_field(const FrequencyLattice& lat, std::mt19937_64& rng, double k_max,
                           double decay, double k_min) {
  const int kk = static_cast<int>(std::floor(k_max));
  if (kk >= lat.n() / 2) throw ConfigError("random field band exceeds the lattice");
  std::normal_distribution<double> normal;
  const int n = lat.n();
  const int cols = lat.cols();
  std::vector<cplx> s(lat.spectral_size());
  for (int b = 0; b <= kk; ++b) {
    for (int a = -kk; a <= kk; ++a) {
      if (b == 0 && a <= 0) continue;
      const double g1 = normal(rng), g2 = normal(rng);
      const double r = std::hypot(a, b);
      if (r > k_max || r < k_min) continue;
      const cplx c = cplx(g1, g2) * (std::pow(1.0 + r * r, -0.5 * decay) / std::sqrt(2.0));
      s[static_cast<std::size_t>((a + n) % n) * cols + b] = c;
      if (b == 0) s[static_cast<std::size_t>((n - a) % n) * cols] = std::conj(c);
    }
  }
  return SpectralField::from_spectrum(lat, {std::move(s)});
}

SpectralField random_solenoidal(const FrequencyLattice& lat, std::mt19937_64& rng, double k_max,
                                double decay) {
  const SpectralField stream = random_field(lat, rng, k_max, decay);
  SpectralField u1 = partial(stream, 1);
  SpectralField u2 = partial(stream, 0);
  u2 *= -1.0;
  return SpectralField::stack({u1, u2});
}

}  // namespace fene::lp
