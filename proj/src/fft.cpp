#include "fene/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace fene::lp::fft {
namespace {

enum class Dir { forward, inverse };

std::mutex planner_mutex;

fftw_plan plan_for(int n, int howmany, Dir dir) {
  static std::map<std::tuple<int, int, Dir>, fftw_plan> cache;
  std::lock_guard lock(planner_mutex);
  auto key = std::make_tuple(n, howmany, dir);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const int dims[2] = {n, n};
  const std::size_t real_len = static_cast<std::size_t>(n) * n * howmany;
  const std::size_t spec_len = static_cast<std::size_t>(n) * (n / 2 + 1) * howmany;
  std::vector<double> r(real_len);
  std::vector<cplx> c(spec_len);
  auto* cp = reinterpret_cast<fftw_complex*>(c.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan p = dir == Dir::forward
                    ? fftw_plan_many_dft_r2c(2, dims, howmany, r.data(), nullptr, howmany, 1,
                                             cp, nullptr, howmany, 1, flags)
                    : fftw_plan_many_dft_c2r(2, dims, howmany, cp, nullptr, howmany, 1,
                                             r.data(), nullptr, howmany, 1, flags);
  cache.emplace(key, p);
  return p;
}

}  // namespace

void forward_many(int n, int howmany, const double* in, cplx* out) {
  fftw_plan p = plan_for(n, howmany, Dir::forward);
  fftw_execute_dft_r2c(p, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  const double scale = 1.0 / (static_cast<double>(n) * n);
  const std::size_t len = static_cast<std::size_t>(n) * (n / 2 + 1) * howmany;
  for (std::size_t i = 0; i < len; ++i) out[i] *= scale;
}

void inverse_many(int n, int howmany, const cplx* in, double* out) {
  // c2r overwrites its input
  thread_local std::vector<cplx> scratch;
  const std::size_t len = static_cast<std::size_t>(n) * (n / 2 + 1) * howmany;
  scratch.assign(in, in + len);
  fftw_plan p = plan_for(n, howmany, Dir::inverse);
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(scratch.data()), out);
}

void forward(int n, const double* in, cplx* out) { forward_many(n, 1, in, out); }
void inverse(int n, const cplx* in, double* out) { inverse_many(n, 1, in, out); }

}  // namespace fene::lp::fft
