#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace lqg::detail {

namespace {

// Plans are created under a lock; fftw_execute_r2r on new arrays is thread-safe.
std::mutex plan_mutex;
std::map<std::tuple<int, std::size_t, std::size_t>, fftw_plan> plans;

fftw_plan get_plan(int kind, std::size_t mx, std::size_t my) {
  std::lock_guard lock(plan_mutex);
  const auto key = std::make_tuple(kind, mx, my);
  if (auto it = plans.find(key); it != plans.end()) return it->second;
  std::vector<double> scratch(mx * my);
  fftw_plan p = nullptr;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  switch (kind) {
    case 0:
      p = fftw_plan_r2r_2d(static_cast<int>(mx), static_cast<int>(my), scratch.data(), scratch.data(), FFTW_RODFT00,
                           FFTW_RODFT00, flags);
      break;
    case 1:
      p = fftw_plan_r2r_2d(static_cast<int>(mx), static_cast<int>(my), scratch.data(), scratch.data(), FFTW_RODFT00,
                           FFTW_REDFT11, flags);
      break;
    default:
      p = fftw_plan_r2r_1d(static_cast<int>(mx), scratch.data(), scratch.data(), FFTW_RODFT00, flags);
      break;
  }
  plans.emplace(key, p);
  return p;
}

}  // namespace

void sine2d(double* data, std::size_t mx, std::size_t my) { fftw_execute_r2r(get_plan(0, mx, my), data, data); }

void sine_cosine4_2d(double* data, std::size_t mx, std::size_t my) {
  fftw_execute_r2r(get_plan(1, mx, my), data, data);
}

void sine1d(double* data, std::size_t m) { fftw_execute_r2r(get_plan(2, m, 1), data, data); }

std::vector<double> convolve2d(const std::vector<double>& a, const std::vector<double>& b, std::size_t nx,
                               std::size_t ny) {
  const std::size_t nc = ny / 2 + 1;
  std::vector<double> in(nx * ny);
  auto* fa = fftw_alloc_complex(nx * nc);
  auto* fb = fftw_alloc_complex(nx * nc);
  fftw_plan fwd = nullptr, bwd = nullptr;
  {
    std::lock_guard lock(plan_mutex);
    fwd = fftw_plan_dft_r2c_2d(static_cast<int>(nx), static_cast<int>(ny), in.data(), fa, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_2d(static_cast<int>(nx), static_cast<int>(ny), fa, in.data(), FFTW_ESTIMATE);
  }
  std::copy(a.begin(), a.end(), in.begin());
  fftw_execute_dft_r2c(fwd, in.data(), fa);
  std::copy(b.begin(), b.end(), in.begin());
  fftw_execute_dft_r2c(fwd, in.data(), fb);
  for (std::size_t k = 0; k < nx * nc; ++k) {
    const double re = fa[k][0] * fb[k][0] - fa[k][1] * fb[k][1];
    const double im = fa[k][0] * fb[k][1] + fa[k][1] * fb[k][0];
    fa[k][0] = re;
    fa[k][1] = im;
  }
  fftw_execute_dft_c2r(bwd, fa, in.data());
  const double scale = 1.0 / static_cast<double>(nx * ny);
  for (auto& x : in) x *= scale;
  {
    std::lock_guard lock(plan_mutex);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  fftw_free(fa);
  fftw_free(fb);
  return in;
}

}  // namespace lqg::detail
