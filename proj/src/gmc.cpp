#include "lqg/gmc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fft.hpp"
#include "lqg/levy.hpp"
#include "lqg/rng.hpp"
#include "lqg/stats.hpp"

namespace lqg::gmc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_grid(std::size_t n) {
  if (n < 8) {
    std::ostringstream os;
    os << "grid side n = " << n << " too small (need n >= 8)";
    throw ParameterError(os.str());
  }
}

void require_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma < 2.0)) {
    std::ostringstream os;
    os << "gamma = " << gamma << " outside [0, 2)";
    throw ParameterError(os.str());
  }
}

// Eigenvalue of the unscaled Dirichlet five-point Laplacian for sine mode (k, l), N = n - 1.
inline double dirichlet_eigen(std::size_t k, std::size_t l, double N) {
  return 4.0 - 2.0 * std::cos(kPi * static_cast<double>(k) / N) - 2.0 * std::cos(kPi * static_cast<double>(l) / N);
}

// Interior values (m x m) -> sine coefficients, and back; the transform is its own inverse up to 1/(2N).
std::vector<double> forward_sine(const std::vector<double>& values, std::size_t n) {
  const std::size_t m = n - 2;
  std::vector<double> buf(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) buf[i * m + j] = values[(i + 1) * n + (j + 1)];
  detail::sine2d(buf.data(), m, m);
  const double scale = 1.0 / (2.0 * static_cast<double>(n - 1));
  for (auto& x : buf) x *= scale;
  return buf;
}

std::vector<double> inverse_sine(std::vector<double> coeffs, std::size_t n) {
  const std::size_t m = n - 2;
  detail::sine2d(coeffs.data(), m, m);
  const double scale = 1.0 / (2.0 * static_cast<double>(n - 1));
  std::vector<double> values(n * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) values[(i + 1) * n + (j + 1)] = coeffs[i * m + j] * scale;
  return values;
}

const std::vector<double>& coefficients(const GridField& f, std::vector<double>& scratch) {
  if (!f.coeffs.empty()) return f.coeffs;
  scratch = forward_sine(f.values, f.n);
  return scratch;
}

std::vector<double> mollify_values(const GridField& f, const Mollifier& mol) {
  if (mol.n != f.n || mol.side != f.side) throw ParameterError("mollifier built for a different grid");
  std::vector<double> scratch;
  auto c = coefficients(f, scratch);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= mol.multiplier[k];
  return inverse_sine(std::move(c), f.n);
}

// Orthonormal sine mode value (2/N) sin(pi k i / N) sin(pi l j / N) at node (i, j).
inline double mode_at(std::size_t k, std::size_t l, std::size_t i, std::size_t j, double N) {
  return 2.0 / N * std::sin(kPi * static_cast<double>(k * i) / N) * std::sin(kPi * static_cast<double>(l * j) / N);
}

}  // namespace

GridField sample_gff(std::size_t n, std::uint64_t seed, double side) {
  require_grid(n);
  if (!(side > 0.0)) throw ParameterError("domain side must be > 0");
  const std::size_t m = n - 2;
  const double N = static_cast<double>(n - 1);
  CounterRng rng(seed);
  GridField f;
  f.n = n;
  f.side = side;
  f.seed = seed;
  f.coeffs.resize(m * m);
  for (std::size_t k = 1; k <= m; ++k)
    for (std::size_t l = 1; l <= m; ++l)
      f.coeffs[(k - 1) * m + (l - 1)] = std::sqrt(kTwoPi / dirichlet_eigen(k, l, N)) * rng.normal();
  f.values = inverse_sine(f.coeffs, n);
  return f;
}

GridField field_from_values(std::size_t n, std::vector<double> values, double side) {
  require_grid(n);
  if (values.size() != n * n) throw ParameterError("field_from_values: expected n * n values");
  for (std::size_t t = 0; t < n; ++t) {
    if (values[t] != 0.0 || values[(n - 1) * n + t] != 0.0 || values[t * n] != 0.0 || values[t * n + n - 1] != 0.0) {
      throw ParameterError("field_from_values: boundary values must be 0");
    }
  }
  GridField f;
  f.n = n;
  f.side = side;
  f.values = std::move(values);
  f.coeffs = forward_sine(f.values, n);
  return f;
}

namespace {

// Bilinear stencil of the circle average: (node index, weight) pairs.
std::vector<std::pair<std::size_t, double>> circle_stencil(std::size_t n, double side, double zx, double zy,
                                                           double eps) {
  const double cell = side / static_cast<double>(n - 1);
  if (!(eps > 0.0)) throw ParameterError("circle radius must be > 0");
  if (zx - eps < 0.0 || zx + eps > side || zy - eps < 0.0 || zy + eps > side) {
    std::ostringstream os;
    os << "circle of radius " << eps << " about (" << zx << ", " << zy << ") exits the domain";
    throw ParameterError(os.str());
  }
  const auto count = static_cast<std::size_t>(std::ceil(64.0 * std::max(1.0, eps / cell)));
  std::vector<std::pair<std::size_t, double>> st;
  st.reserve(4 * count);
  const double w = 1.0 / static_cast<double>(count);
  for (std::size_t a = 0; a < count; ++a) {
    const double th = kTwoPi * static_cast<double>(a) / static_cast<double>(count);
    const double u = (zx + eps * std::cos(th)) / cell, v = (zy + eps * std::sin(th)) / cell;
    const auto i0 = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(u))), n - 2);
    const auto j0 = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(v))), n - 2);
    const double s = std::clamp(u - static_cast<double>(i0), 0.0, 1.0), t = std::clamp(v - static_cast<double>(j0), 0.0, 1.0);
    st.emplace_back(i0 * n + j0, w * (1 - s) * (1 - t));
    st.emplace_back((i0 + 1) * n + j0, w * s * (1 - t));
    st.emplace_back(i0 * n + j0 + 1, w * (1 - s) * t);
    st.emplace_back((i0 + 1) * n + j0 + 1, w * s * t);
  }
  return st;
}

}  // namespace

double circle_average(const GridField& f, double zx, double zy, double eps) {
  double acc = 0.0;
  for (const auto& [idx, w] : circle_stencil(f.n, f.side, zx, zy, eps)) acc += w * f.values[idx];
  return acc + f.offset;
}

double circle_average_variance(std::size_t n, double zx, double zy, double eps, double side) {
  require_grid(n);
  std::vector<double> weights(n * n, 0.0);
  for (const auto& [idx, w] : circle_stencil(n, side, zx, zy, eps)) weights[idx] += w;
  const auto c = forward_sine(weights, n);
  const std::size_t m = n - 2;
  const double N = static_cast<double>(n - 1);
  double var = 0.0;
  for (std::size_t k = 1; k <= m; ++k)
    for (std::size_t l = 1; l <= m; ++l) {
      const double ck = c[(k - 1) * m + (l - 1)];
      var += kTwoPi / dirichlet_eigen(k, l, N) * ck * ck;
    }
  return var;
}

Mollifier make_mollifier(std::size_t n, double eps, double side) {
  require_grid(n);
  if (!(eps > 0.0)) throw ParameterError("mollification radius must be > 0");
  const std::size_t m = n - 2;
  const double N = static_cast<double>(n - 1);
  Mollifier mol;
  mol.n = n;
  mol.side = side;
  mol.eps = eps;
  mol.multiplier.resize(m * m);
  std::vector<double> w(m * m);
  for (std::size_t k = 1; k <= m; ++k)
    for (std::size_t l = 1; l <= m; ++l) {
      const double omega = kPi * std::hypot(static_cast<double>(k), static_cast<double>(l)) / side;
      const double j0 = std::cyl_bessel_j(0.0, eps * omega);
      mol.multiplier[(k - 1) * m + (l - 1)] = j0;
      w[(k - 1) * m + (l - 1)] = kTwoPi / dirichlet_eigen(k, l, N) * j0 * j0;
    }
  // Var h_eps(i, j) = (2/N)^2 sum_kl w_kl sin^2(pi k i / N) sin^2(pi l j / N), done as two products.
  std::vector<double> s2(m * m);
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t k = 1; k <= m; ++k) {
      const double s = std::sin(kPi * static_cast<double>(k * i) / N);
      s2[(i - 1) * m + (k - 1)] = s * s;
    }
  std::vector<double> a(m * m, 0.0);  // a[i][l] = sum_k s2[i][k] w[k][l]
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < m; ++k) {
      const double sik = s2[i * m + k];
      const double* wk = &w[k * m];
      double* ai = &a[i * m];
      for (std::size_t l = 0; l < m; ++l) ai[l] += sik * wk[l];
    }
  mol.variance.assign(n * n, 0.0);
  const double norm = 4.0 / (N * N);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double* ai = &a[i * m];
      const double* sj = &s2[j * m];
      double v = 0.0;
      for (std::size_t l = 0; l < m; ++l) v += ai[l] * sj[l];
      mol.variance[(i + 1) * n + (j + 1)] = norm * v;
    }
  return mol;
}

std::vector<double> mollify(const GridField& f, const Mollifier& m) {
  auto v = mollify_values(f, m);
  for (auto& x : v) x += f.offset;
  return v;
}

double cell_area(std::size_t n, double side, std::size_t i, std::size_t j) {
  if (i == 0 || j == 0 || i + 1 >= n || j + 1 >= n) return 0.0;
  const double c = side / static_cast<double>(n - 1);
  return c * c;
}

double CellMeasure::total() const {
  double s = 0.0;
  for (double x : masses) s += x;
  return s;
}

double CellMeasure::mass_in(std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1) const {
  double s = 0.0;
  for (std::size_t i = i0; i < std::min(i1, n); ++i)
    for (std::size_t j = j0; j < std::min(j1, n); ++j) s += masses[i * n + j];
  return s;
}

CellMeasure gmc_measure(const GridField& f, double gamma, const Mollifier& mol) {
  require_gamma(gamma);
  CellMeasure out;
  out.n = f.n;
  out.gamma = gamma;
  out.eps = mol.eps;
  out.cell = f.cell();
  out.masses.assign(f.n * f.n, 0.0);
  const double shift = std::exp(gamma * f.offset);
  if (gamma == 0.0) {
    for (std::size_t i = 0; i < f.n; ++i)
      for (std::size_t j = 0; j < f.n; ++j) out.masses[i * f.n + j] = cell_area(f.n, f.side, i, j) * shift;
    return out;
  }
  const auto he = mollify_values(f, mol);
  for (std::size_t i = 0; i < f.n; ++i)
    for (std::size_t j = 0; j < f.n; ++j) {
      const std::size_t idx = i * f.n + j;
      const double a = cell_area(f.n, f.side, i, j);
      if (a == 0.0) continue;
      out.masses[idx] = a * std::exp(gamma * he[idx] - 0.5 * gamma * gamma * mol.variance[idx]) * shift;
    }
  return out;
}

CellMeasure gmc_measure(const GridField& f, double gamma, double eps) {
  require_gamma(gamma);
  return gmc_measure(f, gamma, make_mollifier(f.n, eps, f.side));
}

// ---- free-boundary strip ----

namespace {

inline double strip_eigen(std::size_t k, std::size_t l, double N) {
  return 4.0 - 2.0 * std::cos(kPi * static_cast<double>(k) / N) -
         2.0 * std::cos(kPi * (static_cast<double>(l) + 0.5) / N);
}

// Sum over the cosine index of coeff * J0 * chi_l(0), then the x sine synthesis; returns n-1 values.
std::vector<double> strip_boundary_synthesis(const std::vector<double>& coeffs, const StripMollifier& mol) {
  const std::size_t n = mol.n, mx = n - 1;
  const double N = static_cast<double>(n);
  const double chi0 = std::sqrt(2.0 / N);
  std::vector<double> b(mx, 0.0);
  for (std::size_t k = 0; k < mx; ++k) {
    double s = 0.0;
    for (std::size_t l = 0; l < n; ++l) s += coeffs[k * n + l] * mol.multiplier[k * n + l];
    b[k] = s * chi0;
  }
  detail::sine1d(b.data(), mx);
  const double psi = std::sqrt(2.0 / N) * 0.5;
  for (auto& x : b) x *= psi;
  return b;
}

}  // namespace

StripField sample_strip_gff(std::size_t n, std::uint64_t seed) {
  require_grid(n);
  const std::size_t mx = n - 1;
  const double N = static_cast<double>(n);
  CounterRng rng(seed);
  StripField f;
  f.n = n;
  f.seed = seed;
  f.coeffs.resize(mx * n);
  for (std::size_t k = 1; k <= mx; ++k)
    for (std::size_t l = 0; l < n; ++l) f.coeffs[(k - 1) * n + l] = std::sqrt(kTwoPi / strip_eigen(k, l, N)) * rng.normal();
  f.values = f.coeffs;
  detail::sine_cosine4_2d(f.values.data(), mx, n);
  const double scale = 1.0 / (2.0 * N);
  for (auto& x : f.values) x *= scale;
  return f;
}

StripMollifier make_strip_mollifier(std::size_t n, double eps) {
  require_grid(n);
  if (!(eps > 0.0)) throw ParameterError("semicircle radius must be > 0");
  const std::size_t mx = n - 1;
  const double N = static_cast<double>(n);
  StripMollifier mol;
  mol.n = n;
  mol.eps = eps;
  mol.multiplier.resize(mx * n);
  std::vector<double> inner(mx, 0.0);
  for (std::size_t k = 1; k <= mx; ++k) {
    double s = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      const double omega = kPi * std::hypot(static_cast<double>(k), static_cast<double>(l) + 0.5);
      const double j0 = std::cyl_bessel_j(0.0, eps * omega);
      mol.multiplier[(k - 1) * n + l] = j0;
      s += kTwoPi / strip_eigen(k, l, N) * j0 * j0;
    }
    inner[k - 1] = s * 2.0 / N;
  }
  mol.variance.assign(mx, 0.0);
  for (std::size_t i = 1; i <= mx; ++i) {
    double v = 0.0;
    for (std::size_t k = 1; k <= mx; ++k) {
      const double s = std::sin(kPi * static_cast<double>(k * i) / N);
      v += 2.0 / N * s * s * inner[k - 1];
    }
    mol.variance[i - 1] = v;
  }
  return mol;
}

std::vector<double> boundary_trace(const StripField& f, const StripMollifier& mol) {
  if (mol.n != f.n) throw ParameterError("strip mollifier built for a different grid");
  auto b = strip_boundary_synthesis(f.coeffs, mol);
  for (auto& x : b) x += f.offset;
  return b;
}

std::vector<double> boundary_trace(const StripField& f, double eps) {
  return boundary_trace(f, make_strip_mollifier(f.n, eps));
}

std::vector<double> boundary_trace_variance(std::size_t n, double eps) { return make_strip_mollifier(n, eps).variance; }

double BoundaryMeasure::total() const {
  double s = 0.0;
  for (double x : masses) s += x;
  return s;
}

double BoundaryMeasure::mass_in(double x0, double x1) const {
  double s = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n);
    if (x >= x0 && x < x1) s += masses[i - 1];
  }
  return s;
}

BoundaryMeasure boundary_measure(const StripField& f, double gamma, const StripMollifier& mol) {
  require_gamma(gamma);
  if (mol.n != f.n) throw ParameterError("strip mollifier built for a different grid");
  BoundaryMeasure out;
  out.n = f.n;
  out.gamma = gamma;
  out.eps = mol.eps;
  out.cell = f.cell();
  const double shift = std::exp(0.5 * gamma * f.offset);
  if (gamma == 0.0) {
    out.masses.assign(f.n - 1, out.cell * shift);
    return out;
  }
  const auto he = strip_boundary_synthesis(f.coeffs, mol);
  out.masses.resize(f.n - 1);
  for (std::size_t i = 0; i + 1 < f.n; ++i) {
    out.masses[i] = out.cell * std::exp(0.5 * gamma * he[i] - gamma * gamma / 8.0 * mol.variance[i]) * shift;
  }
  return out;
}

BoundaryMeasure boundary_measure(const StripField& f, double gamma, double eps) {
  require_gamma(gamma);
  return boundary_measure(f, gamma, make_strip_mollifier(f.n, eps));
}

// ---- tilting ----

std::vector<Statistic> girsanov_battery(std::size_t n) {
  const std::size_t lo = 3 * n / 8, hi = 5 * n / 8;
  auto box_mean = [](const GridField& f, std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1) {
    double s = 0.0;
    for (std::size_t i = i0; i < i1; ++i)
      for (std::size_t j = j0; j < j1; ++j) s += f.at(i, j);
    return s / static_cast<double>((i1 - i0) * (j1 - j0));
  };
  const std::size_t c = n / 2;
  std::vector<Statistic> out;
  out.push_back({"clipped_box_mean", [=](const GridField& f) { return std::clamp(box_mean(f, lo, hi, lo, hi), -1.0, 1.0); }});
  out.push_back({"tanh_point", [=](const GridField& f) { return std::tanh(f.at(c + 2, c - 3)); }});
  out.push_back({"side_box_positive", [=](const GridField& f) {
                   return box_mean(f, n / 4, n / 2, n / 2, 3 * n / 4) > 0.0 ? 1.0 : 0.0;
                 }});
  out.push_back({"cos_difference", [=](const GridField& f) { return std::cos(f.at(c - 4, c) - f.at(c + 4, c + 1)); }});
  out.push_back({"atan_box_max", [=](const GridField& f) {
                   double mx = -1e300;
                   for (std::size_t i = lo; i < hi; ++i)
                     for (std::size_t j = lo; j < hi; ++j) mx = std::max(mx, f.at(i, j));
                   return std::atan(mx);
                 }});
  return out;
}

std::vector<double> tilt_kernel(std::size_t n, std::size_t zi, std::size_t zj, double eps) {
  require_grid(n);
  if (zi == 0 || zj == 0 || zi + 1 >= n || zj + 1 >= n) throw ParameterError("tilt point must be interior");
  const auto mol = make_mollifier(n, eps);
  const std::size_t m = n - 2;
  const double N = static_cast<double>(n - 1);
  std::vector<double> c(m * m);
  for (std::size_t k = 1; k <= m; ++k)
    for (std::size_t l = 1; l <= m; ++l) {
      const std::size_t idx = (k - 1) * m + (l - 1);
      c[idx] = kTwoPi / dirichlet_eigen(k, l, N) * mol.multiplier[idx] * mode_at(k, l, zi, zj, N);
    }
  return inverse_sine(std::move(c), n);
}

std::vector<GirsanovResult> girsanov_check(std::size_t n, double gamma, std::size_t zi, std::size_t zj, double eps,
                                           const std::vector<Statistic>& statistics, std::size_t trials,
                                           std::uint64_t seed) {
  require_grid(n);
  if (trials < 2) throw ParameterError("girsanov_check needs at least 2 trials");
  const auto mol = make_mollifier(n, eps);
  const auto kernel = tilt_kernel(n, zi, zj, eps);
  const std::size_t m = n - 2;
  const double N = static_cast<double>(n - 1);
  std::vector<double> g(m * m);
  double var_z = 0.0;
  for (std::size_t k = 1; k <= m; ++k)
    for (std::size_t l = 1; l <= m; ++l) {
      const std::size_t idx = (k - 1) * m + (l - 1);
      g[idx] = mol.multiplier[idx] * mode_at(k, l, zi, zj, N);
      var_z += kTwoPi / dirichlet_eigen(k, l, N) * g[idx] * g[idx];
    }

  const std::size_t ns = statistics.size();
  std::vector<double> w(trials), fvals(trials * ns), gvals(trials * ns);
  const auto T = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < T; ++t) {
    const auto f = sample_gff(n, derive_seed(seed, static_cast<std::uint64_t>(t)));
    double hz = 0.0;
    for (std::size_t q = 0; q < g.size(); ++q) hz += f.coeffs[q] * g[q];
    w[static_cast<std::size_t>(t)] = std::exp(gamma * hz - 0.5 * gamma * gamma * var_z);
    GridField shifted;
    shifted.n = n;
    shifted.side = f.side;
    shifted.values = f.values;
    for (std::size_t q = 0; q < shifted.values.size(); ++q) shifted.values[q] += gamma * kernel[q];
    for (std::size_t s = 0; s < ns; ++s) {
      fvals[static_cast<std::size_t>(t) * ns + s] = statistics[s].eval(f);
      gvals[static_cast<std::size_t>(t) * ns + s] = statistics[s].eval(shifted);
    }
  }

  double wsum = 0.0;
  for (double x : w) wsum += x;
  const double wbar = wsum / static_cast<double>(trials);
  std::vector<GirsanovResult> out(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    double a = 0.0, b = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      a += w[t] * fvals[t * ns + s];
      b += gvals[t * ns + s];
    }
    a /= wsum;
    b /= static_cast<double>(trials);
    std::vector<double> resid(trials);
    for (std::size_t t = 0; t < trials; ++t) {
      resid[t] = w[t] * (fvals[t * ns + s] - a) / wbar - (gvals[t * ns + s] - b);
    }
    const auto sm = stats::summarize(resid);
    auto& r = out[s];
    r.weighted = a;
    r.shifted = b;
    r.stderr_ = sm.stderr_;
    r.trials = trials;
    const double diff = a - b;
    r.zscore = sm.stderr_ > 0.0 ? diff / sm.stderr_ : (std::abs(diff) < 1e-12 ? 0.0 : INFINITY);
  }
  return out;
}

// ---- coordinate change ----

CoordinateChangeResult coordinate_change_check(std::size_t cells, double r, double gamma, double eps,
                                               std::size_t trials, std::uint64_t seed) {
  require_gamma(gamma);
  if (!(r == 0.5 || r == 1.0 || r == 2.0)) {
    std::ostringstream os;
    os << "scale r = " << r << " is not dyadic (use 1/2, 1 or 2)";
    throw ParameterError(os.str());
  }
  if (cells % 8 != 0 || cells < 16) throw ParameterError("coordinate_change_check needs cells divisible by 8, >= 16");
  if (trials < 2) throw ParameterError("coordinate_change_check needs at least 2 trials");

  const std::size_t n = cells + 1;
  const auto mapped_cells = static_cast<std::size_t>(std::llround(r * static_cast<double>(cells)));
  const std::size_t n2 = mapped_cells + 1;
  const auto mol = make_mollifier(n, eps, 1.0);
  const auto mol2 = make_mollifier(n2, eps, r);
  const double cell = 1.0 / static_cast<double>(cells);
  const double area = cell * cell;
  const double eps_factor = std::pow(eps, 0.5 * gamma * gamma);
  const double gamma_q = 0.5 * gamma * gamma + 2.0;
  const double q_factor = std::pow(1.0 / r, gamma_q);

  auto square_mass = [&](const std::vector<double>& he, std::size_t nn, std::size_t c) {
    double s = 0.0;
    for (std::size_t i = c / 4; i < 3 * c / 4; ++i)
      for (std::size_t j = c / 4; j < 3 * c / 4; ++j) s += area * (gamma == 0.0 ? 1.0 : std::exp(gamma * he[i * nn + j]));
    return s * eps_factor;
  };

  std::vector<double> orig(trials), mapped(trials);
  const auto T = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < T; ++t) {
    const auto key = derive_seed(seed, static_cast<std::uint64_t>(t));
    const auto f = sample_gff(n, key, 1.0);
    orig[static_cast<std::size_t>(t)] = square_mass(mollify_values(f, mol), n, cells);
    const auto f2 = sample_gff(n2, key, r);
    mapped[static_cast<std::size_t>(t)] = square_mass(mollify_values(f2, mol2), n2, mapped_cells) * q_factor;
  }
  const auto so = stats::summarize(orig), sm = stats::summarize(mapped);
  CoordinateChangeResult res;
  res.mass_original = so.mean;
  res.mass_mapped = sm.mean;
  res.stderr_original = so.stderr_;
  res.stderr_mapped = sm.stderr_;
  res.discrepancy = std::abs(sm.mean - so.mean) / so.mean;
  return res;
}

// ---- wedges ----

WedgeProfile wedge_radial(double alpha, const SleParams& p, double horizon, double ds, std::uint64_t seed) {
  const double Q = p.q_coeff;
  if (!(alpha < Q)) {
    std::ostringstream os;
    os << "alpha = " << alpha << " >= Q = " << Q << ": thin wedge, use thin_wedge_bead_lengths";
    throw ParameterError(os.str());
  }
  if (!(horizon > 0.0 && ds > 0.0 && ds < horizon)) throw ParameterError("wedge_radial needs 0 < ds < horizon");
  const auto steps = static_cast<std::size_t>(std::llround(horizon / ds));
  const double cond_horizon = std::max(horizon, 10.0);
  const auto cond_steps = static_cast<std::size_t>(std::llround(cond_horizon / ds));
  const double sd = std::sqrt(2.0 * ds);
  CounterRng rng(seed);

  std::vector<double> pos(steps + 1, 0.0);
  for (std::size_t k = 0; k < steps; ++k) pos[k + 1] = pos[k] + alpha * ds + sd * rng.normal();

  std::vector<double> bhat(cond_steps + 1, 0.0);
  std::size_t attempts = 0;
  for (;;) {
    if (attempts == 10000) throw std::runtime_error("wedge_radial: conditioning failed after 10^4 attempts");
    ++attempts;
    bool ok = true;
    for (std::size_t k = 0; k < cond_steps && ok; ++k) {
      bhat[k + 1] = bhat[k] + sd * rng.normal();
      ok = bhat[k + 1] + (Q - alpha) * static_cast<double>(k + 1) * ds > 0.0;
    }
    if (ok) break;
  }

  WedgeProfile w;
  w.alpha = alpha;
  w.attempts = attempts;
  w.s_grid.resize(2 * steps + 1);
  w.a_values.resize(2 * steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double s = static_cast<double>(k) * ds;
    w.s_grid[steps + k] = s;
    w.a_values[steps + k] = pos[k];
    w.s_grid[steps - k] = -s;
    w.a_values[steps - k] = bhat[k] - alpha * s;
  }
  return w;
}

std::vector<double> thin_wedge_bead_lengths(double weight, const SleParams& p, double dt, double horizon,
                                            std::uint64_t seed) {
  const double g2 = p.gamma * p.gamma;
  if (!(weight > 0.0 && weight < 0.5 * g2)) {
    std::ostringstream os;
    os << "thin wedge weight W = " << weight << " outside (0, gamma^2/2)";
    throw ParameterError(os.str());
  }
  const auto b = bessel_dimension_for_weight(weight, p);
  return levy::excursion_lengths(levy::bessel_zero_set(b.dimension, dt, horizon, seed));
}

}  // namespace lqg::gmc
