#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lqg/params.hpp"

namespace lqg::gmc {

/// Zero-boundary discrete GFF on the square [0, side]^2 sampled at n x n nodes.
///
/// Covariance is 2 pi (-Delta)^{-1} for the unscaled five-point Laplacian, so that
/// Var h_eps(z) = -log eps + O(1). The field is h = values + offset; `values` vanish
/// on the boundary rows and columns.
struct GridField {
  std::size_t n = 0;
  double side = 1.0;
  double offset = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> values;  // row-major, index i * n + j, x = i * cell, y = j * cell
  std::vector<double> coeffs;  // sine coefficients of `values` ((n-2)^2), empty if unknown

  double cell() const noexcept { return side / static_cast<double>(n - 1); }
  double at(std::size_t i, std::size_t j) const noexcept { return values[i * n + j] + offset; }
};

GridField sample_gff(std::size_t n, std::uint64_t seed, double side = 1.0);

/// Field with every node value set from `values` (n x n, boundary entries must be 0).
GridField field_from_values(std::size_t n, std::vector<double> values, double side = 1.0);

/// Average over the circle of radius eps about z of the bilinear interpolant,
/// using 64 * max(1, eps / cell) equally spaced angles.
double circle_average(const GridField& f, double zx, double zy, double eps);

/// Exact variance of circle_average for the discrete GFF (quadratic form in the Green function).
double circle_average_variance(std::size_t n, double zx, double zy, double eps, double side = 1.0);

/// Spectral circle-average operator: each sine mode is multiplied by J0(eps |omega|),
/// which is its exact circle average. `variance` holds Var h_eps at every node.
struct Mollifier {
  std::size_t n = 0;
  double side = 1.0;
  double eps = 0.0;
  std::vector<double> multiplier;  // (n-2)^2
  std::vector<double> variance;    // n^2, zero on the boundary
};

Mollifier make_mollifier(std::size_t n, double eps, double side = 1.0);

/// h_eps at every node (offset included).
std::vector<double> mollify(const GridField& f, const Mollifier& m);

struct CellMeasure {
  std::size_t n = 0;
  double gamma = 0.0;
  double eps = 0.0;
  double cell = 0.0;
  std::vector<double> masses;  // n^2; boundary nodes carry zero area

  double total() const;
  /// Mass of nodes with i in [i0, i1) and j in [j0, j1).
  double mass_in(std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1) const;
};

/// Area element of node (i, j): cell^2 inside, 0 on the boundary.
double cell_area(std::size_t n, double side, std::size_t i, std::size_t j);

/// Per-node mass exp(gamma h_eps - gamma^2 Var(h_eps) / 2) * area, with the offset
/// applied as a final factor exp(gamma * offset).
CellMeasure gmc_measure(const GridField& f, double gamma, double eps);
CellMeasure gmc_measure(const GridField& f, double gamma, const Mollifier& m);

/// Field on [0, 1]^2 with a free (Neumann) bottom edge and zero values on the other three.
///
/// Columns i = 1..n-1 sit at x = i / n; rows j = 0..n-1 at y = (j + 1/2) / n.
struct StripField {
  std::size_t n = 0;
  double offset = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> values;  // (n-1) x n, index (i-1) * n + j
  std::vector<double> coeffs;  // same layout, in the sine x cosine-IV basis

  double cell() const noexcept { return 1.0 / static_cast<double>(n); }
};

StripField sample_strip_gff(std::size_t n, std::uint64_t seed);

/// Semicircle-average operator on the strip: J0 multipliers and the exact variance of
/// h_eps(x_i, 0) at the boundary points x_i = i / n.
struct StripMollifier {
  std::size_t n = 0;
  double eps = 0.0;
  std::vector<double> multiplier;  // (n-1) x n
  std::vector<double> variance;    // n-1
};

StripMollifier make_strip_mollifier(std::size_t n, double eps);

/// Semicircle averages h_eps(x_i, 0) (offset included), and their exact variances.
std::vector<double> boundary_trace(const StripField& f, double eps);
std::vector<double> boundary_trace(const StripField& f, const StripMollifier& m);
std::vector<double> boundary_trace_variance(std::size_t n, double eps);

struct BoundaryMeasure {
  std::size_t n = 0;
  double gamma = 0.0;
  double eps = 0.0;
  double cell = 0.0;
  std::vector<double> masses;  // boundary points x_i, i = 1..n-1

  double total() const;
  /// Mass of boundary points with x in [x0, x1).
  double mass_in(double x0, double x1) const;
};

/// Per-point mass exp(gamma/2 h_eps - gamma^2/8 Var(h_eps)) * cell, offset applied as exp(gamma/2 * offset).
BoundaryMeasure boundary_measure(const StripField& f, double gamma, double eps);
BoundaryMeasure boundary_measure(const StripField& f, double gamma, const StripMollifier& m);

/// Bounded test functional of a field.
struct Statistic {
  std::string name;
  std::function<double(const GridField&)> eval;
};

/// Five bounded statistics used by the tilting checks on an n-grid.
std::vector<Statistic> girsanov_battery(std::size_t n);

struct GirsanovResult {
  double weighted = 0.0;  // sum w f(h) / sum w, w = exp(gamma h_eps(z) - gamma^2 Var / 2)
  double shifted = 0.0;   // mean f(h + gamma K_eps(., z))
  double stderr_ = 0.0;
  double zscore = 0.0;
  std::size_t trials = 0;
};

/// Cov(h(x), h_eps(z)) at every node, z = node (zi, zj).
std::vector<double> tilt_kernel(std::size_t n, std::size_t zi, std::size_t zj, double eps);

/// Compares both sides of E[e^{gamma h_eps(z)} f(h)] / E[e^{gamma h_eps(z)}] = E[f(h + gamma K_eps(., z))]
/// on paired samples; the z-score uses the delta-method standard error of the difference.
std::vector<GirsanovResult> girsanov_check(std::size_t n, double gamma, std::size_t zi, std::size_t zj, double eps,
                                           const std::vector<Statistic>& stats, std::size_t trials,
                                           std::uint64_t seed);

struct CoordinateChangeResult {
  double mass_original = 0.0;  // mean mass of S under h_D
  double mass_mapped = 0.0;    // mean mass of r S under h_{rD} + Q log(1/r)
  double discrepancy = 0.0;    // |mapped - original| / original
  double stderr_original = 0.0;
  double stderr_mapped = 0.0;
};

/// Liouville coordinate change under z -> r z, r in {1/2, 1, 2}. D = [0, 1]^2 with `cells`
/// cells per side, rD is sampled with the same cell size, and S is the middle half square.
/// Masses use the eps^{gamma^2/2} e^{gamma h_eps} normalization.
CoordinateChangeResult coordinate_change_check(std::size_t cells, double r, double gamma, double eps,
                                               std::size_t trials, std::uint64_t seed);

struct WedgeProfile {
  double alpha = 0.0;
  std::vector<double> s_grid;
  std::vector<double> a_values;
  std::size_t attempts = 0;  // rejection attempts used for the s < 0 branch
};

/// A_s = B_{2s} + alpha s for s > 0 and A_s = Bhat_{-2s} + alpha s for s < 0, with Bhat
/// conditioned on Bhat_{2t} + (Q - alpha) t > 0 for t in (0, 10] by rejection.
WedgeProfile wedge_radial(double alpha, const SleParams& p, double horizon, double ds, std::uint64_t seed);

/// Bead boundary lengths of a thin wedge of weight W < gamma^2/2: excursion lengths
/// of a Bessel process of dimension 4W / gamma^2.
std::vector<double> thin_wedge_bead_lengths(double weight, const SleParams& p, double dt, double horizon,
                                            std::uint64_t seed);

}  // namespace lqg::gmc
