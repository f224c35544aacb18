#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace lqg::loewner {

using Complex = std::complex<double>;

/// dt too coarse: a drift step would jump a force point by more than its gap.
class StepSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The backward zipper left the finite upper half-plane.
class TraceError : public std::runtime_error {
 public:
  TraceError(const std::string& what, std::size_t step) : std::runtime_error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

enum class Side { Left, Right };

struct ForceSpec {
  Side side = Side::Right;
  double position = 0.0;  // <= 0 on the left, >= 0 on the right; 0 means 0- / 0+
  double weight = 0.0;    // rho > -2
};

struct DrivingOptions {
  /// Gap below which the singular drifts are evaluated at the threshold instead.
  /// Negative selects the default 0.1 * sqrt(dt).
  double collision_threshold = -1.0;
};

/// Euler-Maruyama sample of the SLE_kappa(rho) driving pair.
struct DrivingPath {
  double kappa = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::vector<ForceSpec> forces;
  std::vector<double> w;               // W at k*dt, k = 0..steps
  std::vector<std::vector<double>> v;  // v[i][k]: force point i at k*dt
  std::vector<double> zero_gap_fraction;  // per force point, share of steps with gap exactly 0

  std::size_t steps() const noexcept { return w.empty() ? 0 : w.size() - 1; }
  double horizon() const noexcept { return dt * static_cast<double>(steps()); }
};

/// Validates ordering and weights; throws lqg::ParameterError.
void validate_forces(std::span<const ForceSpec> forces);

/// Drives the pair with caller-supplied standard normal increments (one per step).
/// Same normals under rescaled dt give exactly rescaled paths when all rho are 0.
DrivingPath simulate_driving_from_normals(double kappa, std::span<const ForceSpec> forces, double dt,
                                          std::span<const double> normals, const DrivingOptions& opts = {});

/// W_t = sqrt(kappa) B_t + sum_i int rho_i / (W_s - V^i_s) ds,  V^i_t = x_i + int 2 / (V^i_s - W_s) ds.
/// A gap that crosses zero within a step is absorbed (set to 0) and the pair
/// then moves together until the noise separates it again.
DrivingPath simulate_driving(double kappa, std::span<const ForceSpec> forces, double dt, double horizon,
                             std::uint64_t seed, const DrivingOptions& opts = {});

struct CurveTrace {
  std::vector<Complex> points;
  std::vector<double> capacity_times;
};

/// Point gamma(t_k) = g_{t_k}^{-1}(W_{t_k}) by composing inverse vertical-slit maps.
Complex tip_at_step(const DrivingPath& d, std::size_t step);

/// `resolution` points at evenly spaced capacity times in [0, horizon].
CurveTrace trace_curve(const DrivingPath& d, std::size_t resolution);

struct BoundaryHit {
  double time = 0.0;
  double location = 0.0;  // real point of R_+ visited by the curve
};

/// Step indices k >= min_time/dt where the first right force point's gap is <= tolerance.
std::vector<std::size_t> hit_steps(const DrivingPath& d, double tolerance, double min_time = 0.0);

/// One entry per maximal run of consecutive hit steps (time of its first step).
/// Empty unless the path carries a right force point.
std::vector<BoundaryHit> boundary_hits(const DrivingPath& d, double tolerance, double min_time = 0.0);

struct CapacityOptions {
  std::size_t walks = 2000;
  std::uint64_t seed = 1;
  double shell = 1e-4;  // relative stopping distance for walk-on-spheres
};

/// Half-plane capacity of the hull bounded by the polyline, via
/// hcap(A) = (2r/pi) int_0^pi E^{r e^{i theta}}[Im B_tau] sin(theta) d theta with A inside r D.
double halfplane_capacity(std::span<const Complex> polyline, const CapacityOptions& opts = {});
inline double halfplane_capacity(const CurveTrace& t, const CapacityOptions& opts = {}) {
  return halfplane_capacity(t.points, opts);
}

/// Brute-force O(n^2) check for crossings between non-adjacent segments.
bool polyline_self_intersects(std::span<const Complex> polyline);

}  // namespace lqg::loewner
