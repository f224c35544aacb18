#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lqg::levy {

/// Jump representation of a beta-stable subordinator on [0, horizon].
///
/// tau_t = drift_comp * t + sum of jumps at times <= t. For beta = 1 the path is the
/// deterministic line c * t (drift_comp = c, no jumps).
struct SubordinatorPath {
  double beta = 1.0;
  double c_scale = 1.0;
  double horizon = 0.0;
  double small_jump_cutoff = 0.0;
  double drift_comp = 0.0;
  std::vector<double> jump_times;  // sorted
  std::vector<double> jump_sizes;  // >= small_jump_cutoff
  std::vector<double> cumulative;  // cumulative[i] = sum of jump_sizes[0..i]

  /// Right-continuous value tau_t.
  double value(double t) const;
  /// Left limit tau_{t-}.
  double value_left(double t) const;
};

struct SubordinatorOptions {
  /// Replace the dropped jumps below the cutoff by their mean rate.
  bool compensate_small_jumps = true;
};

/// Laplace exponent c * lambda^beta, i.e. Levy density c beta / Gamma(1 - beta) x^{-1-beta}.
SubordinatorPath sample_subordinator(double beta, double c, double horizon, double cutoff, std::uint64_t seed,
                                     const SubordinatorOptions& opts = {});

struct LaplaceFit {
  double beta_hat = 0.0;
  double c_hat = 0.0;
  double beta_se = 0.0;
  double c_se = 0.0;
  double r2 = 0.0;
};

/// log(-log E e^{-lambda tau}) = log c + beta log lambda, fitted over `lambdas`.
LaplaceFit laplace_fit(std::span<const double> tau_values, std::span<const double> lambdas);
LaplaceFit laplace_fit(std::span<const SubordinatorPath> paths, double t, std::span<const double> lambdas);

/// `count` log-spaced points in [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t count);

/// Pushforward of Lebesgue measure on [0, horizon] through tau.
///
/// Piece i covers times [t_i, t_{i+1}) and the range [start_i, start_i + drift * mass_i];
/// with no drift it is an atom of mass mass_i at start_i.
class OccupationMeasure {
 public:
  OccupationMeasure(const SubordinatorPath& path, double horizon);

  /// m[0, x] = inf{t <= horizon : tau_t > x}, or horizon if tau never exceeds x.
  double mass_up_to(double x) const;
  double total_mass() const { return mass_up_to(range_end()); }
  double range_end() const { return ends_.back(); }

  const std::vector<double>& breakpoints() const { return starts_; }
  const std::vector<double>& masses() const { return masses_; }

 private:
  double horizon_;
  double drift_;
  std::vector<double> times_;   // piece start times
  std::vector<double> starts_;  // tau(t_i)
  std::vector<double> ends_;    // tau(t_{i+1}-)
  std::vector<double> masses_;
};

OccupationMeasure occupation_measure(const SubordinatorPath& path, double horizon);

/// Zero set of a Bessel process of dimension `dim` in (0, 2) started at 0.
struct BesselZeroSet {
  double dim = 0.0;
  double dt = 0.0;
  double horizon = 0.0;
  std::vector<std::size_t> zero_steps;  // k such that [k dt, (k+1) dt] holds a zero
  std::vector<double> box_scales;       // dt * 2^j
  std::vector<double> box_counts;
  double dimension_estimate = 0.0;      // box-counting; approximates 1 - dim/2
};

/// Probability that BESQ(dim) started at x and observed at y after time t visits 0 in between.
double besq_bridge_zero_probability(double dim, double x, double y, double t);

/// Exact squared-Bessel transitions with an exact bridge test for zeros between grid points.
BesselZeroSet bessel_zero_set(double dim, double dt, double horizon, std::uint64_t seed);

/// Box counts of a set of grid cells at scales dt * 2^j, j = 0.. until one box remains.
void box_count(BesselZeroSet& z);

/// -slope of log count against log scale over box levels [level_lo, level_hi].
double box_dimension(std::span<const double> scales, std::span<const double> mean_log_counts,
                     std::size_t level_lo, std::size_t level_hi);

/// Lengths of the excursions away from zero, in time units.
std::vector<double> excursion_lengths(const BesselZeroSet& z);

/// Positive stable variable with E exp(-q S) = exp(-q^a), a in (0, 1) (Kanter's representation).
double sample_positive_stable(double a, double u, double e);

struct FirstPassageSample {
  double beta_prime = 0.0;
  std::vector<double> unbiased;     // tau_{-1} draws (the resampling pool)
  std::vector<double> size_biased;  // drawn from the pool with weights proportional to tau
};

/// First passage below -1 of the spectrally positive beta'-stable process with Levy
/// measure 1_{x>0} x^{-beta'-1} dx, plus its size-biased version.
///
/// tau_{-x} is a (1/beta')-stable subordinator in x: E e^{-q tau_{-1}} = exp(-(q / Gamma(-beta'))^{1/beta'}),
/// so draws are exact. Size-biasing reweights a pool of pool_factor * n draws.
FirstPassageSample first_passage_sizebias(double beta_prime, std::size_t n, std::uint64_t seed,
                                          std::size_t pool_factor = 10);

/// Laplace exponent constant Gamma(-beta') of the process above.
double first_passage_laplace_constant(double beta_prime);

/// Least-squares slope of log P(X > x) on a log grid between two sample quantiles.
double tail_slope(std::vector<double> samples, double q_lo, double q_hi, std::size_t points = 20);

}  // namespace lqg::levy
