#include "lqg/levy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "lqg/params.hpp"
#include "lqg/rng.hpp"
#include "lqg/stats.hpp"

namespace lqg::levy {

double SubordinatorPath::value(double t) const {
  const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  const auto n = static_cast<std::size_t>(it - jump_times.begin());
  return drift_comp * t + (n ? cumulative[n - 1] : 0.0);
}

double SubordinatorPath::value_left(double t) const {
  const auto it = std::lower_bound(jump_times.begin(), jump_times.end(), t);
  const auto n = static_cast<std::size_t>(it - jump_times.begin());
  return drift_comp * t + (n ? cumulative[n - 1] : 0.0);
}

SubordinatorPath sample_subordinator(double beta, double c, double horizon, double cutoff, std::uint64_t seed,
                                     const SubordinatorOptions& opts) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    std::ostringstream os;
    os << "beta = " << beta << " outside (0, 1]";
    throw ParameterError(os.str());
  }
  if (!(c > 0.0)) throw ParameterError("c must be > 0");
  if (!(horizon > 0.0)) throw ParameterError("horizon must be > 0");
  if (!(cutoff > 0.0)) throw ParameterError("cutoff must be > 0");

  SubordinatorPath p;
  p.beta = beta;
  p.c_scale = c;
  p.horizon = horizon;
  p.small_jump_cutoff = cutoff;
  if (beta == 1.0) {
    p.drift_comp = c;
    return p;
  }

  const double g = std::tgamma(1.0 - beta);
  const double rate = c / g * std::pow(cutoff, -beta);  // nu((cutoff, inf))
  if (opts.compensate_small_jumps) p.drift_comp = c * beta / g * std::pow(cutoff, 1.0 - beta) / (1.0 - beta);

  CounterRng rng(seed);
  std::poisson_distribution<std::uint64_t> count_dist(rate * horizon);
  const auto n = static_cast<std::size_t>(count_dist(rng));
  p.jump_times.resize(n);
  p.jump_sizes.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.jump_times[i] = horizon * rng.uniform();
  std::sort(p.jump_times.begin(), p.jump_times.end());
  for (std::size_t i = 0; i < n; ++i) p.jump_sizes[i] = cutoff * std::pow(rng.uniform_open(), -1.0 / beta);
  p.cumulative.resize(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) p.cumulative[i] = (acc += p.jump_sizes[i]);
  return p;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi > lo) || count < 2) throw ParameterError("log_grid needs 0 < lo < hi and count >= 2");
  std::vector<double> g(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  return g;
}

LaplaceFit laplace_fit(std::span<const double> tau_values, std::span<const double> lambdas) {
  if (tau_values.size() < 1000) throw ParameterError("laplace_fit needs at least 1000 samples");
  std::vector<double> xs, ys;
  for (double lam : lambdas) {
    if (!(lam > 0.0)) throw ParameterError("laplace_fit: lambda grid must be positive");
    if (std::find(xs.begin(), xs.end(), std::log(lam)) != xs.end()) continue;
    double m = 0.0;
    for (double t : tau_values) m += std::exp(-lam * t);
    m /= static_cast<double>(tau_values.size());
    if (!(m > 0.0 && m < 1.0)) continue;  // log(-log m) undefined
    xs.push_back(std::log(lam));
    ys.push_back(std::log(-std::log(m)));
  }
  if (xs.size() < 2) throw ParameterError("laplace_fit: degenerate lambda grid (fewer than two usable points)");
  const auto f = stats::fit_line(xs, ys);
  LaplaceFit out;
  out.beta_hat = f.slope;
  out.beta_se = f.slope_se;
  out.c_hat = std::exp(f.intercept);
  out.c_se = out.c_hat * f.intercept_se;
  out.r2 = f.r2;
  return out;
}

LaplaceFit laplace_fit(std::span<const SubordinatorPath> paths, double t, std::span<const double> lambdas) {
  std::vector<double> tau(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) tau[i] = paths[i].value(t);
  return laplace_fit(tau, lambdas);
}

OccupationMeasure::OccupationMeasure(const SubordinatorPath& path, double horizon)
    : horizon_(horizon), drift_(path.drift_comp) {
  // Range values come from the path itself so that m[0, tau_T] = T holds to the last bit.
  times_.push_back(0.0);
  starts_.push_back(0.0);
  for (std::size_t i = 0; i < path.jump_times.size() && path.jump_times[i] <= horizon; ++i) {
    const double t = path.jump_times[i];
    ends_.push_back(path.value_left(t));
    masses_.push_back(t - times_.back());
    times_.push_back(t);
    starts_.push_back(path.value(t));
  }
  ends_.push_back(path.value(horizon));
  masses_.push_back(horizon - times_.back());
}

double OccupationMeasure::mass_up_to(double x) const {
  // First piece whose range end passes x; the inverse is then found inside it.
  const auto it = std::upper_bound(ends_.begin(), ends_.end(), x);
  if (it == ends_.end()) return horizon_;
  const auto i = static_cast<std::size_t>(it - ends_.begin());
  if (starts_[i] > x) return times_[i];
  return std::min(times_[i] + (x - starts_[i]) / drift_, i + 1 < times_.size() ? times_[i + 1] : horizon_);
}

OccupationMeasure occupation_measure(const SubordinatorPath& path, double horizon) {
  return OccupationMeasure(path, horizon);
}

double besq_bridge_zero_probability(double dim, double x, double y, double t) {
  if (x <= 0.0 || y <= 0.0) return 1.0;
  const double z = std::sqrt(x * y) / t;
  if (z > 50.0) return 0.0;
  const double mu = 1.0 - 0.5 * dim;
  const double i_mu = std::cyl_bessel_i(mu, z);
  const double k_part = 2.0 / std::numbers::pi * std::sin(mu * std::numbers::pi) * std::cyl_bessel_k(mu, z);
  return k_part / (i_mu + k_part);
}

BesselZeroSet bessel_zero_set(double dim, double dt, double horizon, std::uint64_t seed) {
  if (!(dim > 0.0 && dim < 2.0)) {
    std::ostringstream os;
    os << "Bessel dimension " << dim << " outside (0, 2): no zeros to sample";
    throw ParameterError(os.str());
  }
  if (!(dt > 0.0 && horizon > dt)) throw ParameterError("bessel_zero_set needs 0 < dt < horizon");

  BesselZeroSet out;
  out.dim = dim;
  out.dt = dt;
  out.horizon = horizon;
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  CounterRng rng(seed);
  double zsq = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    // BESQ transition: Poisson mixture of Gamma laws.
    const double mean = zsq / (2.0 * dt);
    const auto n = mean > 0.0 ? std::poisson_distribution<std::uint64_t>(mean)(rng) : std::uint64_t{0};
    const double shape = 0.5 * dim + static_cast<double>(n);
    const double next = 2.0 * dt * std::gamma_distribution<double>(shape, 1.0)(rng);
    if (zsq == 0.0 || rng.uniform() < besq_bridge_zero_probability(dim, zsq, next, dt)) out.zero_steps.push_back(k);
    zsq = next;
  }
  box_count(out);
  const std::size_t levels = out.box_scales.size();
  const std::size_t hi = levels > 7 ? levels - 6 : levels - 1;
  const std::size_t lo = std::min<std::size_t>(2, hi > 0 ? hi - 1 : 0);
  std::vector<double> logs(levels);
  for (std::size_t j = 0; j < levels; ++j) logs[j] = std::log(out.box_counts[j]);
  out.dimension_estimate = levels >= 2 ? box_dimension(out.box_scales, logs, lo, hi) : 0.0;
  return out;
}

void box_count(BesselZeroSet& z) {
  z.box_scales.clear();
  z.box_counts.clear();
  const auto steps = static_cast<std::size_t>(std::llround(z.horizon / z.dt));
  for (std::size_t j = 0; (steps >> j) >= 1; ++j) {
    std::size_t count = 0, last = static_cast<std::size_t>(-1);
    for (std::size_t k : z.zero_steps) {
      const std::size_t b = k >> j;
      if (b != last) ++count, last = b;
    }
    z.box_scales.push_back(z.dt * std::ldexp(1.0, static_cast<int>(j)));
    z.box_counts.push_back(static_cast<double>(count));
  }
}

double box_dimension(std::span<const double> scales, std::span<const double> mean_log_counts, std::size_t level_lo,
                     std::size_t level_hi) {
  if (level_hi <= level_lo || level_hi >= scales.size() || scales.size() != mean_log_counts.size()) {
    throw ParameterError("box_dimension: bad level range");
  }
  std::vector<double> xs, ys;
  for (std::size_t j = level_lo; j <= level_hi; ++j) {
    xs.push_back(std::log(scales[j]));
    ys.push_back(mean_log_counts[j]);
  }
  return -stats::fit_line(xs, ys).slope;
}

std::vector<double> excursion_lengths(const BesselZeroSet& z) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < z.zero_steps.size(); ++i) {
    const std::size_t gap = z.zero_steps[i + 1] - z.zero_steps[i];
    if (gap > 1) out.push_back(static_cast<double>(gap - 1) * z.dt);
  }
  return out;
}

double sample_positive_stable(double a, double u, double e) {
  const double pi = std::numbers::pi;
  const double num = std::pow(std::sin(a * pi * u), a) * std::pow(std::sin((1.0 - a) * pi * u), 1.0 - a);
  const double A = std::pow(num / std::sin(pi * u), 1.0 / (1.0 - a));
  return std::pow(A / e, (1.0 - a) / a);
}

double first_passage_laplace_constant(double beta_prime) { return std::tgamma(-beta_prime); }

FirstPassageSample first_passage_sizebias(double beta_prime, std::size_t n, std::uint64_t seed,
                                          std::size_t pool_factor) {
  if (!(beta_prime > 1.0 && beta_prime < 2.0)) {
    std::ostringstream os;
    os << "beta' = " << beta_prime << " outside (1, 2)";
    throw ParameterError(os.str());
  }
  if (n == 0 || pool_factor == 0) throw ParameterError("first_passage_sizebias needs n > 0 and pool_factor > 0");

  FirstPassageSample out;
  out.beta_prime = beta_prime;
  const double a = 1.0 / beta_prime;
  const double scale = 1.0 / first_passage_laplace_constant(beta_prime);
  CounterRng rng(seed);
  out.unbiased.resize(n * pool_factor);
  for (auto& t : out.unbiased) {
    const double u = rng.uniform_open();
    const double e = -std::log(rng.uniform_open());
    t = scale * sample_positive_stable(a, u, e);
  }

  std::vector<double> cum(out.unbiased.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cum.size(); ++i) cum[i] = (acc += out.unbiased[i]);
  out.size_biased.resize(n);
  for (auto& s : out.size_biased) {
    const double r = rng.uniform() * acc;
    auto it = std::upper_bound(cum.begin(), cum.end(), r);
    if (it == cum.end()) --it;
    s = out.unbiased[static_cast<std::size_t>(it - cum.begin())];
  }
  return out;
}

double tail_slope(std::vector<double> samples, double q_lo, double q_hi, std::size_t points) {
  if (samples.size() < 10 || !(q_lo >= 0.0 && q_hi > q_lo && q_hi < 1.0) || points < 2) {
    throw ParameterError("tail_slope: need >= 10 samples and 0 <= q_lo < q_hi < 1");
  }
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  const double x_lo = samples[static_cast<std::size_t>(q_lo * (n - 1))];
  const double x_hi = samples[static_cast<std::size_t>(q_hi * (n - 1))];
  if (!(x_lo > 0.0 && x_hi > x_lo)) throw ParameterError("tail_slope: degenerate quantile range");
  std::vector<double> xs, ss;
  for (double x : log_grid(x_lo, x_hi, points)) {
    const auto above = samples.end() - std::upper_bound(samples.begin(), samples.end(), x);
    if (above == 0) continue;
    xs.push_back(x);
    ss.push_back(static_cast<double>(above) / n);
  }
  return stats::fit_loglog(xs, ss).slope;
}

}  // namespace lqg::levy
