#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "lqg/levy.hpp"
#include "lqg/params.hpp"
#include "lqg/rng.hpp"
#include "lqg/stats.hpp"

using namespace lqg;
using namespace lqg::levy;

namespace {

std::vector<double> tau_samples(double beta, double c, double t, double horizon, double cutoff, std::size_t n,
                                std::uint64_t seed) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = sample_subordinator(beta, c, horizon, cutoff, derive_seed(seed, i)).value(t);
  return out;
}

}  // namespace

TEST_CASE("beta = 1 is the deterministic line") {
  const auto p = sample_subordinator(1.0, 2.0, 3.0, 1e-8, 1);
  CHECK(p.jump_times.empty());
  CHECK(p.value(3.0) == 6.0);
  CHECK(p.value(1.25) == 2.5);
}

TEST_CASE("subordinator parameter errors") {
  CHECK_THROWS_AS(sample_subordinator(0.0, 1.0, 1.0, 1e-4, 1), ParameterError);
  CHECK_THROWS_AS(sample_subordinator(1.2, 1.0, 1.0, 1e-4, 1), ParameterError);
  CHECK_THROWS_AS(sample_subordinator(0.5, 1.0, 1.0, 0.0, 1), ParameterError);
  CHECK_THROWS_AS(sample_subordinator(0.5, -1.0, 1.0, 1e-4, 1), ParameterError);
}

TEST_CASE("path representation invariants") {
  const auto p = sample_subordinator(0.6, 1.0, 2.0, 1e-4, 3);
  CHECK(p.value(0.0) == 0.0);
  CHECK(std::is_sorted(p.jump_times.begin(), p.jump_times.end()));
  for (double s : p.jump_sizes) CHECK(s >= p.small_jump_cutoff);
  double last = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = p.value(2.0 * i / 1000.0);
    CHECK(v >= last);
    last = v;
  }
  // Right-continuity at jump times: the value includes the jump, the left limit does not.
  for (std::size_t i = 0; i < std::min<std::size_t>(p.jump_times.size(), 20); ++i) {
    const double t = p.jump_times[i];
    CHECK(p.value(t) - p.value_left(t) == doctest::Approx(p.jump_sizes[i]));
  }
}

TEST_CASE("Laplace transform at beta = 1/2") {
  const double c = 1.0;
  const auto tau = tau_samples(0.5, c, 1.0, 1.0, 1e-6, 20000, 11);
  std::vector<double> e(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) e[i] = std::exp(-tau[i]);
  const auto s = stats::summarize(e);
  CHECK(std::abs(s.mean - std::exp(-c)) < 3.0 * s.stderr_);

  // Same law as (c^2 / 2) / Z^2: the Brownian first-passage time.
  const auto ks = stats::ks_one_sample(tau, [&](double x) {
    return x <= 0.0 ? 0.0 : 2.0 * (1.0 - stats::normal_cdf(c / std::sqrt(2.0 * x)));
  });
  CHECK(ks.p_value > 0.001);
}

TEST_CASE("Laplace fit recovers beta and c") {
  const auto lambdas = log_grid(0.1, 10.0, 100);
  const auto half = laplace_fit(tau_samples(0.5, 1.0, 1.0, 1.0, 1e-5, 10000, 21), lambdas);
  CHECK(half.beta_hat >= 0.47);
  CHECK(half.beta_hat <= 0.53);
  const auto two = laplace_fit(tau_samples(0.75, 2.0, 1.0, 1.0, 1e-5, 10000, 22), lambdas);
  CHECK(two.c_hat >= 1.8);
  CHECK(two.c_hat <= 2.2);

  std::vector<SubordinatorPath> lines;
  for (int i = 0; i < 1000; ++i) lines.push_back(sample_subordinator(1.0, 1.5, 1.0, 1e-8, i));
  const auto one = laplace_fit(lines, 1.0, lambdas);
  CHECK(std::abs(one.beta_hat - 1.0) < 1e-6);
  CHECK(one.c_hat == doctest::Approx(1.5));
}

TEST_CASE("Laplace fit errors") {
  std::vector<double> few(10, 1.0);
  const auto lambdas = log_grid(0.1, 10.0, 10);
  CHECK_THROWS_AS(laplace_fit(few, lambdas), ParameterError);
  std::vector<double> many(2000, 1.0);
  std::vector<double> single{1.0, 1.0, 1.0};
  CHECK_THROWS_AS(laplace_fit(many, single), ParameterError);
  std::vector<double> negative{-1.0, 2.0};
  CHECK_THROWS_AS(laplace_fit(many, negative), ParameterError);
}

TEST_CASE("self-similarity: tau_{4t} has the law of 4^{1/beta} tau_t") {
  const double beta = 0.7, a = 4.0;
  const std::size_t n = 10000;
  std::vector<double> big(n), small(n);
  for (std::size_t i = 0; i < n; ++i) {
    big[i] = sample_subordinator(beta, 1.0, a, 1e-5, derive_seed(31, i)).value(a);
    small[i] = std::pow(a, 1.0 / beta) * sample_subordinator(beta, 1.0, 1.0, 1e-5, derive_seed(32, i)).value(1.0);
  }
  const auto ks = stats::ks_two_sample(big, small);
  CHECK(ks.statistic < stats::ks_two_sample_critical(n, n, 0.01));
}

TEST_CASE("increments are independent") {
  const std::size_t n = 5000;
  std::vector<double> first(n), second(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = sample_subordinator(0.6, 1.0, 2.0, 1e-4, derive_seed(41, i));
    first[i] = p.value(1.0);
    second[i] = p.value(2.0) - p.value(1.0);
  }
  // Spearman correlation has standard error about 1 / sqrt(n - 1) under independence.
  CHECK(std::abs(stats::rank_correlation(first, second)) < 3.0 / std::sqrt(static_cast<double>(n - 1)));
}

TEST_CASE("occupation measure") {
  const auto line = sample_subordinator(1.0, 1.0, 5.0, 1e-8, 1);
  const auto m1 = occupation_measure(line, 5.0);
  for (double x : {0.0, 0.3, 1.0, 2.7, 4.999}) CHECK(m1.mass_up_to(x) == doctest::Approx(x));

  for (std::uint64_t s = 0; s < 20; ++s) {
    const double T = 1.0 + 0.37 * static_cast<double>(s);
    const auto p = sample_subordinator(0.4 + 0.02 * static_cast<double>(s), 1.0, T + 1.0, 1e-4, s);
    const auto m = occupation_measure(p, T);
    CHECK(m.mass_up_to(p.value(T)) == T);
    CHECK(m.total_mass() == T);
    // Generalized inverse: tau(m[0, x]-) <= x <= tau(m[0, x]).
    for (double x : {0.01, 0.1, 0.5}) {
      if (x >= p.value(T)) continue;
      const double t = m.mass_up_to(x);
      CHECK(p.value_left(t) <= x + 1e-12);
      CHECK(p.value(t) >= x - 1e-12);
    }
  }
}

TEST_CASE("occupation-measure moments stabilize") {
  auto moments = [](std::size_t n, std::uint64_t seed) {
    std::vector<double> m(3, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = sample_subordinator(0.5, 1.0, 20.0, 1e-4, derive_seed(seed, i));
      const double x = occupation_measure(p, 20.0).mass_up_to(1.0);
      m[0] += x;
      m[1] += x * x;
      m[2] += x * x * x * x;
    }
    for (auto& v : m) v /= static_cast<double>(n);
    return m;
  };
  const auto a = moments(1000, 51), b = moments(10000, 52);
  for (int p = 0; p < 3; ++p) CHECK(a[p] / b[p] == doctest::Approx(1.0).epsilon(0.25));
  // m[0,1] = inf{t : tau_t > 1} has E m = 1 / Gamma(1 + beta) when c = 1.
  CHECK(b[0] == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(0.03));
}

TEST_CASE("bridge zero probability for dimension 1 is 1 - tanh") {
  for (double x : {0.01, 0.3, 1.0}) {
    for (double y : {0.02, 0.5}) {
      const double t = 0.1;
      const double expect = 1.0 - std::tanh(std::sqrt(x * y) / t);
      CHECK(besq_bridge_zero_probability(1.0, x, y, t) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
  CHECK(besq_bridge_zero_probability(0.7, 0.0, 1.0, 0.1) == 1.0);
}

TEST_CASE("Bessel zero-set box dimension at dim = 1") {
  const auto z = bessel_zero_set(1.0, 1.0 / (1 << 18), 1.0, 5);
  CHECK(z.zero_steps.front() == 0);
  CHECK(std::is_sorted(z.zero_steps.begin(), z.zero_steps.end()));
  CHECK(z.dimension_estimate > 0.35);
  CHECK(z.dimension_estimate < 0.65);
  CHECK_THROWS_AS(bessel_zero_set(2.0, 1e-3, 1.0, 1), ParameterError);
  CHECK_THROWS_AS(bessel_zero_set(0.0, 1e-3, 1.0, 1), ParameterError);
}

TEST_CASE("zero counts fall as the dimension approaches 2") {
  std::vector<double> counts;
  for (double dim : {0.5, 1.0, 1.5, 1.8, 1.95}) {
    double total = 0.0;
    for (std::uint64_t s = 0; s < 8; ++s) total += static_cast<double>(bessel_zero_set(dim, 1e-5, 1.0, s).zero_steps.size());
    counts.push_back(total);
  }
  for (std::size_t i = 1; i < counts.size(); ++i) CHECK(counts[i] < counts[i - 1]);
}

TEST_CASE("excursion lengths tile the gaps between zeros") {
  const auto z = bessel_zero_set(1.0, 1e-4, 1.0, 9);
  const auto ex = excursion_lengths(z);
  double covered = 0.0;
  for (double e : ex) covered += e;
  CHECK(covered + static_cast<double>(z.zero_steps.size()) * z.dt <= 1.0 + 1e-9);
}

TEST_CASE("positive stable sampler has the stated Laplace transform") {
  CounterRng rng(4);
  const double a = 0.6;
  const std::size_t n = 20000;
  std::vector<double> s(n);
  for (auto& x : s) x = sample_positive_stable(a, rng.uniform_open(), -std::log(rng.uniform_open()));
  for (double q : {0.3, 1.0, 3.0}) {
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(-q * s[i]);
    const auto sm = stats::summarize(e);
    CHECK(std::abs(sm.mean - std::exp(-std::pow(q, a))) < 4.0 * sm.stderr_);
  }
}

TEST_CASE("first-passage law and size-biasing") {
  CHECK_THROWS_AS(first_passage_sizebias(1.0, 10, 1), ParameterError);
  CHECK_THROWS_AS(first_passage_sizebias(2.0, 10, 1), ParameterError);

  const double bp = 1.5;
  const auto fp = first_passage_sizebias(bp, 5000, 8);
  CHECK(fp.unbiased.size() == 50000);
  CHECK(fp.size_biased.size() == 5000);
  const double C = first_passage_laplace_constant(bp);
  for (double q : {0.5, 2.0}) {
    std::vector<double> e(fp.unbiased.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::exp(-q * fp.unbiased[i]);
    const auto sm = stats::summarize(e);
    CHECK(std::abs(sm.mean - std::exp(-std::pow(q / C, 1.0 / bp))) < 4.0 * sm.stderr_);
  }
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
  };
  CHECK(median(fp.size_biased) > median(fp.unbiased));
}

TEST_CASE("first passage agrees with a direct Euler simulation of the process") {
  // zeta has jumps x^{-beta'-1} dx above eps (compound Poisson), compensated so that E zeta_t = 0,
  // and a Gaussian stand-in for the jumps below eps.
  const double bp = 1.5, eps = 1e-3, dt = 1e-3, t_max = 20.0;
  const double jump_rate = std::pow(eps, -bp) / bp;
  const double drift = -std::pow(eps, 1.0 - bp) / (bp - 1.0);
  const double small_sd = std::sqrt(std::pow(eps, 2.0 - bp) / (2.0 - bp) * dt);
  CounterRng rng(12);
  std::vector<double> euler;
  for (int trial = 0; trial < 600; ++trial) {
    double x = 0.0, t = 0.0;
    while (x > -1.0 && t < t_max) {
      std::poisson_distribution<int> pois(jump_rate * dt);
      const int k = pois(rng);
      for (int j = 0; j < k; ++j) x += eps * std::pow(rng.uniform_open(), -1.0 / bp);
      x += drift * dt + small_sd * rng.normal();
      t += dt;
    }
    euler.push_back(t);
  }
  const double C = first_passage_laplace_constant(bp);
  std::vector<double> e(euler.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::exp(-euler[i]);
  const auto sm = stats::summarize(e);
  CHECK(std::abs(sm.mean - std::exp(-std::pow(1.0 / C, 1.0 / bp))) < 4.0 * sm.stderr_ + 0.01);
}

TEST_CASE("tail slope of a Pareto sample") {
  CounterRng rng(2);
  std::vector<double> x(100000);
  for (auto& v : x) v = std::pow(rng.uniform_open(), -1.0 / 1.5);
  CHECK(tail_slope(x, 0.1, 0.999) == doctest::Approx(-1.5).epsilon(0.05));
}
