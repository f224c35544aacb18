#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "lqg/gmc.hpp"
#include "lqg/params.hpp"
#include "lqg/rng.hpp"
#include "lqg/stats.hpp"

using namespace lqg;
using namespace lqg::gmc;

namespace {

// 2 pi (-Delta)^{-1} e_c on the interior of an n-grid, by a direct sparse solve.
std::vector<double> green_column(std::size_t n, std::size_t ci, std::size_t cj) {
  const std::size_t m = n - 2;
  auto id = [m](std::size_t i, std::size_t j) { return static_cast<int>((i - 1) * m + (j - 1)); };
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      trip.emplace_back(id(i, j), id(i, j), 4.0);
      if (i > 1) trip.emplace_back(id(i, j), id(i - 1, j), -1.0);
      if (i < m) trip.emplace_back(id(i, j), id(i + 1, j), -1.0);
      if (j > 1) trip.emplace_back(id(i, j), id(i, j - 1), -1.0);
      if (j < m) trip.emplace_back(id(i, j), id(i, j + 1), -1.0);
    }
  Eigen::SparseMatrix<double> L(static_cast<int>(m * m), static_cast<int>(m * m));
  L.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(L);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<int>(m * m));
  rhs[id(ci, cj)] = 2.0 * std::numbers::pi;
  const Eigen::VectorXd g = solver.solve(rhs);
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= m; ++j) out[i * n + j] = g[id(i, j)];
  return out;
}

}  // namespace

TEST_CASE("GFF sampling basics") {
  CHECK_THROWS_AS(sample_gff(7, 1), ParameterError);
  const auto f = sample_gff(33, 4);
  for (std::size_t t = 0; t < 33; ++t) {
    CHECK(f.values[t] == 0.0);
    CHECK(f.values[32 * 33 + t] == 0.0);
    CHECK(f.values[t * 33] == 0.0);
    CHECK(f.values[t * 33 + 32] == 0.0);
  }
  const auto g = sample_gff(33, 4);
  CHECK(f.values == g.values);

  // Rebuilding the coefficients from the values is the inverse transform.
  const auto h = field_from_values(33, f.values);
  for (std::size_t q = 0; q < f.coeffs.size(); ++q) CHECK(h.coeffs[q] == doctest::Approx(f.coeffs[q]).epsilon(1e-10));
}

TEST_CASE("GFF is centred with the discrete Green covariance") {
  const std::size_t n = 64, c = 32, trials = 10000;
  const auto green = green_column(n, c, c);
  std::vector<double> center(trials), cov_a(trials), cov_b(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto f = sample_gff(n, derive_seed(1, t));
    center[t] = f.at(c, c);
    // Mirror pairs: (x, y) and the reflected pair across the vertical mid-line.
    cov_a[t] = f.at(20, 30) * f.at(25, 40);
    cov_b[t] = f.at(n - 1 - 20, 30) * f.at(n - 1 - 25, 40);
  }
  const auto s = stats::summarize(center);
  CHECK(std::abs(s.mean) < 3.0 * s.stderr_);

  std::vector<double> sq(trials);
  for (std::size_t t = 0; t < trials; ++t) sq[t] = center[t] * center[t];
  const auto v = stats::summarize(sq);
  CHECK(std::abs(v.mean - green[c * n + c]) < 3.0 * v.stderr_);

  std::vector<double> d(trials);
  for (std::size_t t = 0; t < trials; ++t) d[t] = cov_a[t] - cov_b[t];
  const auto sd = stats::summarize(d);
  CHECK(std::abs(sd.mean) < 3.0 * sd.stderr_);
}

TEST_CASE("mollifier variance matches the Green quadratic form") {
  const std::size_t n = 48;
  const double eps = 4.0 / 47.0;
  const auto mol = make_mollifier(n, eps);
  // Var h_eps at a node equals sum_kl (2 pi / lambda) J0^2 phi^2; check against Monte Carlo.
  const std::size_t trials = 6000;
  std::vector<double> sq(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto f = sample_gff(n, derive_seed(2, t));
    const double v = mollify(f, mol)[20 * n + 25];
    sq[t] = v * v;
  }
  const auto s = stats::summarize(sq);
  CHECK(std::abs(s.mean - mol.variance[20 * n + 25]) < 3.5 * s.stderr_);
}

TEST_CASE("circle averages") {
  const std::size_t n = 65;
  auto zero = field_from_values(n, std::vector<double>(n * n, 0.0));
  CHECK(circle_average(zero, 0.5, 0.5, 0.1) == 0.0);
  CHECK_THROWS_AS(circle_average(zero, 0.05, 0.5, 0.1), ParameterError);
  CHECK_THROWS_AS(circle_average(zero, 0.5, 0.5, 0.6), ParameterError);

  // Linear test function: bilinear interpolation is exact and the circle mean is the centre value.
  std::vector<double> vals(n * n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i)
    for (std::size_t j = 1; j + 1 < n; ++j) vals[i * n + j] = 3.0 * static_cast<double>(i) / 64.0 - static_cast<double>(j) / 64.0;
  auto lin = field_from_values(n, vals);
  CHECK(circle_average(lin, 0.5, 0.4, 0.1) == doctest::Approx(3.0 * 0.5 - 0.4).epsilon(1e-9));
}

TEST_CASE("circle-average variance grows like -log eps") {
  const std::size_t n = 128;
  const double cell = 1.0 / 127.0;
  std::vector<double> log_eps, var;
  for (double k : {2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0}) {
    log_eps.push_back(std::log(k * cell));
    var.push_back(circle_average_variance(n, 0.5, 0.5, k * cell));
  }
  const auto fit = stats::fit_line(log_eps, var);
  CHECK(-fit.slope >= 0.9);
  CHECK(-fit.slope <= 1.1);
  CHECK(fit.r2 > 0.95);

  // Monte Carlo: halving eps raises the variance by about log 2.
  const std::size_t trials = 3000;
  std::vector<double> a(trials), b(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto f = sample_gff(n, derive_seed(3, t));
    a[t] = circle_average(f, 0.5, 0.5, 16.0 * cell);
    b[t] = circle_average(f, 0.5, 0.5, 8.0 * cell);
  }
  std::vector<double> a2(trials), b2(trials), diff(trials);
  for (std::size_t t = 0; t < trials; ++t) diff[t] = b[t] * b[t] - a[t] * a[t];
  const auto sd = stats::summarize(diff);
  CHECK(std::abs(sd.mean - std::log(2.0)) < 3.0 * sd.stderr_ + 0.05);
  CHECK(circle_average_variance(n, 0.5, 0.5, 8.0 * cell) - circle_average_variance(n, 0.5, 0.5, 16.0 * cell) ==
        doctest::Approx(std::log(2.0)).epsilon(0.1));
}

TEST_CASE("GMC measure: gamma = 0, range, constant shift") {
  const std::size_t n = 64;
  auto f = sample_gff(n, 9);
  CHECK_THROWS_AS(gmc_measure(f, 2.0, 0.05), ParameterError);
  CHECK_THROWS_AS(gmc_measure(f, -0.1, 0.05), ParameterError);

  const auto area = gmc_measure(f, 0.0, 0.05);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) CHECK(area.masses[i * n + j] == cell_area(n, 1.0, i, j));

  const double gamma = 0.8, c = 0.37;
  const auto mol = make_mollifier(n, 4.0 / 63.0);
  const auto base = gmc_measure(f, gamma, mol);
  f.offset = c;
  const auto shifted = gmc_measure(f, gamma, mol);
  const double factor = std::exp(gamma * c);
  for (std::size_t q = 0; q < base.masses.size(); ++q) {
    CHECK(base.masses[q] >= 0.0);
    CHECK(shifted.masses[q] == doctest::Approx(base.masses[q] * factor).epsilon(1e-14));
  }
}

TEST_CASE("expected GMC mass equals area across eps") {
  const std::size_t n = 256, trials = 200;
  const double cell = 1.0 / 255.0, gamma = 0.5;
  std::vector<double> means;
  std::vector<double> totals;
  for (double k : {4.0, 8.0, 16.0}) {
    const auto mol = make_mollifier(n, k * cell);
    std::vector<double> mass(trials), total(trials);
    for (std::size_t t = 0; t < trials; ++t) {
      const auto m = gmc_measure(sample_gff(n, derive_seed(5, t)), gamma, mol);
      mass[t] = m.mass_in(64, 192, 64, 192);
      total[t] = m.total();
    }
    means.push_back(stats::summarize(mass).mean);
    totals.push_back(stats::summarize(total).mean);
  }
  const double area = 128.0 * 128.0 * cell * cell;
  for (double m : means) CHECK(m == doctest::Approx(area).epsilon(0.05));
  for (std::size_t i = 1; i < totals.size(); ++i) CHECK(totals[i] == doctest::Approx(totals[i - 1]).epsilon(0.05));
}

TEST_CASE("boundary measure") {
  const std::size_t n = 256, trials = 200;
  auto f = sample_strip_gff(n, 3);
  const auto flat = boundary_measure(f, 0.0, 0.02);
  for (double x : flat.masses) CHECK(x == 1.0 / 256.0);
  CHECK_THROWS_AS(boundary_measure(f, 2.5, 0.02), ParameterError);

  const double gamma = 0.5, c = -0.4;
  const auto base = boundary_measure(f, gamma, 0.02);
  f.offset = c;
  const auto shifted = boundary_measure(f, gamma, 0.02);
  for (std::size_t i = 0; i < base.masses.size(); ++i) {
    CHECK(shifted.masses[i] == doctest::Approx(base.masses[i] * std::exp(0.5 * gamma * c)).epsilon(1e-14));
  }

  std::vector<double> means;
  for (double k : {4.0, 8.0, 16.0}) {
    const auto mol = make_strip_mollifier(n, k / 256.0);
    std::vector<double> mass(trials);
    for (std::size_t t = 0; t < trials; ++t) {
      mass[t] = boundary_measure(sample_strip_gff(n, derive_seed(6, t)), gamma, mol).mass_in(0.25, 0.75);
    }
    means.push_back(stats::summarize(mass).mean);
  }
  for (double m : means) CHECK(m == doctest::Approx(0.5).epsilon(0.07));
}

TEST_CASE("free-boundary trace variance grows like -2 log eps") {
  const auto v8 = boundary_trace_variance(256, 8.0 / 256.0);
  const auto v4 = boundary_trace_variance(256, 4.0 / 256.0);
  CHECK(v4[127] - v8[127] == doctest::Approx(2.0 * std::log(2.0)).epsilon(0.1));

  const std::size_t trials = 3000;
  const auto mol = make_strip_mollifier(64, 4.0 / 64.0);
  std::vector<double> sq(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const double h = boundary_trace(sample_strip_gff(64, derive_seed(7, t)), mol)[31];
    sq[t] = h * h;
  }
  const auto s = stats::summarize(sq);
  CHECK(std::abs(s.mean - boundary_trace_variance(64, 4.0 / 64.0)[31]) < 3.5 * s.stderr_);
}

TEST_CASE("Girsanov tilting") {
  const std::size_t n = 64;
  std::vector<Statistic> one{{"one", [](const GridField&) { return 1.0; }}};
  const auto r1 = girsanov_check(n, 0.7, 32, 32, 4.0 / 63.0, one, 500, 1);
  CHECK(r1[0].weighted == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r1[0].shifted == 1.0);

  const auto battery = girsanov_battery(n);
  const auto r0 = girsanov_check(n, 0.0, 32, 32, 4.0 / 63.0, battery, 200, 2);
  for (const auto& r : r0) {
    CHECK(r.weighted == doctest::Approx(r.shifted).epsilon(1e-12));
    CHECK(r.zscore == 0.0);
  }

  const auto r = girsanov_check(n, 0.5, 32, 32, 4.0 / 63.0, battery, 4000, 3);
  for (const auto& x : r) CHECK(std::abs(x.zscore) < 3.0);
}

TEST_CASE("tilt kernel is the covariance with h_eps(z)") {
  const std::size_t n = 40, trials = 6000;
  const double eps = 3.0 / 39.0;
  const auto K = tilt_kernel(n, 20, 20, eps);
  const auto mol = make_mollifier(n, eps);
  std::vector<double> prod(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto f = sample_gff(n, derive_seed(8, t));
    prod[t] = f.at(24, 18) * mollify(f, mol)[20 * n + 20];
  }
  const auto s = stats::summarize(prod);
  CHECK(std::abs(s.mean - K[24 * n + 18]) < 3.5 * s.stderr_);
}

TEST_CASE("coordinate change") {
  CHECK_THROWS_AS(coordinate_change_check(64, 0.3, 0.5, 0.05, 10, 1), ParameterError);
  CHECK_THROWS_AS(coordinate_change_check(60, 0.5, 0.5, 0.05, 10, 1), ParameterError);
  CHECK(coordinate_change_check(64, 1.0, 0.5, 0.05, 20, 1).discrepancy == 0.0);
  CHECK(coordinate_change_check(64, 0.5, 0.0, 0.05, 20, 1).discrepancy == 0.0);
  CHECK(coordinate_change_check(64, 2.0, 0.0, 0.05, 20, 1).discrepancy == 0.0);
  const auto r = coordinate_change_check(64, 0.5, 0.5, 4.0 / 64.0, 200, 2);
  CHECK(r.discrepancy < 0.10);
}

TEST_CASE("wedge radial process") {
  const auto p = SleParams::from_kappa(3.0);
  CHECK_THROWS_AS(wedge_radial(p.q_coeff, p, 1.0, 0.01, 1), ParameterError);

  const std::size_t trials = 400;
  const double horizon = 2.0, ds = 0.01;
  std::vector<double> end0(trials), end_g(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto w0 = wedge_radial(0.0, p, horizon, ds, derive_seed(1, t));
    const auto wg = wedge_radial(p.gamma, p, horizon, ds, derive_seed(2, t));
    end0[t] = w0.a_values.back();
    end_g[t] = wg.a_values.back();
    CHECK(w0.s_grid.front() == doctest::Approx(-horizon));
    CHECK(w0.a_values[w0.a_values.size() / 2] == 0.0);
  }
  const auto s0 = stats::summarize(end0);
  CHECK(std::abs(s0.mean) < 3.0 * s0.stderr_);
  const auto sg = stats::summarize(end_g);
  CHECK(sg.mean / horizon == doctest::Approx(p.gamma).epsilon(0.05 + 3.0 * sg.stderr_ / (horizon * p.gamma)));

  // Conditioned branch stays above the line and gets harder to sample as alpha -> Q.
  const auto w = wedge_radial(0.5, p, 3.0, ds, 9);
  const std::size_t mid = w.s_grid.size() / 2;
  for (std::size_t k = 1; k <= mid; ++k) {
    const double t = -w.s_grid[mid - k];
    CHECK(w.a_values[mid - k] + 0.5 * t + (p.q_coeff - 0.5) * t > 0.0);
  }
  std::vector<double> rates;
  for (double frac : {0.0, 0.5, 0.8}) {
    const double alpha = frac * p.q_coeff;
    double attempts = 0.0;
    for (std::size_t t = 0; t < 100; ++t) attempts += static_cast<double>(wedge_radial(alpha, p, 1.0, 0.05, derive_seed(11, t)).attempts);
    rates.push_back(100.0 / attempts);
  }
  CHECK(rates[1] < rates[0]);
  CHECK(rates[2] < rates[1]);
}

TEST_CASE("thin wedge beads") {
  const auto p = SleParams::from_kappa(3.0);
  CHECK_THROWS_AS(thin_wedge_bead_lengths(p.gamma * p.gamma / 2.0, p, 1e-4, 1.0, 1), ParameterError);
  const auto beads = thin_wedge_bead_lengths(0.5, p, 1e-4, 1.0, 1);
  CHECK(!beads.empty());
  for (double b : beads) CHECK(b > 0.0);
}
