#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace lqg::stats {

struct Summary {
  double mean = 0.0;
  double stderr_ = 0.0;  // standard error of the mean
  double variance = 0.0;
  std::size_t n = 0;
};

Summary summarize(std::span<const double> xs);

/// Ordinary least squares y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  double r2 = 0.0;
};

LinearFit fit_line(std::span<const double> xs, std::span<const double> ys);

/// Least-squares slope of log(y) against log(x); nonpositive y entries are rejected.
LinearFit fit_loglog(std::span<const double> xs, std::span<const double> ys);

double normal_cdf(double x);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov survival function Q_KS(lambda).
double kolmogorov_survival(double lambda);

KsResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Two-sample KS critical value at level alpha (asymptotic).
double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha);

/// Upper tail of chi-square with `dof` degrees of freedom.
double chi_square_survival(double statistic, double dof);

/// Spearman rank correlation.
double rank_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace lqg::stats
