#pragma once

#include <span>

namespace randquant::stats {

/// Deterministic pairwise (tree) summation. The reduction order depends only
/// on the element order, never on thread scheduling.
double pairwise_sum(std::span<const double> values);

struct Summary {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n); 0 when n < 2
};

/// Mean and standard error of a sample, via pairwise two-pass reduction.
Summary summarize(std::span<const double> values);

/// Lower regularized incomplete gamma P(a, x).
double lower_regularized_gamma(double a, double x);

/// Chi-square CDF with `dof` degrees of freedom.
double chi_square_cdf(double x, double dof);

/// Inverse chi-square CDF by bisection; p in (0,1).
double chi_square_quantile(double p, double dof);

}  // namespace randquant::stats
