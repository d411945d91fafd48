#include "randquant/stats.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace randquant::stats {

namespace {

constexpr std::size_t kLeafSize = 32;

template <typename Fn>
double pairwise_reduce(std::span<const double> values, Fn&& term) {
  const std::size_t n = values.size();
  if (n <= kLeafSize) {
    double sum = 0.0;
    for (double v : values) sum += term(v);
    return sum;
  }
  const std::size_t half = n / 2;
  return pairwise_reduce(values.first(half), term) +
         pairwise_reduce(values.subspan(half), term);
}

// Series expansion of P(a,x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a,x) by modified Lentz, valid for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise_reduce(values, [](double v) { return v; });
}

Summary summarize(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) throw std::invalid_argument("summarize: empty sample");
  bool constant = true;
  for (double v : values) {
    if (v != values.front()) {
      constant = false;
      break;
    }
  }
  if (constant) return {values.front(), 0.0};
  const double mean = pairwise_sum(values) / static_cast<double>(n);
  if (n < 2) return {mean, 0.0};
  const double ss = pairwise_reduce(values, [mean](double v) {
    const double d = v - mean;
    return d * d;
  });
  const double variance = ss / static_cast<double>(n - 1);
  return {mean, std::sqrt(variance / static_cast<double>(n))};
}

double lower_regularized_gamma(double a, double x) {
  if (!(a > 0.0) || x < 0.0) {
    throw std::domain_error("lower_regularized_gamma requires a > 0 and x >= 0");
  }
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_continued_fraction(a, x);
}

double chi_square_cdf(double x, double dof) {
  if (!(dof > 0.0)) throw std::domain_error("chi_square_cdf requires dof > 0");
  if (x <= 0.0) return 0.0;
  return lower_regularized_gamma(0.5 * dof, 0.5 * x);
}

double chi_square_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("chi_square_quantile requires p in (0,1)");
  double hi = dof + 10.0;
  while (chi_square_cdf(hi, dof) < p) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi_square_cdf(mid, dof) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-12 * hi) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace randquant::stats
