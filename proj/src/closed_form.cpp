#include "randquant/closed_form.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace randquant::closed_form {

namespace {

constexpr std::uint64_t kHarmonicSwitch = 10'000;

void require_levels(std::uint64_t levels) {
  if (levels < 1) throw std::invalid_argument("number of levels must be >= 1");
}

void require_theta(double theta) {
  if (!(theta > 0.0 && theta <= std::numbers::pi / 4.0)) {
    throw std::domain_error("theta must lie in (0, pi/4]");
  }
}

}  // namespace

double harmonic(std::uint64_t n) {
  if (n <= kHarmonicSwitch) {
    double sum = 0.0;
    for (std::uint64_t k = n; k >= 1; --k) sum += 1.0 / static_cast<double>(k);
    return sum;
  }
  const double x = static_cast<double>(n);
  const double inv2 = 1.0 / (x * x);
  return kEulerGamma + std::log(x) + 0.5 / x - inv2 / 12.0 + inv2 * inv2 / 120.0;
}

double distortion_random(std::uint64_t levels) {
  require_levels(levels);
  const double k = static_cast<double>(levels);
  return 0.5 / ((k + 1.0) * (k + 2.0));
}

double rate_random(std::uint64_t levels) {
  require_levels(levels);
  return (harmonic(levels) - 1.0) / std::numbers::ln2;
}

double penalty_fixed_rate(std::uint64_t levels) {
  require_levels(levels);
  const double k = static_cast<double>(levels);
  return 6.0 * k * k / ((k + 1.0) * (k + 2.0));
}

double penalty_entropy_constrained(std::uint64_t levels) {
  require_levels(levels);
  const double k = static_cast<double>(levels);
  return 6.0 * std::exp(2.0 * (harmonic(levels) - 1.0)) / ((k + 1.0) * (k + 2.0));
}

double asymptotic_penalty() {
  return 6.0 * std::exp(-2.0 * (1.0 - kEulerGamma));
}

double high_rate_coefficient() {
  return 0.5 * std::exp(-2.0 * (1.0 - kEulerGamma));
}

double rate_loss_bound() {
  return 0.5 * std::log2(asymptotic_penalty());
}

double spacing_pdf(std::uint64_t levels, double length) {
  if (levels < 2) {
    throw std::domain_error("spacing_pdf: K = 1 is degenerate (point mass at length 1)");
  }
  if (!(length >= 0.0 && length <= 1.0)) {
    throw std::domain_error("spacing_pdf: length must lie in [0,1]");
  }
  const double k = static_cast<double>(levels);
  return k * (k - 1.0) * length * std::pow(1.0 - length, k - 2.0);
}

double dithered_distortion(double delta, std::uint64_t levels) {
  require_levels(levels);
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  return delta * delta * distortion_random(levels);
}

double dithered_rate(double delta, std::uint64_t levels, double source_entropy_bits) {
  require_levels(levels);
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0,1]");
  return source_entropy_bits - std::log2(delta) + rate_random(levels);
}

TwoStepConfig::TwoStepConfig(double d0, double d1) : delta0(d0), delta1(d1) {
  if (!(d0 > 0.0 && d0 <= d1)) {
    throw std::invalid_argument("TwoStepConfig requires 0 < delta0 <= delta1");
  }
}

TwoStepConfig TwoStepConfig::from_theta(double theta, double delta) {
  require_theta(theta);
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  return TwoStepConfig(delta / std::cos(theta), delta / std::sin(theta));
}

double two_step_distortion(const TwoStepConfig& config) {
  const double d0 = config.delta0;
  const double d1 = config.delta1;
  return d0 * d0 / 12.0 * (d1 - 0.75 * d0) / (d1 - 0.5 * d0);
}

double two_step_rate(const TwoStepConfig& config) {
  const double d0 = config.delta0;
  const double d1 = config.delta1;
  return -std::log2(d0) + 0.5 / std::numbers::ln2 * d0 / (2.0 * d1 - d0);
}

double q_theta(double theta) {
  require_theta(theta);
  const double t = std::tan(theta);
  return (1.0 - 0.75 * t) / (1.0 - 0.5 * t) * std::exp(t / (2.0 - t));
}

double frame_distortion(double theta, double delta) {
  require_theta(theta);
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const double t = std::tan(theta);
  const double c = std::cos(theta);
  return delta * delta / (c * c) / 12.0 * (1.0 - 0.75 * t) / (1.0 - 0.5 * t);
}

double frame_rate(double theta, double delta) {
  require_theta(theta);
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const double t = std::tan(theta);
  return -std::log2(delta) + std::log2(std::cos(theta)) + 0.5 / std::numbers::ln2 * t / (2.0 - t);
}

}  // namespace randquant::closed_form
