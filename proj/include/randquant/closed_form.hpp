#pragma once

#include <cstdint>

namespace randquant::closed_form {

/// Euler-Mascheroni constant, 17 significant digits.
inline constexpr double kEulerGamma = 0.57721566490153286;

/// Harmonic number H_n = sum_{k=1..n} 1/k, H_0 = 0. Direct summation
/// (smallest term first) up to n = 10^4, asymptotic expansion
/// gamma + ln n + 1/(2n) - 1/(12n^2) + 1/(120n^4) beyond; the two branches
/// agree to better than 1e-12 at the switch point.
double harmonic(std::uint64_t n);

/// Mean MSE of a K-cell quantizer with uniform random thresholds on a
/// uniform source, averaged over source and thresholds:
/// D(K) = 1 / (2(K+1)(K+2)).
double distortion_random(std::uint64_t levels);

/// Mean index entropy of the same quantizer, in bits:
/// R(K) = (H_K - 1) / ln 2.
double rate_random(std::uint64_t levels);

/// Fixed-rate MSE penalty versus the evenly spaced K-cell quantizer:
/// 6K^2 / ((K+1)(K+2)). Strictly increasing, limit 6.
double penalty_fixed_rate(std::uint64_t levels);

/// Entropy-constrained MSE penalty, normalized by (1/12) 2^{-2R}:
/// 12 D(K) 2^{2R(K)} = 6 exp(2(H_K - 1)) / ((K+1)(K+2)).
double penalty_entropy_constrained(std::uint64_t levels);

/// Large-K limit of the entropy-constrained penalty: 6 e^{-2(1-gamma)} ~ 2.576.
double asymptotic_penalty();

/// High-rate distortion coefficient (1/2) e^{-2(1-gamma)} in
/// D ~ coeff * 2^{-2R}; equals asymptotic_penalty() / 12.
double high_rate_coefficient();

/// Rate loss of the random design at high rate, in bits:
/// (1/2) log2(asymptotic_penalty()) ~ 0.683.
double rate_loss_bound();

/// Density of the length L of the cell containing a uniform sample:
/// f_L(l) = K(K-1) l (1-l)^{K-2} on [0,1]. Requires K >= 2; at K = 1 the
/// length is the constant 1 (point mass), signaled by std::domain_error.
double spacing_pdf(std::uint64_t levels, double length);

/// Distortion of K parallel dithered quantizers with common step delta,
/// high resolution: delta^2 / (2(K+1)(K+2)).
double dithered_distortion(double delta, std::uint64_t levels);

/// Joint rate of the dithered bank in bits, high resolution:
/// h + log2(1/delta) + R(K), with h the source differential entropy in bits.
/// Requires delta in (0,1].
double dithered_rate(double delta, std::uint64_t levels, double source_entropy_bits);

/// Two uniform quantizers with unequal steps delta0 <= delta1; the second
/// carries a random offset uniform on [0, delta1).
struct TwoStepConfig {
  double delta0;
  double delta1;

  /// Throws std::invalid_argument unless 0 < delta0 <= delta1.
  TwoStepConfig(double d0, double d1);

  /// Steps induced by quantizing the rotated pair
  /// (x cos theta, x sin theta) with common step delta:
  /// delta0 = delta/cos theta, delta1 = delta/sin theta.
  /// Requires theta in (0, pi/4].
  static TwoStepConfig from_theta(double theta, double delta);
};

/// Mean MSE of the two-step pair:
/// (delta0^2/12) * (delta1 - (3/4) delta0) / (delta1 - (1/2) delta0).
double two_step_distortion(const TwoStepConfig& config);

/// Mean joint rate of the two-step pair in bits:
/// log2(1/delta0) + (1/(2 ln 2)) * delta0 / (2 delta1 - delta0).
double two_step_rate(const TwoStepConfig& config);

/// Distortion penalty of the rotated two-channel expansion versus a single
/// uniform quantizer at the same rate:
/// q(theta) = ((1 - 3/4 tan)/(1 - 1/2 tan)) exp(tan/(2 - tan)).
/// Nondecreasing on (0, pi/4]; q(pi/4) = e/2.
double q_theta(double theta);

/// Distortion of the rotated pair at angle theta and component step delta.
double frame_distortion(double theta, double delta);

/// Rate of the rotated pair in bits.
double frame_rate(double theta, double delta);

}  // namespace randquant::closed_form
