#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "randquant/rng.hpp"
#include "randquant/threshold_set.hpp"

namespace randquant::montecarlo {

enum class SamplingMode {
  /// Average the exact conditional metric given each threshold draw.
  rao_blackwell,
  /// Also sample the source and average the per-sample statistic.
  raw_sampling,
};

struct TrialConfig {
  std::uint64_t levels = 2;  // K
  std::uint64_t trials = 100'000;
  std::uint64_t seed = 1;
  SamplingMode mode = SamplingMode::rao_blackwell;
  std::uint64_t raw_samples_per_trial = 1;
  unsigned threads = 1;

  /// Throws std::invalid_argument on levels < 1, trials < 2, or
  /// raw_samples_per_trial < 1.
  void validate() const;
};

/// Point estimate with provenance. Identical configs produce bit-identical
/// reports regardless of thread count.
struct EstimateReport {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::optional<double> target;   // closed-form value under test
  std::optional<double> z_score;  // (mean - target)/std_error when defined

  /// |z| <= n_sigma, or exact agreement with the target when the estimator
  /// has zero variance.
  bool within(double n_sigma) const;
};

/// K-1 independent uniform draws on [0,1), sorted into a ThresholdSet.
ThresholdSet sample_thresholds(std::uint64_t levels, TrialRng& rng);

/// Run `body(i)` for i in 0..trials-1, split across `threads`. Bodies must
/// only write state owned by trial i, so the outcome cannot depend on the
/// thread count.
void parallel_for_trials(std::uint64_t trials, unsigned threads,
                         const std::function<void(std::uint64_t)>& body);

/// Evaluate `trial` for indices 0..trials-1 into a vector ordered by trial
/// index. Per-trial RNG streams make the result independent of the thread
/// count.
std::vector<double> run_trial_values(std::uint64_t trials, unsigned threads,
                                     const std::function<double(std::uint64_t)>& trial);

/// Pairwise-reduced mean/standard error over per-trial values.
EstimateReport make_report(const std::vector<double>& values, std::uint64_t seed,
                           std::optional<double> target);

/// Mean quantizer MSE over random threshold draws; target 1/(2(K+1)(K+2)).
EstimateReport estimate_distortion(const TrialConfig& config);

/// Mean index entropy in bits over threshold draws; target (H_K - 1)/ln 2.
/// Raw mode samples the self-information -log2(length of the occupied cell).
EstimateReport estimate_rate(const TrialConfig& config);

/// E[L^p] where L is the length of the cell containing a uniform sample
/// (length-biased spacing). Target for p = 2 is 6/((K+1)(K+2)).
/// Requires levels >= 2 and moment >= 1.
EstimateReport estimate_spacing_moment(const TrialConfig& config, unsigned moment);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  double observed = 0.0;
  double expected = 0.0;
};

struct HistogramTestReport {
  double statistic = 0.0;
  unsigned dof = 0;
  double critical_value = 0.0;  // 0.999 chi-square quantile
  double p_value = 0.0;
  bool passed = false;
  unsigned requested_bins = 0;
  unsigned merged_bins = 0;
  std::uint64_t samples = 0;
  std::vector<HistogramBin> bins;
};

/// Chi-square goodness of fit of sampled length-biased cell lengths against
/// the analytic density K(K-1) l (1-l)^{K-2}, at the 0.999 level. Bins whose
/// expected count falls below 5 are merged with their right neighbor.
/// Requires levels >= 2 and bins >= 10.
HistogramTestReport spacing_histogram_test(const TrialConfig& config, unsigned bins);

/// Same test, but scoring the samples against the density for `pdf_levels`
/// cells; pdf_levels != config.levels should fail (power check).
HistogramTestReport spacing_histogram_test(const TrialConfig& config, unsigned bins,
                                           std::uint64_t pdf_levels);

struct TwoStepReport {
  EstimateReport distortion;
  EstimateReport rate;
  /// Set when delta1 > 0.1 and the high-resolution analysis is suspect.
  bool step_size_warning = false;
};

/// Brute-force check of the unequal-step pair: per trial draws the offset
/// a_1 uniform on [0, delta1), merges the two threshold lattices on [0,1),
/// and evaluates the exact conditional MSE and entropy. Targets are the
/// closed-form distortion and rate of the pair.
TwoStepReport two_step_oracle(double delta0, double delta1, std::uint64_t trials,
                              std::uint64_t seed, unsigned threads = 1);

}  // namespace randquant::montecarlo
