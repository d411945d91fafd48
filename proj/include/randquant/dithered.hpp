#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "randquant/montecarlo.hpp"
#include "randquant/rng.hpp"
#include "randquant/threshold_set.hpp"

namespace randquant::dithered {

/// Per-channel quantizer indices produced by a bank for one input.
struct JointIndex {
  std::vector<std::int64_t> channel;
};

/// Union of all channel threshold lattices {(j + a_k) * delta} restricted to
/// (0,1), sorted with exact duplicates removed. Offsets need not start at 0.
std::vector<double> merged_interior(double delta, std::span<const double> offsets);

/// A bank of K uniform quantizers with a common step delta; channel k has
/// thresholds {(j + a_k) delta}. Channel 0 is anchored at offset 0 (the
/// remaining offsets carry the dither). Subtractive dither is realized as
/// shifted thresholds; no separate dither signal path exists.
class DitheredBank {
 public:
  /// Throws std::invalid_argument unless 0 < delta <= 1, offsets is
  /// non-empty with offsets[0] == 0, and every offset lies in [0,1).
  DitheredBank(double delta, std::vector<double> offsets);

  /// Offset 0 on channel 0, channels-1 uniform draws on the rest.
  static DitheredBank with_random_offsets(double delta, std::size_t channels, TrialRng& rng);

  /// The best deterministic design: a_k = k/K.
  static DitheredBank evenly_spaced(double delta, std::size_t channels);

  double delta() const { return delta_; }
  std::size_t channels() const { return offsets_.size(); }
  const std::vector<double>& offsets() const { return offsets_; }

  /// Channel indices i_k = floor(x/delta - a_k) + 1. Throws std::domain_error
  /// unless 0 <= x < 1.
  JointIndex encode_joint(double x) const;

  /// The common refinement of all channel partitions on [0,1); its cells are
  /// exactly the nonempty intersections of per-channel cells.
  ThresholdSet merge_partition() const;

  /// Midpoint of the intersection of the per-channel cells named by `joint`,
  /// clipped to [0,1). Throws std::domain_error when the intersection is
  /// empty (inconsistent index vector).
  double reconstruct(const JointIndex& joint) const;

  /// Exact (MSE, joint entropy in bits) of the merged partition for a
  /// uniform source on [0,1). The joint index entropy equals the merged-cell
  /// entropy because the index vector and the merged cell determine each
  /// other.
  std::pair<double, double> exact_metrics() const;

 private:
  double delta_;
  std::vector<double> offsets_;
};

struct BankAverageReport {
  montecarlo::EstimateReport distortion;  // target delta^2 / (2(K+1)(K+2))
  montecarlo::EstimateReport rate;        // target log2(1/delta) + R(K), h = 0
  double empirical_penalty = 0.0;         // 12 * mean D * 2^{2 mean R}
  double predicted_penalty = 0.0;
};

/// Average exact bank metrics over random offset draws.
BankAverageReport average_random_offsets(std::size_t channels, double delta,
                                         std::uint64_t offset_trials, std::uint64_t seed,
                                         unsigned threads = 1);

struct SweepRow {
  std::size_t channels = 0;
  double mean_distortion = 0.0;
  double mean_rate = 0.0;
  double empirical_penalty = 0.0;
  double predicted_penalty = 0.0;
};

/// Penalty table for K = 1..max_channels at a fixed step size.
std::vector<SweepRow> sweep_penalty(std::size_t max_channels, double delta,
                                    std::uint64_t offset_trials, std::uint64_t seed,
                                    unsigned threads = 1);

}  // namespace randquant::dithered
