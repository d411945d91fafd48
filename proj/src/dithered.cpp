#include "randquant/dithered.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "randquant/closed_form.hpp"

namespace randquant::dithered {

std::vector<double> merged_interior(double delta, std::span<const double> offsets) {
  std::vector<double> interior;
  interior.reserve(offsets.size() * static_cast<std::size_t>(1.0 / delta + 2.0));
  for (double offset : offsets) {
    for (std::uint64_t j = (offset > 0.0) ? 0 : 1;; ++j) {
      const double t = (static_cast<double>(j) + offset) * delta;
      if (t >= 1.0) break;
      if (t > 0.0) interior.push_back(t);
    }
  }
  std::sort(interior.begin(), interior.end());
  interior.erase(std::unique(interior.begin(), interior.end()), interior.end());
  return interior;
}

DitheredBank::DitheredBank(double delta, std::vector<double> offsets)
    : delta_(delta), offsets_(std::move(offsets)) {
  if (!(delta_ > 0.0 && delta_ <= 1.0)) {
    throw std::invalid_argument("DitheredBank: delta must lie in (0,1]");
  }
  if (offsets_.empty()) throw std::invalid_argument("DitheredBank: need at least one channel");
  if (offsets_[0] != 0.0) throw std::invalid_argument("DitheredBank: channel 0 must have offset 0");
  for (double a : offsets_) {
    if (!(a >= 0.0 && a < 1.0)) {
      throw std::invalid_argument("DitheredBank: offsets must lie in [0,1)");
    }
  }
}

DitheredBank DitheredBank::with_random_offsets(double delta, std::size_t channels,
                                               TrialRng& rng) {
  std::vector<double> offsets(channels, 0.0);
  for (std::size_t k = 1; k < channels; ++k) offsets[k] = rng.next_unit();
  return DitheredBank(delta, std::move(offsets));
}

DitheredBank DitheredBank::evenly_spaced(double delta, std::size_t channels) {
  std::vector<double> offsets(channels, 0.0);
  for (std::size_t k = 1; k < channels; ++k) {
    offsets[k] = static_cast<double>(k) / static_cast<double>(channels);
  }
  return DitheredBank(delta, std::move(offsets));
}

JointIndex DitheredBank::encode_joint(double x) const {
  if (!(x >= 0.0 && x < 1.0)) throw std::domain_error("encode_joint: x must lie in [0,1)");
  JointIndex joint;
  joint.channel.reserve(offsets_.size());
  for (double a : offsets_) {
    joint.channel.push_back(static_cast<std::int64_t>(std::floor(x / delta_ - a)) + 1);
  }
  return joint;
}

ThresholdSet DitheredBank::merge_partition() const {
  return ThresholdSet(merged_interior(delta_, offsets_));
}

double DitheredBank::reconstruct(const JointIndex& joint) const {
  if (joint.channel.size() != offsets_.size()) {
    throw std::invalid_argument("reconstruct: channel count mismatch");
  }
  double lo = 0.0;
  double hi = 1.0;
  for (std::size_t k = 0; k < offsets_.size(); ++k) {
    const double i = static_cast<double>(joint.channel[k]);
    lo = std::max(lo, (i - 1.0 + offsets_[k]) * delta_);
    hi = std::min(hi, (i + offsets_[k]) * delta_);
  }
  if (!(lo < hi)) throw std::domain_error("reconstruct: inconsistent joint index");
  return 0.5 * (lo + hi);
}

std::pair<double, double> DitheredBank::exact_metrics() const {
  const ThresholdSet merged = merge_partition();
  return {merged.conditional_mse(), merged.conditional_entropy()};
}

BankAverageReport average_random_offsets(std::size_t channels, double delta,
                                         std::uint64_t offset_trials, std::uint64_t seed,
                                         unsigned threads) {
  if (channels < 1) throw std::invalid_argument("average_random_offsets: channels must be >= 1");
  if (offset_trials < 2) {
    throw std::invalid_argument("average_random_offsets: offset_trials must be >= 2");
  }
  std::vector<double> d_values(offset_trials);
  std::vector<double> r_values(offset_trials);
  montecarlo::parallel_for_trials(offset_trials, threads, [&](std::uint64_t i) {
    TrialRng rng(seed, i);
    const DitheredBank bank = DitheredBank::with_random_offsets(delta, channels, rng);
    const auto [d, r] = bank.exact_metrics();
    d_values[i] = d;
    r_values[i] = r;
  });

  BankAverageReport report;
  report.distortion =
      montecarlo::make_report(d_values, seed, closed_form::dithered_distortion(delta, channels));
  report.rate =
      montecarlo::make_report(r_values, seed, closed_form::dithered_rate(delta, channels, 0.0));
  report.empirical_penalty =
      12.0 * report.distortion.mean * std::exp2(2.0 * report.rate.mean);
  report.predicted_penalty = closed_form::penalty_entropy_constrained(channels);
  return report;
}

std::vector<SweepRow> sweep_penalty(std::size_t max_channels, double delta,
                                    std::uint64_t offset_trials, std::uint64_t seed,
                                    unsigned threads) {
  if (max_channels < 1) throw std::invalid_argument("sweep_penalty: max_channels must be >= 1");
  std::vector<SweepRow> rows;
  rows.reserve(max_channels);
  for (std::size_t channels = 1; channels <= max_channels; ++channels) {
    const auto report = average_random_offsets(channels, delta, offset_trials,
                                               derive_seed(seed, channels), threads);
    rows.push_back({channels, report.distortion.mean, report.rate.mean,
                    report.empirical_penalty, report.predicted_penalty});
  }
  return rows;
}

}  // namespace randquant::dithered
