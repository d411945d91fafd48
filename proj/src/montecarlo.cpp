#include "randquant/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "randquant/closed_form.hpp"
#include "randquant/stats.hpp"

namespace randquant::montecarlo {

namespace {

// Length of the cell of `t` containing a fresh uniform draw.
double sample_occupied_length(const ThresholdSet& t, TrialRng& rng) {
  const double x = rng.next_unit();
  return t.cell(t.encode(x)).length();
}

// CDF of the length-biased spacing: 1 - (1-x)^K - K x (1-x)^{K-1}.
double spacing_cdf(std::uint64_t levels, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double k = static_cast<double>(levels);
  const double one_minus = 1.0 - x;
  return 1.0 - std::pow(one_minus, k) - k * x * std::pow(one_minus, k - 1.0);
}

}  // namespace

void TrialConfig::validate() const {
  if (levels < 1) throw std::invalid_argument("TrialConfig: levels must be >= 1");
  if (trials < 2) throw std::invalid_argument("TrialConfig: trials must be >= 2");
  if (raw_samples_per_trial < 1) {
    throw std::invalid_argument("TrialConfig: raw_samples_per_trial must be >= 1");
  }
}

bool EstimateReport::within(double n_sigma) const {
  if (!target) return false;
  if (std_error > 0.0) return std::fabs((mean - *target) / std_error) <= n_sigma;
  return std::fabs(mean - *target) <= 1e-12 * std::max(1.0, std::fabs(*target));
}

ThresholdSet sample_thresholds(std::uint64_t levels, TrialRng& rng) {
  if (levels < 1) throw std::invalid_argument("sample_thresholds: levels must be >= 1");
  std::vector<double> interior;
  interior.reserve(levels - 1);
  for (std::uint64_t i = 1; i < levels; ++i) interior.push_back(rng.next_unit());
  return ThresholdSet(std::move(interior));
}

void parallel_for_trials(std::uint64_t trials, unsigned threads,
                         const std::function<void(std::uint64_t)>& body) {
  if (threads <= 1) {
    for (std::uint64_t i = 0; i < trials; ++i) body(i);
    return;
  }
  const std::uint64_t block = (trials + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const std::uint64_t begin = t * block;
    const std::uint64_t end = std::min(trials, begin + block);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] {
      for (std::uint64_t i = begin; i < end; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::vector<double> run_trial_values(std::uint64_t trials, unsigned threads,
                                     const std::function<double(std::uint64_t)>& trial) {
  std::vector<double> values(trials);
  parallel_for_trials(trials, threads, [&](std::uint64_t i) { values[i] = trial(i); });
  return values;
}

EstimateReport make_report(const std::vector<double>& values, std::uint64_t seed,
                           std::optional<double> target) {
  const auto summary = stats::summarize(values);
  EstimateReport report;
  report.mean = summary.mean;
  report.std_error = summary.std_error;
  report.trials = values.size();
  report.seed = seed;
  report.target = target;
  if (target && summary.std_error > 0.0) {
    report.z_score = (summary.mean - *target) / summary.std_error;
  }
  return report;
}

EstimateReport estimate_distortion(const TrialConfig& config) {
  config.validate();
  const auto values = run_trial_values(config.trials, config.threads, [&](std::uint64_t i) {
    TrialRng rng(config.seed, i);
    const ThresholdSet t = sample_thresholds(config.levels, rng);
    if (config.mode == SamplingMode::rao_blackwell) return t.conditional_mse();
    double acc = 0.0;
    for (std::uint64_t j = 0; j < config.raw_samples_per_trial; ++j) {
      const double x = rng.next_unit();
      const double err = x - t.decode(t.encode(x));
      acc += err * err;
    }
    return acc / static_cast<double>(config.raw_samples_per_trial);
  });
  return make_report(values, config.seed, closed_form::distortion_random(config.levels));
}

EstimateReport estimate_rate(const TrialConfig& config) {
  config.validate();
  const auto values = run_trial_values(config.trials, config.threads, [&](std::uint64_t i) {
    TrialRng rng(config.seed, i);
    const ThresholdSet t = sample_thresholds(config.levels, rng);
    if (config.mode == SamplingMode::rao_blackwell) return t.conditional_entropy();
    double acc = 0.0;
    for (std::uint64_t j = 0; j < config.raw_samples_per_trial; ++j) {
      acc -= std::log2(sample_occupied_length(t, rng));
    }
    return acc / static_cast<double>(config.raw_samples_per_trial);
  });
  return make_report(values, config.seed, closed_form::rate_random(config.levels));
}

EstimateReport estimate_spacing_moment(const TrialConfig& config, unsigned moment) {
  config.validate();
  if (config.levels < 2) {
    throw std::invalid_argument("estimate_spacing_moment: levels must be >= 2");
  }
  if (moment < 1) throw std::invalid_argument("estimate_spacing_moment: moment must be >= 1");
  const auto values = run_trial_values(config.trials, config.threads, [&](std::uint64_t i) {
    TrialRng rng(config.seed, i);
    const ThresholdSet t = sample_thresholds(config.levels, rng);
    if (config.mode == SamplingMode::rao_blackwell) {
      // E[L^p | thresholds] = sum over cells of length^{p+1}
      double acc = 0.0;
      for (double len : t.spacings()) acc += std::pow(len, moment + 1.0);
      return acc;
    }
    double acc = 0.0;
    for (std::uint64_t j = 0; j < config.raw_samples_per_trial; ++j) {
      acc += std::pow(sample_occupied_length(t, rng), static_cast<double>(moment));
    }
    return acc / static_cast<double>(config.raw_samples_per_trial);
  });
  std::optional<double> target;
  if (moment == 1) {
    // E[L] = sum over cells of length^2; known closed form 2/(K+1).
    target = 2.0 / (static_cast<double>(config.levels) + 1.0);
  } else if (moment == 2) {
    const double k = static_cast<double>(config.levels);
    target = 6.0 / ((k + 1.0) * (k + 2.0));
  }
  return make_report(values, config.seed, target);
}

HistogramTestReport spacing_histogram_test(const TrialConfig& config, unsigned bins) {
  return spacing_histogram_test(config, bins, config.levels);
}

HistogramTestReport spacing_histogram_test(const TrialConfig& config, unsigned bins,
                                           std::uint64_t pdf_levels) {
  config.validate();
  if (config.levels < 2) {
    throw std::invalid_argument("spacing_histogram_test: levels must be >= 2");
  }
  if (pdf_levels < 2) {
    throw std::invalid_argument("spacing_histogram_test: pdf_levels must be >= 2");
  }
  if (bins < 10) throw std::invalid_argument("spacing_histogram_test: bins must be >= 10");

  const auto lengths = run_trial_values(config.trials, config.threads, [&](std::uint64_t i) {
    TrialRng rng(config.seed, i);
    const ThresholdSet t = sample_thresholds(config.levels, rng);
    return sample_occupied_length(t, rng);
  });

  std::vector<double> observed(bins, 0.0);
  for (double len : lengths) {
    auto idx = static_cast<std::size_t>(len * bins);
    if (idx >= bins) idx = bins - 1;
    observed[idx] += 1.0;
  }

  const double n = static_cast<double>(config.trials);
  std::vector<double> expected(bins, 0.0);
  for (unsigned j = 0; j < bins; ++j) {
    const double lo = static_cast<double>(j) / bins;
    const double hi = static_cast<double>(j + 1) / bins;
    expected[j] = n * (spacing_cdf(pdf_levels, hi) - spacing_cdf(pdf_levels, lo));
  }

  // Merge bins left to right until each merged bin expects at least 5 counts;
  // a deficient tail merges backward into the last kept bin.
  HistogramTestReport report;
  report.requested_bins = bins;
  report.samples = config.trials;
  double acc_obs = 0.0;
  double acc_exp = 0.0;
  double acc_lo = 0.0;
  for (unsigned j = 0; j < bins; ++j) {
    acc_obs += observed[j];
    acc_exp += expected[j];
    const double hi = static_cast<double>(j + 1) / bins;
    if (acc_exp >= 5.0) {
      report.bins.push_back({acc_lo, hi, acc_obs, acc_exp});
      acc_obs = 0.0;
      acc_exp = 0.0;
      acc_lo = hi;
    }
  }
  if (acc_exp > 0.0 || acc_obs > 0.0) {
    if (!report.bins.empty()) {
      auto& last = report.bins.back();
      last.upper = 1.0;
      last.observed += acc_obs;
      last.expected += acc_exp;
    } else {
      report.bins.push_back({0.0, 1.0, acc_obs, acc_exp});
    }
  }

  report.merged_bins = static_cast<unsigned>(report.bins.size());
  if (report.merged_bins < 2) {
    throw std::invalid_argument("spacing_histogram_test: too few populated bins; raise trials");
  }
  for (const auto& bin : report.bins) {
    const double diff = bin.observed - bin.expected;
    report.statistic += diff * diff / bin.expected;
  }
  report.dof = report.merged_bins - 1;
  report.critical_value = stats::chi_square_quantile(0.999, report.dof);
  report.p_value = 1.0 - stats::chi_square_cdf(report.statistic, report.dof);
  report.passed = report.statistic <= report.critical_value;
  return report;
}

TwoStepReport two_step_oracle(double delta0, double delta1, std::uint64_t trials,
                              std::uint64_t seed, unsigned threads) {
  const closed_form::TwoStepConfig config(delta0, delta1);
  if (trials < 2) throw std::invalid_argument("two_step_oracle: trials must be >= 2");

  std::vector<double> d_values(trials);
  std::vector<double> r_values(trials);
  parallel_for_trials(trials, threads, [&](std::uint64_t i) {
    TrialRng rng(seed, i);
    const double offset = rng.next_unit() * delta1;
    std::vector<double> interior;
    interior.reserve(static_cast<std::size_t>(1.0 / delta0 + 1.0 / delta1) + 4);
    for (std::uint64_t j = 1;; ++j) {
      const double t = static_cast<double>(j) * delta0;
      if (t >= 1.0) break;
      interior.push_back(t);
    }
    for (std::uint64_t j = 0;; ++j) {
      const double t = static_cast<double>(j) * delta1 + offset;
      if (t >= 1.0) break;
      if (t > 0.0) interior.push_back(t);
    }
    const ThresholdSet t(std::move(interior));
    d_values[i] = t.conditional_mse();
    r_values[i] = t.conditional_entropy();
  });

  TwoStepReport report;
  report.distortion = make_report(d_values, seed, closed_form::two_step_distortion(config));
  report.rate = make_report(r_values, seed, closed_form::two_step_rate(config));
  report.step_size_warning = delta1 > 0.1;
  return report;
}

}  // namespace randquant::montecarlo
