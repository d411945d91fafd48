#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "randquant/closed_form.hpp"
#include "randquant/montecarlo.hpp"
#include "randquant/rng.hpp"

namespace mc = randquant::montecarlo;
namespace cf = randquant::closed_form;
using randquant::TrialRng;

namespace {

mc::TrialConfig make_config(std::uint64_t levels, std::uint64_t trials, std::uint64_t seed) {
  mc::TrialConfig config;
  config.levels = levels;
  config.trials = trials;
  config.seed = seed;
  return config;
}

}  // namespace

TEST_CASE("sample_thresholds is deterministic and uniform") {
  TrialRng a(42, 3);
  TrialRng b(42, 3);
  const auto ta = mc::sample_thresholds(5, a);
  const auto tb = mc::sample_thresholds(5, b);
  CHECK(ta.interior() == tb.interior());

  TrialRng c(43, 3);
  CHECK(mc::sample_thresholds(5, c).interior() != ta.interior());

  TrialRng d(1, 0);
  CHECK(mc::sample_thresholds(1, d).interior().empty());

  // Mean of the single K=2 threshold over many draws.
  double sum = 0.0;
  constexpr int kDraws = 100'000;
  for (int i = 0; i < kDraws; ++i) {
    TrialRng rng(9, i);
    sum += mc::sample_thresholds(2, rng).interior()[0];
  }
  const double mean = sum / kDraws;
  const double se = std::sqrt(1.0 / 12.0 / kDraws);
  CHECK(std::fabs(mean - 0.5) <= 4.0 * se);
}

TEST_CASE("trial config validation") {
  CHECK_THROWS_AS(mc::estimate_distortion(make_config(0, 100, 1)), std::invalid_argument);
  CHECK_THROWS_AS(mc::estimate_distortion(make_config(2, 1, 1)), std::invalid_argument);
  CHECK_THROWS_AS(mc::estimate_spacing_moment(make_config(1, 100, 1), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(mc::estimate_spacing_moment(make_config(4, 100, 1), 0),
                  std::invalid_argument);
}

TEST_CASE("degenerate single-cell quantizer") {
  const auto d = mc::estimate_distortion(make_config(1, 100, 5));
  CHECK(d.mean == 1.0 / 12.0);
  CHECK(d.std_error == 0.0);
  CHECK(d.target == 1.0 / 12.0);
  CHECK(!d.z_score.has_value());
  CHECK(d.within(4.0));

  const auto r = mc::estimate_rate(make_config(1, 100, 5));
  CHECK(r.mean == 0.0);
  CHECK(r.std_error == 0.0);
}

TEST_CASE("distortion estimates hit the closed form") {
  for (std::uint64_t levels : {2, 4}) {
    const auto report = mc::estimate_distortion(make_config(levels, 30'000, 7));
    REQUIRE(report.z_score.has_value());
    CHECK(std::fabs(*report.z_score) <= 4.0);
    CHECK(report.target == cf::distortion_random(levels));
  }
  // Raw sampling agrees too, just noisier.
  auto config = make_config(2, 30'000, 8);
  config.mode = mc::SamplingMode::raw_sampling;
  config.raw_samples_per_trial = 4;
  const auto raw = mc::estimate_distortion(config);
  CHECK(raw.within(4.0));
}

TEST_CASE("rate estimates hit the closed form") {
  for (std::uint64_t levels : {2, 8}) {
    const auto report = mc::estimate_rate(make_config(levels, 30'000, 7));
    CHECK(report.within(4.0));
    CHECK(report.target == cf::rate_random(levels));
  }
  auto config = make_config(2, 30'000, 9);
  config.mode = mc::SamplingMode::raw_sampling;
  const auto raw = mc::estimate_rate(config);
  CHECK(raw.within(4.0));
}

TEST_CASE("Rao-Blackwellized estimates dominate raw sampling") {
  for (std::uint64_t levels : {2, 8}) {
    auto config = make_config(levels, 30'000, 17);
    const auto rb = mc::estimate_distortion(config);
    config.mode = mc::SamplingMode::raw_sampling;
    const auto raw = mc::estimate_distortion(config);
    CHECK(rb.std_error <= raw.std_error);
  }
}

TEST_CASE("spacing moments") {
  const auto m1 = mc::estimate_spacing_moment(make_config(2, 30'000, 21), 1);
  CHECK(m1.target == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m1.within(4.0));

  const auto m2 = mc::estimate_spacing_moment(make_config(2, 30'000, 22), 2);
  CHECK(m2.target == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m2.within(4.0));

  const auto m2_k10 = mc::estimate_spacing_moment(make_config(10, 30'000, 23), 2);
  CHECK(m2_k10.target == doctest::Approx(6.0 / 132.0).epsilon(1e-15));
  CHECK(m2_k10.within(4.0));

  auto raw = make_config(2, 30'000, 24);
  raw.mode = mc::SamplingMode::raw_sampling;
  CHECK(mc::estimate_spacing_moment(raw, 2).within(4.0));
}

TEST_CASE("identical configs give bit-identical reports at any thread count") {
  auto config = make_config(6, 20'000, 77);
  config.threads = 1;
  const auto serial = mc::estimate_distortion(config);
  for (unsigned threads : {2, 3, 8}) {
    config.threads = threads;
    const auto parallel = mc::estimate_distortion(config);
    CHECK(parallel.mean == serial.mean);
    CHECK(parallel.std_error == serial.std_error);
  }
  config.threads = 4;
  const auto rate_a = mc::estimate_rate(config);
  config.threads = 1;
  const auto rate_b = mc::estimate_rate(config);
  CHECK(rate_a.mean == rate_b.mean);
  CHECK(rate_a.std_error == rate_b.std_error);
}

TEST_CASE("spacing histogram goodness of fit") {
  for (std::uint64_t levels : {2, 6}) {
    const auto report = mc::spacing_histogram_test(make_config(levels, 50'000, 31), 20);
    CHECK(report.passed);
    CHECK(report.dof == report.merged_bins - 1);
    CHECK(report.statistic >= 0.0);
    CHECK(report.p_value > 0.001);
    // Expected counts sum to the sample count.
    double total = 0.0;
    for (const auto& bin : report.bins) total += bin.expected;
    CHECK(total == doctest::Approx(50'000.0).epsilon(1e-6));
  }

  // Tail bins of the K=6 density expect almost nothing: merging must kick in.
  const auto merged = mc::spacing_histogram_test(make_config(6, 50'000, 32), 20);
  CHECK(merged.merged_bins < merged.requested_bins);

  // Power: K=2 lengths scored against the K=3 density are rejected.
  const auto adversarial = mc::spacing_histogram_test(make_config(2, 50'000, 33), 20, 3);
  CHECK(!adversarial.passed);

  CHECK_THROWS_AS(mc::spacing_histogram_test(make_config(2, 1000, 1), 5),
                  std::invalid_argument);
}

namespace {

// Independent reference for the unequal-step system. Per unit length the
// merged partition holds 1/delta0 cells whose left edge is a fine-lattice
// point (the mixed law with an atom at delta0) and 1/delta1 cells anchored
// on the dithered coarse lattice (atom-free uniform on (0, delta0]).
// Length-biasing this mixture gives:
double mixture_distortion(double d0, double d1) {
  return d0 * d0 / 12.0 * (1.0 - 0.5 * d0 / d1);
}

double mixture_rate(double d0, double d1) {
  return -std::log2(d0) + d0 / d1 * 0.5 / std::numbers::ln2;
}

}  // namespace

TEST_CASE("two-step oracle: equal steps match the published pair forms") {
  // Dyadic steps tile [0,1) exactly, so only Monte Carlo noise remains.
  const auto equal = mc::two_step_oracle(0x1p-7, 0x1p-7, 4000, 41);
  CHECK(!equal.step_size_warning);
  CHECK(equal.distortion.within(4.0));
  CHECK(equal.rate.within(4.0));
  CHECK(*equal.distortion.target == doctest::Approx(0x1p-14 / 24.0).epsilon(1e-14));
}

TEST_CASE("two-step oracle: unequal steps follow the mixture law, not the pair forms") {
  // The published pair forms assume every cell length shares the mixed law
  // of the cell anchored at 0; the coarse-lattice cells do not, and the
  // formulas sit ~10% high in distortion at step ratio 2. The oracle must
  // track the true mixture law and expose that gap against its targets.
  const auto unequal = mc::two_step_oracle(0x1p-7, 0x1p-6, 4000, 42);
  const double d_true = mixture_distortion(0x1p-7, 0x1p-6);
  const double r_true = mixture_rate(0x1p-7, 0x1p-6);
  CHECK(std::fabs(unequal.distortion.mean - d_true) <= 4.0 * unequal.distortion.std_error);
  CHECK(std::fabs(unequal.rate.mean - r_true) <= 4.0 * unequal.rate.std_error);

  const double gap_vs_published =
      (*unequal.distortion.target - unequal.distortion.mean) / *unequal.distortion.target;
  CHECK(gap_vs_published == doctest::Approx(0.10).epsilon(0.05));
  CHECK(*unequal.rate.target - unequal.rate.mean < -0.1);  // published rate ~0.12 bits low

  // Wide non-dyadic ratio: boundary cells at 0 and 1 are the only bias.
  const auto wide = mc::two_step_oracle(0x1p-7, 0.09, 4000, 43);
  const double wide_true = mixture_distortion(0x1p-7, 0.09);
  CHECK(std::fabs(wide.distortion.mean - wide_true) / wide_true < 0.01);
  CHECK(std::fabs(wide.rate.mean - mixture_rate(0x1p-7, 0.09)) < 0.01);

  const auto flagged = mc::two_step_oracle(0.05, 0.2, 16, 44);
  CHECK(flagged.step_size_warning);

  CHECK_THROWS_AS(mc::two_step_oracle(0.02, 0.01, 100, 1), std::invalid_argument);
}
