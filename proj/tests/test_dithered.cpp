#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "randquant/closed_form.hpp"
#include "randquant/dithered.hpp"
#include "randquant/rng.hpp"

namespace dq = randquant::dithered;
namespace cf = randquant::closed_form;
using randquant::ThresholdSet;
using randquant::TrialRng;

TEST_CASE("bank construction rules") {
  CHECK_THROWS_AS(dq::DitheredBank(0.25, {}), std::invalid_argument);
  CHECK_THROWS_AS(dq::DitheredBank(0.25, {0.5}), std::invalid_argument);  // channel 0 shifted
  CHECK_THROWS_AS(dq::DitheredBank(0.25, {0.0, 1.25}), std::invalid_argument);
  CHECK_THROWS_AS(dq::DitheredBank(0.0, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(dq::DitheredBank(2.0, {0.0}), std::invalid_argument);
}

TEST_CASE("joint encoding uses the shifted lattices") {
  const dq::DitheredBank single(0.25, {0.0});
  CHECK(single.encode_joint(0.6).channel == std::vector<std::int64_t>{3});

  const dq::DitheredBank pair(0.25, {0.0, 0.5});
  CHECK(pair.encode_joint(0.6).channel == std::vector<std::int64_t>{3, 2});
  CHECK(pair.encode_joint(0.05).channel == std::vector<std::int64_t>{1, 0});

  CHECK_THROWS_AS(pair.encode_joint(1.0), std::domain_error);
  CHECK_THROWS_AS(pair.encode_joint(-0.5), std::domain_error);
}

TEST_CASE("merged partition unions the channel thresholds") {
  const auto single = dq::DitheredBank(0.25, {0.0}).merge_partition();
  CHECK(single.interior() == std::vector<double>{0.25, 0.5, 0.75});

  const auto pair = dq::DitheredBank(0.5, {0.0, 0.5}).merge_partition();
  CHECK(pair.interior() == std::vector<double>{0.25, 0.5, 0.75});

  // Coinciding channels collapse to one lattice.
  const auto dup = dq::DitheredBank(0.5, {0.0, 0.0}).merge_partition();
  CHECK(dup.interior() == std::vector<double>{0.5});
}

TEST_CASE("reconstruct intersects the channel cells") {
  const dq::DitheredBank pair(0.5, {0.0, 0.5});
  CHECK(pair.reconstruct(pair.encode_joint(0.3)) == doctest::Approx(0.375).epsilon(1e-15));

  const dq::DitheredBank single(0.25, {0.0});
  CHECK(single.reconstruct(single.encode_joint(0.6)) == doctest::Approx(0.625).epsilon(1e-15));

  dq::JointIndex inconsistent;
  inconsistent.channel = {1, 2};  // cells [0,.5) and [.75,1.25) cannot intersect
  CHECK_THROWS_AS(pair.reconstruct(inconsistent), std::domain_error);

  dq::JointIndex wrong_arity;
  wrong_arity.channel = {1};
  CHECK_THROWS_AS(pair.reconstruct(wrong_arity), std::invalid_argument);
}

TEST_CASE("reconstruction equals decoding on the merged partition") {
  TrialRng rng(5, 1);
  for (int s = 0; s < 4; ++s) {
    const auto bank = dq::DitheredBank::with_random_offsets(0x1p-4, 3, rng);
    const ThresholdSet merged = bank.merge_partition();
    for (int g = 0; g < 500; ++g) {
      const double x = (g + 0.5) / 500.0;
      const double via_joint = bank.reconstruct(bank.encode_joint(x));
      const double via_merged = merged.decode(merged.encode(x));
      CHECK(via_joint == doctest::Approx(via_merged).epsilon(1e-12));
      CHECK(std::fabs(x - via_joint) <= 0.5 * merged.cell(merged.encode(x)).length() + 1e-15);
    }
  }
}

TEST_CASE("exact metrics of simple banks") {
  const auto [d1, r1] = dq::DitheredBank(0x1p-5, {0.0}).exact_metrics();
  CHECK(d1 == doctest::Approx(0x1p-10 / 12.0).epsilon(1e-15));
  CHECK(r1 == doctest::Approx(5.0).epsilon(1e-15));

  const auto [d4, r4] = dq::DitheredBank::evenly_spaced(0x1p-6, 4).exact_metrics();
  CHECK(d4 == doctest::Approx(0x1p-16 / 12.0).epsilon(1e-13));
  CHECK(r4 == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("random-offset averages approach the step-size laws") {
  const auto report = dq::average_random_offsets(2, 0x1p-8, 2000, 61);
  const double d_target = cf::dithered_distortion(0x1p-8, 2);
  const double r_target = cf::dithered_rate(0x1p-8, 2, 0.0);
  CHECK(report.distortion.target == d_target);
  CHECK(report.rate.target == r_target);
  CHECK(std::fabs(report.distortion.mean - d_target) / d_target < 0.03);
  CHECK(std::fabs(report.rate.mean - r_target) < 0.03);
  CHECK(report.distortion.within(4.0));
  CHECK(report.rate.within(4.0));
  CHECK(report.predicted_penalty == cf::penalty_entropy_constrained(2));
  CHECK(std::fabs(report.empirical_penalty - report.predicted_penalty) /
            report.predicted_penalty <
        0.03);
}

TEST_CASE("penalty sweep rows") {
  const auto rows = dq::sweep_penalty(3, 0x1p-7, 500, 71);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].channels == 1);
  CHECK(rows[0].empirical_penalty == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rows[0].predicted_penalty == 1.0);
  for (const auto& row : rows) {
    CHECK(std::fabs(row.empirical_penalty - row.predicted_penalty) / row.predicted_penalty <
          0.05);
  }
}

TEST_CASE("thread count does not change sweep output") {
  const auto serial = dq::average_random_offsets(3, 0x1p-6, 1000, 81, 1);
  const auto parallel = dq::average_random_offsets(3, 0x1p-6, 1000, 81, 4);
  CHECK(serial.distortion.mean == parallel.distortion.mean);
  CHECK(serial.rate.mean == parallel.rate.mean);
  CHECK(serial.empirical_penalty == parallel.empirical_penalty);
}
