import math

import pytest

import randquant as rq


def test_version():
    assert rq.__version__


def test_closed_forms():
    assert rq.distortion_random(1) == pytest.approx(1 / 12, rel=1e-15)
    assert rq.distortion_random(2) == pytest.approx(1 / 24, rel=1e-15)
    assert rq.rate_random(2) == pytest.approx(0.7213475204444817, rel=1e-14)
    assert rq.penalty_fixed_rate(2) == pytest.approx(2.0, rel=1e-15)
    assert rq.penalty_entropy_constrained(2) == pytest.approx(math.e / 2, rel=1e-13)
    assert rq.asymptotic_penalty() == pytest.approx(2.5758789071187616, rel=1e-13)
    assert rq.rate_loss_bound() == pytest.approx(0.6825323867484818, rel=1e-13)
    assert rq.harmonic(4) == pytest.approx(25 / 12, rel=1e-15)

    with pytest.raises(ValueError):
        rq.spacing_pdf(1, 0.5)


def test_threshold_set():
    t = rq.ThresholdSet([0.7, 0.2])
    assert t.levels == 3
    assert t.encode(0.5) == 2
    assert t.encode(0.2) == 2
    assert t.decode(2) == pytest.approx(0.45)
    assert t.spacings() == pytest.approx([0.2, 0.5, 0.3])
    assert t.conditional_mse() == pytest.approx(0.16 / 12, rel=1e-12)
    assert t.conditional_entropy() == pytest.approx(1.4854752972273343, rel=1e-12)

    with pytest.raises(ValueError):
        t.encode(1.0)


def test_monte_carlo_reports():
    config = rq.TrialConfig(levels=4, trials=20000, seed=7)
    report = rq.estimate_distortion(config)
    assert report.target == pytest.approx(1 / 60, rel=1e-15)
    assert report.within(4.0)
    assert abs(report.z_score) <= 4.0

    again = rq.estimate_distortion(config)
    assert again.mean == report.mean
    assert again.std_error == report.std_error

    threaded = rq.estimate_distortion(
        rq.TrialConfig(levels=4, trials=20000, seed=7, threads=4)
    )
    assert threaded.mean == report.mean


def test_spacing_histogram():
    config = rq.TrialConfig(levels=2, trials=20000, seed=3)
    report = rq.spacing_histogram_test(config, bins=20)
    assert report.passed
    assert report.dof == report.merged_bins - 1

    adversarial = rq.spacing_histogram_test(config, bins=20, pdf_levels=3)
    assert not adversarial.passed


def test_dithered_bank():
    bank = rq.DitheredBank(0.25, [0.0])
    assert bank.encode_joint(0.6).channel == [3]
    merged = bank.merge_partition()
    assert merged.interior == pytest.approx([0.25, 0.5, 0.75])
    d, r = bank.exact_metrics()
    assert d == pytest.approx(0.25**2 / 12, rel=1e-12)
    assert r == pytest.approx(2.0, abs=1e-12)

    pair = rq.DitheredBank(0.5, [0.0, 0.5])
    assert pair.reconstruct(pair.encode_joint(0.3)) == pytest.approx(0.375)


def test_two_step_oracle():
    d0, d1 = 2**-7, 2**-6
    report = rq.two_step_oracle(d0, d1, trials=2000, seed=5)
    assert not report.step_size_warning
    # Targets echo the published pair formulas.
    target = rq.two_step_distortion(rq.TwoStepConfig(d0, d1))
    assert report.distortion.target == pytest.approx(target, rel=1e-15)
    # The sampler itself follows the stationary mixture law of the merged
    # partition, which sits ~10% below the published form at step ratio 2.
    mixture = d0 * d0 / 12 * (1 - d0 / (2 * d1))
    assert report.distortion.mean == pytest.approx(mixture, rel=0.01)
    assert report.distortion.mean < 0.95 * target


def test_checks_subset():
    result = rq.check_harmonic_bounds(5000)
    assert result.passed
    corrupted = rq.check_harmonic_bounds(1000, 0.6)
    assert not corrupted.passed
