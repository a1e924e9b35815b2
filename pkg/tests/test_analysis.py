import math

import numpy as np
import pytest

from exceptions import DataError, DomainError, UnsupportedError
from models import Anchor, FunctionalVariant, PoissonMultiple, StableSN, VariantTag
from services import (
    IdentityChecker,
    affine_coefficient_log_laplace_bounds,
    check_identity,
    empirical_cdf,
    empirical_laplace,
    fit_exp_rate,
    jump_tail_lower_bounds,
    ks_two_sample,
    left_tail_bounds,
    log_laplace_power_bounds,
    poisson_log_laplace_ref,
    poisson_tail_chernoff_log,
    predict_left_tail_log,
    predict_log_laplace,
    predict_poisson_tail,
    sample_batch,
    sample_stopped_subordinator,
    tail_exponent_bounds,
    write_tail_curve_csv,
)


@pytest.fixture
def checker():
    return IdentityChecker(min_samples=100)


def test_empirical_cdf_band(rng):
    band = empirical_cdf(rng.random(200), delta=0.01)
    assert band.n == 200
    assert band.epsilon == pytest.approx(math.sqrt(math.log(200.0) / 400.0))
    assert band.cdf(1.0) == 1.0
    with pytest.raises(DataError):
        empirical_cdf(rng.random(50))
    with pytest.raises(DataError):
        empirical_cdf(np.full(200, np.nan))


def test_empirical_laplace():
    mean, stderr = empirical_laplace(np.zeros(100), 2.0)
    assert (mean, stderr) == (1.0, 0.0)
    with pytest.raises(DomainError):
        empirical_laplace(np.zeros(100), -1.0)


def test_ks_of_identical_samples(rng):
    samples = rng.random(500)
    statistic, p_value = ks_two_sample(samples, samples)
    assert statistic == 0.0
    assert p_value == pytest.approx(1.0)


def test_fit_exp_rate(rng):
    samples = rng.exponential(scale=0.5, size=100_000)
    rate, r_squared = fit_exp_rate(samples, np.linspace(0.5, 2.5, 9))
    assert rate == pytest.approx(2.0, abs=0.1)
    assert r_squared > 0.99
    with pytest.raises(DataError, match="x=20"):
        fit_exp_rate(samples, [1.0, 20.0])


def test_left_tail_prediction(brownian_kappa_0):
    assert predict_left_tail_log(brownian_kappa_0, 0.1) == pytest.approx(-20.0)
    assert predict_left_tail_log(brownian_kappa_0, 0.0004) == pytest.approx(-5000.0)
    assert predict_left_tail_log(StableSN(c=1.0, alpha=1.5), 0.01) == pytest.approx(-5000.0)


def test_left_tail_prediction_excludes_bounded_variation(bounded_variation):
    with pytest.raises(UnsupportedError):
        predict_left_tail_log(bounded_variation, 0.1)


def test_left_tail_bounds(brownian_kappa_0):
    log_lower, log_upper = left_tail_bounds(brownian_kappa_0, 0.2)
    assert log_upper == pytest.approx(-9.0)
    assert log_lower == pytest.approx(-44.0)
    with pytest.raises(DomainError):
        left_tail_bounds(brownian_kappa_0, 0.2, delta_upper=1.5)


def test_tail_exponent_bounds(brownian_kappa_1):
    # φ_V(r) = 2r − 1 above 1/2
    lower, upper = tail_exponent_bounds(brownian_kappa_1, 0.1, 2.0)
    assert lower == pytest.approx(0.5 * math.log(2.0) - (39.0 - math.log(40.0)), rel=1e-6)
    assert upper == pytest.approx(math.log(10.0) + 0.5 * math.log(2.0) - (9.0 - math.log(10.0)), rel=1e-6)
    assert lower < upper


def test_tail_exponent_bounds_exclude_oscillation(brownian_kappa_0, bounded_variation):
    with pytest.raises(UnsupportedError):
        tail_exponent_bounds(brownian_kappa_0, 0.1, 2.0)
    with pytest.raises(UnsupportedError):
        tail_exponent_bounds(bounded_variation, 0.1, 2.0)


def test_poisson_tail_prediction():
    assert predict_poisson_tail(1.0, 0.05) == pytest.approx(4.487206, abs=1e-6)
    with pytest.raises(DomainError):
        predict_poisson_tail(1.0, 1.5)


def test_poisson_chernoff_bound():
    values = [poisson_tail_chernoff_log(1.0, 1.0, x) for x in (0.05, 0.1, 0.5)]
    assert values[0] < values[1] < values[2] < 0.0
    # the infimum lies below the exponent at any single λ
    assert values[0] <= 103.0 * 0.05 - poisson_log_laplace_ref(1.0, 1.0, 103.0) + 1e-9
    # no information above the mean 1/(1 − e^{−1})
    assert poisson_tail_chernoff_log(1.0, 1.0, 5.0) == 0.0
    with pytest.raises(DomainError):
        poisson_tail_chernoff_log(1.0, 1.0, 0.0)


def test_chernoff_bound_check(checker):
    spec = PoissonMultiple(alpha_jump=1.0, rate=1.0)
    samples = sample_batch(spec, FunctionalVariant(tag=VariantTag.POISSON_EXACT), 0.0, 0.01, 5000, seed=31)
    grid = [0.1, 0.2, 0.5]
    report = checker.check_identity("chernoff_bound", samples=samples, x_grid=grid, alpha=1.0, p=1.0)
    assert report.passed, report.metadata
    assert report.provenance == Anchor.POISSON_LEFT_TAIL
    crowded = checker.check_identity("chernoff_bound", samples=np.full(1000, 0.01), x_grid=grid, alpha=1.0, p=1.0)
    assert not crowded.passed


def test_jump_tail_lower_bounds():
    first, second = jump_tail_lower_bounds(lambda r: math.exp(-r), 0.1, 1.0)
    assert first == pytest.approx(0.01)
    assert second == pytest.approx(math.exp(-math.log(0.1) ** 2))


def test_laplace_predictors(brownian_kappa_0):
    # Φ(λ) = √(2λ) with index 2
    assert predict_log_laplace(brownian_kappa_0, 8.0) == pytest.approx(8.0)
    assert log_laplace_power_bounds(brownian_kappa_0, 8.0) == pytest.approx((8.0, 8.0))
    low, high = affine_coefficient_log_laplace_bounds(brownian_kappa_0, 1.0, 8.0)
    assert low == pytest.approx(math.sqrt(16.0 * math.exp(-1.0)))
    assert high == pytest.approx(4.0)


def test_tail_curve_csv(tmp_path, rng):
    band = empirical_cdf(rng.random(100))
    target = write_tail_curve_csv(tmp_path / "curve.csv", [0.5, 2.0], band, [0.1, 0.2])
    lines = target.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "x,ecdf,dkw_lo,dkw_hi,prediction"
    assert lines[2].startswith("2.0,1.0,")
    bare = write_tail_curve_csv(tmp_path / "bare.csv", [0.5], prediction=[0.3])
    assert bare.read_text(encoding="utf-8").splitlines()[1] == "0.5,,,,0.3"


def test_affine_check_on_identical_samples(checker, rng):
    samples = rng.random(300)
    report = checker.check_identity("affine", reconstructed=samples, direct=samples, y=3.0)
    assert report.passed
    assert report.comparison == ">"
    assert report.metadata["y"] == 3.0


def test_checks_need_min_samples(rng):
    with pytest.raises(DataError):
        IdentityChecker(min_samples=1000).check_identity("convolution", summed=rng.random(10), sharp=rng.random(10))


def test_dominance_checks(checker, rng):
    larger = 1.0 + rng.exponential(2.0, 5000)
    smaller = rng.exponential(1.0, 5000)
    grid = np.linspace(0.2, 3.0, 15)
    assert checker.check_identity("sandwich", plain=larger, conditioned=smaller, x_grid=grid).passed
    assert not checker.check_identity("sandwich", plain=smaller, conditioned=larger, x_grid=grid).passed
    assert checker.check_identity("stochastic_order", plain=larger, conditioned=smaller, x_grid=grid).passed


def test_subadditivity_of_stopped_subordinator(checker, rng):
    samples = sample_stopped_subordinator(1.0, 1.0, 1.0, 50_000, rng)
    grid = [0.1, 0.5, 1.0, 2.0, 4.0]
    assert checker.check_identity("subadditivity", samples=samples, x_grid=grid, y_grid=grid).passed


def test_moments_check(checker, rng):
    assert checker.check_identity("moments", samples=rng.random(10_000)).passed
    spiky = np.zeros(10_000)
    spiky[:100] = 1.0
    assert not checker.check_identity("moments", samples=spiky).passed


def test_support_check(checker, rng):
    samples = 1.0 + rng.exponential(1.0, 1000)
    assert checker.check_identity("support", samples=samples, gamma_star=1.0).passed
    samples[0] = 0.5
    assert not checker.check_identity("support", samples=samples, gamma_star=1.0).passed


def test_laplace_and_cdf_oracles(checker, rng):
    samples = rng.exponential(1.0, 20_000)
    assert checker.check_identity("laplace", samples=samples, lam=1.0, reference=0.5).passed
    assert not checker.check_identity("laplace", samples=samples, lam=1.0, reference=0.6).passed
    grid = np.linspace(0.1, 4.0, 20)
    assert checker.check_identity("cdf_oracle", samples=samples, oracle=lambda x: -np.expm1(-x),
                                  x_grid=grid).passed
    shifted = checker.check_identity("cdf_oracle", samples=samples + 0.5, oracle=lambda x: -np.expm1(-x),
                                     x_grid=grid, mode="dominates")
    assert not shifted.passed
    with pytest.raises(DomainError):
        checker.check_identity("cdf_oracle", samples=samples, oracle=np.exp, x_grid=grid, mode="sideways")


def test_exit_frequency(checker):
    assert checker.check_identity("exit_frequency", hits=333, trials=1000, probability=1.0 / 3.0).passed
    assert not checker.check_identity("exit_frequency", hits=500, trials=1000, probability=1.0 / 3.0).passed


def test_exponential_moment_stability(checker, rng):
    samples = rng.random(5000)
    assert checker.check_identity("exponential_moment_stability", samples=samples, s=0.5, n_small=1000).passed
    with pytest.raises(DataError):
        checker.check_identity("exponential_moment_stability", samples=samples, s=0.5, n_small=1)


def test_tail_trend_and_window(checker):
    assert checker.check_identity("tail_trend", values=[1.0, 1.2, 1.5], stderrs=[0.01, 0.01, 0.01]).passed
    assert not checker.check_identity("tail_trend", values=[2.0, 1.0], stderrs=[0.01, 0.01]).passed
    assert checker.check_identity("tail_window", value=2.3, center=2.0, half_width=0.6).passed
    assert not checker.check_identity("tail_window", value=3.0, center=2.0, half_width=0.6).passed


@pytest.mark.parametrize("aspect,name", [("bracket", "poisson_bracket"),
                                         ("refinement", "poisson_refinement"),
                                         ("trend", "poisson_ratio_trend")])
def test_poisson_asymptotics(checker, aspect, name):
    report = checker.check_identity("poisson_asymptotic", alpha=1.0, p=1.0, lam_grid=[1e6, 1e9, 1e12],
                                    aspect=aspect)
    assert report.name == name
    assert report.passed, report.metadata


def test_right_tail_checks(checker, rng):
    samples = rng.exponential(scale=0.5, size=100_000)
    grid = np.linspace(0.5, 2.5, 9)
    assert checker.check_identity("tail_linearity", samples=samples, x_grid=grid).passed
    assert checker.check_identity("tail_rate", samples=samples, x_grid=grid, low=1.8, high=2.2).passed


def test_log_concavity_is_advisory(checker, rng):
    report = checker.check_identity("log_concavity", samples=rng.exponential(1.0, 5000))
    assert report.advisory


def test_unknown_check_kind(checker):
    assert "affine" in checker.kinds
    with pytest.raises(DomainError):
        checker.check_identity("telepathy")
    with pytest.raises(DomainError):
        check_identity("telepathy")
