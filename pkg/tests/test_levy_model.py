import math

import numpy as np
import pytest

from exceptions import DomainError, UnsupportedError
from models import BVDriftCPP, BrownianDrift, Regime, StableSN
from services import (
    ScaleMethod,
    brownian_exponential_moment_ref,
    brownian_laplace_bessel,
    brownian_laplace_ref,
    brownian_left_tail_log_ref,
    brownian_right_tail_rate,
    conditioned_spec,
    dufresne_cdf,
    expected_functional,
    exponent_summary,
    first_passage_prob,
    get_model,
    inverse_exponent,
    phi_v,
    poisson_log_laplace_bracket,
    poisson_log_laplace_ref,
    poisson_log_laplace_series,
    psi,
    psi_conditioned,
    ruin_probability_conditioned,
    scale_w,
    scale_w_conditioned,
)


def test_psi_of_brownian(brownian_kappa_1):
    assert psi(brownian_kappa_1, 2.0) == pytest.approx(1.0)
    assert np.allclose(psi(brownian_kappa_1, np.array([0.0, 1.0])), [0.0, 0.0])


def test_psi_rejects_negative_lambda(brownian_kappa_1):
    with pytest.raises(DomainError):
        psi(brownian_kappa_1, -0.1)


@pytest.mark.parametrize("spec_name", ["brownian_kappa_1", "stable_kappa_1"])
def test_kappa_is_one(spec_name, request):
    summary = exponent_summary(request.getfixturevalue(spec_name))
    assert summary.kappa == pytest.approx(1.0, abs=1e-12)
    assert summary.regime == Regime.DRIFTS_DOWN


def test_kappa_of_bounded_variation():
    summary = exponent_summary(BVDriftCPP(gamma_star=1.0, jump_rate=2.0, jump_mean=1.0))
    assert summary.kappa == pytest.approx(1.0, abs=1e-12)
    assert summary.sigma == summary.beta == 1.0


def test_regimes(brownian_kappa_0, brownian_drift_up, bounded_variation):
    assert exponent_summary(brownian_kappa_0).regime == Regime.OSCILLATES
    assert exponent_summary(brownian_drift_up).regime == Regime.DRIFTS_UP
    assert exponent_summary(bounded_variation).regime == Regime.OSCILLATES
    assert exponent_summary(brownian_drift_up).kappa == 0.0


def test_summary_of_brownian(brownian_kappa_1):
    summary = exponent_summary(brownian_kappa_1)
    assert summary.psi_prime_at_kappa == pytest.approx(0.5)
    assert summary.psi_at_kappa_plus_1 == pytest.approx(1.0)
    assert (summary.sigma, summary.beta) == (2.0, 2.0)


def test_poisson_has_no_summary(poisson_unit):
    with pytest.raises(UnsupportedError):
        exponent_summary(poisson_unit)
    assert psi(poisson_unit, 1.0) == pytest.approx(math.expm1(-1.0))


def test_psi_conditioned_shifts_by_kappa(brownian_kappa_1):
    # Ψ(1 + λ) = λ(1 + λ)/2
    assert psi_conditioned(brownian_kappa_1, 3.0) == pytest.approx(6.0)


@pytest.mark.parametrize("spec_name", ["brownian_kappa_1", "brownian_kappa_0", "stable_kappa_1",
                                       "bounded_variation", "z_drift_up"])
@pytest.mark.parametrize("x", [1e-3, 0.7, 12.0, 1e6])
def test_inverse_exponent_round_trip(spec_name, x, request):
    spec = request.getfixturevalue(spec_name)
    assert psi_conditioned(spec, inverse_exponent(spec, x)) == pytest.approx(x, rel=1e-9)


def test_inverse_exponent_closed_form(brownian_kappa_1):
    # λ² + λ − 2x = 0
    assert inverse_exponent(brownian_kappa_1, 1.0) == pytest.approx(1.0)
    assert inverse_exponent(brownian_kappa_1, 0.0) == 0.0
    with pytest.raises(DomainError):
        inverse_exponent(brownian_kappa_1, -1.0)


def test_phi_v(brownian_kappa_0, brownian_kappa_1):
    assert phi_v(brownian_kappa_0, 3.0) == pytest.approx(6.0)
    # Ψ(1 + λ)/λ = (1 + λ)/2
    assert phi_v(brownian_kappa_1, 2.0) == pytest.approx(3.0)
    assert phi_v(brownian_kappa_1, 0.25) == 0.0
    with pytest.raises(DomainError):
        phi_v(brownian_kappa_1, 0.0)


def test_scale_function_closed_form(brownian_kappa_1, brownian_kappa_0):
    assert scale_w(brownian_kappa_1, 1.0) == pytest.approx(2.0 * (math.e - 1.0))
    assert scale_w(brownian_kappa_0, 1.5) == pytest.approx(3.0)
    assert scale_w(StableSN(c=1.0, alpha=1.5), 1.0) == pytest.approx(1.0 / math.gamma(1.5))
    # (1 + λ)/(λ(2λ + 1)) inverts to 1 − e^{−x/2}/2
    bv = BVDriftCPP(gamma_star=2.0, jump_rate=1.0, jump_mean=1.0)
    assert scale_w(bv, 1.0) == pytest.approx(1.0 - 0.5 * math.exp(-0.5))


@pytest.mark.parametrize("spec", [BrownianDrift(q=1.0, gamma=0.5), BrownianDrift(q=1.0, gamma=0.0),
                                  StableSN(c=1.0, alpha=1.5)])
@pytest.mark.parametrize("x", [0.5, 2.0])
def test_scale_function_inversion_matches_closed_form(spec, x):
    exact = scale_w(spec, x, ScaleMethod.CLOSED_FORM)
    assert scale_w(spec, x, ScaleMethod.NUMERIC_INVERSION) == pytest.approx(exact, rel=1e-6)


def test_scale_function_of_stable_with_drift_needs_inversion(stable_kappa_1):
    with pytest.raises(UnsupportedError):
        scale_w(stable_kappa_1, 1.0, ScaleMethod.CLOSED_FORM)
    assert scale_w(stable_kappa_1, 1.0) > 0


def test_scale_w_conditioned(brownian_kappa_1):
    assert scale_w_conditioned(brownian_kappa_1, 1.0) == pytest.approx(2.0 * (1.0 - math.exp(-1.0)))
    assert scale_w_conditioned(brownian_kappa_1, 1.0) == pytest.approx(
        math.exp(-1.0) * scale_w(brownian_kappa_1, 1.0))


def test_scale_functions_need_negative_side(poisson_unit, z_drift_up):
    with pytest.raises(UnsupportedError):
        scale_w(poisson_unit, 1.0)
    with pytest.raises(UnsupportedError):
        scale_w(z_drift_up, 1.0)


def test_first_passage_and_ruin(brownian_kappa_0, brownian_kappa_1):
    assert first_passage_prob(brownian_kappa_0, 0.5, 1.5) == pytest.approx(1.0 / 3.0)
    assert ruin_probability_conditioned(brownian_kappa_1, 2.0) == pytest.approx(math.exp(-2.0))
    assert ruin_probability_conditioned(brownian_kappa_1, 0.0) == 1.0
    with pytest.raises(DomainError):
        first_passage_prob(brownian_kappa_0, 2.0, 1.0)


def test_conditioned_spec(brownian_kappa_1, stable_kappa_1, brownian_drift_up):
    assert conditioned_spec(brownian_kappa_1) == BrownianDrift(q=1.0, gamma=-0.5)
    tilted = conditioned_spec(BVDriftCPP(gamma_star=1.0, jump_rate=2.0, jump_mean=1.0))
    assert tilted.jump_rate == pytest.approx(1.0)
    assert tilted.jump_mean == pytest.approx(0.5)
    assert conditioned_spec(brownian_drift_up) == brownian_drift_up
    with pytest.raises(UnsupportedError):
        conditioned_spec(stable_kappa_1)


def test_expected_functional(poisson_unit, brownian_drift_up):
    assert expected_functional(BrownianDrift(q=1.0, gamma=-2.0)) == pytest.approx(1.0 / 1.5)
    assert expected_functional(poisson_unit) == pytest.approx(1.0 / (1.0 - math.exp(-1.0)))
    # B + t/2 gives 2/Exp(1), whose mean is infinite
    assert expected_functional(brownian_drift_up) is None


def test_get_model_is_shared(brownian_kappa_1):
    assert get_model(brownian_kappa_1) is get_model(BrownianDrift(q=1.0, gamma=0.5))


def test_brownian_laplace_reference():
    assert brownian_laplace_ref(1.0, 0.5) == pytest.approx(0.628679, abs=1e-6)
    assert brownian_laplace_ref(1.0, 0.0) == 1.0
    for kappa, lam in [(0.0, 1.0), (1.0, 0.5), (2.5, 10.0)]:
        assert brownian_laplace_ref(kappa, lam) == pytest.approx(brownian_laplace_bessel(kappa, lam), rel=1e-10)


def test_brownian_right_tail_and_exponential_moment():
    assert brownian_right_tail_rate(1.0) == pytest.approx(3.8317059702075 ** 2 / 8.0, rel=1e-10)
    assert brownian_right_tail_rate(0.0) == pytest.approx(2.4048255576957 ** 2 / 8.0, rel=1e-10)
    # E[I] = 1 for κ = 1, so E[exp(sI)] ≈ 1 + s for small s
    assert brownian_exponential_moment_ref(1.0, 0.01) == pytest.approx(1.01, abs=1e-3)
    assert brownian_exponential_moment_ref(1.0, 2.0) == math.inf


def test_brownian_left_tail_reference():
    assert brownian_left_tail_log_ref(0.1) == pytest.approx(-20.0)


def test_dufresne_cdf():
    assert dufresne_cdf(1.0, 0.5, 1.0) == pytest.approx(math.exp(-2.0))
    assert np.allclose(dufresne_cdf(1.0, 0.5, np.array([0.0, 2.0])), [0.0, math.exp(-1.0)])
    with pytest.raises(DomainError):
        dufresne_cdf(1.0, 0.0, 1.0)


def test_poisson_log_laplace():
    value, error = poisson_log_laplace_series(1.0, 1.0, 1.0)
    assert value == pytest.approx(1.21071, abs=1e-4)
    assert error < 1e-12
    assert poisson_log_laplace_ref(1.0, 1.0, 1.0) == value
    low, high = poisson_log_laplace_bracket(1.0, 1.0, 1.0)
    assert low == pytest.approx(math.pi ** 2 / 12.0)
    assert high == pytest.approx(low + math.log(2.0))
    assert low <= value <= high
    assert poisson_log_laplace_series(1.0, 1.0, 0.0) == (0.0, 0.0)
