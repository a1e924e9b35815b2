import numpy as np
import pytest

from exceptions import DataError, DomainError, HorizonTooShortError, RefusalError, UnsupportedError
from models import (
    BVDriftCPP,
    BrownianDrift,
    Horizon,
    LevelUp,
    PathSample,
    PoissonMultiple,
    RngStream,
    StopReason,
    TwoSidedExit,
    VUpAlgorithm,
)
from services import (
    PathSimulator,
    argmin_split,
    exp_integral,
    last_passage_split,
    sample_increments,
    truncate_at_level,
    validate_increment_law,
)


def _path(values, dt=0.1):
    return PathSample(dt=dt, values=values, stop_reason=StopReason.HORIZON_REACHED)


def test_brownian_increment_moments(brownian_kappa_1, rng):
    draws = sample_increments(brownian_kappa_1, 1.0, 100_000, rng)
    assert draws.mean() == pytest.approx(-0.5, abs=0.02)
    assert draws.var() == pytest.approx(1.0, abs=0.03)


def test_deterministic_bounded_variation_increments(rng):
    draws = sample_increments(BVDriftCPP(gamma_star=2.0, jump_rate=0.0, jump_mean=1.0), 0.1, 5, rng)
    assert np.allclose(draws, 0.2)


def test_poisson_increments_are_jump_multiples(rng):
    draws = sample_increments(PoissonMultiple(alpha_jump=0.5, rate=3.0), 1.0, 1000, rng)
    assert np.all(draws >= 0)
    assert np.allclose(draws / 0.5, np.round(draws / 0.5))


def test_dual_increments_are_negated(z_drift_up):
    dual = sample_increments(z_drift_up, 0.01, 10, np.random.default_rng(3))
    inner = sample_increments(z_drift_up.inner, 0.01, 10, np.random.default_rng(3))
    assert np.array_equal(dual, -inner)


def test_nonpositive_step_rejected(brownian_kappa_1, rng):
    with pytest.raises(DomainError):
        sample_increments(brownian_kappa_1, 0.0, 3, rng)


@pytest.mark.parametrize("spec_name", ["brownian_kappa_1", "stable_kappa_1", "bounded_variation", "poisson_unit",
                                       "z_drift_up"])
def test_increment_law_matches_exponent(spec_name, request, stream):
    report = validate_increment_law(request.getfixturevalue(spec_name), 0.1, 1.0, 20_000, stream)
    assert report.name == "increment_law"
    assert report.passed, report.metadata


def test_increment_law_needs_samples(brownian_kappa_1, stream):
    with pytest.raises(DataError):
        validate_increment_law(brownian_kappa_1, 0.1, 1.0, 10, stream)


def test_last_passage_split_shares_the_split_point():
    path = _path([0.0, -1.0, 0.5, -0.2, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0])
    pre, post = last_passage_split(path, 0.0)
    assert np.allclose(pre.values, [0.0, -1.0, 0.5, -0.2])
    assert post.values[0] == 0.0
    assert np.allclose(post.values, [0.0, 2.2, 3.2, 4.2, 5.2, 6.2, 7.2])
    assert pre.metadata["split_index"] == post.metadata["split_index"] == 3
    assert len(pre.values) + len(post.values) == len(path.values) + 1
    rebuilt = np.concatenate([pre.values, post.values[1:] + pre.values[-1]])
    assert np.allclose(rebuilt, path.values)
    # the shared point keeps trapezoid integrals additive across the split
    assert exp_integral(path) == pytest.approx(exp_integral(pre) + np.exp(-pre.values[-1]) * exp_integral(post))


def test_last_passage_split_needs_settled_window():
    with pytest.raises(HorizonTooShortError):
        last_passage_split(_path([0.0, 1.0, 0.5, 0.8]), 0.0)


def test_argmin_split():
    shifted = argmin_split(_path([0.0, 1.0, -2.0, 0.0, 3.0, 5.0, 6.0, 7.0, 8.0, 9.0]))
    assert np.allclose(shifted.values[:3], [0.0, 2.0, 5.0])
    assert shifted.metadata["argmin_index"] == 2
    with pytest.raises(HorizonTooShortError):
        argmin_split(_path([3.0, 2.0, 1.0, 0.0]))


def test_truncate_at_level():
    truncated = truncate_at_level(_path([0.0, 0.5, 1.2, 0.8, 2.0]), 1.0)
    assert np.allclose(truncated.values, [0.0, 0.5, 1.2])
    assert truncated.metadata["overshoot"] == pytest.approx(0.2)
    with pytest.raises(HorizonTooShortError):
        truncate_at_level(_path([0.0, 0.5]), 1.0)


def test_horizon_rule(brownian_kappa_1, stream):
    path = PathSimulator(brownian_kappa_1, dt=0.01).simulate_until(0.0, Horizon(T=1.0), stream)
    assert len(path) == 101
    assert path.stop_reason == StopReason.HORIZON_REACHED


def test_level_rule_on_deterministic_path(stream):
    simulator = PathSimulator(BVDriftCPP(gamma_star=1.0, jump_rate=0.0, jump_mean=1.0), dt=0.1)
    path = simulator.simulate_until(0.0, LevelUp(y=0.95), stream)
    assert len(path) == 11
    assert path.stop_reason == StopReason.LEVEL_HIT
    assert path.values[-1] >= 0.95


def test_same_stream_same_path(brownian_kappa_1, stream):
    simulator = PathSimulator(brownian_kappa_1, dt=0.01)
    first = simulator.simulate_until(0.0, Horizon(T=2.0), stream)
    second = simulator.simulate_until(0.0, Horizon(T=2.0), stream)
    assert np.array_equal(first.values, second.values)


def test_two_sided_exit_rejects_downward_paths(stream):
    simulator = PathSimulator(BrownianDrift(q=0.01, gamma=10.0), dt=0.01)
    path = simulator.simulate_until(0.5, TwoSidedExit(lower=0.0, upper=10.0), stream)
    assert path.stop_reason == StopReason.REJECTED
    assert path.values[-1] <= 0.0


def test_default_v_up_algorithm(brownian_kappa_0, brownian_kappa_1, bounded_variation):
    assert PathSimulator(brownian_kappa_0).default_v_up_algorithm() == VUpAlgorithm.BESSEL3
    assert PathSimulator(brownian_kappa_1).default_v_up_algorithm() == VUpAlgorithm.LAST_PASSAGE_SHIFT
    assert PathSimulator(bounded_variation).default_v_up_algorithm() == VUpAlgorithm.REJECTION


def test_bessel3_path(brownian_kappa_0, stream):
    path = PathSimulator(brownian_kappa_0, dt=1e-3).simulate_v_up(LevelUp(y=1.0), stream)
    assert path.values[0] == 0.0
    assert np.all(path.values >= 0.0)
    assert path.values[-1] >= 1.0
    assert path.metadata["algorithm"] == "bessel3"


def test_last_passage_v_up_stays_positive(brownian_kappa_1, stream):
    path = PathSimulator(brownian_kappa_1, dt=0.01).simulate_v_up(LevelUp(y=2.0), stream)
    assert path.values[0] == 0.0
    assert np.all(path.values[1:] > 0.0)
    assert path.values[-1] >= 2.0
    assert path.metadata["algorithm"] == "last_passage_shift"
    assert 0.0 <= path.metadata["residual_bound"] < 1e-3


def test_rejection_from_zero_for_bounded_variation(bounded_variation, stream):
    path = PathSimulator(bounded_variation, dt=0.01).simulate_v_up(LevelUp(y=2.0), stream)
    assert path.values[0] == 0.0
    assert np.all(path.values[1:] > 0.0)
    assert path.metadata["algorithm"] == "rejection"
    assert path.metadata["acceptance_estimate"] == pytest.approx(1.0 / 3.0)


def test_rejection_refuses_tiny_acceptance(brownian_kappa_0, stream):
    simulator = PathSimulator(brownian_kappa_0, dt=0.01)
    with pytest.raises(RefusalError, match="raise x0"):
        simulator.simulate_v_up(LevelUp(y=1000.0), stream, algo=VUpAlgorithm.REJECTION, x0=0.05)


def test_v_sharp_outside_catalog(stable_kappa_1, stream):
    with pytest.raises(UnsupportedError):
        PathSimulator(stable_kappa_1, dt=0.01).simulate_v_sharp(LevelUp(y=1.0), stream)


def test_z_up_path(z_drift_up, stream):
    path = PathSimulator(z_drift_up, dt=0.01).simulate_z_up(LevelUp(y=2.0), stream)
    assert path.values[0] == 0.0
    assert np.all(path.values >= 0.0)
    assert path.values[-1] >= 2.0


def test_z_up_needs_dual_spec(brownian_kappa_1, stream):
    with pytest.raises(DomainError):
        PathSimulator(brownian_kappa_1, dt=0.01).simulate_z_up(LevelUp(y=1.0), stream)


def test_v_up_needs_negative_side(z_drift_up):
    with pytest.raises(DomainError):
        PathSimulator(z_drift_up, dt=0.01).simulate_v_up(LevelUp(y=1.0), RngStream(seed=1, stream_id=0))
