"""Shared fixtures: catalog specs and small sample-size settings"""

import numpy as np
import pytest

from models import BVDriftCPP, BrownianDrift, DualOf, PoissonMultiple, RngStream, StableSN


@pytest.fixture
def brownian_kappa_1():
    """Ψ(λ) = λ²/2 − λ/2, so κ = 1"""
    return BrownianDrift(q=1.0, gamma=0.5)


@pytest.fixture
def brownian_kappa_0():
    return BrownianDrift(q=1.0, gamma=0.0)


@pytest.fixture
def brownian_drift_up():
    return BrownianDrift(q=1.0, gamma=-0.5)


@pytest.fixture
def stable_kappa_1():
    """Ψ(λ) = λ^1.5 − λ, so κ = 1"""
    return StableSN(c=1.0, alpha=1.5, drift=-1.0)


@pytest.fixture
def bounded_variation():
    """Oscillating: Ψ'(0) = γ* − rate·mean = 0"""
    return BVDriftCPP(gamma_star=1.0, jump_rate=1.0, jump_mean=1.0)


@pytest.fixture
def poisson_unit():
    return PoissonMultiple(alpha_jump=1.0, rate=1.0)


@pytest.fixture
def z_drift_up():
    return DualOf(inner=BrownianDrift(q=1.0, gamma=0.5))


@pytest.fixture
def stream():
    return RngStream(seed=20240601, stream_id=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_check_samples(monkeypatch):
    """Lower the minimum sample size of identity checks for fast tests"""
    monkeypatch.setenv("LEVY_MIN_CHECK_SAMPLES", "100")
