"""
Analytic layer for spectrally one-sided Lévy processes.
Laplace exponents, their roots and inverses, scale functions and the closed-form
reference transforms used as oracles by the Monte Carlo side.
"""

import logging
import math
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy import optimize, special

from config import Config
from exceptions import ConvergenceError, DomainError, PrecisionError, UnsupportedError
from models import (
    BVDriftCPP,
    BrownianDrift,
    DualOf,
    ExponentSummary,
    PoissonMultiple,
    ProcessSpec,
    Regime,
    StableSN,
)
from .laplace_inversion import euler_inversion

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

_TINY = np.finfo(float).tiny
_SERIES_RTOL = 1e-16


class ScaleMethod(str, Enum):
    CLOSED_FORM = "closed_form"
    NUMERIC_INVERSION = "numeric_inversion"
    AUTO = "auto"


def _as_brownian(spec: StableSN) -> BrownianDrift:
    """A stable spec of index 2 is a Brownian motion with q = 2c"""
    return BrownianDrift(q=2.0 * spec.c, gamma=-spec.drift)


def _psi_raw(spec: ProcessSpec, lam):
    """Exponent without domain checks; accepts real or complex arrays"""
    if isinstance(spec, BrownianDrift):
        return 0.5 * spec.q * lam * lam - spec.gamma * lam
    if isinstance(spec, StableSN):
        return spec.c * np.power(lam, spec.alpha) + spec.drift * lam
    if isinstance(spec, BVDriftCPP):
        m = spec.jump_mean
        return spec.gamma_star * lam - spec.jump_rate * lam * m / (1.0 + lam * m)
    if isinstance(spec, PoissonMultiple):
        return spec.rate * np.expm1(-spec.alpha_jump * lam)
    if isinstance(spec, DualOf):
        return _psi_raw(spec.inner, lam)
    raise UnsupportedError(f"no Laplace exponent for process kind '{spec.kind}'")


def _psi_prime_raw(spec: ProcessSpec, lam):
    if isinstance(spec, BrownianDrift):
        return spec.q * lam - spec.gamma
    if isinstance(spec, StableSN):
        return spec.c * spec.alpha * np.power(lam, spec.alpha - 1.0) + spec.drift
    if isinstance(spec, BVDriftCPP):
        m = spec.jump_mean
        return spec.gamma_star - spec.jump_rate * m / (1.0 + lam * m) ** 2
    if isinstance(spec, PoissonMultiple):
        return -spec.rate * spec.alpha_jump * np.exp(-spec.alpha_jump * lam)
    if isinstance(spec, DualOf):
        return _psi_prime_raw(spec.inner, lam)
    raise UnsupportedError(f"no Laplace exponent for process kind '{spec.kind}'")


def _psi_ratio(spec: ProcessSpec, lam: float) -> float:
    """Ψ(λ)/λ in a form without cancellation at small λ"""
    if isinstance(spec, BrownianDrift):
        return 0.5 * spec.q * lam - spec.gamma
    if isinstance(spec, StableSN):
        return spec.c * lam ** (spec.alpha - 1.0) + spec.drift
    if isinstance(spec, BVDriftCPP):
        m = spec.jump_mean
        return spec.gamma_star - spec.jump_rate * m / (1.0 + lam * m)
    if isinstance(spec, DualOf):
        return _psi_ratio(spec.inner, lam)
    raise UnsupportedError(f"no positive root search for process kind '{spec.kind}'")


def _check_lambda(lam: ArrayLike) -> None:
    if np.any(np.asarray(lam) < 0):
        raise DomainError(f"lambda must be nonnegative, got {lam}")


def _scalar_or_array(value):
    return float(value) if np.ndim(value) == 0 else value


def _bisect_increasing(func: Callable[[float], float], label: str,
                       lower: float = 0.0) -> float:
    """
    Root of a nondecreasing function with func(lower) <= 0.
    The upper end of the bracket doubles from 1 until the sign changes.
    """
    bracket_max = Config.get_root_bracket_max()
    hi = 1.0
    while func(hi) <= 0:
        hi *= 2.0
        if hi > bracket_max:
            logger.error(f"❌ No root bracket found for {label} below {bracket_max:g}")
            raise ConvergenceError(
                f"no root bracket found for {label} below {bracket_max:g}",
                diagnostics={"last_upper": hi / 2.0, "value_at_upper": func(hi / 2.0)},
            )
    root, result = optimize.bisect(func, lower, hi, xtol=_TINY, rtol=Config.ROOT_RTOL,
                                   maxiter=Config.ROOT_MAX_ITER, full_output=True, disp=False)
    if not result.converged:
        logger.error(f"❌ Bisection for {label} did not converge: {result.flag}")
        raise ConvergenceError(
            f"bisection for {label} did not converge",
            diagnostics={"iterations": result.iterations, "flag": result.flag, "bracket": [lower, hi]},
        )
    return float(root)


class LevyModel:
    """Analytic quantities of one process spec; the exponent summary is computed once"""

    def __init__(self, spec: ProcessSpec):
        self.spec = spec
        self._summary: Optional[ExponentSummary] = None
        logger.debug(f"LevyModel initialized for {spec.kind}")

    # Exponent

    def psi(self, lam: ArrayLike) -> ArrayLike:
        """
        Laplace exponent Ψ(λ) with E[e^{λV_t}] = e^{tΨ(λ)}.
        For dual_of specs this is Ψ_{−Z}; for poisson_multiple the exponent of −Y.
        """
        _check_lambda(lam)
        return _scalar_or_array(_psi_raw(self.spec, np.asarray(lam, dtype=float)))

    def psi_prime(self, lam: ArrayLike) -> ArrayLike:
        """Derivative Ψ'(λ)"""
        _check_lambda(lam)
        return _scalar_or_array(_psi_prime_raw(self.spec, np.asarray(lam, dtype=float)))

    def exponent_summary(self) -> ExponentSummary:
        """κ, Ψ'(κ), Ψ(κ+1), the regularity indices and the long-run regime"""
        if self._summary is not None:
            return self._summary
        spec = self.spec
        if isinstance(spec, PoissonMultiple):
            raise UnsupportedError("poisson_multiple has no positive root to condition on")

        slope = float(_psi_prime_raw(spec, 0.0))
        if slope > 0:
            regime = Regime.DRIFTS_UP
        elif slope == 0:
            regime = Regime.OSCILLATES
        else:
            regime = Regime.DRIFTS_DOWN

        if regime == Regime.DRIFTS_DOWN:
            kappa = _bisect_increasing(lambda lam: _psi_ratio(spec, lam), label="kappa")
            tolerance = Config.ROOT_RTOL * kappa
        else:
            kappa, tolerance = 0.0, 0.0

        sigma, beta = self._indices()
        self._summary = ExponentSummary(
            kappa=kappa,
            psi_prime_at_kappa=max(float(_psi_prime_raw(spec, kappa)), 0.0),
            psi_at_kappa_plus_1=float(_psi_raw(spec, kappa + 1.0)),
            sigma=sigma,
            beta=beta,
            regime=regime,
            kappa_tolerance=tolerance,
        )
        logger.debug(f"Exponent summary for {spec.kind}: kappa={kappa:.12g}, regime={regime.value}")
        return self._summary

    def _indices(self) -> Tuple[float, float]:
        spec = self.spec.inner if isinstance(self.spec, DualOf) else self.spec
        if isinstance(spec, BrownianDrift):
            return 2.0, 2.0
        if isinstance(spec, StableSN):
            return spec.alpha, spec.alpha
        return 1.0, 1.0

    @property
    def kappa(self) -> float:
        return self.exponent_summary().kappa

    def psi_conditioned(self, lam: ArrayLike) -> ArrayLike:
        """Ψ♯(λ) = Ψ(κ + λ), the exponent of V conditioned to drift to +∞"""
        _check_lambda(lam)
        kappa = self.kappa
        return _scalar_or_array(_psi_raw(self.spec, kappa + np.asarray(lam, dtype=float)))

    def inverse_exponent(self, x: float) -> float:
        """Φ(x): the λ ≥ 0 with Ψ♯(λ) = x"""
        if x < 0:
            raise DomainError(f"inverse_exponent needs x >= 0, got {x}")
        if x == 0:
            return 0.0
        kappa = self.kappa
        return _bisect_increasing(lambda lam: float(_psi_raw(self.spec, kappa + lam)) - x,
                                  label=f"Phi({x:g})")

    def _shifted_ratio(self, lam: float) -> float:
        kappa = self.kappa
        if lam == 0:
            return self.exponent_summary().psi_prime_at_kappa
        if kappa == 0:
            return _psi_ratio(self.spec, lam)
        return float(_psi_raw(self.spec, kappa + lam)) / lam

    def phi_v(self, x: float) -> float:
        """φ_V(x) = inf{λ ≥ 0 : Ψ(κ+λ)/λ > x}"""
        if x <= 0:
            raise DomainError(f"phi_v needs x > 0, got {x}")
        if x <= self.exponent_summary().psi_prime_at_kappa:
            return 0.0
        return _bisect_increasing(lambda lam: self._shifted_ratio(lam) - x, label=f"phi_V({x:g})")

    # Scale functions

    def scale_w(self, x: float, method: ScaleMethod = ScaleMethod.AUTO) -> float:
        """
        Scale function W(x), the function with Laplace transform 1/Ψ.

        Args:
            x: level (> 0)
            method: closed_form, numeric_inversion or auto (closed form when the
                catalog has one)

        Returns:
            W(x)
        """
        if x <= 0:
            raise DomainError(f"scale_w needs x > 0, got {x}")
        method = ScaleMethod(method)
        if method != ScaleMethod.NUMERIC_INVERSION:
            try:
                return _closed_form_w(self._negative_side_spec(), x)
            except UnsupportedError:
                if method == ScaleMethod.CLOSED_FORM:
                    raise
        return math.exp(self.kappa * x) * self._inverted_w_conditioned(x)

    def scale_w_conditioned(self, x: float, method: ScaleMethod = ScaleMethod.AUTO) -> float:
        """W♯(x) = e^{−κx}W(x), the scale function of V♯"""
        if x <= 0:
            raise DomainError(f"scale_w_conditioned needs x > 0, got {x}")
        method = ScaleMethod(method)
        if method != ScaleMethod.NUMERIC_INVERSION:
            try:
                return _closed_form_w(conditioned_spec(self._negative_side_spec()), x)
            except UnsupportedError:
                if method == ScaleMethod.CLOSED_FORM:
                    raise
        return self._inverted_w_conditioned(x)

    def _negative_side_spec(self) -> ProcessSpec:
        if isinstance(self.spec, PoissonMultiple):
            raise UnsupportedError("scale functions are defined for spectrally negative specs")
        if isinstance(self.spec, DualOf):
            raise UnsupportedError("scale functions of a dual spec belong to its inner spec")
        return self.spec

    def _inverted_w_conditioned(self, x: float) -> float:
        spec = self._negative_side_spec()
        kappa = self.kappa
        value, error = euler_inversion(lambda s: 1.0 / _psi_raw(spec, kappa + s), x)
        relative = error / abs(value) if value != 0 else math.inf
        if not np.isfinite(value) or relative > Config.LAPLACE_INVERSION_RTOL:
            logger.error(f"❌ Laplace inversion of W♯({x:g}) missed its target: {relative:.2e}")
            raise PrecisionError(f"numeric inversion of the scale function at x={x:g} failed", relative)
        return value

    def ruin_probability_conditioned(self, x: float) -> float:
        """P(V♯ started at x ever enters (−∞, 0]) = 1 − Ψ'(κ)W♯(x)"""
        if x <= 0:
            return 1.0
        slope = self.exponent_summary().psi_prime_at_kappa
        return min(1.0, max(0.0, 1.0 - slope * self.scale_w_conditioned(x)))

    def first_passage_prob(self, x: float, y: float) -> float:
        """P(V from x reaches y before entering (−∞, 0]) = W(x)/W(y)"""
        if not 0 < x < y:
            raise DomainError(f"first_passage_prob needs 0 < x < y, got x={x}, y={y}")
        ratio = self.scale_w_conditioned(x) / self.scale_w_conditioned(y)
        return float(math.exp(self.kappa * (x - y)) * ratio)


def _closed_form_w(spec: ProcessSpec, x: float) -> float:
    if isinstance(spec, StableSN) and spec.alpha == 2.0:
        spec = _as_brownian(spec)
    if isinstance(spec, BrownianDrift):
        rate = 2.0 * spec.gamma / spec.q
        if rate == 0:
            return 2.0 * x / spec.q
        return 2.0 * math.expm1(rate * x) / (spec.q * rate)
    if isinstance(spec, StableSN):
        if spec.drift != 0:
            raise UnsupportedError("no closed-form scale function for a stable spec with drift")
        return x ** (spec.alpha - 1.0) / (spec.c * special.gamma(spec.alpha))
    if isinstance(spec, BVDriftCPP):
        m = spec.jump_mean
        decay = (spec.gamma_star - spec.jump_rate * m) / (spec.gamma_star * m)
        if decay == 0:
            return (x + m) / (spec.gamma_star * m)
        return (m * math.exp(-decay * x) - math.expm1(-decay * x) / decay) / (spec.gamma_star * m)
    raise UnsupportedError(f"no closed-form scale function for '{spec.kind}'")


@lru_cache(maxsize=256)
def get_model(spec: ProcessSpec) -> LevyModel:
    """Shared LevyModel per spec"""
    return LevyModel(spec)


def conditioned_spec(spec: ProcessSpec) -> ProcessSpec:
    """
    Catalog spec of V♯ (exponent Ψ(κ+·)) when the catalog is closed under the
    exponential tilt. Raises UnsupportedError otherwise.
    """
    kappa = get_model(spec).kappa
    if kappa == 0:
        if isinstance(spec, (PoissonMultiple, DualOf)):
            raise UnsupportedError(f"no conditioned catalog spec for '{spec.kind}'")
        return spec
    if isinstance(spec, BrownianDrift):
        return BrownianDrift(q=spec.q, gamma=spec.gamma - spec.q * kappa)
    if isinstance(spec, StableSN) and spec.alpha == 2.0:
        return StableSN(c=spec.c, alpha=2.0, drift=spec.drift + 2.0 * spec.c * kappa)
    if isinstance(spec, BVDriftCPP):
        tilt = 1.0 + kappa * spec.jump_mean
        return BVDriftCPP(gamma_star=spec.gamma_star, jump_rate=spec.jump_rate / tilt,
                          jump_mean=spec.jump_mean / tilt)
    raise UnsupportedError(f"the tilted law of '{spec.kind}' with kappa > 0 is outside the catalog")


def expected_functional(spec: ProcessSpec) -> Optional[float]:
    """
    E[∫₀^∞ exp(−X_t) dt] for the process X the spec describes (V itself, Z for
    dual_of, Y for poisson_multiple). None when the mean is infinite or the
    needed exponential moment is outside the catalog.
    """
    if isinstance(spec, PoissonMultiple):
        return 1.0 / (spec.rate * -math.expm1(-spec.alpha_jump))
    if isinstance(spec, DualOf):
        # E[exp(−Z_t)] = exp(tΨ_V(1))
        exponent = float(_psi_raw(spec.inner, 1.0))
    else:
        if isinstance(spec, StableSN) and spec.alpha == 2.0:
            spec = _as_brownian(spec)
        if isinstance(spec, BrownianDrift):
            exponent = 0.5 * spec.q + spec.gamma
        elif isinstance(spec, BVDriftCPP):
            if spec.jump_rate > 0 and spec.jump_mean >= 1.0:
                return None
            exponent = float(_psi_raw(spec, -1.0))
        else:
            return None
    return -1.0 / exponent if exponent < 0 else None


# Module-level operations on a spec

def psi(spec: ProcessSpec, lam: ArrayLike) -> ArrayLike:
    return get_model(spec).psi(lam)


def psi_prime(spec: ProcessSpec, lam: ArrayLike) -> ArrayLike:
    return get_model(spec).psi_prime(lam)


def exponent_summary(spec: ProcessSpec) -> ExponentSummary:
    return get_model(spec).exponent_summary()


def psi_conditioned(spec: ProcessSpec, lam: ArrayLike) -> ArrayLike:
    return get_model(spec).psi_conditioned(lam)


def inverse_exponent(spec: ProcessSpec, x: float) -> float:
    return get_model(spec).inverse_exponent(x)


def phi_v(spec: ProcessSpec, x: float) -> float:
    return get_model(spec).phi_v(x)


def scale_w(spec: ProcessSpec, x: float, method: ScaleMethod = ScaleMethod.AUTO) -> float:
    return get_model(spec).scale_w(x, method)


def scale_w_conditioned(spec: ProcessSpec, x: float,
                        method: ScaleMethod = ScaleMethod.AUTO) -> float:
    return get_model(spec).scale_w_conditioned(x, method)


def ruin_probability_conditioned(spec: ProcessSpec, x: float) -> float:
    return get_model(spec).ruin_probability_conditioned(x)


def first_passage_prob(spec: ProcessSpec, x: float, y: float) -> float:
    return get_model(spec).first_passage_prob(x, y)


# Brownian reference transforms

def brownian_laplace_ref(kappa: float, lam: float) -> float:
    """
    E[exp(−λ I(W_κ↑))] for Brownian motion with drift κ/2 conditioned to stay positive,
    summed from its power series.
    """
    if kappa < 0 or lam < 0:
        raise DomainError(f"brownian_laplace_ref needs kappa, lambda >= 0, got {kappa}, {lam}")
    if lam == 0:
        return 1.0
    term = 1.0 / special.gamma(1.0 + kappa)
    total = term
    j = 0
    while term >= _SERIES_RTOL * total:
        term *= 2.0 * lam / ((j + 1.0) * (j + 1.0 + kappa))
        total += term
        j += 1
        if j > 100_000:
            raise ConvergenceError("Brownian Laplace series did not settle",
                                   diagnostics={"kappa": kappa, "lambda": lam})
    return float(1.0 / (special.gamma(1.0 + kappa) * total))


def brownian_laplace_bessel(kappa: float, lam: float) -> float:
    """Same transform in its modified-Bessel form (√(2λ))^κ / (Γ(1+κ) I_κ(2√(2λ)))"""
    if kappa < 0 or lam < 0:
        raise DomainError(f"brownian_laplace_bessel needs kappa, lambda >= 0, got {kappa}, {lam}")
    if lam == 0:
        return 1.0
    root = math.sqrt(2.0 * lam)
    z = 2.0 * root
    log_value = (kappa * math.log(root) - special.gammaln(1.0 + kappa)
                 - math.log(special.ive(kappa, z)) - z)
    return float(math.exp(log_value))


def brownian_right_tail_rate(kappa: float) -> float:
    """
    Exponential rate of the right tail of I(W_κ↑): j²_{κ,1}/8 with j_{κ,1} the
    first positive zero of the Bessel function J_κ.
    """
    if kappa < 0:
        raise DomainError(f"brownian_right_tail_rate needs kappa >= 0, got {kappa}")
    # √((ν+1)(ν+5)) is a lower bound for the first zero
    lo = 0.99 * math.sqrt((kappa + 1.0) * (kappa + 5.0))
    hi = lo
    while special.jv(kappa, hi) > 0:
        lo = hi
        hi += 0.1
    zero = optimize.brentq(lambda r: special.jv(kappa, r), lo, hi, xtol=1e-14, rtol=1e-14)
    return float(zero * zero / 8.0)


def brownian_exponential_moment_ref(kappa: float, s: float) -> float:
    """E[exp(s I(W_κ↑))]; infinite from the right-tail rate on"""
    if kappa < 0 or s < 0:
        raise DomainError(f"brownian_exponential_moment_ref needs kappa, s >= 0, got {kappa}, {s}")
    if s == 0:
        return 1.0
    if s >= brownian_right_tail_rate(kappa):
        return math.inf
    root = math.sqrt(2.0 * s)
    return float(root ** kappa / (special.gamma(1.0 + kappa) * special.jv(kappa, 2.0 * root)))


def brownian_left_tail_log_ref(x: float, q: float = 1.0) -> float:
    """Leading order of log P(I ≤ x) as x → 0 for a Brownian V with variance q: −2/(qx)"""
    if x <= 0:
        raise DomainError(f"brownian_left_tail_log_ref needs x > 0, got {x}")
    return -2.0 / (q * x)


def dufresne_cdf(q: float, mu: float, x: ArrayLike) -> ArrayLike:
    """
    CDF of ∫₀^∞ exp(−(√q·B_t + μt)) dt, which has the law of 2/(q·G) with
    G ~ Gamma(2μ/q).
    """
    if q <= 0 or mu <= 0:
        raise DomainError(f"dufresne_cdf needs q > 0 and mu > 0, got q={q}, mu={mu}")
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        values = np.where(x > 0, special.gammaincc(2.0 * mu / q, 2.0 / (q * np.maximum(x, _TINY))), 0.0)
    return _scalar_or_array(values)


# Poisson functional reference transforms

def poisson_log_laplace_series(alpha: float, p: float, lam: float) -> Tuple[float, float]:
    """
    Σ_{k≥0} log(1 + (λ/p)e^{−αk}) and an error estimate covering the truncated tail.

    Returns:
        (value, error_estimate)
    """
    if alpha <= 0 or p <= 0:
        raise DomainError(f"poisson_log_laplace_series needs alpha, p > 0, got {alpha}, {p}")
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    if lam == 0:
        return 0.0, 0.0
    u = lam / p
    # last index whose term can exceed 1e-16 relative to a sum of order one
    last = int(math.ceil((math.log(u) - math.log(_SERIES_RTOL)) / alpha)) if u > _SERIES_RTOL else 0
    k = np.arange(max(last, 0) + 1, dtype=float)
    terms = np.log1p(u * np.exp(-alpha * k))
    value = float(math.fsum(terms))
    tail = u * math.exp(-alpha * (k[-1] + 1.0)) / -math.expm1(-alpha)
    rounding = np.finfo(float).eps * value * len(terms)
    return value, float(tail + rounding)


def poisson_log_laplace_ref(alpha: float, p: float, lam: float) -> float:
    """−log E[exp(−λ I)] for the exponential functional of α·N, N Poisson of rate p"""
    return poisson_log_laplace_series(alpha, p, lam)[0]


def poisson_log_laplace_bracket(alpha: float, p: float, lam: float) -> Tuple[float, float]:
    """
    Integral bracket around the series: (J, J + log(1 + λ/p)) with
    J = −Li₂(−λ/p)/α.
    """
    if alpha <= 0 or p <= 0 or lam < 0:
        raise DomainError("poisson_log_laplace_bracket needs alpha, p > 0 and lambda >= 0")
    u = lam / p
    lower = -float(special.spence(1.0 + u)) / alpha
    return lower, lower + math.log1p(u)
