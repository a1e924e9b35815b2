"""
Statistical machinery and tail predictors.

Empirical CDFs with DKW bands, Laplace transforms, KS tests and right-tail
fits on the sample side; closed-form left-tail and Laplace asymptotics on the
analytic side; IdentityChecker turns both into CheckReports.
"""

import csv
import logging
import math
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, optimize, stats

from config import Config
from exceptions import DataError, DomainError, PrecisionError, UnsupportedError
from models import (
    Anchor,
    BVDriftCPP,
    BrownianDrift,
    CheckReport,
    EcdfBand,
    ProcessSpec,
    Regime,
    StableSN,
)
from .levy_model import get_model, poisson_log_laplace_bracket, poisson_log_laplace_ref, poisson_log_laplace_series

logger = logging.getLogger(__name__)

ArrayLike = Union[Sequence[float], np.ndarray]


def _as_samples(samples: ArrayLike, minimum: int, label: str) -> np.ndarray:
    values = np.asarray(samples, dtype=float)
    if values.ndim != 1:
        raise DataError(f"{label} needs a one-dimensional sample array")
    if values.size < minimum:
        raise DataError(f"{label} needs at least {minimum} samples, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise DataError(f"{label} got non-finite samples")
    return values


# Empirical laws

def empirical_cdf(samples: ArrayLike, delta: Optional[float] = None) -> EcdfBand:
    """ECDF of the samples with a DKW band at confidence 1 − δ"""
    values = _as_samples(samples, Config.MIN_CDF_SAMPLES, "empirical_cdf")
    return EcdfBand(sorted_values=np.sort(values), n=int(values.size),
                    delta=delta if delta is not None else Config.DKW_DELTA)


def empirical_laplace(samples: ArrayLike, lam: float) -> Tuple[float, float]:
    """
    Sample mean of exp(−λX) and its standard error.

    Returns:
        (mean, stderr)
    """
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    values = _as_samples(samples, Config.MIN_CDF_SAMPLES, "empirical_laplace")
    draws = np.exp(-lam * values)
    return float(np.mean(draws)), float(np.std(draws, ddof=1) / math.sqrt(values.size))


def ks_two_sample(a: ArrayLike, b: ArrayLike) -> Tuple[float, float]:
    """Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value"""
    first = _as_samples(a, 2, "ks_two_sample")
    second = _as_samples(b, 2, "ks_two_sample")
    result = stats.ks_2samp(first, second, method="asymp")
    return float(result.statistic), float(result.pvalue)


def fit_exp_rate(samples: ArrayLike, x_grid: ArrayLike) -> Tuple[float, float]:
    """
    Least-squares fit of log P(X > x) = a − rate·x over the grid.

    Returns:
        (rate, r_squared)
    """
    values = _as_samples(samples, Config.MIN_CDF_SAMPLES, "fit_exp_rate")
    grid = np.asarray(x_grid, dtype=float)
    if grid.size < 2:
        raise DataError("fit_exp_rate needs at least two grid points")
    exceedances = np.array([np.count_nonzero(values > x) for x in grid])
    for x, count in zip(grid, exceedances):
        if count < Config.MIN_TAIL_EXCEEDANCES:
            raise DataError(f"only {count} samples exceed x={x:g}; "
                            f"need {Config.MIN_TAIL_EXCEEDANCES} per grid point")
    fit = stats.linregress(grid, np.log(exceedances / values.size))
    return float(-fit.slope), float(fit.rvalue ** 2)


# Left-tail predictors

def _regular_variation_constants(spec: ProcessSpec) -> Tuple[float, float, float]:
    """(C, c, α) with cλ^α ≤ Ψ(λ) ≤ Cλ^α asymptotically, for catalog specs that have them"""
    if isinstance(spec, BrownianDrift):
        return 0.5 * spec.q, 0.5 * spec.q, 2.0
    if isinstance(spec, StableSN):
        return spec.c, spec.c, spec.alpha
    if isinstance(spec, BVDriftCPP):
        return spec.gamma_star, spec.gamma_star, 1.0
    raise UnsupportedError(f"no power-law constants for process kind '{spec.kind}'")


def _regular_index(spec: ProcessSpec) -> float:
    if isinstance(spec, BVDriftCPP):
        raise UnsupportedError("bounded-variation V has support [1/gamma_star, inf); use the support check")
    _, _, alpha = _regular_variation_constants(spec)
    return alpha


def predict_left_tail_log(spec: ProcessSpec, x: float) -> float:
    """log P(I(V↑) ≤ x) to leading order as x → 0: −(α−1)·φ_V(1/x)"""
    if x <= 0:
        raise DomainError(f"predict_left_tail_log needs x > 0, got {x}")
    alpha = _regular_index(spec)
    return -(alpha - 1.0) * get_model(spec).phi_v(1.0 / x)


def left_tail_bounds(spec: ProcessSpec, x: float, delta_upper: float = 0.9,
                     delta_lower: float = 1.1) -> Tuple[float, float]:
    """
    Logs of the power-law bounds on P(I(V↑) ≤ x) for small x.

    Args:
        spec: brownian_drift or stable_sn
        x: left-tail level
        delta_upper: slack of the upper bound, in (0, 1)
        delta_lower: slack of the lower bound, > 1

    Returns:
        (log_lower, log_upper)
    """
    if x <= 0:
        raise DomainError(f"left_tail_bounds needs x > 0, got {x}")
    if not 0 < delta_upper < 1 or delta_lower <= 1:
        raise DomainError("left_tail_bounds needs delta_upper in (0, 1) and delta_lower > 1")
    alpha = _regular_index(spec)
    big_c, small_c, _ = _regular_variation_constants(spec)
    power = 1.0 / (alpha - 1.0)
    log_upper = -delta_upper * (alpha - 1.0) / (big_c * x) ** power
    log_lower = -delta_lower * alpha ** (alpha * power) / (small_c * x) ** power
    return log_lower, log_upper


def _phi_integral(spec: ProcessSpec, upper: float) -> float:
    """∫ φ_V(r)/r dr from Ψ'(κ) to upper"""
    model = get_model(spec)
    lower = model.exponent_summary().psi_prime_at_kappa
    if upper <= lower:
        return 0.0
    result = integrate.quad(lambda r: model.phi_v(r) / r, lower, upper,
                            epsabs=Config.QUAD_EPSABS, epsrel=Config.QUAD_EPSREL,
                            limit=200, full_output=1)
    value, error = result[0], result[1]
    if len(result) > 3 and error > max(Config.QUAD_EPSABS, Config.QUAD_EPSREL * abs(value)):
        logger.error(f"❌ Quadrature of phi_V(r)/r up to {upper:g} stopped at error {error:.2e}")
        raise PrecisionError(f"quadrature of phi_V(r)/r up to {upper:g} missed its tolerance", error)
    return float(value)


def _phi_derivative(spec: ProcessSpec, r: float) -> float:
    model = get_model(spec)
    h = Config.DIFF_STEP_REL * r
    slope = (model.phi_v(r + h) - model.phi_v(r - h)) / (2.0 * h)
    if slope <= 0:
        raise DomainError(f"phi_V is flat at r={r:g}; the level x is outside the small-x regime")
    return slope


def tail_exponent_bounds(spec: ProcessSpec, x: float, delta: float) -> Tuple[float, float]:
    """
    Logs of the two-sided left-tail bound for non-oscillating V of unbounded
    variation, with the unknown multiplicative constants set to 1:

        log((δ−1)·√φ'(δ/x)) − ∫ φ(r)/r dr up to δ/x
        −log((δ−1)x) + log √φ'(1/(δx)) − ∫ φ(r)/r dr up to 1/(δx)

    Returns:
        (lower_log, upper_log)
    """
    if x <= 0 or delta <= 1:
        raise DomainError(f"tail_exponent_bounds needs x > 0 and delta > 1, got x={x}, delta={delta}")
    if not (isinstance(spec, BrownianDrift) or isinstance(spec, StableSN)):
        raise UnsupportedError(f"tail_exponent_bounds needs unbounded variation, got '{spec.kind}'")
    if get_model(spec).exponent_summary().regime == Regime.OSCILLATES:
        raise UnsupportedError("tail_exponent_bounds excludes oscillating V")

    near, far = 1.0 / (delta * x), delta / x
    lower_log = (math.log(delta - 1.0) + 0.5 * math.log(_phi_derivative(spec, far))
                 - _phi_integral(spec, far))
    upper_log = (-math.log((delta - 1.0) * x) + 0.5 * math.log(_phi_derivative(spec, near))
                 - _phi_integral(spec, near))
    return lower_log, upper_log


def predict_poisson_tail(alpha: float, x: float) -> float:
    """−log P(I(αN) ≤ x) to leading order as x → 0: (log x)²/(2α)"""
    if alpha <= 0 or not 0 < x < 1:
        raise DomainError(f"predict_poisson_tail needs alpha > 0 and x in (0, 1), got {alpha}, {x}")
    return math.log(x) ** 2 / (2.0 * alpha)


def poisson_tail_chernoff_log(alpha: float, p: float, x: float) -> float:
    """
    Chernoff bound on log P(I(αN) ≤ x): the infimum over λ > 0 of λx − L(λ),
    L the log-Laplace transform. Never above 0.
    """
    if alpha <= 0 or p <= 0 or x <= 0:
        raise DomainError(f"poisson_tail_chernoff_log needs alpha, p, x > 0, got {alpha}, {p}, {x}")

    def exponent(t: float) -> float:
        lam = math.exp(t)
        return lam * x - poisson_log_laplace_ref(alpha, p, lam)

    # λx − L(λ) is convex in λ, hence unimodal in log λ
    result = optimize.minimize_scalar(exponent, bounds=(math.log(1e-3), math.log(1e12)), method="bounded",
                                      options={"xatol": 1e-10})
    return min(0.0, float(result.fun))


def jump_tail_lower_bounds(pi_bar: Callable[[float], float], x: float, c: float) -> Tuple[float, float]:
    """
    Lower bounds on P(I(Y) ≤ x) for Y with positive jumps, unknown constant set to 1.

    Args:
        pi_bar: tail x ↦ π((x, ∞)) of the positive Lévy measure
        x: level in (0, 1)
        c: any constant above 1/(2S), S the top of the jump support

    Returns:
        (x·π̄(log(1/x)), exp(−c·(log x)²))
    """
    if not 0 < x < 1:
        raise DomainError(f"jump_tail_lower_bounds needs x in (0, 1), got {x}")
    log_x = math.log(x)
    return x * float(pi_bar(-log_x)), math.exp(-c * log_x * log_x)


# Laplace-transform predictors

def predict_log_laplace(spec: ProcessSpec, lam: float) -> float:
    """−log E[exp(−λ I(V↑))] to leading order as λ → ∞: α·Φ♯(λ)"""
    alpha = _regular_index(spec)
    return alpha * get_model(spec).inverse_exponent(lam)


def log_laplace_power_bounds(spec: ProcessSpec, lam: float) -> Tuple[float, float]:
    """Power-law lower and upper orders α/C^{1/α}·λ^{1/α} and α/c^{1/α}·λ^{1/α}"""
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    big_c, small_c, alpha = _regular_variation_constants(spec)
    scale = lam ** (1.0 / alpha)
    return alpha * scale / big_c ** (1.0 / alpha), alpha * scale / small_c ** (1.0 / alpha)


def affine_coefficient_log_laplace_bounds(spec: ProcessSpec, y: float, lam: float) -> Tuple[float, float]:
    """Leading-order bracket (yΦ♯(e^{−y}λ), yΦ♯(λ)) of −log E[exp(−λA^y)]"""
    if y <= 0 or lam < 0:
        raise DomainError(f"affine bounds need y > 0 and lambda >= 0, got y={y}, lambda={lam}")
    model = get_model(spec)
    return y * model.inverse_exponent(math.exp(-y) * lam), y * model.inverse_exponent(lam)


# Tail curves

def write_tail_curve_csv(path: Union[str, Path], x_grid: ArrayLike, band: Optional[EcdfBand] = None,
                         prediction: Optional[ArrayLike] = None) -> Path:
    """Write `x,ecdf,dkw_lo,dkw_hi,prediction`; missing columns stay empty"""
    path = Path(path)
    grid = np.asarray(x_grid, dtype=float)
    predicted = None if prediction is None else np.asarray(prediction, dtype=float)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["x", "ecdf", "dkw_lo", "dkw_hi", "prediction"])
        for i, x in enumerate(grid):
            row = [repr(float(x))]
            if band is not None:
                row += [repr(float(band.cdf(x))), repr(float(band.lower(x))), repr(float(band.upper(x)))]
            else:
                row += ["", "", ""]
            row.append("" if predicted is None else repr(float(predicted[i])))
            writer.writerow(row)
    logger.info(f"✅ Tail curve written to {path}")
    return path


class IdentityChecker:
    """Turns identities and asymptotics into pass/fail CheckReports"""

    def __init__(self, min_samples: Optional[int] = None, ks_threshold: Optional[float] = None,
                 dkw_delta: Optional[float] = None):
        self.min_samples = min_samples if min_samples is not None else Config.get_min_check_samples()
        self.ks_threshold = ks_threshold if ks_threshold is not None else Config.KS_PVALUE_THRESHOLD
        self.dkw_delta = dkw_delta if dkw_delta is not None else Config.DKW_DELTA
        self._kinds: Dict[str, Callable[..., CheckReport]] = {
            "affine": self.affine,
            "convolution": self.convolution,
            "sandwich": self.sandwich,
            "stochastic_order": self.stochastic_order,
            "subadditivity": self.subadditivity,
            "log_concavity": self.log_concavity,
            "moments": self.moments,
            "support": self.support,
            "laplace": self.laplace,
            "cdf_oracle": self.cdf_oracle,
            "exit_frequency": self.exit_frequency,
            "exponential_moment_stability": self.exponential_moment_stability,
            "tail_trend": self.tail_trend,
            "tail_window": self.tail_window,
            "chernoff_bound": self.chernoff_bound,
            "poisson_asymptotic": self.poisson_asymptotic,
            "tail_rate": self.tail_rate,
            "tail_linearity": self.tail_linearity,
        }

    @property
    def kinds(self) -> Tuple[str, ...]:
        return tuple(self._kinds)

    def check_identity(self, kind: str, **inputs) -> CheckReport:
        """Dispatch to the check named `kind`"""
        if kind not in self._kinds:
            raise DomainError(f"unknown check kind '{kind}'")
        report = self._kinds[kind](**inputs)
        status = "✅" if report.passed else ("⚠️" if report.advisory else "❌")
        logger.info(f"{status} {report.name}: {report.statistic:.6g} {report.comparison} {report.threshold:.6g}")
        return report

    def _checked(self, samples: ArrayLike, label: str) -> np.ndarray:
        return _as_samples(samples, self.min_samples, label)

    # Distributional identities

    def _ks(self, name: str, left: ArrayLike, right: ArrayLike, provenance: Anchor) -> CheckReport:
        a = self._checked(left, name)
        b = self._checked(right, name)
        statistic, p_value = ks_two_sample(a, b)
        return CheckReport.evaluate(name, p_value, self.ks_threshold, ">", provenance=provenance,
                                    metadata={"ks_statistic": statistic, "n_left": int(a.size),
                                              "n_right": int(b.size)})

    def affine(self, reconstructed: ArrayLike, direct: ArrayLike, y: Optional[float] = None) -> CheckReport:
        report = self._ks("affine", reconstructed, direct, Anchor.RANDOM_AFFINE_EQUATION)
        if y is not None:
            report.metadata["y"] = y
        return report

    def convolution(self, summed: ArrayLike, sharp: ArrayLike) -> CheckReport:
        return self._ks("convolution", summed, sharp, Anchor.LAST_PASSAGE_SPLIT)

    def _dominance(self, name: str, smaller: ArrayLike, larger: ArrayLike, x_grid: ArrayLike,
                   provenance: Anchor) -> CheckReport:
        """sup over the grid of F_smaller − F_larger − (ε_smaller + ε_larger), must be ≤ 0"""
        low = empirical_cdf(self._checked(smaller, name), self.dkw_delta)
        high = empirical_cdf(self._checked(larger, name), self.dkw_delta)
        grid = np.asarray(x_grid, dtype=float)
        gaps = np.asarray(low.cdf(grid)) - np.asarray(high.cdf(grid))
        worst = int(np.argmax(gaps))
        statistic = float(gaps[worst]) - (low.epsilon + high.epsilon)
        return CheckReport.evaluate(name, statistic, 0.0, "<=", provenance=provenance,
                                    metadata={"worst_x": float(grid[worst]), "max_gap": float(gaps[worst]),
                                              "dkw_allowance": low.epsilon + high.epsilon,
                                              "grid_points": int(grid.size)})

    def sandwich(self, plain: ArrayLike, conditioned: ArrayLike, x_grid: ArrayLike) -> CheckReport:
        """P(I(V) ≤ x) ≤ P(I(V↑) ≤ x) for V drifting to +∞"""
        return self._dominance("sandwich", plain, conditioned, x_grid, Anchor.LEFT_TAIL_COMPARISON)

    def stochastic_order(self, plain: ArrayLike, conditioned: ArrayLike, x_grid: ArrayLike) -> CheckReport:
        """I(Z) is stochastically greater than I(Z↑)"""
        return self._dominance("stochastic_order", plain, conditioned, x_grid, Anchor.SPECTRALLY_POSITIVE_ORDER)

    def subadditivity(self, samples: ArrayLike, x_grid: ArrayLike, y_grid: ArrayLike) -> CheckReport:
        """x ↦ P(S < x) is sub-additive, up to three binomial standard errors"""
        values = np.sort(self._checked(samples, "subadditivity"))
        n = values.size

        def strict_cdf(x):
            return np.searchsorted(values, np.asarray(x, dtype=float), side="left") / n

        xs, ys = np.meshgrid(np.asarray(x_grid, dtype=float), np.asarray(y_grid, dtype=float))
        f_sum, f_x, f_y = strict_cdf(xs + ys), strict_cdf(xs), strict_cdf(ys)
        sigma = np.sqrt((f_sum * (1 - f_sum) + f_x * (1 - f_x) + f_y * (1 - f_y)) / n)
        excess = f_sum - f_x - f_y - 3.0 * sigma
        return CheckReport.evaluate("subadditivity", float(np.max(excess)), 0.0, "<=",
                                    provenance=Anchor.SUBADDITIVITY,
                                    metadata={"grid_points": int(excess.size), "n": int(n)})

    def log_concavity(self, samples: ArrayLike, low_quantile: float = 0.05,
                      high_quantile: float = 0.95, points: int = 19) -> CheckReport:
        """Second differences of log F̂ on a uniform grid; advisory only"""
        band = empirical_cdf(self._checked(samples, "log_concavity"), self.dkw_delta)
        lo, hi = np.quantile(band.sorted_values, [low_quantile, high_quantile])
        grid = np.linspace(lo, hi, points)
        cdf = np.asarray(band.cdf(grid))
        log_cdf = np.log(cdf)
        log_stderr = np.sqrt((1.0 - cdf) / (band.n * cdf))
        second = log_cdf[:-2] - 2.0 * log_cdf[1:-1] + log_cdf[2:]
        noise = np.sqrt(log_stderr[:-2] ** 2 + 4.0 * log_stderr[1:-1] ** 2 + log_stderr[2:] ** 2)
        excess = second - 3.0 * noise
        return CheckReport.evaluate("log_concavity", float(np.max(excess)), 0.0, "<=", advisory=True,
                                    provenance=Anchor.LOG_CONCAVITY,
                                    metadata={"grid": [float(lo), float(hi)], "points": points})

    def moments(self, samples: ArrayLike, orders: Sequence[int] = (2, 3, 4)) -> CheckReport:
        """m̂_k ≤ k!·m̂₁^k·(1 + 5·relative MC error of m̂_k)"""
        values = self._checked(samples, "moments")
        first = float(np.mean(values))
        ratios = {}
        for k in orders:
            powers = values ** k
            moment = float(np.mean(powers))
            relative = float(np.std(powers, ddof=1) / (math.sqrt(values.size) * moment))
            ratios[k] = moment / (math.factorial(k) * first ** k * (1.0 + 5.0 * relative))
        return CheckReport.evaluate("moments", max(ratios.values()), 1.0, "<=",
                                    provenance=Anchor.MOMENT_BOUND,
                                    metadata={"mean": first, "ratios": {str(k): r for k, r in ratios.items()}})

    def support(self, samples: ArrayLike, gamma_star: float, margin: float = 0.01) -> CheckReport:
        """No sample below (1 − margin)/γ*: the law of I(V↑) lives on [1/γ*, ∞)"""
        values = self._checked(samples, "support")
        edge = 1.0 / gamma_star
        minimum = float(np.min(values))
        return CheckReport.evaluate("support", minimum, (1.0 - margin) * edge, ">",
                                    provenance=Anchor.BOUNDED_VARIATION_SUPPORT,
                                    metadata={"edge": edge, "below_edge": int(np.count_nonzero(values < edge)),
                                              "n": int(values.size)})

    # Oracles

    def laplace(self, samples: ArrayLike, lam: float, reference: float, allowance: float = 0.0,
                name: str = "laplace", provenance: Anchor = Anchor.BROWNIAN_LAPLACE) -> CheckReport:
        """|empirical E[exp(−λX)] − reference| ≤ 3·stderr + allowance"""
        mean, stderr = empirical_laplace(samples, lam)
        return CheckReport.evaluate(name, abs(mean - reference), 3.0 * stderr + allowance, "<=",
                                    provenance=provenance,
                                    metadata={"lambda": lam, "empirical": mean, "reference": reference,
                                              "stderr": stderr})

    def cdf_oracle(self, samples: ArrayLike, oracle: Callable[[np.ndarray], np.ndarray], x_grid: ArrayLike,
                   mode: str = "two_sided", name: str = "cdf_oracle",
                   provenance: Anchor = Anchor.DUFRESNE_IDENTITY) -> CheckReport:
        """
        ECDF against an exact CDF inside the DKW band. mode 'two_sided' bounds
        |F̂ − F|; mode 'dominates' only requires F̂ ≥ F − ε.
        """
        if mode not in ("two_sided", "dominates"):
            raise DomainError(f"unknown cdf_oracle mode '{mode}'")
        band = empirical_cdf(self._checked(samples, name), self.dkw_delta)
        grid = np.asarray(x_grid, dtype=float)
        exact = np.asarray(oracle(grid), dtype=float)
        gaps = exact - np.asarray(band.cdf(grid))
        if mode == "two_sided":
            gaps = np.abs(gaps)
        worst = int(np.argmax(gaps))
        return CheckReport.evaluate(name, float(gaps[worst]), band.epsilon, "<=", provenance=provenance,
                                    metadata={"mode": mode, "worst_x": float(grid[worst]), "n": band.n})

    def exit_frequency(self, hits: int, trials: int, probability: float,
                       name: str = "exit_frequency") -> CheckReport:
        """Binomial frequency within four standard deviations of the exact probability"""
        if trials < 1 or not 0 < probability < 1:
            raise DataError(f"exit_frequency needs trials >= 1 and probability in (0, 1), got {trials}, {probability}")
        sigma = math.sqrt(probability * (1.0 - probability) / trials)
        return CheckReport.evaluate(name, abs(hits / trials - probability) / sigma, 4.0, "<=",
                                    provenance=Anchor.TWO_SIDED_EXIT,
                                    metadata={"hits": hits, "trials": trials, "probability": probability})

    def exponential_moment_stability(self, samples: ArrayLike, s: float, n_small: int,
                                     tolerance: float = 0.05) -> CheckReport:
        """E[exp(sX)] on the first n_small samples and on all of them differ by less than `tolerance`"""
        values = self._checked(samples, "exponential_moment_stability")
        if not 2 <= n_small <= values.size:
            raise DataError(f"n_small must lie in [2, {values.size}], got {n_small}")
        small = float(np.mean(np.exp(s * values[:n_small])))
        full = float(np.mean(np.exp(s * values)))
        if not (math.isfinite(small) and math.isfinite(full)):
            statistic = math.inf
        else:
            statistic = abs(small / full - 1.0)
        return CheckReport.evaluate("exponential_moment_stability", statistic, tolerance, "<=",
                                    provenance=Anchor.EXPONENTIAL_MOMENTS,
                                    metadata={"s": s, "n_small": n_small, "n": int(values.size),
                                              "small": small, "full": full})

    # Asymptotic trends

    def tail_trend(self, values: Sequence[float], stderrs: Sequence[float], name: str = "tail_trend",
                   provenance: Anchor = Anchor.LEFT_TAIL) -> CheckReport:
        """Values in grid order are nondecreasing up to three combined standard errors"""
        v = np.asarray(values, dtype=float)
        s = np.asarray(stderrs, dtype=float)
        if v.size < 2 or v.size != s.size:
            raise DataError("tail_trend needs matching value and stderr sequences of length >= 2")
        drops = v[:-1] - v[1:] - 3.0 * np.hypot(s[:-1], s[1:])
        return CheckReport.evaluate(name, float(np.max(drops)), 0.0, "<=", provenance=provenance,
                                    metadata={"values": v.tolist(), "stderrs": s.tolist()})

    def tail_window(self, value: float, center: float, half_width: float, name: str = "tail_window",
                    provenance: Anchor = Anchor.LEFT_TAIL) -> CheckReport:
        return CheckReport.evaluate(name, abs(value - center), half_width, "<=", provenance=provenance,
                                    metadata={"value": value, "center": center})

    def chernoff_bound(self, samples: ArrayLike, x_grid: ArrayLike, alpha: float, p: float,
                       name: str = "poisson_chernoff") -> CheckReport:
        """Lower 3σ limit of P̂(I(αN) ≤ x) stays under the Chernoff bound at every x"""
        values = self._checked(samples, "chernoff_bound")
        n = values.size
        excess, bounds = [], []
        for x in np.asarray(x_grid, dtype=float):
            prob = float(np.count_nonzero(values <= x)) / n
            bound = math.exp(poisson_tail_chernoff_log(alpha, p, float(x)))
            bounds.append(bound)
            excess.append(prob - 3.0 * math.sqrt(prob * (1.0 - prob) / n) - bound)
        return CheckReport.evaluate(name, max(excess), 0.0, "<=", provenance=Anchor.POISSON_LEFT_TAIL,
                                    metadata={"x_grid": np.asarray(x_grid, dtype=float).tolist(),
                                              "bounds": bounds})

    def poisson_asymptotic(self, alpha: float, p: float, lam_grid: Sequence[float],
                           aspect: str = "bracket") -> CheckReport:
        """
        Checks of the log-Laplace series of I(αN):
        'bracket'    J ≤ series ≤ J + log(1 + λ/p)
        'refinement' |series − J − ½·log(1 + λ/p)| ≤ α/6
        'trend'      series/((log λ)²/(2α)) decreases along the grid
        """
        grid = [float(lam) for lam in lam_grid]
        if not grid:
            raise DataError("poisson_asymptotic needs a nonempty lambda grid")
        series = [poisson_log_laplace_series(alpha, p, lam) for lam in grid]
        brackets = [poisson_log_laplace_bracket(alpha, p, lam) for lam in grid]
        provenance = Anchor.POISSON_LOG_LAPLACE
        if aspect == "bracket":
            excess = max(max(low - value, value - high) - error
                         for (value, error), (low, high) in zip(series, brackets))
            return CheckReport.evaluate("poisson_bracket", excess, 0.0, "<=", provenance=provenance,
                                        metadata={"lambdas": grid})
        if aspect == "refinement":
            gaps = [abs(value - low - 0.5 * math.log1p(lam / p))
                    for (value, _), (low, _), lam in zip(series, brackets, grid)]
            return CheckReport.evaluate("poisson_refinement", max(gaps), alpha / 6.0, "<=",
                                        provenance=provenance, metadata={"lambdas": grid, "gaps": gaps})
        if aspect == "trend":
            if len(grid) < 2 or min(grid) <= 1.0:
                raise DataError("poisson trend needs at least two lambdas above 1")
            ratios = [value / (math.log(lam) ** 2 / (2.0 * alpha)) for (value, _), lam in zip(series, grid)]
            increase = max(b - a for a, b in zip(ratios, ratios[1:]))
            return CheckReport.evaluate("poisson_ratio_trend", increase, 0.0, "<", provenance=provenance,
                                        metadata={"lambdas": grid, "ratios": ratios})
        raise DomainError(f"unknown poisson_asymptotic aspect '{aspect}'")

    def tail_rate(self, samples: ArrayLike, x_grid: ArrayLike, low: float, high: float,
                  name: str = "tail_rate",
                  provenance: Anchor = Anchor.RIGHT_TAIL) -> CheckReport:
        """Fitted right-tail rate inside [low, high]"""
        rate, r_squared = fit_exp_rate(samples, x_grid)
        center, half = 0.5 * (low + high), 0.5 * (high - low)
        return CheckReport.evaluate(name, abs(rate - center), half, "<=", provenance=provenance,
                                    metadata={"rate": rate, "r_squared": r_squared, "window": [low, high]})

    def tail_linearity(self, samples: ArrayLike, x_grid: ArrayLike, r2_min: float = 0.98) -> CheckReport:
        rate, r_squared = fit_exp_rate(samples, x_grid)
        return CheckReport.evaluate("tail_linearity", r_squared, r2_min, ">=",
                                    provenance=Anchor.RIGHT_TAIL,
                                    metadata={"rate": rate})


def check_identity(kind: str, **inputs) -> CheckReport:
    return IdentityChecker().check_identity(kind, **inputs)
