"""
Named verification suites: each draws its samples from fixed stream labels,
runs its checks and aggregates them into a Report.
"""

import logging
import math
import time
from typing import Callable, Dict, List, Optional

import numpy as np

from config import Config
from exceptions import DataError, DomainError, LevyToolkitError
from models import (
    Anchor,
    BVDriftCPP,
    BrownianDrift,
    CheckReport,
    DualOf,
    FunctionalVariant,
    PoissonMultiple,
    ProcessSpec,
    Report,
    RngStream,
    RunConfig,
    StableSN,
    StopReason,
    TwoSidedExit,
    VariantTag,
)
from .analysis import IdentityChecker, left_tail_bounds, predict_left_tail_log, predict_poisson_tail
from .expfunc import (
    poisson_default_terms,
    poisson_series_bias,
    sample_affine_batch,
    sample_batch,
    sample_stopped_subordinator,
    stream_for,
    variant_bias_bound,
)
from .levy_model import (
    ScaleMethod,
    brownian_exponential_moment_ref,
    brownian_laplace_bessel,
    brownian_laplace_ref,
    brownian_right_tail_rate,
    dufresne_cdf,
    get_model,
    poisson_log_laplace_ref,
)
from .path_sim import PathSimulator, validate_increment_law

logger = logging.getLogger(__name__)

# Canonical processes of the suites
BROWNIAN_KAPPA_1 = BrownianDrift(q=1.0, gamma=0.5)
BROWNIAN_KAPPA_0 = BrownianDrift(q=1.0, gamma=0.0)
BROWNIAN_DRIFT_UP = BrownianDrift(q=1.0, gamma=-0.5)
STABLE_15 = StableSN(c=1.0, alpha=1.5)
BOUNDED_VARIATION = BVDriftCPP(gamma_star=1.0, jump_rate=1.0, jump_mean=1.0)
POISSON_UNIT = PoissonMultiple(alpha_jump=1.0, rate=1.0)
Z_DRIFT_UP = DualOf(inner=BrownianDrift(q=1.0, gamma=0.5))

SUITE_NAMES = (
    "analytics",
    "brownian_laplace",
    "moments",
    "affine",
    "convolution",
    "sandwich",
    "left_tail",
    "right_tail",
    "poisson",
    "zside",
    "bounded_variation",
    "subadditivity",
)

_I_V_UP = FunctionalVariant(tag=VariantTag.I_V_UP)


def first_moment_check(spec: ProcessSpec, samples: np.ndarray, bias: Optional[float]) -> CheckReport:
    """
    Compare the mean of truncated I(V↑) draws with 1/Ψ(κ+1).

    The truncation remainder is added back to the sample mean; what is left is
    Monte Carlo error plus the Euler discretization allowance.
    """
    mean = float(np.mean(samples))
    stderr = float(np.std(samples, ddof=1) / math.sqrt(samples.size))
    expected = 1.0 / get_model(spec).exponent_summary().psi_at_kappa_plus_1
    corrected = mean + (bias or 0.0)
    tolerance = 3.0 * stderr + Config.DISCRETIZATION_ALLOWANCE * expected
    return CheckReport.evaluate("first_moment", abs(corrected - expected), tolerance, "<=",
                                provenance=Anchor.FIRST_MOMENT,
                                metadata={"mean": mean, "corrected_mean": corrected, "expected": expected,
                                          "stderr": stderr, "bias": bias})


class VerificationSuiteRunner:
    """Runs the named suites for one RunConfig"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.overrides = config.overrides
        self.checker = IdentityChecker(ks_threshold=self.overrides.ks_threshold,
                                       dkw_delta=self.overrides.dkw_delta)
        self._suites: Dict[str, Callable[[], List[CheckReport]]] = {
            name: getattr(self, f"_suite_{name}") for name in SUITE_NAMES
        }
        logger.info(f"VerificationSuiteRunner initialized with seed {config.seed} and {config.workers} worker(s)")

    # Parameters with per-suite defaults

    def _n(self, default: int) -> int:
        return self.overrides.n if self.overrides.n is not None else default

    def _n_large(self, default: int) -> int:
        return self.overrides.n_large if self.overrides.n_large is not None else default

    def _y(self, default: Optional[float] = None) -> float:
        if self.overrides.y is not None:
            return self.overrides.y
        return default if default is not None else self.config.y

    @property
    def _dt(self) -> float:
        return self.overrides.dt if self.overrides.dt is not None else self.config.dt

    def _batch(self, spec, variant: FunctionalVariant, y: float, n: int, label: int) -> np.ndarray:
        return sample_batch(spec, variant, y, self._dt, n, self.config.seed, self.config.workers, label)

    # Entry point

    def verify_suite(self, name: str, timing: bool = False) -> Report:
        """
        Run one suite (or all of them) and aggregate its checks.

        Args:
            name: suite name or 'all'
            timing: include wall time in the report

        Returns:
            Report; on a runtime failure the checks completed so far and the error
        """
        if name != "all" and name not in self._suites:
            raise DomainError(f"unknown suite '{name}'; choose one of {', '.join(SUITE_NAMES + ('all',))}")
        names = SUITE_NAMES if name == "all" else (name,)
        started = time.perf_counter()
        checks: List[CheckReport] = []
        error = None
        for suite in names:
            logger.info(f"🔍 Running suite '{suite}'")
            try:
                suite_checks = self._suites[suite]()
            except LevyToolkitError as exc:
                logger.error(f"❌ Suite '{suite}' failed: {exc}")
                error = f"{suite}: {exc}"
                break
            if name == "all":
                for check in suite_checks:
                    check.name = f"{suite}/{check.name}"
            checks.extend(suite_checks)
        wall_time = round(time.perf_counter() - started, 3) if timing else None
        report = Report.from_checks(name, self.config.echo(), checks, wall_time=wall_time, error=error)
        status = "✅" if report.overall_pass else "❌"
        logger.info(f"{status} Suite '{name}': {sum(c.passed for c in checks)}/{len(checks)} checks passed")
        return report

    # Suites

    def _suite_analytics(self) -> List[CheckReport]:
        checks = []
        specs = [BROWNIAN_KAPPA_1, BROWNIAN_KAPPA_0, STABLE_15, BOUNDED_VARIATION,
                 BVDriftCPP(gamma_star=2.0, jump_rate=1.0, jump_mean=1.0)]
        grid = np.logspace(-3, 6, 19)
        worst = 0.0
        for spec in specs:
            model = get_model(spec)
            for x in grid:
                worst = max(worst, abs(model.psi_conditioned(model.inverse_exponent(x)) - x) / x)
        checks.append(CheckReport.evaluate(
            "inverse_identity", worst, 1e-9, "<=",
            provenance=Anchor.EXPONENT_INVERSE,
            metadata={"kinds": [s.kind for s in specs], "grid_points": int(grid.size)}))

        kappa = get_model(BROWNIAN_KAPPA_1).kappa
        checks.append(CheckReport.evaluate(
            "kappa_brownian", abs(kappa - 1.0), 1e-12, "<=",
            provenance=Anchor.EXPONENT_ROOT,
            metadata={"kappa": kappa}))

        worst = 0.0
        for spec in (BROWNIAN_KAPPA_1, BROWNIAN_KAPPA_0, STABLE_15):
            model = get_model(spec)
            for x in (0.1, 0.5, 1.0, 2.0, 5.0):
                exact = model.scale_w(x, ScaleMethod.CLOSED_FORM)
                inverted = model.scale_w(x, ScaleMethod.NUMERIC_INVERSION)
                worst = max(worst, abs(inverted - exact) / exact)
        checks.append(CheckReport.evaluate(
            "scale_inversion", worst, 1e-6, "<=",
            provenance=Anchor.SCALE_FUNCTION))

        # Exit frequency of Brownian motion from 0.5 before 0 up to 1.5, on a fine grid
        spec, x, y, trials = BROWNIAN_KAPPA_1, 0.5, 1.5, 2000
        simulator = PathSimulator(spec, dt=1e-4)
        rule = TwoSidedExit(lower=0.0, upper=y)
        hits = sum(simulator.simulate_until(x, rule, stream_for(self.config.seed, i, label=1)).stop_reason
                   == StopReason.LEVEL_HIT for i in range(trials))
        checks.append(self.checker.check_identity(
            "exit_frequency", hits=int(hits), trials=trials,
            probability=get_model(spec).first_passage_prob(x, y)))

        for label, spec in enumerate((BROWNIAN_KAPPA_1, STABLE_15, BOUNDED_VARIATION, POISSON_UNIT, Z_DRIFT_UP),
                                     start=2):
            report = validate_increment_law(spec, 0.1, 1.0, Config.get_min_check_samples(),
                                            RngStream(seed=self.config.seed, stream_id=label))
            report.name = f"increment_law_{spec.kind}"
            checks.append(report)
        return checks

    def _suite_brownian_laplace(self) -> List[CheckReport]:
        y = self._y()
        samples = self._batch(BROWNIAN_KAPPA_1, _I_V_UP, y, self._n(200_000), label=10)
        bias = variant_bias_bound(BROWNIAN_KAPPA_1, _I_V_UP, y)
        checks = []
        for lam in (0.5, 1.0, 2.0):
            checks.append(self.checker.check_identity(
                "laplace", samples=samples, lam=lam, reference=brownian_laplace_ref(1.0, lam),
                allowance=lam * bias, name=f"laplace_{lam:g}",
                provenance=Anchor.BROWNIAN_LAPLACE))
        series, bessel = brownian_laplace_ref(1.0, 0.5), brownian_laplace_bessel(1.0, 0.5)
        checks.append(CheckReport.evaluate(
            "series_vs_bessel", abs(series - bessel), 1e-10, "<=",
            provenance=Anchor.BROWNIAN_LAPLACE,
            metadata={"series": series, "bessel": bessel}))
        return checks

    def _suite_moments(self) -> List[CheckReport]:
        y = self._y()
        samples = self._batch(BROWNIAN_KAPPA_1, _I_V_UP, y, self._n(200_000), label=11)
        bias = variant_bias_bound(BROWNIAN_KAPPA_1, _I_V_UP, y)
        stderr = float(np.std(samples, ddof=1) / math.sqrt(samples.size))
        summary = get_model(BROWNIAN_KAPPA_1).exponent_summary()
        checks = [
            first_moment_check(BROWNIAN_KAPPA_1, samples, bias),
            CheckReport.evaluate("first_moment_stderr", stderr, 0.01, "<",
                                 provenance=Anchor.FIRST_MOMENT),
            self.checker.check_identity("moments", samples=samples),
        ]
        s = 0.8 * summary.psi_at_kappa_plus_1
        draws = np.exp(s * samples)
        moment = float(np.mean(draws))
        moment_stderr = float(np.std(draws, ddof=1) / math.sqrt(samples.size))
        reference = brownian_exponential_moment_ref(1.0, s)
        checks.append(CheckReport.evaluate(
            "exponential_moment", abs(moment - reference), 3.0 * moment_stderr + s * bias * reference, "<=",
            provenance=Anchor.EXPONENTIAL_MOMENTS,
            metadata={"s": s, "empirical": moment, "reference": reference, "stderr": moment_stderr}))
        checks.append(self.checker.check_identity(
            "exponential_moment_stability", samples=samples, s=s, n_small=max(2, samples.size // 5)))
        return checks

    def _suite_affine(self) -> List[CheckReport]:
        y = self._y(3.0)
        trunc = self.config.y
        n = self._n(20_000)
        a, tail = sample_affine_batch(BROWNIAN_KAPPA_1, y, self._dt, n, self.config.seed,
                                      self.config.workers, label=12, trunc_level=trunc)
        direct = self._batch(BROWNIAN_KAPPA_1, _I_V_UP, trunc, n, label=13)
        return [self.checker.check_identity("affine", reconstructed=a + math.exp(-y) * tail,
                                            direct=direct, y=y)]

    def _suite_convolution(self) -> List[CheckReport]:
        y = self._y()
        n = self._n(20_000)
        s_t = self._batch(BROWNIAN_KAPPA_1, FunctionalVariant(tag=VariantTag.S_T_SHARP), y, n, label=14)
        conditioned = self._batch(BROWNIAN_KAPPA_1, _I_V_UP, y, n, label=15)
        sharp = self._batch(BROWNIAN_KAPPA_1, FunctionalVariant(tag=VariantTag.I_V_SHARP), y, n, label=16)
        return [self.checker.check_identity("convolution", summed=s_t + conditioned, sharp=sharp)]

    def _suite_sandwich(self) -> List[CheckReport]:
        y = self._y()
        n = self._n(200_000)
        plain = self._batch(BROWNIAN_DRIFT_UP, FunctionalVariant(tag=VariantTag.I_V), y, n, label=20)
        conditioned = self._batch(BROWNIAN_DRIFT_UP, _I_V_UP, y, n, label=21)
        grid = np.linspace(0.2, 3.0, 15)

        def oracle(x):
            return dufresne_cdf(1.0, 0.5, x)

        return [
            self.checker.check_identity("sandwich", plain=plain, conditioned=conditioned, x_grid=grid),
            self.checker.check_identity(
                "cdf_oracle", samples=conditioned, oracle=oracle, x_grid=grid, mode="dominates",
                name="conditioned_dominates_exact",
                provenance=Anchor.LEFT_TAIL_COMPARISON),
            self.checker.check_identity(
                "cdf_oracle", samples=plain, oracle=oracle, x_grid=grid, mode="two_sided",
                name="plain_matches_exact",
                provenance=Anchor.DUFRESNE_IDENTITY),
        ]

    def _suite_left_tail(self) -> List[CheckReport]:
        y = self._y(6.0)
        samples = self._batch(BROWNIAN_KAPPA_0, _I_V_UP, y, self._n_large(1_000_000), label=30)
        grid = [1.0, 0.7, 0.5, 0.4, 0.3]
        n = samples.size
        values, stderrs, bounds = [], [], {}
        for x in grid:
            count = int(np.count_nonzero(samples <= x))
            if count == 0:
                raise DataError(f"no sample below x={x:g}; raise n_large")
            prob = count / n
            values.append(-x * math.log(prob))
            stderrs.append(x * math.sqrt((1.0 - prob) / (n * prob)))
            bounds[f"{x:g}"] = {"log_prob": math.log(prob),
                                "predicted": predict_left_tail_log(BROWNIAN_KAPPA_0, x),
                                "bounds": list(left_tail_bounds(BROWNIAN_KAPPA_0, x))}
        provenance = Anchor.LEFT_TAIL
        window = self.checker.check_identity("tail_window", value=values[-1], center=2.0, half_width=0.6,
                                             name="left_tail_window", provenance=provenance)
        window.metadata["curve"] = bounds
        return [
            window,
            self.checker.check_identity("tail_trend", values=values, stderrs=stderrs,
                                        name="left_tail_trend", provenance=provenance),
            self.checker.check_identity("log_concavity", samples=samples),
        ]

    def _suite_right_tail(self) -> List[CheckReport]:
        samples = self._batch(BROWNIAN_KAPPA_1, _I_V_UP, self._y(), self._n_large(1_000_000), label=31)
        survival_floor = max(1e-4, 50.0 / samples.size)
        lo, hi = np.quantile(samples, [0.99, 1.0 - survival_floor])
        grid = np.linspace(lo, hi, 10)
        oracle = brownian_right_tail_rate(1.0)
        return [
            self.checker.check_identity("tail_linearity", samples=samples, x_grid=grid),
            self.checker.check_identity("tail_rate", samples=samples, x_grid=grid, low=1.0, high=2.7),
            self.checker.check_identity(
                "tail_rate", samples=samples, x_grid=grid, low=0.8 * oracle, high=1.2 * oracle,
                name="tail_rate_bessel",
                provenance=Anchor.BROWNIAN_RIGHT_TAIL),
        ]

    def _suite_poisson(self) -> List[CheckReport]:
        spec = POISSON_UNIT
        variant = FunctionalVariant(tag=VariantTag.POISSON_EXACT)
        samples = self._batch(spec, variant, 0.0, self._n(100_000), label=40)
        bias = poisson_series_bias(spec, poisson_default_terms(spec.alpha_jump))
        checks = []
        for lam in (0.5, 1.0, 2.0, 5.0):
            reference = math.exp(-poisson_log_laplace_ref(spec.alpha_jump, spec.rate, lam))
            checks.append(self.checker.check_identity(
                "laplace", samples=samples, lam=lam, reference=reference, allowance=lam * bias,
                name=f"laplace_{lam:g}",
                provenance=Anchor.POISSON_PRODUCT_FORMULA))
        lambdas = [1e6, 1e9, 1e12]
        for aspect in ("bracket", "refinement", "trend"):
            checks.append(self.checker.check_identity(
                "poisson_asymptotic", alpha=spec.alpha_jump, p=spec.rate, lam_grid=lambdas, aspect=aspect))

        tail_samples = self._batch(spec, variant, 0.0, self._n_large(1_000_000), label=41)
        n = tail_samples.size
        grid = [0.05, 0.1, 0.2, 0.3, 0.5]
        kept, ratios, stderrs = [], [], []
        for x in grid:
            count = int(np.count_nonzero(tail_samples <= x))
            if count < Config.MIN_TAIL_EXCEEDANCES:
                logger.warning(f"⚠️ Only {count} samples below x={x:g}; dropped from the tail ratio trend")
                continue
            prob = count / n
            predicted = predict_poisson_tail(spec.alpha_jump, x)
            kept.append(x)
            ratios.append(-math.log(prob) / predicted)
            stderrs.append(math.sqrt((1.0 - prob) / (n * prob)) / predicted)
        if len(kept) < 2:
            raise DataError(f"fewer than two tail levels with {Config.MIN_TAIL_EXCEEDANCES} exceedances; "
                            f"raise n_large")
        trend = self.checker.check_identity("tail_trend", values=ratios, stderrs=stderrs,
                                            name="poisson_left_tail_trend",
                                            provenance=Anchor.POISSON_LEFT_TAIL)
        trend.metadata["x_grid"] = kept
        checks.append(trend)
        checks.append(self.checker.check_identity("chernoff_bound", samples=tail_samples, x_grid=grid,
                                                  alpha=spec.alpha_jump, p=spec.rate))
        return checks

    def _suite_zside(self) -> List[CheckReport]:
        y = self._y()
        n = self._n(50_000)
        plain = self._batch(Z_DRIFT_UP, FunctionalVariant(tag=VariantTag.I_Z), y, n, label=50)
        conditioned = self._batch(Z_DRIFT_UP, FunctionalVariant(tag=VariantTag.I_Z_UP), y, n, label=51)
        grid = np.linspace(0.2, 3.0, 15)
        return [
            self.checker.check_identity("stochastic_order", plain=plain, conditioned=conditioned, x_grid=grid),
            self.checker.check_identity(
                "cdf_oracle", samples=plain, oracle=lambda x: dufresne_cdf(1.0, 0.5, x), x_grid=grid,
                name="plain_matches_exact", provenance=Anchor.DUFRESNE_IDENTITY),
            self.checker.check_identity("exponential_moment_stability", samples=conditioned, s=0.2,
                                        n_small=max(2, n // 5)),
        ]

    def _suite_bounded_variation(self) -> List[CheckReport]:
        spec = BOUNDED_VARIATION
        y = self._y()
        samples = self._batch(spec, _I_V_UP, y, self._n(10_000), label=60)
        minimum = float(np.min(samples))
        bias = variant_bias_bound(spec, _I_V_UP, y)
        return [
            self.checker.check_identity("support", samples=samples, gamma_star=spec.gamma_star),
            CheckReport.evaluate("support_edge_reached", minimum, 1.3 / spec.gamma_star, "<=",
                                 provenance=Anchor.BOUNDED_VARIATION_SUPPORT),
            first_moment_check(spec, samples, bias),
        ]

    def _suite_subadditivity(self) -> List[CheckReport]:
        rng = RngStream(seed=self.config.seed, stream_id=70 << 32).generator()
        samples = sample_stopped_subordinator(1.0, 1.0, 1.0, self._n(100_000), rng)
        grid = [0.1, 0.5, 1.0, 2.0, 4.0]
        return [self.checker.check_identity("subadditivity", samples=samples, x_grid=grid, y_grid=grid)]


def verify_suite(name: str, config: RunConfig, timing: bool = False) -> Report:
    return VerificationSuiteRunner(config).verify_suite(name, timing)
