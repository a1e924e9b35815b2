"""
Sampling and estimation of exponential functionals and of the variables in
their path decompositions (A^y, S_T), plus the exact Poisson series sampler.
"""

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy import integrate
from scipy.integrate import trapezoid

from config import Config
from exceptions import DomainError, EstimationError, LevyToolkitError
from models import (
    BarrierThenLastZero,
    DualOf,
    FunctionalVariant,
    LevelUp,
    MCEstimate,
    PathSample,
    PoissonMultiple,
    ProcessSpec,
    Regime,
    RejectionBiasStudy,
    RngStream,
    Side,
    VUpAlgorithm,
    VariantTag,
)
from .levy_model import conditioned_spec, expected_functional, get_model
from .path_sim import PathSimulator, last_passage_split

logger = logging.getLogger(__name__)

_STREAM_LABEL_SHIFT = 32
_TAIL_SPAN = 60.0


def exp_integral(path: PathSample) -> float:
    """Trapezoidal ∫ exp(−path(t)) dt over the grid"""
    if len(path) < 2:
        return 0.0
    return float(trapezoid(np.exp(-path.values), dx=path.dt))


def truncation_bias_bound(spec: ProcessSpec, y: float) -> Optional[float]:
    """
    Mean of the part of I(V↑) after the first passage of V↑ above y.

    V↑ creeps upward, so that part is I(V↑) started at y, and its mean is

        ∫₀^∞ e^{−z} W♯(z) (1 − W♯(y−z)/W♯(y)) dz

    with W♯ = 0 on the negative half-line. At y = 0 this is 1/Ψ(κ+1). This is
    the exact bias of the truncated draw; for oscillating V it is of order 1/y.

    Returns:
        the mean remainder, or None when W♯ cannot be evaluated
    """
    if y < 0:
        raise DomainError(f"truncation level must be nonnegative, got {y}")
    if spec.side != Side.SPECTRALLY_NEGATIVE:
        raise DomainError("truncation_bias_bound needs a spectrally negative spec")
    model = get_model(spec)
    if y == 0:
        return 1.0 / model.exponent_summary().psi_at_kappa_plus_1

    def w_sharp(x: float) -> float:
        return model.scale_w_conditioned(x) if x > 0 else 0.0

    def quad(func: Callable[[float], float], lower: float, upper: float) -> float:
        value, _ = integrate.quad(func, lower, upper, epsabs=0.0, epsrel=Config.QUAD_EPSREL, limit=200)
        return float(value)

    try:
        w_y = w_sharp(y)
        below = quad(lambda z: math.exp(-z) * w_sharp(z) * (1.0 - w_sharp(y - z) / w_y), 0.0, y)
        # e^{−z}W♯(z) is negligible beyond y + _TAIL_SPAN
        above = quad(lambda z: math.exp(-z) * w_sharp(z), y, y + _TAIL_SPAN)
    except LevyToolkitError as exc:
        logger.warning(f"⚠️ No truncation bias for {spec.kind} at y={y:g}: {exc}")
        return None
    return below + above


def poisson_default_terms(alpha: float) -> int:
    """Series length with mean bias below 10^-12 relative to the leading term"""
    return int(math.ceil(Config.POISSON_SERIES_DIGITS * math.log(10.0) / alpha)) + 1


def poisson_series_bias(spec: PoissonMultiple, terms: int) -> float:
    alpha = spec.alpha_jump
    return math.exp(-alpha * (terms + 1)) / (spec.rate * -math.expm1(-alpha))


def variant_bias_bound(spec: ProcessSpec, variant: FunctionalVariant, y: float) -> Optional[float]:
    """
    Deterministic bound on the mean truncation error of one draw; None when no
    finite bound is known and only the tail-halving test applies.
    """
    tag = variant.tag
    if tag in (VariantTag.A_Y, VariantTag.S_T_SHARP):
        return 0.0
    if tag == VariantTag.I_V_UP:
        return truncation_bias_bound(spec, y)
    if tag == VariantTag.POISSON_EXACT:
        terms = variant.K if variant.K is not None else poisson_default_terms(spec.alpha_jump)
        return poisson_series_bias(spec, terms)
    if tag == VariantTag.I_Z_UP:
        return None
    target = spec
    if tag == VariantTag.I_V_SHARP:
        try:
            target = conditioned_spec(spec)
        except LevyToolkitError:
            return None
    mean = expected_functional(target)
    return None if mean is None else math.exp(-y) * mean


class FunctionalSampler:
    """Draws one exponential functional (or decomposition variable) per random stream"""

    def __init__(self, spec: ProcessSpec, dt: Optional[float] = None,
                 v_up_algo: VUpAlgorithm = VUpAlgorithm.AUTO, x0: Optional[float] = None):
        self.spec = spec
        self.simulator = PathSimulator(spec, dt)
        self.dt = self.simulator.dt
        self.v_up_algo = VUpAlgorithm(v_up_algo)
        self.x0 = x0
        self.model = get_model(spec)

    def sample_functional(self, variant: FunctionalVariant, y: float, stream: RngStream) -> float:
        """
        One draw of the requested variable.

        Args:
            variant: which functional; A_y carries its own level
            y: truncation level for the truncated variants
            stream: random stream of this draw

        Returns:
            nonnegative sample
        """
        tag = variant.tag
        self._check_compatible(variant)
        if y <= 0 and tag not in (VariantTag.A_Y, VariantTag.S_T_SHARP, VariantTag.POISSON_EXACT):
            raise DomainError(f"truncation level must be positive, got {y}")

        if tag == VariantTag.I_V_UP:
            path = self.simulator.simulate_v_up(LevelUp(y=y), stream, algo=self.v_up_algo, x0=self.x0)
            return exp_integral(path)
        if tag == VariantTag.I_V:
            return exp_integral(self.simulator.simulate_until(0.0, LevelUp(y=y), stream))
        if tag == VariantTag.I_V_SHARP:
            return exp_integral(self.simulator.simulate_v_sharp(LevelUp(y=y), stream))
        if tag == VariantTag.I_Z:
            return exp_integral(self.simulator.simulate_until(0.0, LevelUp(y=y), stream))
        if tag == VariantTag.I_Z_UP:
            return exp_integral(self.simulator.simulate_z_up(LevelUp(y=y), stream))
        if tag == VariantTag.A_Y:
            return self._sample_a(variant.y, stream)
        if tag == VariantTag.S_T_SHARP:
            v_sharp = self.simulator.settled_v_sharp(0.0, 0.0, stream)
            pre, _ = last_passage_split(v_sharp, 0.0)
            return exp_integral(pre)
        if tag == VariantTag.POISSON_EXACT:
            return self._sample_poisson(variant.K, stream)
        raise DomainError(f"unknown variant {tag!r}")

    def _check_compatible(self, variant: FunctionalVariant) -> None:
        tag = variant.tag
        spec = self.spec
        if tag == VariantTag.POISSON_EXACT:
            if not isinstance(spec, PoissonMultiple):
                raise DomainError("Poisson_exact needs a poisson_multiple spec")
            return
        if tag in (VariantTag.I_Z, VariantTag.I_Z_UP):
            if spec.side != Side.SPECTRALLY_POSITIVE:
                raise DomainError(f"{tag.value} needs a spectrally positive spec")
            if isinstance(spec, DualOf) and self.model.exponent_summary().regime != Regime.DRIFTS_DOWN:
                raise DomainError("I(Z) is infinite unless Z drifts to +inf")
            return
        if spec.side != Side.SPECTRALLY_NEGATIVE:
            raise DomainError(f"{tag.value} needs a spectrally negative spec")
        if tag == VariantTag.I_V and self.model.exponent_summary().regime != Regime.DRIFTS_UP:
            raise DomainError("I(V) is infinite unless V drifts to +inf")

    def _sample_a(self, level: float, stream: RngStream) -> float:
        """A^y: integral of exp(−V↑) up to its last passage at level y"""
        path = self.simulator.simulate_v_up(BarrierThenLastZero(b=level), stream,
                                            algo=VUpAlgorithm.LAST_PASSAGE_SHIFT)
        pre, _ = last_passage_split(path, level)
        return exp_integral(pre)

    def _sample_poisson(self, terms: Optional[int], stream: RngStream) -> float:
        """(1/p)·Σ_{k≤K} e^{−αk}·e_k with inverse-transform unit exponentials"""
        spec = self.spec
        terms = terms if terms is not None else poisson_default_terms(spec.alpha_jump)
        rng = stream.generator()
        exponentials = -np.log1p(-rng.random(terms + 1))
        weights = np.exp(-spec.alpha_jump * np.arange(terms + 1))
        return float(np.dot(weights, exponentials) / spec.rate)

    def sample_affine_pair(self, y: float, stream: RngStream,
                           trunc_level: Optional[float] = None) -> Tuple[float, float]:
        """An A^y draw and an independent I(V↑) draw, for A^y + e^{−y}·Ĩ"""
        trunc_level = trunc_level if trunc_level is not None else Config.get_default_truncation_level()
        a = self._sample_a(y, stream.child(0))
        i_tail = self.sample_functional(FunctionalVariant(tag=VariantTag.I_V_UP), trunc_level, stream.child(1))
        return a, i_tail

    def sample_series(self, y: float, terms: int, stream: RngStream) -> float:
        """I(V↑) rebuilt as Σ_j e^{−jy}·A_j^y from independent A^y draws"""
        if terms < 1:
            raise DomainError(f"series needs at least one term, got {terms}")
        return float(sum(math.exp(-j * y) * self._sample_a(y, stream.child(j)) for j in range(terms)))


def sample_functional(spec: ProcessSpec, variant: FunctionalVariant, y: float, dt: float,
                      stream: RngStream, v_up_algo: VUpAlgorithm = VUpAlgorithm.AUTO) -> float:
    return FunctionalSampler(spec, dt, v_up_algo).sample_functional(variant, y, stream)


def sample_affine_pair(spec: ProcessSpec, y: float, dt: float, stream: RngStream) -> Tuple[float, float]:
    return FunctionalSampler(spec, dt).sample_affine_pair(y, stream)


# Batches and estimates

def stream_for(seed: int, index: int, label: int = 0) -> RngStream:
    """Stream of sample `index`; distinct labels give disjoint sample sets"""
    return RngStream(seed=seed, stream_id=(label << _STREAM_LABEL_SHIFT) + index)


def _sample_chunk(task: tuple) -> np.ndarray:
    """Worker entry point: samples for indices [start, end) in index order"""
    (spec, variant, y, dt, v_up_algo, x0, seed, label, start, end) = task
    sampler = FunctionalSampler(spec, dt, v_up_algo, x0)
    values = np.empty(end - start)
    for offset, index in enumerate(range(start, end)):
        try:
            values[offset] = sampler.sample_functional(variant, y, stream_for(seed, index, label))
        except LevyToolkitError as exc:
            raise EstimationError(f"sample {index} failed: {exc}", completed=offset,
                                  partial=values[:offset].copy()) from exc
    return values


def _affine_chunk(task: tuple) -> np.ndarray:
    """Worker entry point: rows (a, i_tail) for indices [start, end)"""
    (spec, y, trunc_level, dt, seed, label, start, end) = task
    sampler = FunctionalSampler(spec, dt)
    rows = np.empty((end - start, 2))
    for offset, index in enumerate(range(start, end)):
        try:
            rows[offset] = sampler.sample_affine_pair(y, stream_for(seed, index, label), trunc_level)
        except LevyToolkitError as exc:
            raise EstimationError(f"affine pair {index} failed: {exc}", completed=offset,
                                  partial=rows[:offset].copy()) from exc
    return rows


def _run_chunks(worker, tasks: List[tuple], workers: int) -> np.ndarray:
    """Run chunk tasks inline or on a process pool; results concatenated in task order"""
    results: List[np.ndarray] = []
    try:
        if workers <= 1:
            for task in tasks:
                results.append(worker(task))
        else:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                for values in executor.map(worker, tasks):
                    results.append(values)
    except EstimationError as exc:
        completed = sum(len(r) for r in results) + exc.completed
        partial = np.concatenate(results + [np.asarray(exc.partial)]) if completed else np.empty(0)
        logger.error(f"❌ Sampling aborted after {completed} draws: {exc}")
        raise EstimationError(exc.message, completed=completed, partial=partial) from exc
    return np.concatenate(results)


def _chunk_bounds(n: int) -> List[Tuple[int, int]]:
    chunk = Config.get_chunk_size()
    return [(start, min(start + chunk, n)) for start in range(0, n, chunk)]


def sample_batch(spec: ProcessSpec, variant: FunctionalVariant, y: float, dt: float, n: int,
                 seed: int, workers: int = 1, label: int = 0,
                 v_up_algo: VUpAlgorithm = VUpAlgorithm.AUTO, x0: Optional[float] = None) -> np.ndarray:
    """
    n independent draws; sample i uses stream (seed, i). Chunk boundaries do not
    depend on the worker count, so the result is identical for any `workers`.
    """
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    tasks = [(spec, variant, y, dt, VUpAlgorithm(v_up_algo), x0, seed, label, start, end)
             for start, end in _chunk_bounds(n)]
    logger.info(f"🔍 Sampling {n} draws of {variant.tag.value} for {spec.kind} with {workers} worker(s)")
    return _run_chunks(_sample_chunk, tasks, workers)


def sample_affine_batch(spec: ProcessSpec, y: float, dt: float, n: int, seed: int,
                        workers: int = 1, label: int = 0,
                        trunc_level: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """n affine pairs; returns the A^y column and the independent I(V↑) column"""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    tasks = [(spec, y, trunc_level, dt, seed, label, start, end) for start, end in _chunk_bounds(n)]
    logger.info(f"🔍 Sampling {n} affine pairs at y={y:g} for {spec.kind} with {workers} worker(s)")
    rows = _run_chunks(_affine_chunk, tasks, workers)
    return rows[:, 0], rows[:, 1]


def summarize(samples: np.ndarray, variant: FunctionalVariant, dt: float, y: Optional[float],
              bias_bound: Optional[float]) -> MCEstimate:
    n = len(samples)
    stderr = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return MCEstimate(mean=float(np.mean(samples)), stderr=stderr, n=n, bias_bound=bias_bound,
                      dt=dt, variant=variant.tag, y=y)


def estimate(spec: ProcessSpec, variant: FunctionalVariant, y: float, dt: float, n: int, seed: int,
             workers: int = 1, v_up_algo: VUpAlgorithm = VUpAlgorithm.AUTO,
             x0: Optional[float] = None, label: int = 0) -> MCEstimate:
    """
    Monte Carlo mean of the variant over n independent streams.

    Raises:
        EstimationError: a draw failed; `partial` holds an estimate of the draws
            completed before it
    """
    if n < 2:
        raise DomainError(f"estimate needs n >= 2, got {n}")
    bias = variant_bias_bound(spec, variant, y)
    try:
        samples = sample_batch(spec, variant, y, dt, n, seed, workers, label, v_up_algo, x0)
    except EstimationError as exc:
        partial = exc.partial
        if partial is not None and len(partial) >= 2:
            exc.partial = summarize(partial, variant, dt, y, bias)
        raise
    result = summarize(samples, variant, dt, y, bias)
    logger.info(f"✅ {variant.tag.value}: mean={result.mean:.6g} ± {result.stderr:.2g} (n={n})")
    return result


def rejection_bias_study(spec: ProcessSpec, y: float, x0: float, dt: float, n: int, seed: int,
                         workers: int = 1) -> RejectionBiasStudy:
    """Estimate I(V↑) with the rejection sampler from x0 and from x0/2"""
    variant = FunctionalVariant(tag=VariantTag.I_V_UP)
    coarse = estimate(spec, variant, y, dt, n, seed, workers, VUpAlgorithm.REJECTION, x0, label=1)
    fine = estimate(spec, variant, y, dt, n, seed, workers, VUpAlgorithm.REJECTION, x0 / 2.0, label=2)
    return RejectionBiasStudy(x0=x0, coarse=coarse, fine=fine, shift=coarse.mean - fine.mean,
                              shift_stderr=math.hypot(coarse.stderr, fine.stderr))


def sample_stopped_subordinator(rate: float, jump_mean: float, kill_rate: float, n: int,
                                rng: np.random.Generator) -> np.ndarray:
    """
    Compound Poisson subordinator with exponential jumps stopped at an independent
    exponential time: a geometric number of jumps, then a Gamma total.
    """
    if rate <= 0 or jump_mean <= 0 or kill_rate <= 0:
        raise DomainError("rate, jump_mean and kill_rate must be positive")
    counts = rng.geometric(kill_rate / (kill_rate + rate), n) - 1
    totals = np.zeros(n)
    jumped = counts > 0
    totals[jumped] = rng.gamma(counts[jumped], jump_mean)
    return totals


def write_samples_csv(samples: np.ndarray, path: Union[str, Path]) -> Path:
    """Write `sample_index,value` rows"""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["sample_index", "value"])
        for index, value in enumerate(samples):
            writer.writerow([index, repr(float(value))])
    return path
