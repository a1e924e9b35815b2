"""
Grid simulation of V, V♯, V↑ (spectrally negative) and Z, Z↑ (spectrally positive).
Paths are Euler sums of exact-in-law increments; conditioned paths come from the
last-passage split, the two-sided rejection rule or, for driftless Brownian
motion, a three-dimensional Bessel process.
"""

import logging
import math
from typing import Optional, Tuple, Union

import numpy as np

from config import Config
from exceptions import BudgetError, DataError, DomainError, HorizonTooShortError, RefusalError, UnsupportedError
from models import (
    Anchor,
    BVDriftCPP,
    BarrierThenLastZero,
    BrownianDrift,
    CheckReport,
    DualOf,
    Horizon,
    LevelUp,
    PathSample,
    PoissonMultiple,
    ProcessSpec,
    Regime,
    RngStream,
    Side,
    StableSN,
    StopReason,
    StopRule,
    TwoSidedExit,
    VUpAlgorithm,
)
from .levy_model import conditioned_spec, get_model

logger = logging.getLogger(__name__)


# Increment samplers

def _stable_increments(spec: StableSN, dt: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """
    Totally left-skewed stable increments with E[exp(λX)] = exp(dt·cλ^α).
    Chambers–Mallows–Stuck in parametrisation 1 with β = −1 and scale
    (dt·c·|cos(πα/2)|)^{1/α}.
    """
    alpha = spec.alpha
    if alpha == 2.0:
        return rng.normal(spec.drift * dt, math.sqrt(2.0 * spec.c * dt), size)
    scale = (dt * spec.c * abs(math.cos(math.pi * alpha / 2.0))) ** (1.0 / alpha)
    u = math.pi * (rng.random(size) - 0.5)
    w = -np.log1p(-rng.random(size))
    shift = math.atan(-math.tan(math.pi * alpha / 2.0)) / alpha
    t1 = np.sin(alpha * (u + shift)) / (math.cos(alpha * shift) * np.cos(u)) ** (1.0 / alpha)
    t2 = (np.cos(alpha * shift + (alpha - 1.0) * u) / w) ** ((1.0 - alpha) / alpha)
    return scale * t1 * t2 + spec.drift * dt


def _compound_exponential(rate: float, mean: float, dt: float, size: int,
                          rng: np.random.Generator) -> np.ndarray:
    """Sum of Poisson(rate·dt) exponential jumps of the given mean"""
    counts = rng.poisson(rate * dt, size)
    totals = np.zeros(size)
    jumped = counts > 0
    if np.any(jumped):
        totals[jumped] = rng.gamma(counts[jumped], mean)
    return totals


def sample_increments(spec: ProcessSpec, dt: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """`size` independent increments over a step dt"""
    if dt <= 0:
        raise DomainError(f"dt must be positive, got {dt}")
    if isinstance(spec, BrownianDrift):
        return rng.normal(-spec.gamma * dt, math.sqrt(spec.q * dt), size)
    if isinstance(spec, StableSN):
        return _stable_increments(spec, dt, size, rng)
    if isinstance(spec, BVDriftCPP):
        if spec.jump_rate == 0:
            return np.full(size, spec.gamma_star * dt)
        return spec.gamma_star * dt - _compound_exponential(spec.jump_rate, spec.jump_mean, dt, size, rng)
    if isinstance(spec, PoissonMultiple):
        return spec.alpha_jump * rng.poisson(spec.rate * dt, size).astype(float)
    if isinstance(spec, DualOf):
        return -sample_increments(spec.inner, dt, size, rng)
    raise UnsupportedError(f"no increment sampler for '{spec.kind}'")


def sample_increment(spec: ProcessSpec, dt: float, stream: RngStream) -> float:
    return float(sample_increments(spec, dt, 1, stream.generator())[0])


def validate_increment_law(spec: ProcessSpec, dt: float, lam: float, n: int,
                           stream: RngStream) -> CheckReport:
    """
    Compare the empirical mean of exp(sλX_dt) with exp(dt·Ψ(λ)), where s = 1 for
    spectrally negative specs and s = −1 for spectrally positive ones.
    Passes within 4 standard errors.
    """
    if n < Config.get_min_check_samples():
        raise DataError(f"validate_increment_law needs n >= {Config.get_min_check_samples()}, got {n}")
    sign = 1.0 if spec.side == Side.SPECTRALLY_NEGATIVE else -1.0
    target = math.exp(dt * get_model(spec).psi(lam))
    draws = np.exp(sign * lam * sample_increments(spec, dt, n, stream.generator()))
    mean = float(np.mean(draws))
    stderr = float(np.std(draws, ddof=1) / math.sqrt(n))
    statistic = abs(mean - target) / max(stderr, 1e-15 * target)
    return CheckReport.evaluate(
        name="increment_law",
        statistic=statistic,
        threshold=4.0,
        comparison="<=",
        provenance=Anchor.INCREMENT_LAW,
        metadata={"kind": spec.kind, "dt": dt, "lambda": lam, "n": n,
                  "empirical": mean, "target": target, "stderr": stderr},
    )


# Path splitting

def _final_window(length: int) -> int:
    return max(1, int(math.ceil(Config.SPLIT_FINAL_WINDOW * length)))


def last_passage_split(path: PathSample, level: float) -> Tuple[PathSample, PathSample]:
    """
    Split a path at its last grid visit k of (−∞, level].

    pre holds values[0..k]; post holds values[k..] shifted by values[k], so post
    starts at 0 and stays positive. The split point is shared by both parts.
    The final window of the path must stay above level + safety margin.
    """
    values = path.values
    window = _final_window(len(values))
    if np.any(values[-window:] <= level + Config.SPLIT_SAFETY_MARGIN):
        raise HorizonTooShortError(
            f"final {window} grid points do not stay above {level + Config.SPLIT_SAFETY_MARGIN:g}; "
            "extend the simulation"
        )
    below = np.flatnonzero(values <= level)
    if below.size == 0:
        raise DomainError(f"path never visits (-inf, {level:g}]")
    k = int(below[-1])
    shift = float(values[k])
    pre = PathSample(dt=path.dt, values=values[:k + 1].copy(), stop_reason=StopReason.LEVEL_HIT,
                     start_level=path.start_level, stop_level=level,
                     metadata={"split_index": k, "split_time": k * path.dt})
    post = PathSample(dt=path.dt, values=values[k:] - shift, stop_reason=path.stop_reason,
                      start_level=0.0, stop_level=None if path.stop_level is None else path.stop_level - shift,
                      metadata={**path.metadata, "split_index": k, "shift": shift})
    return pre, post


def argmin_split(path: PathSample) -> PathSample:
    """Z(m + ·) − Z(m) for the grid argmin m; m must lie before the final window"""
    values = path.values
    m = int(np.argmin(values))
    window = _final_window(len(values))
    if len(values) > 1 and m >= len(values) - window:
        raise HorizonTooShortError(f"argmin at index {m} lies in the final {window} grid points")
    infimum = float(values[m])
    return PathSample(dt=path.dt, values=values[m:] - infimum, stop_reason=path.stop_reason,
                      start_level=0.0, stop_level=None,
                      metadata={**path.metadata, "argmin_index": m, "infimum": infimum})


def _first_index_at_or_above(values: np.ndarray, level: float) -> Optional[int]:
    hits = np.flatnonzero(values >= level)
    return int(hits[0]) if hits.size else None


def truncate_at_level(path: PathSample, level: float) -> PathSample:
    """Prefix up to and including the first grid point at or above level"""
    idx = _first_index_at_or_above(path.values, level)
    if idx is None:
        raise HorizonTooShortError(f"path never reaches level {level:g}")
    return PathSample(dt=path.dt, values=path.values[:idx + 1].copy(), stop_reason=StopReason.LEVEL_HIT,
                      start_level=path.start_level, stop_level=level,
                      metadata={**path.metadata, "overshoot": float(path.values[idx] - level)})


class PathSimulator:
    """Simulates paths of one spec on a fixed grid"""

    def __init__(self, spec: ProcessSpec, dt: Optional[float] = None,
                 step_budget: Optional[int] = None, block_size: Optional[int] = None):
        self.spec = spec
        self.dt = dt if dt is not None else Config.get_default_dt()
        if self.dt <= 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        self.step_budget = step_budget if step_budget is not None else Config.get_step_budget()
        self.block_size = block_size if block_size is not None else Config.get_path_block_size()
        self.model = get_model(spec)
        logger.debug(f"PathSimulator initialized for {spec.kind} with dt={self.dt:g}")

    # Generic driver

    def simulate_until(self, start_level: float, rule: StopRule, stream: Union[RngStream, np.random.Generator],
                       spec: Optional[ProcessSpec] = None) -> PathSample:
        """
        Accumulate exact increments from start_level until the stop rule fires.

        Args:
            start_level: value at index 0
            rule: horizon, level_up, barrier_then_lastzero or two_sided_exit
            stream: random stream (or an already created generator)
            spec: process to simulate; defaults to this simulator's spec

        Returns:
            PathSample whose last point is the first grid point satisfying the rule
        """
        spec = spec if spec is not None else self.spec
        rng = stream.generator() if isinstance(stream, RngStream) else stream
        if isinstance(rule, Horizon):
            steps = int(round(rule.T / self.dt))
            if steps > self.step_budget:
                raise BudgetError(f"horizon needs {steps} steps, budget is {self.step_budget}")
            increments = sample_increments(spec, self.dt, steps, rng) if steps else np.empty(0)
            values = np.concatenate(([start_level], start_level + np.cumsum(increments)))
            return PathSample(dt=self.dt, values=values, stop_reason=StopReason.HORIZON_REACHED,
                              start_level=start_level, metadata={"steps": steps})

        level, reason = self._stop_level(rule)
        if start_level >= level:
            return PathSample(dt=self.dt, values=np.array([start_level]), stop_reason=reason,
                              start_level=start_level, stop_level=level, metadata={"steps": 0, "overshoot": start_level - level})

        blocks = [np.array([start_level])]
        current = start_level
        steps = 0
        while True:
            if steps >= self.step_budget:
                logger.error(f"❌ Step budget of {self.step_budget} exhausted before {rule.rule} fired")
                raise BudgetError(f"step budget of {self.step_budget} exhausted before the stop rule fired")
            size = min(self.block_size, self.step_budget - steps)
            block = current + np.cumsum(sample_increments(spec, self.dt, size, rng))
            exit_index, exit_reason = self._first_exit(rule, block, level, reason)
            if exit_index is not None:
                blocks.append(block[:exit_index + 1])
                steps += exit_index + 1
                values = np.concatenate(blocks)
                metadata = {"steps": steps}
                if exit_reason != StopReason.REJECTED:
                    metadata["overshoot"] = float(values[-1] - level)
                return PathSample(dt=self.dt, values=values, stop_reason=exit_reason,
                                  start_level=start_level, stop_level=level, metadata=metadata)
            blocks.append(block)
            steps += size
            current = float(block[-1])

    @staticmethod
    def _stop_level(rule: StopRule) -> Tuple[float, StopReason]:
        if isinstance(rule, LevelUp):
            return rule.y, StopReason.LEVEL_HIT
        if isinstance(rule, BarrierThenLastZero):
            return rule.b, StopReason.BARRIER_HIT
        if isinstance(rule, TwoSidedExit):
            return rule.upper, StopReason.LEVEL_HIT
        raise DomainError(f"unknown stop rule {rule!r}")

    @staticmethod
    def _first_exit(rule: StopRule, block: np.ndarray, level: float,
                    reason: StopReason) -> Tuple[Optional[int], StopReason]:
        up = _first_index_at_or_above(block, level)
        if isinstance(rule, TwoSidedExit):
            down = np.flatnonzero(block <= rule.lower)
            if down.size and (up is None or down[0] < up):
                return int(down[0]), StopReason.REJECTED
        return up, reason

    def extend(self, path: PathSample, rule: StopRule, stream: RngStream,
               spec: Optional[ProcessSpec] = None) -> PathSample:
        """Continue a path from its last value until a new stop rule fires"""
        tail = self.simulate_until(float(path.values[-1]), rule, stream, spec=spec)
        values = np.concatenate((path.values, tail.values[1:]))
        metadata = {**path.metadata, **tail.metadata, "steps": len(values) - 1,
                    "extensions": path.metadata.get("extensions", 0) + 1}
        return PathSample(dt=self.dt, values=values, stop_reason=tail.stop_reason,
                          start_level=path.start_level, stop_level=tail.stop_level, metadata=metadata)

    # Conditioned paths

    def default_v_up_algorithm(self) -> VUpAlgorithm:
        """Last-passage split unless V oscillates; then Bessel-3 or rejection"""
        summary = self.model.exponent_summary()
        if summary.regime != Regime.OSCILLATES:
            return VUpAlgorithm.LAST_PASSAGE_SHIFT
        if isinstance(self.spec, BrownianDrift) or (isinstance(self.spec, StableSN) and self.spec.alpha == 2.0):
            return VUpAlgorithm.BESSEL3
        return VUpAlgorithm.REJECTION

    def simulate_v_sharp(self, rule: StopRule, stream: RngStream) -> PathSample:
        """V♯ from 0 under the given stop rule"""
        return self.simulate_until(0.0, rule, stream, spec=self._v_sharp_spec())

    def _v_sharp_spec(self) -> ProcessSpec:
        self._require_negative_side()
        try:
            return conditioned_spec(self.spec)
        except UnsupportedError as exc:
            raise UnsupportedError(f"cannot simulate V♯ for this spec: {exc}") from exc

    def _require_negative_side(self) -> None:
        if self.spec.side != Side.SPECTRALLY_NEGATIVE:
            raise DomainError("this path kind needs a spectrally negative spec")

    def settled_v_sharp(self, reach: float, settle: float, stream: RngStream) -> PathSample:
        """
        V♯ from 0 run to the barrier max(15, reach + 5), extended until its final
        window lies above settle + margin, so every last passage at a level up to
        `settle` is inside the window. The residual probability of a later return
        below 0 is recorded in metadata.
        """
        summary = self.model.exponent_summary()
        if summary.psi_prime_at_kappa <= 0:
            raise UnsupportedError("V♯ oscillates, so its last passage times are infinite")
        spec_sharp = self._v_sharp_spec()
        barrier = max(Config.BARRIER_MIN, reach + Config.BARRIER_OFFSET)
        path = self.simulate_until(0.0, BarrierThenLastZero(b=barrier), stream, spec=spec_sharp)
        extension = 0
        while np.any(path.values[-_final_window(len(path.values)):] <= settle + Config.SPLIT_SAFETY_MARGIN):
            extension += 1
            if extension > Config.MAX_BARRIER_EXTENSIONS:
                raise HorizonTooShortError(
                    f"V♯ window not settled above {settle:g} after {Config.MAX_BARRIER_EXTENSIONS} extensions"
                )
            barrier += Config.BARRIER_EXTENSION
            logger.debug(f"Extending V♯ path to barrier {barrier:g}")
            path = self.extend(path, BarrierThenLastZero(b=barrier), stream.child(extension), spec=spec_sharp)
        path.metadata["barrier"] = barrier
        path.metadata["residual_bound"] = self.model.ruin_probability_conditioned(barrier)
        return path

    def simulate_v_up(self, stop: Union[LevelUp, BarrierThenLastZero], stream: RngStream,
                      algo: VUpAlgorithm = VUpAlgorithm.AUTO, x0: Optional[float] = None,
                      ymax: Optional[float] = None) -> PathSample:
        """
        Path of V↑ from 0 (or from x0 for the rejection sampler).

        Args:
            stop: level_up(y) returns the path up to the first passage of y;
                barrier_then_lastzero(b) returns a path whose final window lies
                above b, so it can be split at any level up to b
            stream: random stream
            algo: last_passage_shift, rejection, bessel3 or auto
            x0: rejection start level (0 is exact for bounded variation)
            ymax: rejection acceptance level, at least the target level

        Returns:
            PathSample starting at 0 (or x0) with a positive remainder
        """
        self._require_negative_side()
        algo = self.default_v_up_algorithm() if algo == VUpAlgorithm.AUTO else algo
        target = stop.y if isinstance(stop, LevelUp) else stop.b

        if algo == VUpAlgorithm.LAST_PASSAGE_SHIFT:
            settle = target if isinstance(stop, BarrierThenLastZero) else 0.0
            v_sharp = self.settled_v_sharp(target, settle, stream)
            _, post = last_passage_split(v_sharp, 0.0)
            post.metadata["algorithm"] = algo.value
            if isinstance(stop, LevelUp):
                return truncate_at_level(post, target)
            return post

        if isinstance(stop, BarrierThenLastZero):
            raise UnsupportedError(f"{algo.value} paths cannot be settled above a level")
        if algo == VUpAlgorithm.BESSEL3:
            return self._bessel3_path(target, stream)
        if algo == VUpAlgorithm.REJECTION:
            return self._rejection_path(target, stream, x0, ymax)
        raise DomainError(f"unknown V↑ algorithm {algo!r}")

    def _bessel3_path(self, level: float, stream: RngStream) -> PathSample:
        """√q·|B| for a three-dimensional Brownian motion B, exact for driftless Brownian V"""
        spec = self.spec
        if isinstance(spec, StableSN) and spec.alpha == 2.0 and spec.drift == 0:
            q = 2.0 * spec.c
        elif isinstance(spec, BrownianDrift) and spec.gamma == 0:
            q = spec.q
        else:
            raise UnsupportedError("the Bessel-3 sampler needs a driftless Brownian spec")
        rng = stream.generator()
        position = np.zeros(3)
        blocks = [np.array([0.0])]
        steps = 0
        sd = math.sqrt(self.dt)
        while True:
            if steps >= self.step_budget:
                raise BudgetError(f"step budget of {self.step_budget} exhausted in the Bessel-3 sampler")
            size = min(self.block_size, self.step_budget - steps)
            walk = position + np.cumsum(rng.normal(0.0, sd, (size, 3)), axis=0)
            radius = math.sqrt(q) * np.linalg.norm(walk, axis=1)
            idx = _first_index_at_or_above(radius, level)
            if idx is not None:
                blocks.append(radius[:idx + 1])
                values = np.concatenate(blocks)
                return PathSample(dt=self.dt, values=values, stop_reason=StopReason.LEVEL_HIT,
                                  start_level=0.0, stop_level=level,
                                  metadata={"algorithm": VUpAlgorithm.BESSEL3.value,
                                            "steps": len(values) - 1,
                                            "overshoot": float(values[-1] - level)})
            blocks.append(radius)
            position = walk[-1]
            steps += size

    def rejection_acceptance(self, x0: float, ymax: float) -> float:
        """P(V from x0 reaches ymax before entering (−∞, 0]) = W(x0)/W(ymax)"""
        if x0 == 0:
            if not isinstance(self.spec, BVDriftCPP):
                raise DomainError("rejection from 0 is only exact for bounded variation")
            return 1.0 / (self.spec.gamma_star * self.model.scale_w(ymax))
        return self.model.first_passage_prob(x0, ymax)

    def _rejection_path(self, level: float, stream: RngStream, x0: Optional[float],
                        ymax: Optional[float]) -> PathSample:
        if x0 is None:
            x0 = 0.0 if isinstance(self.spec, BVDriftCPP) else Config.get_rejection_x0()
        ymax = level if ymax is None else ymax
        if not (0 <= x0 < level <= ymax):
            raise DomainError(f"rejection needs 0 <= x0 < y <= ymax, got x0={x0}, y={level}, ymax={ymax}")
        acceptance = self.rejection_acceptance(x0, ymax)
        if acceptance < Config.REJECTION_MIN_ACCEPTANCE:
            raise RefusalError(
                f"estimated acceptance probability {acceptance:.2e} is below {Config.REJECTION_MIN_ACCEPTANCE:g}",
                advice="raise x0, lower ymax or use the last-passage algorithm",
            )
        max_attempts = int(math.ceil(Config.REJECTION_ATTEMPT_FACTOR / acceptance))
        rule = TwoSidedExit(lower=0.0, upper=ymax)
        for attempt in range(max_attempts):
            path = self.simulate_until(x0, rule, stream.child(attempt))
            if path.stop_reason != StopReason.REJECTED:
                accepted = truncate_at_level(path, level)
                accepted.metadata.update({"algorithm": VUpAlgorithm.REJECTION.value, "x0": x0,
                                          "ymax": ymax, "attempts": attempt + 1,
                                          "acceptance_estimate": acceptance})
                return accepted
        logger.error(f"❌ Rejection sampler exhausted {max_attempts} attempts")
        raise BudgetError(f"rejection sampler exhausted {max_attempts} attempts")

    def simulate_z_up(self, rule: Union[LevelUp, Horizon], stream: RngStream) -> PathSample:
        """
        Z↑ from the post-argmin part of Z, simulated until a barrier that makes a
        later undershoot of the recorded infimum unlikely (bound in metadata).
        """
        spec = self.spec
        if spec.side != Side.SPECTRALLY_POSITIVE or not isinstance(spec, DualOf):
            raise DomainError("simulate_z_up needs a dual_of spec")
        summary = self.model.exponent_summary()
        if summary.regime != Regime.DRIFTS_DOWN:
            raise DomainError("Z must drift to +inf (its dual must drift to -inf)")
        if not spec.unbounded_variation:
            raise UnsupportedError("Z↑ from 0 needs Z of unbounded variation")

        needed = rule.y if isinstance(rule, LevelUp) else 0.0
        barrier = max(Config.BARRIER_MIN, needed + Config.BARRIER_OFFSET)
        path = self.simulate_until(0.0, LevelUp(y=barrier), stream)
        extension = 0
        while True:
            shifted = argmin_split(path)
            if isinstance(rule, LevelUp) or len(shifted.values) > int(round(rule.T / self.dt)):
                break
            extension += 1
            if extension > Config.MAX_BARRIER_EXTENSIONS:
                raise HorizonTooShortError(f"Z↑ path shorter than horizon {rule.T:g}")
            barrier += Config.BARRIER_EXTENSION
            path = self.extend(path, LevelUp(y=barrier), stream.child(extension))

        shifted.metadata.update({"barrier": barrier,
                                 "residual_bound": math.exp(-summary.kappa * float(shifted.values[-1]))})
        if isinstance(rule, LevelUp):
            return truncate_at_level(shifted, rule.y)
        steps = int(round(rule.T / self.dt))
        return PathSample(dt=self.dt, values=shifted.values[:steps + 1], stop_reason=StopReason.HORIZON_REACHED,
                          start_level=0.0, metadata=shifted.metadata)


def simulate_until(spec: ProcessSpec, start_level: float, rule: StopRule, dt: float,
                   stream: RngStream) -> PathSample:
    return PathSimulator(spec, dt).simulate_until(start_level, rule, stream)


def simulate_v_up(spec: ProcessSpec, stop: LevelUp, dt: float, stream: RngStream,
                  algo: VUpAlgorithm = VUpAlgorithm.AUTO, x0: Optional[float] = None,
                  ymax: Optional[float] = None) -> PathSample:
    return PathSimulator(spec, dt).simulate_v_up(stop, stream, algo=algo, x0=x0, ymax=ymax)


def simulate_z_up(spec: ProcessSpec, rule: Union[LevelUp, Horizon], dt: float,
                  stream: RngStream) -> PathSample:
    return PathSimulator(spec, dt).simulate_z_up(rule, stream)
