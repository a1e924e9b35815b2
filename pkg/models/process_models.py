"""
Models describing spectrally one-sided Lévy processes and how to sample them.
The ProcessSpec catalog is a discriminated union keyed by `kind`.
"""

from enum import Enum
from typing import Annotated, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator, model_validator


class Side(str, Enum):
    """Which half-line carries the jumps"""
    SPECTRALLY_NEGATIVE = "spectrally_negative"
    SPECTRALLY_POSITIVE = "spectrally_positive"


class Regime(str, Enum):
    """Long-run behaviour read off the sign of Ψ'(0)"""
    DRIFTS_UP = "drifts_up"
    OSCILLATES = "oscillates"
    DRIFTS_DOWN = "drifts_down"


class _SpecBase(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class BrownianDrift(_SpecBase):
    """Q-scaled Brownian motion with drift −γ: Ψ(λ) = qλ²/2 − γλ"""
    kind: Literal["brownian_drift"] = "brownian_drift"
    q: float = Field(gt=0)
    gamma: float

    @property
    def side(self) -> Side:
        return Side.SPECTRALLY_NEGATIVE

    @property
    def unbounded_variation(self) -> bool:
        return True


class StableSN(_SpecBase):
    """Spectrally negative α-stable process with drift: Ψ(λ) = cλ^α + drift·λ"""
    kind: Literal["stable_sn"] = "stable_sn"
    c: float = Field(gt=0)
    alpha: float = Field(gt=1.0, le=2.0)
    drift: float = 0.0

    @property
    def side(self) -> Side:
        return Side.SPECTRALLY_NEGATIVE

    @property
    def unbounded_variation(self) -> bool:
        return True


class BVDriftCPP(_SpecBase):
    """γ*·t minus a compound Poisson process with exponential jumps of mean `jump_mean`"""
    kind: Literal["bv_drift_cpp"] = "bv_drift_cpp"
    gamma_star: float
    jump_rate: float = Field(ge=0)
    jump_mean: float = Field(gt=0)

    @field_validator("gamma_star")
    @classmethod
    def _not_opposite_of_subordinator(cls, value: float) -> float:
        if value <= 0:
            raise ValueError(
                "gamma_star must be positive, otherwise V is the opposite of a subordinator"
            )
        return value

    @property
    def side(self) -> Side:
        return Side.SPECTRALLY_NEGATIVE

    @property
    def unbounded_variation(self) -> bool:
        return False


class PoissonMultiple(_SpecBase):
    """Y = α·N for a Poisson process N of intensity `rate`"""
    kind: Literal["poisson_multiple"] = "poisson_multiple"
    alpha_jump: float = Field(gt=0)
    rate: float = Field(gt=0)

    @property
    def side(self) -> Side:
        return Side.SPECTRALLY_POSITIVE

    @property
    def unbounded_variation(self) -> bool:
        return False


class DualOf(_SpecBase):
    """Z := −V for a spectrally negative inner spec"""
    kind: Literal["dual_of"] = "dual_of"
    inner: "ProcessSpec"

    @field_validator("inner")
    @classmethod
    def _inner_is_spectrally_negative(cls, value: "ProcessSpec") -> "ProcessSpec":
        if value.side != Side.SPECTRALLY_NEGATIVE:
            raise ValueError("dual_of wraps only spectrally negative specs")
        return value

    @property
    def side(self) -> Side:
        return Side.SPECTRALLY_POSITIVE

    @property
    def unbounded_variation(self) -> bool:
        return self.inner.unbounded_variation


ProcessSpec = Annotated[
    Union[BrownianDrift, StableSN, BVDriftCPP, PoissonMultiple, DualOf],
    Field(discriminator="kind"),
]

DualOf.model_rebuild()

PROCESS_SPEC_ADAPTER: TypeAdapter = TypeAdapter(ProcessSpec)


def parse_process_spec(data) -> ProcessSpec:
    """Validate a mapping (or JSON text) into a ProcessSpec"""
    if isinstance(data, (str, bytes)):
        return PROCESS_SPEC_ADAPTER.validate_json(data)
    return PROCESS_SPEC_ADAPTER.validate_python(data)


class ExponentSummary(BaseModel):
    """Immutable summary of the Laplace exponent of one spec"""
    model_config = ConfigDict(frozen=True)

    kappa: float = Field(ge=0)
    psi_prime_at_kappa: float = Field(ge=0)
    psi_at_kappa_plus_1: float = Field(gt=0)
    sigma: float = Field(ge=1, le=2)
    beta: float = Field(ge=1, le=2)
    regime: Regime
    kappa_tolerance: float = 0.0

    @model_validator(mode="after")
    def _indices_ordered(self) -> "ExponentSummary":
        if self.sigma > self.beta:
            raise ValueError("sigma must not exceed beta")
        return self


# Stop rules for the path driver

class Horizon(_SpecBase):
    rule: Literal["horizon"] = "horizon"
    T: float = Field(ge=0)


class LevelUp(_SpecBase):
    rule: Literal["level_up"] = "level_up"
    y: float = Field(gt=0)


class BarrierThenLastZero(_SpecBase):
    rule: Literal["barrier_then_lastzero"] = "barrier_then_lastzero"
    b: float = Field(gt=0)


class TwoSidedExit(_SpecBase):
    """Stop on entering (−∞, lower] (rejected) or [upper, ∞) (level hit)"""
    rule: Literal["two_sided_exit"] = "two_sided_exit"
    lower: float
    upper: float

    @model_validator(mode="after")
    def _ordered(self) -> "TwoSidedExit":
        if self.lower >= self.upper:
            raise ValueError("lower must be below upper")
        return self


StopRule = Annotated[
    Union[Horizon, LevelUp, BarrierThenLastZero, TwoSidedExit],
    Field(discriminator="rule"),
]


class StopReason(str, Enum):
    HORIZON_REACHED = "horizon_reached"
    LEVEL_HIT = "level_hit"
    BARRIER_HIT = "barrier_hit"
    REJECTED = "rejected"


class RngStream(_SpecBase):
    """
    A reproducible random stream keyed by (seed, stream_id).
    Children derived with `child` are independent of the parent and of each other.
    """
    seed: int = Field(ge=0, lt=2**64)
    stream_id: int = Field(ge=0, lt=2**64)
    spawn_key: Tuple[int, ...] = ()

    def child(self, index: int) -> "RngStream":
        return RngStream(seed=self.seed, stream_id=self.stream_id,
                         spawn_key=self.spawn_key + (index,))

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.spawn_key))
        return np.random.Generator(np.random.PCG64(sequence))


class VUpAlgorithm(str, Enum):
    AUTO = "auto"
    LAST_PASSAGE_SHIFT = "last_passage_shift"
    REJECTION = "rejection"
    BESSEL3 = "bessel3"


class VariantTag(str, Enum):
    I_V_UP = "I_V_up"
    I_V = "I_V"
    I_V_SHARP = "I_V_sharp"
    I_Z = "I_Z"
    I_Z_UP = "I_Z_up"
    A_Y = "A_y"
    S_T_SHARP = "S_T_sharp"
    POISSON_EXACT = "Poisson_exact"


class FunctionalVariant(_SpecBase):
    """Which exponential functional (or decomposition variable) to sample"""
    tag: VariantTag
    y: Optional[float] = Field(default=None, gt=0)
    K: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _parameters_present(self) -> "FunctionalVariant":
        if self.tag == VariantTag.A_Y and self.y is None:
            raise ValueError("A_y requires a positive y")
        if self.tag != VariantTag.A_Y and self.y is not None:
            raise ValueError("only A_y takes a y parameter")
        if self.tag != VariantTag.POISSON_EXACT and self.K is not None:
            raise ValueError("only Poisson_exact takes a K parameter")
        return self
