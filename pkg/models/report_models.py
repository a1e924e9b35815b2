"""
Models for estimates, check outcomes, suite reports and run configurations.
These are the documents the CLI reads and writes as JSON.
"""

import math
import operator
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    PositiveFloat,
    field_serializer,
    field_validator,
    model_validator,
)

from config import Config
from .process_models import FunctionalVariant, ProcessSpec, VUpAlgorithm, VariantTag


_COMPARISONS = {
    "<=": operator.le,
    "<": operator.lt,
    ">=": operator.ge,
    ">": operator.gt,
}


class MCEstimate(BaseModel):
    """Monte Carlo estimate with a deterministic truncation-bias bound"""
    model_config = ConfigDict(frozen=True)

    mean: float
    stderr: float = Field(ge=0)
    n: int = Field(ge=1)
    bias_bound: Optional[float] = Field(default=None, ge=0)  # None: no finite bound known
    dt: float = Field(gt=0)
    variant: VariantTag
    y: Optional[float] = None

    def interval(self, z: float = 3.0) -> tuple:
        """Confidence interval widened by the bias bound"""
        half = z * self.stderr + (self.bias_bound or 0.0)
        return self.mean - half, self.mean + half


class RejectionBiasStudy(BaseModel):
    """Entrance-law bias of the rejection sampler: estimates from x0 and x0/2"""
    model_config = ConfigDict(frozen=True)

    x0: float = Field(gt=0)
    coarse: MCEstimate
    fine: MCEstimate
    shift: float
    shift_stderr: float = Field(ge=0)


class Anchor(str, Enum):
    """Result a check verifies; every CheckReport names exactly one"""
    INCREMENT_LAW = "increment_law"
    EXPONENT_ROOT = "exponent_root"
    EXPONENT_INVERSE = "exponent_inverse"
    SCALE_FUNCTION = "scale_function"
    TWO_SIDED_EXIT = "two_sided_exit"
    FIRST_MOMENT = "first_moment"
    MOMENT_BOUND = "moment_bound"
    EXPONENTIAL_MOMENTS = "exponential_moments"
    RANDOM_AFFINE_EQUATION = "random_affine_equation"
    LAST_PASSAGE_SPLIT = "last_passage_split"
    LEFT_TAIL_COMPARISON = "left_tail_comparison"
    DUFRESNE_IDENTITY = "dufresne_identity"
    BROWNIAN_LAPLACE = "brownian_laplace"
    BROWNIAN_RIGHT_TAIL = "brownian_right_tail"
    RIGHT_TAIL = "right_tail"
    LEFT_TAIL = "left_tail"
    LOG_CONCAVITY = "log_concavity"
    BOUNDED_VARIATION_SUPPORT = "bounded_variation_support"
    POISSON_PRODUCT_FORMULA = "poisson_product_formula"
    POISSON_LOG_LAPLACE = "poisson_log_laplace"
    POISSON_LEFT_TAIL = "poisson_left_tail"
    SPECTRALLY_POSITIVE_ORDER = "spectrally_positive_order"
    SUBADDITIVITY = "subadditivity"


class CheckReport(BaseModel):
    """Outcome of one verification check"""
    model_config = ConfigDict(populate_by_name=True)

    name: str
    statistic: float
    threshold: float
    comparison: str = "<="
    passed: bool = Field(alias="pass")
    advisory: bool = False
    provenance: Anchor
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("statistic", "threshold", mode="before")
    @classmethod
    def _read_non_finite(cls, value: Any) -> Any:
        # "inf", "-inf" and "nan" as written by the serializer below
        return float(value) if isinstance(value, str) else value

    @field_serializer("statistic", "threshold", when_used="json")
    def _write_non_finite(self, value: float) -> Any:
        return value if math.isfinite(value) else str(value)

    @model_validator(mode="after")
    def _pass_matches_comparison(self) -> "CheckReport":
        if self.comparison not in _COMPARISONS:
            raise ValueError(f"unknown comparison '{self.comparison}'")
        if self.passed != bool(_COMPARISONS[self.comparison](self.statistic, self.threshold)):
            raise ValueError("pass flag disagrees with statistic and threshold")
        return self

    @classmethod
    def evaluate(cls, name: str, statistic: float, threshold: float, comparison: str = "<=", *,
                 provenance: Anchor, advisory: bool = False,
                 metadata: Optional[Dict[str, Any]] = None) -> "CheckReport":
        """Build a report whose pass flag is derived from the comparison"""
        statistic = float(statistic)
        threshold = float(threshold)
        passed = bool(_COMPARISONS[comparison](statistic, threshold))
        return cls(name=name, statistic=statistic, threshold=threshold, comparison=comparison,
                   passed=passed, advisory=advisory, provenance=provenance,
                   metadata=metadata or {})


class Report(BaseModel):
    """Aggregated outcome of a verification suite"""
    model_config = ConfigDict(populate_by_name=True)

    suite: str
    config: Dict[str, Any] = Field(default_factory=dict)
    checks: List[CheckReport] = Field(default_factory=list)
    overall_pass: bool
    wall_time: Optional[float] = None
    error: Optional[str] = None

    @model_validator(mode="after")
    def _overall_matches_checks(self) -> "Report":
        expected = self.error is None and all(c.passed for c in self.checks if not c.advisory)
        if self.overall_pass != expected:
            raise ValueError("overall_pass disagrees with the non-advisory checks")
        return self

    @classmethod
    def from_checks(cls, suite: str, config: Dict[str, Any], checks: List[CheckReport],
                    wall_time: Optional[float] = None, error: Optional[str] = None) -> "Report":
        overall = error is None and all(c.passed for c in checks if not c.advisory)
        return cls(suite=suite, config=config, checks=checks, overall_pass=overall,
                   wall_time=wall_time, error=error)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


class SuiteOverrides(BaseModel):
    """Per-suite knobs that replace the acceptance defaults"""
    model_config = ConfigDict(extra="forbid")

    n: Optional[int] = Field(default=None, ge=2)
    n_large: Optional[int] = Field(default=None, ge=2)
    dt: Optional[PositiveFloat] = None
    y: Optional[PositiveFloat] = None
    x0: Optional[PositiveFloat] = None
    ks_threshold: Optional[float] = Field(default=None, gt=0, lt=1)
    dkw_delta: Optional[float] = Field(default=None, gt=0, lt=1)


class RunConfig(BaseModel):
    """Validated configuration of one CLI run"""
    model_config = ConfigDict(extra="forbid")

    process: Optional[ProcessSpec] = None
    seed: int = Field(ge=0, lt=2**64)
    variant: Optional[FunctionalVariant] = None
    v_up_algo: VUpAlgorithm = VUpAlgorithm.AUTO
    y: PositiveFloat = Field(default_factory=Config.get_default_truncation_level)
    dt: PositiveFloat = Field(default_factory=Config.get_default_dt)
    n: int = Field(default_factory=Config.get_default_n, ge=2)
    workers: int = Field(default_factory=Config.get_default_workers, ge=1)
    x_grid: List[PositiveFloat] = Field(default_factory=list)
    lambda_grid: List[NonNegativeFloat] = Field(default_factory=list)
    horizon: Optional[PositiveFloat] = None
    out_dir: str = Field(default_factory=Config.get_output_dir)
    overrides: SuiteOverrides = Field(default_factory=SuiteOverrides)

    def echo(self) -> Dict[str, Any]:
        """Config as embedded in reports; worker count and output paths excluded"""
        return self.model_dump(mode="json", exclude={"workers", "out_dir"})
