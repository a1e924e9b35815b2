"""
Models that carry sample arrays: simulated paths and empirical CDFs.
"""

import csv
import math
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .process_models import StopReason


class PathSample(BaseModel):
    """A path on the grid t_i = i·dt; values[0] is the start level"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    dt: float = Field(gt=0)
    values: np.ndarray
    stop_reason: StopReason
    start_level: float = 0.0
    stop_level: Optional[float] = None
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("values", mode="before")
    @classmethod
    def _one_dimensional(cls, value) -> np.ndarray:
        array = np.asarray(value, dtype=float)
        if array.ndim != 1 or array.size == 0:
            raise ValueError("a path needs at least one grid point")
        return array

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) * self.dt

    @property
    def duration(self) -> float:
        return (self.values.size - 1) * self.dt

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Write `t,value` rows, one per grid point"""
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t", "value"])
            for t, value in zip(self.times, self.values):
                writer.writerow([repr(float(t)), repr(float(value))])
        return path


class EcdfBand(BaseModel):
    """Empirical CDF x ↦ #{samples ≤ x}/n with a DKW confidence band"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sorted_values: np.ndarray
    n: int = Field(ge=1)
    delta: float = Field(gt=0, lt=1)

    @property
    def epsilon(self) -> float:
        """DKW half-width √(ln(2/δ)/(2n))"""
        return math.sqrt(math.log(2.0 / self.delta) / (2.0 * self.n))

    def cdf(self, x):
        counts = np.searchsorted(self.sorted_values, np.asarray(x, dtype=float), side="right")
        result = counts / self.n
        return float(result) if np.ndim(result) == 0 else result

    def survival(self, x):
        return 1.0 - np.asarray(self.cdf(x))

    def lower(self, x):
        return np.clip(np.asarray(self.cdf(x)) - self.epsilon, 0.0, 1.0)

    def upper(self, x):
        return np.clip(np.asarray(self.cdf(x)) + self.epsilon, 0.0, 1.0)
