"""Shared domain types: schema, examples, predictions, seeded RNG and the
time-decayed class-size estimator used by every resampling strategy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from smoclust._backend import Rng

CLASSES = (0, 1)


@dataclass(frozen=True)
class AttributeSpec:
    """One attribute: numeric with a closed range, or categorical.

    Ordinal attributes are represented as categorical.
    """

    kind: str  # "numeric" | "categorical"
    lo: float = 0.0
    hi: float = 0.0
    categories: tuple[str, ...] = ()

    @staticmethod
    def numeric(lo: float, hi: float) -> "AttributeSpec":
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError(f"numeric range must satisfy lo < hi, got ({lo}, {hi})")
        return AttributeSpec("numeric", lo=float(lo), hi=float(hi))

    @staticmethod
    def categorical(categories: Sequence[str]) -> "AttributeSpec":
        cats = tuple(str(c) for c in categories)
        if not cats:
            raise ValueError("categorical attribute needs at least one category")
        if len(set(cats)) != len(cats):
            raise ValueError("categorical identifiers must be unique")
        return AttributeSpec("categorical", categories=cats)

    @property
    def is_numeric(self) -> bool:
        return self.kind == "numeric"

    @property
    def n_categories(self) -> int:
        return len(self.categories)


@dataclass(frozen=True)
class Schema:
    """Ordered attribute specs plus the fixed binary class set {0, 1}."""

    attributes: tuple[AttributeSpec, ...]
    classes: tuple[int, int] = CLASSES

    def __post_init__(self):
        if tuple(self.classes) != CLASSES:
            raise ValueError("only binary classification with classes (0, 1) is supported")
        if not self.attributes:
            raise ValueError("schema needs at least one attribute")

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    def kinds_array(self) -> np.ndarray:
        """0 per numeric slot, category count per categorical slot."""
        return np.array(
            [0 if a.is_numeric else a.n_categories for a in self.attributes],
            dtype=np.int64,
        )

    def validate_values(self, values: np.ndarray) -> None:
        if values.shape != (self.n_attributes,):
            raise ValueError(
                f"expected {self.n_attributes} value slots, got shape {values.shape}"
            )
        for i, attr in enumerate(self.attributes):
            v = values[i]
            if attr.is_numeric:
                if not math.isfinite(v):
                    raise ValueError(f"attribute {i} must be finite, got {v}")
            else:
                idx = int(v)
                if idx != v or not 0 <= idx < attr.n_categories:
                    raise ValueError(f"attribute {i} has invalid category index {v}")


def numeric_schema(dim: int, lo: float = -1.0, hi: float = 1.0) -> Schema:
    return Schema(tuple(AttributeSpec.numeric(lo, hi) for _ in range(dim)))


@dataclass
class Example:
    """One stream element: attribute values, optional label, time step.

    Categorical slots store the category index as a float.
    """

    values: np.ndarray
    label: Optional[int] = None
    timestamp: int = 0

    @staticmethod
    def create(schema: Schema, values, label=None, timestamp: int = 0) -> "Example":
        arr = np.ascontiguousarray(values, dtype=np.float64)
        schema.validate_values(arr)
        if label is not None and label not in CLASSES:
            raise ValueError(f"label must be 0 or 1, got {label}")
        return Example(arr, label, timestamp)


@dataclass(frozen=True)
class Prediction:
    """Per-class scores and the winning class (ties resolve to class 0)."""

    predicted: int
    scores: tuple[float, float]

    @staticmethod
    def from_scores(score0: float, score1: float) -> "Prediction":
        return Prediction(1 if score1 > score0 else 0, (score0, score1))


class ClassSizeEstimator:
    """Time-decayed per-class size estimate.

    The very first update sets both sizes to 1/2; afterwards each size
    follows ``([observed == c] + theta * size * k) / (k + 1)`` where ``k``
    counts updates since the first one.  Sizes are compared directly and are
    not renormalised.
    """

    __slots__ = ("theta", "_s0", "_s1", "updates")

    def __init__(self, theta: float):
        if not 0.0 < theta < 1.0:
            raise ValueError(f"fading factor must lie in (0, 1), got {theta}")
        self.theta = float(theta)
        self._s0 = 0.0
        self._s1 = 0.0
        self.updates = 0

    def reset(self) -> None:
        self._s0 = 0.0
        self._s1 = 0.0
        self.updates = 0

    def update(self, observed_class: int) -> None:
        if observed_class not in CLASSES:
            raise ValueError(f"observed class must be 0 or 1, got {observed_class}")
        if self.updates == 0:
            self._s0 = 0.5
            self._s1 = 0.5
        else:
            k = float(self.updates)
            denom = k + 1.0
            theta = self.theta
            self._s0 = ((1.0 if observed_class == 0 else 0.0) + theta * self._s0 * k) / denom
            self._s1 = ((1.0 if observed_class == 1 else 0.0) + theta * self._s1 * k) / denom
        self.updates += 1

    @property
    def sizes(self) -> tuple[float, float]:
        return self._s0, self._s1

    def size(self, c: int) -> float:
        return self._s1 if c == 1 else self._s0

    def minority(self) -> int:
        """Class with the strictly smaller size; ties go to class 1."""
        if self.updates == 0:
            raise ValueError("class sizes requested before any observation")
        return 0 if self._s0 < self._s1 else 1

    def majority(self) -> int:
        return 1 - self.minority()


_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from heterogeneous parts (strings, ints).

    Used to give every (approach, stream, run, role) cell its own
    reproducible generator, independent of execution order.
    """
    return _fnv1a("|".join(str(p) for p in parts).encode("utf-8"))


def make_rng(*parts) -> Rng:
    return Rng(derive_seed(*parts))
