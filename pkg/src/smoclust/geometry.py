"""Hypersphere sampling geometry.

All sampling used to synthesise minority examples reduces to four
primitives: a uniform random direction, the positive line/hull intercept,
the half-Gaussian walk towards that intercept (densest at a chosen interior
anchor) and a plain axis-wise Gaussian around the centre.  The numeric work
lives in the kernel backend; this module adds the value types and the
precondition checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from smoclust import _backend


@dataclass(frozen=True)
class HyperSphere:
    centre: np.ndarray
    radius: float

    def __post_init__(self):
        centre = np.ascontiguousarray(self.centre, dtype=np.float64)
        object.__setattr__(self, "centre", centre)
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius < 0.0:
            raise ValueError(f"radius must be non-negative, got {self.radius}")
        if not np.all(np.isfinite(centre)):
            raise ValueError("sphere centre must be finite")

    @property
    def dim(self) -> int:
        return self.centre.shape[0]

    def contains(self, point: np.ndarray, rel_tol: float = 1e-12) -> bool:
        dist = math.sqrt(float(np.sum((point - self.centre) ** 2)))
        return dist <= self.radius * (1.0 + rel_tol) + rel_tol


@dataclass(frozen=True)
class LineParam:
    """Line through ``origin`` and ``through``, parameterised as
    origin + t * (through - origin)."""

    origin: np.ndarray
    through: np.ndarray

    def __post_init__(self):
        origin = np.ascontiguousarray(self.origin, dtype=np.float64)
        through = np.ascontiguousarray(self.through, dtype=np.float64)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "through", through)
        if origin.shape != through.shape:
            raise ValueError("line endpoints must share a dimension")
        if np.array_equal(origin, through):
            raise ValueError("degenerate line: origin equals through point")

    def at(self, t: float) -> np.ndarray:
        return self.origin + t * (self.through - self.origin)


def unit_direction(n: int, rng) -> np.ndarray:
    """Unit vector uniform on the (n-1)-sphere."""
    if n < 1:
        raise ValueError("direction needs at least one dimension")
    return _backend.unit_direction(n, rng)


def positive_intercept(line: LineParam, sphere: HyperSphere) -> float:
    """The positive root t at which the line meets the sphere hull.

    Requires the line origin strictly inside the sphere.
    """
    if line.origin.shape[0] != sphere.dim:
        raise ValueError("line and sphere dimensions differ")
    return _backend.positive_intercept(
        line.origin, line.through, sphere.centre, sphere.radius
    )


def skewed_sample(anchor_point: np.ndarray, sphere: HyperSphere, rng) -> np.ndarray:
    """Sample inside ``sphere`` with maximum density at ``anchor_point``.

    A zero-radius sphere degenerates to its centre.
    """
    anchor = np.ascontiguousarray(anchor_point, dtype=np.float64)
    if anchor.shape[0] != sphere.dim:
        raise ValueError("anchor and sphere dimensions differ")
    return _backend.skewed_sample(anchor, sphere.centre, sphere.radius, rng)


def gaussian_in_sphere(sphere: HyperSphere, rng) -> np.ndarray:
    """Gaussian sample around the centre, guaranteed inside the hull.

    Each coordinate is drawn with sigma = radius / 3, rejected while outside
    (up to 100 attempts) and finally clamped radially.  A zero-radius sphere
    degenerates to its centre.
    """
    return _backend.gaussian_in_sphere(sphere.centre, sphere.radius, rng)
