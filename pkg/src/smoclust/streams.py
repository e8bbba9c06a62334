"""Artificial drifting-stream generation and real-stream CSV ingestion.

Stream names follow the factor grammar ``[StaticImP_]FACTOR[+FACTOR...]``
with factors Im / Split / Move / Merge / Borderline / Rare.  A name plus a
seed, length and dimension count fully determines the example sequence.
The underlying concept is a set of minority sub-cluster spheres inside the
(-1, 1)^d box, a minority prior and a safe/borderline/rare example-type mix,
all interpolated linearly across the drift window.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from smoclust import _backend
from smoclust.core import AttributeSpec, Example, Schema, make_rng, numeric_schema

SUBCLUSTER_RADIUS = 0.2
C_SAFE = 0.7
C_BORDER = 1.3
RING_RADIUS = 0.55
RARE_JITTER = 0.05
MAX_REJECTION_TRIES = 10_000
# Fraction of the stream length where the gradual drift starts and ends.
DRIFT_WINDOW = (0.35, 0.5)

_FACTOR_KINDS = ("Im", "Split", "Move", "Merge", "Borderline", "Rare")
_NAME_RE = re.compile(r"^(?:StaticIm([0-9]+)_)?(.+)$")
_FACTOR_RE = re.compile(r"^(Im|Split|Move|Merge|Borderline|Rare)([0-9]+)$")


@dataclass(frozen=True)
class SubCluster:
    centre: np.ndarray
    radius: float


@dataclass(frozen=True)
class ConceptSpec:
    """Generative description of one underlying concept."""

    clusters: tuple[SubCluster, ...]
    minority_prior: float
    mix: tuple[float, float, float]  # safe / borderline / rare percentages
    dim: int

    def validate(self, check_separation: bool = True) -> None:
        if not 0.0 < self.minority_prior < 1.0:
            raise ValueError(f"minority prior must be in (0, 1), got {self.minority_prior}")
        if any(m < 0.0 for m in self.mix) or abs(sum(self.mix) - 100.0) > 1e-9:
            raise ValueError(f"example-type mix must be non-negative and sum to 100, got {self.mix}")
        if not self.clusters:
            raise ValueError("concept needs at least one minority sub-cluster")
        for sc in self.clusters:
            if np.max(np.abs(sc.centre)) + C_BORDER * sc.radius > 1.0:
                raise ValueError("sub-cluster border region leaves the domain box")
        if check_separation:
            for i in range(len(self.clusters)):
                for j in range(i + 1, len(self.clusters)):
                    a, b = self.clusters[i], self.clusters[j]
                    gap = math.sqrt(float(np.sum((a.centre - b.centre) ** 2)))
                    if gap < a.radius + b.radius:
                        raise ValueError("minority sub-clusters overlap")

    def centre_matrix(self) -> np.ndarray:
        cached = getattr(self, "_centre_matrix", None)
        if cached is None:
            cached = np.stack([sc.centre for sc in self.clusters])
            object.__setattr__(self, "_centre_matrix", cached)
        return cached

    def radius_vector(self) -> np.ndarray:
        cached = getattr(self, "_radius_vector", None)
        if cached is None:
            cached = np.array([sc.radius for sc in self.clusters])
            object.__setattr__(self, "_radius_vector", cached)
        return cached


def _format_pct(value: float) -> str:
    if value < 1.0:
        return "0" + str(int(round(value * 10.0)))
    if float(value).is_integer():
        return str(int(value))
    return str(value)


def _parse_pct(text: str) -> float:
    if len(text) > 1 and text[0] == "0":
        return float("0." + text[1:])
    return float(text)


@dataclass(frozen=True)
class StreamRecipe:
    """Parsed stream name: optional static imbalance plus drift factors."""

    static_pct: Optional[float]
    factors: tuple[tuple[str, float], ...]

    def factor(self, kind: str) -> Optional[float]:
        for k, v in self.factors:
            if k == kind:
                return v
        return None

    def canonical_name(self) -> str:
        parts = []
        for kind, value in self.factors:
            if kind in ("Split", "Move", "Merge"):
                parts.append(f"{kind}{int(value)}")
            else:
                parts.append(f"{kind}{_format_pct(value)}")
        name = "+".join(parts)
        if self.static_pct is not None:
            name = f"StaticIm{_format_pct(self.static_pct)}_{name}"
        return name


def parse_stream_name(name: str) -> StreamRecipe:
    m = _NAME_RE.match(name.strip())
    if not m or not m.group(2):
        raise ValueError(f"unparseable stream name: {name!r}")
    static_pct = _parse_pct(m.group(1)) if m.group(1) else None
    if static_pct is not None and not 0.0 < static_pct < 100.0:
        raise ValueError(f"static imbalance must be in (0, 100), got {static_pct}")
    factors = []
    seen = set()
    geometric = 0
    for token in m.group(2).split("+"):
        fm = _FACTOR_RE.match(token)
        if not fm:
            raise ValueError(f"unparseable factor {token!r} in stream name {name!r}")
        kind = fm.group(1)
        if kind in seen:
            raise ValueError(f"duplicate factor {kind!r} in stream name {name!r}")
        seen.add(kind)
        if kind in ("Split", "Move", "Merge"):
            value = float(int(fm.group(2)))
            geometric += 1
            low = 2 if kind == "Split" else 1
            if not low <= value <= 8:
                raise ValueError(f"{kind} cluster count must be in [{low}, 8], got {int(value)}")
        else:
            value = _parse_pct(fm.group(2))
            if kind == "Im" and not 0.0 < value < 100.0:
                raise ValueError(f"Im ratio must be in (0, 100), got {value}")
            if kind in ("Borderline", "Rare") and not 0.0 < value <= 100.0:
                raise ValueError(f"{kind} share must be in (0, 100], got {value}")
        factors.append((kind, value))
    if geometric > 1:
        raise ValueError("at most one of Split/Move/Merge per stream name")
    b = next((v for k, v in factors if k == "Borderline"), 0.0)
    r = next((v for k, v in factors if k == "Rare"), 0.0)
    if b + r > 100.0:
        raise ValueError("Borderline and Rare shares exceed 100% together")
    return StreamRecipe(static_pct, tuple(factors))


def _ring_positions(n: int, dim: int, phase: float = 0.0) -> list[np.ndarray]:
    """Canonical sub-cluster layout: evenly spaced on a circle in the first
    two dimensions, zero elsewhere."""
    if dim < 2:
        raise ValueError("artificial streams need at least two dimensions")
    centres = []
    for i in range(n):
        angle = phase + 2.0 * math.pi * i / n
        c = np.zeros(dim, dtype=np.float64)
        c[0] = RING_RADIUS * math.cos(angle)
        c[1] = RING_RADIUS * math.sin(angle)
        centres.append(c)
    return centres


def _make_clusters(centres: list[np.ndarray]) -> tuple[SubCluster, ...]:
    return tuple(SubCluster(c, SUBCLUSTER_RADIUS) for c in centres)


@dataclass(frozen=True)
class DriftScript:
    """Start/end concepts plus the window over which they interpolate."""

    t0: int
    t1: int
    spec0: ConceptSpec
    spec1: ConceptSpec
    mode: str  # pairwise | one_to_many | many_to_one

    def concept_at(self, t: int) -> ConceptSpec:
        if self.t1 <= self.t0:
            return self.spec0 if t < self.t0 else self.spec1
        a = (t - self.t0) / (self.t1 - self.t0)
        if a <= 0.0:
            return self.spec0
        if a >= 1.0:
            return self.spec1
        return self._interpolate(a)

    def _interpolate(self, a: float) -> ConceptSpec:
        s0, s1 = self.spec0, self.spec1
        prior = s0.minority_prior + a * (s1.minority_prior - s0.minority_prior)
        mix = tuple(m0 + a * (m1 - m0) for m0, m1 in zip(s0.mix, s1.mix))
        if self.mode == "one_to_many":
            src = s0.clusters[0]
            pairs = [(src, dst) for dst in s1.clusters]
        elif self.mode == "many_to_one":
            dst = s1.clusters[0]
            pairs = [(src, dst) for src in s0.clusters]
        else:
            pairs = list(zip(s0.clusters, s1.clusters))
        clusters = tuple(
            SubCluster(
                src.centre + a * (dst.centre - src.centre),
                src.radius + a * (dst.radius - src.radius),
            )
            for src, dst in pairs
        )
        return ConceptSpec(clusters, prior, mix, s0.dim)


def build_script(recipe: StreamRecipe, dim: int, t0: int, t1: int) -> DriftScript:
    """Materialise the start and end concepts for a parsed stream name."""
    prior0 = (recipe.static_pct / 100.0) if recipe.static_pct is not None else 0.5
    im = recipe.factor("Im")
    prior1 = (im / 100.0) if im is not None else prior0
    split_n = recipe.factor("Split")
    move_n = recipe.factor("Move")
    merge_n = recipe.factor("Merge")
    n0 = int(move_n or merge_n or 1)
    clusters0 = _make_clusters(_ring_positions(n0, dim))
    mode = "pairwise"
    if split_n is not None:
        n = int(split_n)
        clusters1 = _make_clusters(_ring_positions(n, dim, phase=math.pi / n))
        mode = "one_to_many"
    elif move_n is not None:
        clusters1 = _make_clusters(_ring_positions(n0, dim, phase=math.pi / 2.0))
    elif merge_n is not None:
        clusters1 = _make_clusters([np.zeros(dim, dtype=np.float64)])
        mode = "many_to_one"
    else:
        clusters1 = clusters0
    b = recipe.factor("Borderline") or 0.0
    r = recipe.factor("Rare") or 0.0
    spec0 = ConceptSpec(clusters0, prior0, (100.0, 0.0, 0.0), dim)
    spec1 = ConceptSpec(clusters1, prior1, (100.0 - b - r, b, r), dim)
    spec0.validate()
    spec1.validate()
    return DriftScript(t0, t1, spec0, spec1, mode)


class RareGroups:
    """Transient rare-case group: one shared jitter centre, 1-3 members."""

    __slots__ = ("centre", "remaining")

    def __init__(self):
        self.centre: Optional[np.ndarray] = None
        self.remaining = 0


def uniform_in_ball(dim: int, radius: float, rng) -> np.ndarray:
    direction = _backend.unit_direction(dim, rng)
    u = rng.uniform()
    return direction * (radius * u ** (1.0 / dim))


def _clear_of_clusters(point: np.ndarray, spec: ConceptSpec, margin: float) -> bool:
    diffs = spec.centre_matrix() - point
    dists = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
    return bool(np.all(dists > C_BORDER * spec.radius_vector() + margin))


def _sample_rare(spec: ConceptSpec, rng, groups: RareGroups) -> np.ndarray:
    usable = (
        groups.remaining > 0
        and groups.centre is not None
        and np.max(np.abs(groups.centre)) < 1.0 - RARE_JITTER
        and _clear_of_clusters(groups.centre, spec, RARE_JITTER)
    )
    if not usable:
        for _ in range(MAX_REJECTION_TRIES):
            point = np.empty(spec.dim, dtype=np.float64)
            for i in range(spec.dim):
                point[i] = (2.0 * rng.uniform() - 1.0) * (1.0 - RARE_JITTER)
            if _clear_of_clusters(point, spec, RARE_JITTER):
                break
        else:
            raise RuntimeError("rare-case rejection failed: concept too crowded")
        groups.centre = point
        groups.remaining = 1 + rng.randint(3)
    groups.remaining -= 1
    return groups.centre + uniform_in_ball(spec.dim, RARE_JITTER, rng)


def sample_minority(spec: ConceptSpec, rng, groups: Optional[RareGroups] = None) -> np.ndarray:
    """One class-1 point: safe core, borderline shell or rare group,
    according to the concept's type mix."""
    if groups is None:
        groups = RareGroups()
    u = rng.uniform() * 100.0
    if u < spec.mix[0]:
        sc = spec.clusters[rng.randint(len(spec.clusters))]
        return sc.centre + uniform_in_ball(spec.dim, C_SAFE * sc.radius, rng)
    if u < spec.mix[0] + spec.mix[1]:
        sc = spec.clusters[rng.randint(len(spec.clusters))]
        direction = _backend.unit_direction(spec.dim, rng)
        r_in = C_SAFE * sc.radius
        r_out = C_BORDER * sc.radius
        w = rng.uniform()
        rho = (r_in**spec.dim + w * (r_out**spec.dim - r_in**spec.dim)) ** (1.0 / spec.dim)
        return sc.centre + direction * rho
    return _sample_rare(spec, rng, groups)


def sample_majority(spec: ConceptSpec, rng) -> np.ndarray:
    """One class-0 point: uniform over the box, rejected from every
    sub-cluster's border sphere."""
    for _ in range(MAX_REJECTION_TRIES):
        point = np.empty(spec.dim, dtype=np.float64)
        for i in range(spec.dim):
            point[i] = 2.0 * rng.uniform() - 1.0
        if _clear_of_clusters(point, spec, 0.0):
            return point
    raise RuntimeError("majority rejection failed: concept too crowded")


def sample_example(spec: ConceptSpec, rng, groups: Optional[RareGroups] = None) -> tuple[np.ndarray, int]:
    if rng.uniform() < spec.minority_prior:
        return sample_minority(spec, rng, groups), 1
    return sample_majority(spec, rng), 0


def balanced_holdout(spec: ConceptSpec, m: int, rng) -> list[Example]:
    """Class-balanced test set drawn from one concept, shuffled."""
    if m % 2 != 0:
        raise ValueError(f"holdout size must be even, got {m}")
    groups = RareGroups()
    examples = [Example(sample_minority(spec, rng, groups), 1, 0) for _ in range(m // 2)]
    examples += [Example(sample_majority(spec, rng), 0, 0) for _ in range(m // 2)]
    for i in range(len(examples) - 1, 0, -1):
        j = rng.randint(i + 1)
        examples[i], examples[j] = examples[j], examples[i]
    return examples


class ArtificialStream:
    """Deterministic drifting stream for one (name, seed, length, dim)."""

    def __init__(
        self,
        name: str,
        seed: int,
        length: int,
        dim: int = 5,
        drift_start: Optional[int] = None,
        drift_end: Optional[int] = None,
    ):
        self.recipe = parse_stream_name(name)
        self.name = self.recipe.canonical_name()
        self.seed = seed
        self.length = length
        self.dim = dim
        t0 = drift_start if drift_start is not None else int(round(DRIFT_WINDOW[0] * length))
        t1 = drift_end if drift_end is not None else int(round(DRIFT_WINDOW[1] * length))
        if not 0 <= t0 <= t1 <= length:
            raise ValueError(f"invalid drift window [{t0}, {t1}] for length {length}")
        self.script = build_script(self.recipe, dim, t0, t1)
        self._schema = numeric_schema(dim)
        self._rng = make_rng("stream", self.name, seed, length, dim)
        self._groups = RareGroups()
        self._t = 0
        self._cache_key: Optional[int] = None
        self._cache_spec: Optional[ConceptSpec] = None

    def schema(self) -> Schema:
        return self._schema

    def concept_at(self, t: int) -> ConceptSpec:
        return self.script.concept_at(t)

    def _sampling_concept(self, t: int) -> ConceptSpec:
        # Quantise the interpolation to 1024 sub-steps so the per-example
        # concept object is cached across consecutive steps.
        t0, t1 = self.script.t0, self.script.t1
        if t1 <= t0:
            key = 0 if t < t0 else 1024
        else:
            a = (t - t0) / (t1 - t0)
            key = int(min(max(a, 0.0), 1.0) * 1024)
        if key != self._cache_key:
            self._cache_key = key
            if key <= 0:
                self._cache_spec = self.script.spec0
            elif key >= 1024:
                self._cache_spec = self.script.spec1
            else:
                self._cache_spec = self.script._interpolate(key / 1024.0)
        return self._cache_spec

    def next(self) -> Example:
        if self._t >= self.length:
            raise StopIteration("artificial stream exhausted")
        self._t += 1
        spec = self._sampling_concept(self._t)
        values, label = sample_example(spec, self._rng, self._groups)
        return Example(values, label, self._t)

    def __iter__(self):
        while self._t < self.length:
            yield self.next()


def schema_to_header(schema: Schema, names: Optional[list[str]] = None) -> str:
    parts = []
    for i, attr in enumerate(schema.attributes):
        name = names[i] if names else f"x{i}"
        if attr.is_numeric:
            parts.append(f"{name}:num({attr.lo!r}..{attr.hi!r})")
        else:
            parts.append(f"{name}:cat({'|'.join(attr.categories)})")
    label_name = names[-1] if names and len(names) == schema.n_attributes + 1 else "label"
    parts.append(f"{label_name}:class")
    return ",".join(parts)


def parse_header(line: str) -> tuple[Schema, list[str]]:
    fields = line.strip().split(",")
    if len(fields) < 2:
        raise ValueError("CSV header needs at least one attribute and the class column")
    attrs = []
    names = []
    for i, tok in enumerate(fields):
        name, sep, kind = tok.partition(":")
        if not sep:
            raise ValueError(f"malformed header field {tok!r}")
        last = i == len(fields) - 1
        if kind == "class":
            if not last:
                raise ValueError("class column must be last")
            names.append(name)
            continue
        if last:
            raise ValueError("last header column must be the class column")
        if kind.startswith("num(") and kind.endswith(")"):
            lo_s, sep2, hi_s = kind[4:-1].partition("..")
            if not sep2:
                raise ValueError(f"malformed numeric range in {tok!r}")
            attrs.append(AttributeSpec.numeric(float(lo_s), float(hi_s)))
        elif kind.startswith("cat(") and kind.endswith(")"):
            attrs.append(AttributeSpec.categorical(kind[4:-1].split("|")))
        else:
            raise ValueError(f"unknown attribute kind in {tok!r}")
        names.append(name)
    return Schema(tuple(attrs)), names


def write_stream_csv(fh, schema: Schema, examples) -> tuple[int, int]:
    """Write examples in the header'd CSV format; returns per-class counts."""
    fh.write(schema_to_header(schema) + "\n")
    counts = [0, 0]
    for ex in examples:
        parts = []
        for i, attr in enumerate(schema.attributes):
            if attr.is_numeric:
                parts.append(repr(float(ex.values[i])))
            else:
                parts.append(attr.categories[int(ex.values[i])])
        parts.append(str(int(ex.label)))
        counts[int(ex.label)] += 1
        fh.write(",".join(parts) + "\n")
    return counts[0], counts[1]


class CsvStream:
    """Finite stream loaded from the header'd CSV format."""

    def __init__(self, path: str):
        self.path = path
        self.name = path
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline()
            if not header.strip():
                raise ValueError(f"{path}: missing header line")
            self._schema, self.names = parse_header(header)
            self.examples: list[Example] = []
            cat_index = [
                {c: j for j, c in enumerate(a.categories)} if not a.is_numeric else None
                for a in self._schema.attributes
            ]
            for lineno, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                tokens = line.split(",")
                if len(tokens) != self._schema.n_attributes + 1:
                    raise ValueError(f"{path}:{lineno}: expected {self._schema.n_attributes + 1} columns")
                values = np.empty(self._schema.n_attributes, dtype=np.float64)
                for i, attr in enumerate(self._schema.attributes):
                    tok = tokens[i]
                    if attr.is_numeric:
                        try:
                            values[i] = float(tok)
                        except ValueError:
                            raise ValueError(f"{path}:{lineno}: non-numeric value {tok!r}") from None
                        if not math.isfinite(values[i]):
                            raise ValueError(f"{path}:{lineno}: non-finite value {tok!r}")
                    else:
                        idx = cat_index[i].get(tok)
                        if idx is None:
                            raise ValueError(f"{path}:{lineno}: unknown category {tok!r}")
                        values[i] = float(idx)
                if tokens[-1] not in ("0", "1"):
                    raise ValueError(f"{path}:{lineno}: class must be 0 or 1, got {tokens[-1]!r}")
                self.examples.append(Example(values, int(tokens[-1]), len(self.examples) + 1))
        self.length = len(self.examples)
        self._t = 0

    def schema(self) -> Schema:
        return self._schema

    def next(self) -> Example:
        if self._t >= self.length:
            raise StopIteration("CSV stream exhausted")
        ex = self.examples[self._t]
        self._t += 1
        return ex

    def __iter__(self):
        while self._t < self.length:
            yield self.next()
