"""Per-class micro-cluster maintenance and the cluster-level operations the
oversampler needs: hull-distance kNN, recency-weighted anchor selection,
combining clusters into one bounding sphere, and the surrounded-by-own-class
test."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from smoclust.geometry import HyperSphere


@dataclass
class MicroCluster:
    """Additive feature summary: count, linear and squared sums per
    dimension, plus linear and squared timestamp sums.

    Real (stream) updates are counted separately from synthetic ones so the
    anchor-selection weight tracks where real examples recently appeared.
    """

    n: float
    ls: np.ndarray
    ss: np.ndarray
    lst: float
    sst: float
    last_update: int
    id: int
    real_n: float = 0.0
    last_real_update: int = 0

    @staticmethod
    def from_point(point: np.ndarray, step: int, cluster_id: int, real: bool = True) -> "MicroCluster":
        p = np.asarray(point, dtype=np.float64)
        return MicroCluster(
            n=1.0,
            ls=p.copy(),
            ss=p * p,
            lst=float(step),
            sst=float(step) * float(step),
            last_update=step,
            id=cluster_id,
            real_n=1.0 if real else 0.0,
            last_real_update=step if real else 0,
        )

    def absorb(self, point: np.ndarray, step: int, real: bool = True) -> None:
        self.n += 1.0
        self.ls += point
        self.ss += point * point
        self.lst += float(step)
        self.sst += float(step) * float(step)
        self.last_update = step
        if real:
            self.real_n += 1.0
            self.last_real_update = step

    def centre(self) -> np.ndarray:
        if self.n < 1.0:
            raise ValueError("empty micro-cluster has no centre")
        return self.ls / self.n

    def rms_deviation(self) -> float:
        if self.n < 1.0:
            raise ValueError("empty micro-cluster has no deviation")
        centre = self.ls / self.n
        var = self.ss / self.n - centre * centre
        return math.sqrt(float(var.clip(min=0.0).sum()) / var.shape[0])

    def radius(self, radius_factor: float, eps_singleton: float) -> float:
        """radius_factor times the RMS per-dimension deviation, floored at
        eps_singleton so singleton or degenerate clusters stay usable."""
        return max(eps_singleton, radius_factor * self.rms_deviation())

    def mean_timestamp(self) -> float:
        return self.lst / self.n

    def relevance_stamp(self) -> float:
        """Recency estimate: mean timestamp plus one timestamp deviation, so
        a steadily updated long-lived cluster is not considered stale."""
        mean = self.lst / self.n
        var = self.sst / self.n - mean * mean
        return mean + math.sqrt(max(0.0, var))

    def snapshot(self) -> tuple:
        return (
            self.id,
            self.n,
            tuple(self.ls.tolist()),
            tuple(self.ss.tolist()),
            self.lst,
            self.sst,
            self.last_update,
            self.real_n,
            self.last_real_update,
        )


def hull_distance(
    a: MicroCluster, b: MicroCluster, radius_factor: float, eps_singleton: float
) -> float:
    """Distance between the cluster boundaries, floored at zero."""
    gap = math.sqrt(float(np.sum((a.centre() - b.centre()) ** 2)))
    gap -= a.radius(radius_factor, eps_singleton)
    gap -= b.radius(radius_factor, eps_singleton)
    return max(0.0, gap)


def combine(
    clusters: list[MicroCluster], radius_factor: float, eps_singleton: float
) -> HyperSphere:
    """Count-weighted centre plus a radius reaching the farthest hull, so
    every input sphere stays inside the result."""
    if not clusters:
        raise ValueError("cannot combine an empty cluster list")
    total = 0.0
    centre = np.zeros_like(clusters[0].ls)
    for mc in clusters:
        centre += mc.ls
        total += mc.n
    centre /= total
    radius = 0.0
    for mc in clusters:
        reach = math.sqrt(float(np.sum((centre - mc.centre()) ** 2)))
        reach += mc.radius(radius_factor, eps_singleton)
        if reach > radius:
            radius = reach
    return HyperSphere(centre, radius)


class MicroClusterSet:
    """Bounded set of micro-clusters for one class.

    New points are absorbed by the nearest cluster when they fall within its
    boundary, otherwise they open a new cluster.  Over capacity, the set
    first forgets a cluster whose mean timestamp fell out of the recency
    horizon, and only then merges the two closest clusters.
    """

    def __init__(
        self,
        dim: int,
        capacity: int = 100,
        radius_factor: float = 2.0,
        eps_singleton: float = 0.01,
        horizon: int = 4000,
        recency_decay: float = 0.999,
        min_ready_clusters: int = 3,
    ):
        if dim < 1:
            raise ValueError("micro-cluster set needs at least one dimension")
        self.dim = dim
        self.capacity = capacity
        self.radius_factor = radius_factor
        self.eps_singleton = eps_singleton
        self.horizon = horizon
        self.recency_decay = recency_decay
        self.min_ready_clusters = min_ready_clusters
        self.clusters: list[MicroCluster] = []
        self._next_id = 0
        # Per-cluster geometry and recency caches, row-patched on every
        # mutation.  Buffers hold one row of headroom for the transient
        # over-capacity state inside insert().
        rows = max(capacity, 0) + 1
        self._buf_centres = np.zeros((rows, dim), dtype=np.float64)
        self._buf_radii = np.zeros(rows, dtype=np.float64)
        self._buf_stamps = np.zeros(rows, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.clusters)

    @property
    def ready(self) -> bool:
        """Usable for synthesis: one non-degenerate cluster, or enough
        singletons."""
        if len(self.clusters) >= self.min_ready_clusters:
            return True
        return any(mc.n >= 2.0 for mc in self.clusters)

    def geometry(self) -> tuple[np.ndarray, np.ndarray]:
        m = len(self.clusters)
        return self._buf_centres[:m], self._buf_radii[:m]

    def _refresh_row(self, idx: int) -> None:
        mc = self.clusters[idx]
        self._buf_centres[idx] = mc.ls / mc.n
        self._buf_radii[idx] = mc.radius(self.radius_factor, self.eps_singleton)
        self._buf_stamps[idx] = mc.relevance_stamp()

    def _rebuild(self) -> None:
        """Resync the cached rows from the cluster list."""
        m = len(self.clusters)
        if m > self._buf_radii.shape[0]:
            self._buf_centres = np.zeros((m + 1, self.dim), dtype=np.float64)
            self._buf_radii = np.zeros(m + 1, dtype=np.float64)
            self._buf_stamps = np.zeros(m + 1, dtype=np.float64)
        for i in range(m):
            self._refresh_row(i)

    def _remove_row(self, idx: int) -> None:
        m = len(self.clusters)
        del self.clusters[idx]
        self._buf_centres[idx : m - 1] = self._buf_centres[idx + 1 : m]
        self._buf_radii[idx : m - 1] = self._buf_radii[idx + 1 : m]
        self._buf_stamps[idx : m - 1] = self._buf_stamps[idx + 1 : m]

    def _append(self, point: np.ndarray, step: int, real: bool) -> None:
        mc = MicroCluster.from_point(point, step, self._next_id, real)
        self._next_id += 1
        self.clusters.append(mc)
        idx = len(self.clusters) - 1
        self._buf_centres[idx] = point
        self._buf_radii[idx] = self.eps_singleton
        self._buf_stamps[idx] = mc.relevance_stamp()

    def insert(self, point, step: int, real: bool = True) -> None:
        point = np.ascontiguousarray(point, dtype=np.float64)
        if point.shape != (self.dim,):
            raise ValueError(f"expected a {self.dim}-dimensional point, got {point.shape}")
        if self.capacity <= 0:
            return
        if not self.clusters:
            self._append(point, step, real)
            return
        centres, radii = self.geometry()
        diffs = centres - point
        dists = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
        nearest = int(np.argmin(dists))
        threshold = float(radii[nearest])
        if self.clusters[nearest].n < 2.0 and len(self.clusters) > 1:
            # A singleton's own radius is only the floor value; use the
            # distance to its closest other cluster as the boundary instead.
            c_diffs = centres - centres[nearest]
            c_dists = np.sqrt(np.einsum("ij,ij->i", c_diffs, c_diffs))
            c_dists[nearest] = np.inf
            threshold = float(np.min(c_dists))
        if dists[nearest] <= threshold:
            self.clusters[nearest].absorb(point, step, real)
            self._refresh_row(nearest)
            return
        self._append(point, step, real)
        if len(self.clusters) > self.capacity:
            self._shrink(step)

    def _shrink(self, step: int) -> None:
        m = len(self.clusters)
        stamps = self._buf_stamps[:m]
        stale_idx = int(np.argmin(stamps))
        if stamps[stale_idx] < float(step - self.horizon):
            self._remove_row(stale_idx)
            return
        # No stale cluster: merge the two with the closest centres.
        centres = self._buf_centres[:m]
        sq = np.einsum("ij,ij->i", centres, centres)
        pair_d = sq[:, np.newaxis] + sq[np.newaxis, :] - 2.0 * (centres @ centres.T)
        pair_d[np.tril_indices(m)] = np.inf
        i, j = np.unravel_index(int(np.argmin(pair_d)), pair_d.shape)
        a, b = self.clusters[i], self.clusters[j]
        a.n += b.n
        a.ls += b.ls
        a.ss += b.ss
        a.lst += b.lst
        a.sst += b.sst
        a.last_update = max(a.last_update, b.last_update)
        a.real_n += b.real_n
        a.last_real_update = max(a.last_real_update, b.last_real_update)
        a.id = min(a.id, b.id)
        self._remove_row(j)
        self._refresh_row(i)

    def _scored_against(self, anchor_centre: np.ndarray, anchor_radius: float):
        """Vectorised (hull distance, centre distance) against every cluster."""
        centres, radii = self.geometry()
        diffs = centres - anchor_centre
        centre_d = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
        hull = np.maximum(0.0, centre_d - anchor_radius - radii)
        return hull, centre_d

    def hull_distances_from(self, anchor: MicroCluster) -> list[tuple[float, float, MicroCluster]]:
        """(hull distance, centre distance, cluster) for every other
        cluster, unsorted."""
        hull, centre_d = self._scored_against(
            anchor.centre(), anchor.radius(self.radius_factor, self.eps_singleton)
        )
        return [
            (float(hull[i]), float(centre_d[i]), mc)
            for i, mc in enumerate(self.clusters)
            if mc is not anchor
        ]

    def knn(self, anchor: MicroCluster, k: int) -> list[MicroCluster]:
        """The k nearest clusters to the anchor by hull distance (ties by
        centre distance, then id).  Returns fewer when not enough exist."""
        hull, centre_d = self._scored_against(
            anchor.centre(), anchor.radius(self.radius_factor, self.eps_singleton)
        )
        ids = np.array([mc.id for mc in self.clusters])
        order = np.lexsort((ids, centre_d, hull))
        picked = []
        for i in order:
            mc = self.clusters[int(i)]
            if mc is anchor:
                continue
            picked.append(mc)
            if len(picked) == k:
                break
        return picked

    def pick_anchor(self, rng, now: int) -> MicroCluster:
        """Weighted random cluster, weight = real count * decay^(age since
        the last real update).

        Weighting by real updates only keeps synthesis anchored to regions
        where stream examples actually appeared; counting synthetic updates
        here would let one cluster feed itself into a runaway hotspot.
        Falls back to a uniform pick when no cluster has real weight.
        """
        if not self.clusters:
            raise ValueError("cannot pick an anchor from an empty set")
        weights = self.anchor_weights(now)
        cum = np.cumsum(weights)
        total = float(cum[-1])
        if total <= 0.0:
            return self.clusters[rng.randint(len(self.clusters))]
        u = rng.uniform() * total
        idx = int(np.searchsorted(cum, u, side="right"))
        if idx >= len(self.clusters):
            idx = len(self.clusters) - 1
        return self.clusters[idx]

    def anchor_weights(self, now: int) -> np.ndarray:
        counts = np.array([mc.real_n for mc in self.clusters])
        ages = np.array([float(now - mc.last_real_update) for mc in self.clusters])
        return counts * np.power(self.recency_decay, ages)

    def sphere_of(self, mc: MicroCluster) -> HyperSphere:
        return HyperSphere(mc.centre(), mc.radius(self.radius_factor, self.eps_singleton))

    def snapshot(self) -> tuple:
        return tuple(mc.snapshot() for mc in self.clusters)

    def dump_csv(self, fh) -> None:
        cols = ",".join(f"c{i}" for i in range(self.dim))
        fh.write(f"id,n,{cols},radius,last_update\n")
        for mc in self.clusters:
            centre = ",".join(repr(float(x)) for x in mc.centre())
            radius = mc.radius(self.radius_factor, self.eps_singleton)
            fh.write(f"{mc.id},{mc.n},{centre},{radius!r},{mc.last_update}\n")


def is_surrounded(
    anchor: MicroCluster,
    minority_set: MicroClusterSet,
    majority_set: MicroClusterSet,
    k: int,
) -> bool:
    """True when the k nearest clusters to the anchor, drawn from both
    classes together, all belong to the minority class.  False when fewer
    than k candidates exist.

    Nearness here is centre distance: broad majority clusters make hull
    distances collapse into all-zero ties even in regions that contain no
    majority examples at all, while centres always mark actual data.  Ties
    resolve towards the minority class, then by id.
    """
    anchor_centre = anchor.centre()
    anchor_radius = anchor.radius(minority_set.radius_factor, minority_set.eps_singleton)
    _, min_centre_d = minority_set._scored_against(anchor_centre, anchor_radius)
    _, maj_centre_d = majority_set._scored_against(anchor_centre, anchor_radius)
    keep = np.array([mc is not anchor for mc in minority_set.clusters], dtype=bool)
    centre_d = np.concatenate([min_centre_d[keep], maj_centre_d])
    tags = np.concatenate(
        [np.zeros(int(keep.sum()), dtype=np.int64), np.ones(len(majority_set.clusters), dtype=np.int64)]
    )
    ids = np.concatenate(
        [
            np.array([mc.id for mc in minority_set.clusters if mc is not anchor], dtype=np.int64),
            np.array([mc.id for mc in majority_set.clusters], dtype=np.int64),
        ]
    )
    if centre_d.shape[0] < k:
        return False
    order = np.lexsort((ids, tags, centre_d))
    return bool(np.all(tags[order[:k]] == 0))
