import math

import numpy as np
import pytest

from smoclust.clustering import (
    MicroCluster,
    MicroClusterSet,
    combine,
    hull_distance,
    is_surrounded,
)
from smoclust.core import make_rng

RF = 2.0
EPS = 0.01


def make_set(dim=2, **kwargs):
    kwargs.setdefault("radius_factor", RF)
    kwargs.setdefault("eps_singleton", EPS)
    return MicroClusterSet(dim, **kwargs)


def cluster_from_points(points, cluster_id=0, step=1):
    mc = MicroCluster.from_point(np.asarray(points[0], dtype=float), step, cluster_id)
    for p in points[1:]:
        mc.absorb(np.asarray(p, dtype=float), step)
    return mc


class TestMicroCluster:
    def test_centre_and_radius_two_points(self):
        mc = cluster_from_points([(0.0, 0.0), (2.0, 0.0)])
        assert np.allclose(mc.centre(), [1.0, 0.0])
        # per-dimension variances are (1, 0); RMS deviation sqrt(0.5)
        assert mc.radius(RF, EPS) == pytest.approx(RF * math.sqrt(0.5), abs=1e-12)

    def test_singleton_radius_floor(self):
        mc = cluster_from_points([(3.0, 4.0)])
        assert np.allclose(mc.centre(), [3.0, 4.0])
        assert mc.radius(RF, EPS) == EPS

    def test_identical_points_keep_floor(self):
        mc = cluster_from_points([(1.0, 1.0)] * 10)
        assert mc.n == 10
        assert mc.radius(RF, EPS) == EPS

    def test_empty_cluster_errors(self):
        mc = cluster_from_points([(0.0, 0.0)])
        mc.n = 0.0
        with pytest.raises(ValueError):
            mc.centre()

    def test_additivity_one_by_one_vs_batch(self):
        rng = make_rng("cluster-additivity")
        pts = [np.array([rng.normal(), rng.normal(), rng.normal()]) for _ in range(200)]
        mc = cluster_from_points(pts)
        stacked = np.stack(pts)
        assert mc.n == 200
        assert np.allclose(mc.ls, stacked.sum(axis=0), atol=1e-9)
        assert np.allclose(mc.ss, (stacked**2).sum(axis=0), atol=1e-9)


class TestHullDistance:
    def test_separated(self):
        a = cluster_from_points([(0.0, 0.0), (0.5, 0.0)])
        b = cluster_from_points([(10.0, 0.0), (10.5, 0.0)])
        r = RF * math.sqrt(0.03125)  # per-dim variances (0.0625, 0)
        expected = 10.0 - 2.0 * r
        assert hull_distance(a, b, RF, EPS) == pytest.approx(expected, abs=1e-9)

    def test_overlap_clamps_to_zero(self):
        a = cluster_from_points([(0.0, 0.0), (1.0, 0.0)])
        b = cluster_from_points([(0.5, 0.0), (1.5, 0.0)])
        assert hull_distance(a, b, RF, EPS) == 0.0

    def test_identical_clusters(self):
        a = cluster_from_points([(0.0, 1.0), (1.0, 0.0)])
        b = cluster_from_points([(0.0, 1.0), (1.0, 0.0)], cluster_id=1)
        assert hull_distance(a, b, RF, EPS) == 0.0


class TestInsert:
    def test_first_point_creates_singleton(self):
        s = make_set()
        s.insert([0.1, 0.2], step=1)
        assert len(s) == 1
        assert s.clusters[0].n == 1.0

    def test_absorb_updates_features(self):
        s = make_set()
        s.insert([0.0, 0.0], step=1)
        s.insert([1.0, 1.0], step=2)
        # Nearest is the singleton at the origin; its boundary is the
        # distance to the other cluster, so a nearby point is absorbed.
        s.insert([0.05, 0.0], step=3)
        assert len(s) == 2
        mc = s.clusters[0]
        assert mc.n == 2.0
        assert np.allclose(mc.ls, [0.05, 0.0])
        assert mc.lst == 4.0 and mc.sst == 10.0
        assert mc.last_update == 3

    def test_lone_singleton_keeps_floor_boundary(self):
        s = make_set()
        s.insert([0.0, 0.0], step=1)
        s.insert([0.05, 0.0], step=2)  # beyond the floor radius, no neighbour
        assert len(s) == 2

    def test_capacity_two_merges_closest(self):
        s = make_set(capacity=2, horizon=10_000)
        s.insert([0.0, 0.0], step=1)
        s.insert([1.0, 0.0], step=2)
        # 100 is far from both; the two closest (0 and 1 apart) must merge.
        s.insert([100.0, 0.0], step=3)
        assert len(s) == 2
        merged = min(s.clusters, key=lambda mc: mc.id)
        assert merged.n == 2.0
        assert np.allclose(merged.centre(), [0.5, 0.0])

    def test_stale_cluster_deleted_first(self):
        s = make_set(capacity=2, horizon=100)
        s.insert([0.0, 0.0], step=1)
        s.insert([50.0, 0.0], step=500)
        s.insert([100.1, 0.0], step=500)
        # Cluster from step 1 is far out of the horizon; it is deleted
        # rather than merging the two fresh ones.
        assert len(s) == 2
        assert all(mc.relevance_stamp() >= 400 for mc in s.clusters)

    def test_capacity_never_exceeded(self):
        rng = make_rng("cluster-capacity")
        s = make_set(capacity=10, horizon=50)
        for t in range(1, 500):
            s.insert([rng.uniform() * 4 - 2, rng.uniform() * 4 - 2], step=t)
            assert len(s) <= 10

    def test_zero_capacity_is_noop(self):
        s = make_set(capacity=0)
        s.insert([0.0, 0.0], step=1)
        assert len(s) == 0
        assert not s.ready

    def test_dimension_mismatch(self):
        s = make_set()
        with pytest.raises(ValueError):
            s.insert([0.0, 0.0, 0.0], step=1)

    def test_cached_geometry_matches_recompute(self):
        rng = make_rng("cluster-cache")
        s = make_set(capacity=8, horizon=100)
        for t in range(1, 300):
            s.insert([rng.normal(), rng.normal()], step=t)
        centres, radii = s.geometry()
        for i, mc in enumerate(s.clusters):
            assert np.allclose(centres[i], mc.centre(), atol=1e-12)
            assert radii[i] == pytest.approx(mc.radius(RF, EPS), abs=1e-12)


class TestKnn:
    def build(self):
        s = make_set(capacity=50)
        for i, x in enumerate([0.0, 3.5, 8.0, 12.0]):
            s.clusters.append(cluster_from_points([(x, 0.0)], cluster_id=i))
        s._rebuild()
        return s

    def test_nearest_single(self):
        s = self.build()
        anchor = s.clusters[0]
        assert [mc.id for mc in s.knn(anchor, 1)] == [1]

    def test_tie_breaks_by_id(self):
        s = make_set(capacity=50)
        s.clusters.append(cluster_from_points([(0.0, 0.0)], cluster_id=0))
        s.clusters.append(cluster_from_points([(1.0, 0.0)], cluster_id=2))
        s.clusters.append(cluster_from_points([(-1.0, 0.0)], cluster_id=1))
        s._rebuild()
        assert [mc.id for mc in s.knn(s.clusters[0], 1)] == [1]

    def test_shortfall_returns_all(self):
        s = self.build()
        assert len(s.knn(s.clusters[0], 10)) == 3

    def test_matches_brute_force(self):
        rng = make_rng("knn-brute")
        for _ in range(20):
            s = make_set(capacity=60)
            m = 5 + rng.randint(45)
            for i in range(m):
                pts = [
                    (4 * rng.uniform() - 2, 4 * rng.uniform() - 2)
                    for _ in range(1 + rng.randint(3))
                ]
                s.clusters.append(cluster_from_points(pts, cluster_id=i))
            s._rebuild()
            anchor = s.clusters[rng.randint(m)]
            k = 1 + rng.randint(m - 1)
            got = [mc.id for mc in s.knn(anchor, k)]
            scored = sorted(
                (
                    (hull_distance(anchor, mc, RF, EPS), float(np.linalg.norm(anchor.centre() - mc.centre())), mc.id)
                    for mc in s.clusters
                    if mc is not anchor
                ),
            )
            assert got == [mc_id for _, _, mc_id in scored[:k]]


class TestCombine:
    def test_single_cluster_identity(self):
        mc = cluster_from_points([(0.0, 0.0), (2.0, 0.0)])
        sphere = combine([mc], RF, EPS)
        assert np.allclose(sphere.centre, mc.centre())
        assert sphere.radius == pytest.approx(mc.radius(RF, EPS), abs=1e-12)

    def test_two_equal_weight_clusters(self):
        a = cluster_from_points([(-0.5, 0.0), (0.5, 0.0)])  # centre (0,0)
        b = cluster_from_points([(3.5, 0.0), (4.5, 0.0)], cluster_id=1)  # centre (4,0)
        r = RF * math.sqrt(0.125)  # both have per-dim variances (0.25, 0)
        sphere = combine([a, b], RF, EPS)
        assert np.allclose(sphere.centre, [2.0, 0.0])
        assert sphere.radius == pytest.approx(2.0 + r, abs=1e-12)

    def test_unequal_weights(self):
        a = cluster_from_points([(-0.5, 0.0), (0.5, 0.0), (0.0, 0.5), (0.0, -0.5)])
        b = cluster_from_points([(4.0, 1.0), (4.0, -1.0)], cluster_id=1)
        sphere = combine([a, b], RF, EPS)
        total = a.n + b.n
        expected_centre = (a.n * a.centre() + b.n * b.centre()) / total
        assert np.allclose(sphere.centre, expected_centre)
        expected_radius = max(
            float(np.linalg.norm(sphere.centre - mc.centre())) + mc.radius(RF, EPS)
            for mc in (a, b)
        )
        assert sphere.radius == pytest.approx(expected_radius, abs=1e-12)

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            combine([], RF, EPS)

    def test_containment_monte_carlo(self):
        rng = make_rng("combine-contain")
        for _ in range(200):
            dim = 2 + rng.randint(4)
            clusters = []
            for i in range(1 + rng.randint(5)):
                pts = [
                    np.array([2 * rng.uniform() - 1 for _ in range(dim)])
                    for _ in range(1 + rng.randint(4))
                ]
                clusters.append(cluster_from_points(pts, cluster_id=i))
            sphere = combine(clusters, RF, EPS)
            for mc in clusters:
                centre = mc.centre()
                radius = mc.radius(RF, EPS)
                for _ in range(10):
                    direction = np.array([rng.normal() for _ in range(dim)])
                    direction /= np.linalg.norm(direction)
                    hull_point = centre + radius * direction
                    dist = float(np.linalg.norm(hull_point - sphere.centre))
                    assert dist <= sphere.radius + 1e-9


class TestPickAnchor:
    def test_single_cluster_always_chosen(self):
        s = make_set()
        s.insert([0.0, 0.0], step=1)
        rng = make_rng("anchor-single")
        assert all(s.pick_anchor(rng, now=1) is s.clusters[0] for _ in range(50))

    def test_weight_ratio_nine_to_one(self):
        s = make_set(capacity=10)
        big = cluster_from_points([(0.0, 0.0)] * 9, cluster_id=0, step=5)
        big.real_n, big.last_real_update = 9.0, 5
        small = cluster_from_points([(5.0, 5.0)], cluster_id=1, step=5)
        small.real_n, small.last_real_update = 1.0, 5
        s.clusters = [big, small]
        s._rebuild()
        rng = make_rng("anchor-ratio")
        picks = sum(1 for _ in range(10_000) if s.pick_anchor(rng, now=5) is big)
        assert abs(picks / 10_000 - 0.9) < 0.02

    def test_stale_weight_formula(self):
        s = make_set(recency_decay=0.999)
        stale = cluster_from_points([(0.0, 0.0)] * 1000, cluster_id=0, step=1)
        stale.real_n, stale.last_real_update = 1000.0, 1
        fresh = cluster_from_points([(1.0, 1.0)] * 5, cluster_id=1, step=9000)
        fresh.real_n, fresh.last_real_update = 5.0, 9000
        s.clusters = [stale, fresh]
        s._rebuild()
        w_stale, w_fresh = s.anchor_weights(now=9000)
        assert w_stale == pytest.approx(1000.0 * 0.999 ** 8999)
        assert w_fresh == pytest.approx(5.0)
        assert w_fresh > w_stale

    def test_empty_set_rejected(self):
        with pytest.raises(ValueError):
            make_set().pick_anchor(make_rng("anchor-empty"), now=0)


class TestIsSurrounded:
    def build_sets(self, minority_points, majority_points):
        minority = make_set(capacity=50)
        for i, p in enumerate(minority_points):
            minority.clusters.append(cluster_from_points([p], cluster_id=i))
        minority._rebuild()
        majority = make_set(capacity=50)
        for i, p in enumerate(majority_points):
            majority.clusters.append(cluster_from_points([p], cluster_id=i))
        majority._rebuild()
        return minority, majority

    def test_dense_minority_neighbourhood(self):
        minority, majority = self.build_sets(
            [(0.0, 0.0), (0.1, 0.0), (0.0, 0.1), (-0.1, 0.0)],
            [(5.0, 5.0), (-5.0, 5.0)],
        )
        assert is_surrounded(minority.clusters[0], minority, majority, k=3)

    def test_nearest_majority_blocks(self):
        minority, majority = self.build_sets(
            [(0.0, 0.0), (1.0, 0.0)],
            [(0.05, 0.0)],
        )
        assert not is_surrounded(minority.clusters[0], minority, majority, k=1)

    def test_too_few_candidates(self):
        minority, majority = self.build_sets([(0.0, 0.0), (0.1, 0.0)], [])
        assert not is_surrounded(minority.clusters[0], minority, majority, k=3)


class TestSnapshotAndDump:
    def test_snapshot_detects_change(self):
        s = make_set()
        s.insert([0.0, 0.0], step=1)
        snap = s.snapshot()
        s.insert([0.0, 0.001], step=2)
        assert s.snapshot() != snap

    def test_dump_csv(self, tmp_path):
        s = make_set()
        s.insert([0.25, -0.75], step=3)
        path = tmp_path / "clusters.csv"
        with open(path, "w") as fh:
            s.dump_csv(fh)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "id,n,c0,c1,radius,last_update"
        assert lines[1].startswith("0,1.0,0.25,-0.75,")
