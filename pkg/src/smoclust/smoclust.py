"""The stream-clustering driven oversampling strategy.

Per labelled example: update the drift detector with the base learner's own
prediction (resetting the learner and the size estimator on drift, never the
clusterers), train the learner, then synthesise minority examples until the
time-decayed class sizes balance.  Synthesis prefers a sphere combining a
recency-picked anchor cluster with its nearest same-class neighbours when
the anchor sits in a dense minority area; otherwise it samples the anchor's
own sphere, falling back to noisy replay of the last real minority example
while the clusterers are not ready.
"""

from __future__ import annotations

import numpy as np

from smoclust.clustering import MicroClusterSet, combine, is_surrounded
from smoclust.core import ClassSizeEstimator, Example, Prediction, Schema
from smoclust.drift import DriftState
from smoclust.geometry import gaussian_in_sphere, skewed_sample
from smoclust.learners import GaussianNB, OnlineBaggingEnsemble
from smoclust.resampling import MAX_BOOST, gau_noise_augment


class ClusterSpaceCodec:
    """Maps examples to the numeric clustering space and back.

    Numeric attributes pass through; categorical ones are one-hot encoded.
    Decoding clamps numeric slots to their declared range and picks the
    arg-max slot of each one-hot block.
    """

    def __init__(self, schema: Schema):
        self.schema = schema
        self.width = sum(
            1 if a.is_numeric else a.n_categories for a in schema.attributes
        )
        self._identity = all(a.is_numeric for a in schema.attributes)

    def encode(self, values: np.ndarray) -> np.ndarray:
        if self._identity:
            return values
        out = np.zeros(self.width, dtype=np.float64)
        pos = 0
        for i, attr in enumerate(self.schema.attributes):
            if attr.is_numeric:
                out[pos] = values[i]
                pos += 1
            else:
                out[pos + int(values[i])] = 1.0
                pos += attr.n_categories
        return out

    def decode(self, point: np.ndarray) -> np.ndarray:
        out = np.empty(self.schema.n_attributes, dtype=np.float64)
        pos = 0
        for i, attr in enumerate(self.schema.attributes):
            if attr.is_numeric:
                x = point[pos]
                if x < attr.lo:
                    x = attr.lo
                elif x > attr.hi:
                    x = attr.hi
                out[i] = x
                pos += 1
            else:
                block = point[pos : pos + attr.n_categories]
                out[i] = float(int(np.argmax(block)))
                pos += attr.n_categories
        return out


class SMOClust:
    """Synthetic minority oversampling driven by per-class stream clustering."""

    name = "SMOClust"

    def __init__(
        self,
        schema: Schema,
        rng,
        theta: float = 0.99,
        noise_scale: float = 0.05,
        cat_change_prob: float = 0.05,
        k_neighbours: int = 3,
        detector=None,
        ensemble_size: int = 1,
        max_boost: int = MAX_BOOST,
        cluster_capacity: int = 100,
        radius_factor: float = 2.0,
        eps_singleton: float = 0.01,
        horizon: int = 4000,
        recency_decay: float = 0.999,
        min_ready_clusters: int = 3,
    ):
        self.schema = schema
        self.rng = rng
        self.theta = theta
        self.noise_scale = noise_scale
        self.cat_change_prob = cat_change_prob
        self.k_neighbours = k_neighbours
        self.detector = detector
        self.ensemble_size = ensemble_size
        self.max_boost = max_boost
        self.codec = ClusterSpaceCodec(schema)
        self._cluster_config = dict(
            capacity=cluster_capacity,
            radius_factor=radius_factor,
            eps_singleton=eps_singleton,
            horizon=horizon,
            recency_decay=recency_decay,
            min_ready_clusters=min_ready_clusters,
        )
        self.base = (
            GaussianNB(schema)
            if ensemble_size == 1
            else OnlineBaggingEnsemble(schema, ensemble_size)
        )
        self.est = ClassSizeEstimator(theta)
        self.clusters = {c: MicroClusterSet(self.codec.width, **self._cluster_config) for c in (0, 1)}
        self.last_example: dict[int, Example] = {}
        self.step = 0
        self.drift_events: list[int] = []

    def _train_base(self, example: Example) -> None:
        if self.ensemble_size == 1:
            self.base.train(example)
        else:
            self.base.train_poisson(example, 1.0, self.rng)

    def predict(self, example: Example) -> Prediction:
        return self.base.predict(example)

    def predict_batch(self, xs: np.ndarray) -> np.ndarray:
        return self.base.predict_batch(xs)

    def train(self, example: Example) -> None:
        if example.label is None:
            raise ValueError("cannot train on an unlabelled example")
        self.step += 1
        if self.detector is not None:
            pred = self.base.predict(example)
            if self.detector.observe(pred.predicted == example.label) is DriftState.DRIFT:
                self.drift_reset()
                self.drift_events.append(self.step)
        self._train_base(example)
        self.est.update(example.label)
        self.last_example[example.label] = example
        minority = self.est.minority()
        majority = 1 - minority
        boosts = 0
        while self.est.size(minority) < self.est.size(majority) and boosts < self.max_boost:
            synth = self._oversample_once(minority)
            if synth is None:
                break
            boosts += 1
        self.clusters[example.label].insert(self.codec.encode(example.values), self.step)

    def _oversample_once(self, minority: int) -> Example | None:
        """Create, learn and record one synthetic minority example.

        Returns None when no synthesis path exists (clusterers not ready and
        no real minority example recorded yet).
        """
        synth = self._synthesize(minority)
        if synth is None:
            return None
        self.clusters[minority].insert(self.codec.encode(synth.values), self.step, real=False)
        self._train_base(synth)
        self.est.update(minority)
        return synth

    def _synthesize(self, minority: int) -> Example | None:
        minority_set = self.clusters[minority]
        majority_set = self.clusters[1 - minority]
        if minority_set.ready and majority_set.ready:
            anchor = minority_set.pick_anchor(self.rng, self.step)
            if is_surrounded(anchor, minority_set, majority_set, self.k_neighbours):
                group = [anchor] + minority_set.knn(anchor, self.k_neighbours)
                sphere = combine(group, minority_set.radius_factor, minority_set.eps_singleton)
                point = skewed_sample(anchor.centre(), sphere, self.rng)
            else:
                point = gaussian_in_sphere(minority_set.sphere_of(anchor), self.rng)
            values = self.codec.decode(point)
            return Example(values, minority, self.step)
        source = self.last_example.get(minority)
        if source is None:
            return None
        return gau_noise_augment(
            source, self.schema, self.noise_scale, self.cat_change_prob, self.rng
        )

    def drift_reset(self) -> None:
        """Reset the base learner and the class sizes; the stream clusterers
        keep their state."""
        self.base.reset()
        self.est.reset()

    def reset(self) -> None:
        self.base.reset()
        self.est.reset()
        self.clusters = {
            c: MicroClusterSet(self.codec.width, **self._cluster_config) for c in (0, 1)
        }
        self.last_example.clear()
        self.step = 0
        self.drift_events.clear()
        if self.detector is not None:
            self.detector.reset()

    def state_key(self):
        return self.base.state_key()
