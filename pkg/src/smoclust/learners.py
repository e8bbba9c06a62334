"""Incremental base learner and the online-bagging ensemble used by the
resampling strategies."""

from __future__ import annotations

import math

import numpy as np

from smoclust._backend import NBState
from smoclust.core import Example, Prediction, Schema


class GaussianNB:
    """Incremental naive Bayes: Gaussian per numeric attribute (with a
    variance floor), Laplace-smoothed frequencies per categorical one.

    Training with weight w is the closed form of training w times with
    weight 1, so Poisson-weighted updates are exact.
    """

    def __init__(self, schema: Schema, var_floor: float = 1e-6, laplace: float = 1.0):
        self.schema = schema
        self.var_floor = var_floor
        self.laplace = laplace
        self._state = NBState(schema.kinds_array(), var_floor, laplace)

    def train(self, example: Example, weight: int = 1) -> None:
        if example.label is None:
            raise ValueError("cannot train on an unlabelled example")
        if weight <= 0:
            raise ValueError(f"training weight must be positive, got {weight}")
        self._state.train(example.values, example.label, float(weight))

    def predict(self, example: Example) -> Prediction:
        s0, s1 = self._state.log_scores(example.values)
        m = s0 if s0 > s1 else s1
        e0 = math.exp(s0 - m)
        e1 = math.exp(s1 - m)
        z = e0 + e1
        return Prediction(1 if s1 > s0 else 0, (e0 / z, e1 / z))

    def predict_batch(self, xs: np.ndarray) -> np.ndarray:
        return self._state.predict_many(xs)

    def reset(self) -> None:
        self._state.reset()

    def state_key(self) -> tuple:
        counts, num_sum, num_sumsq, cat = self._state.state_arrays()
        return (
            counts.tobytes(),
            num_sum.tobytes(),
            num_sumsq.tobytes(),
            cat.tobytes(),
        )


class OnlineBaggingEnsemble:
    """Fixed-size ensemble trained with per-member Poisson weights and
    combined by unweighted majority vote (ties go to class 0)."""

    def __init__(self, schema: Schema, size: int = 10, member_factory=None):
        if size < 1:
            raise ValueError(f"ensemble needs at least one member, got {size}")
        if member_factory is None:
            member_factory = lambda: GaussianNB(schema)
        self.size = size
        self.members = [member_factory() for _ in range(size)]

    def train_poisson(self, example: Example, lam: float, rng) -> None:
        for member in self.members:
            w = rng.poisson(lam)
            if w > 0:
                member.train(example, w)

    def predict(self, example: Example) -> Prediction:
        votes1 = 0
        for member in self.members:
            votes1 += member.predict(example).predicted
        votes0 = self.size - votes1
        score0 = votes0 / self.size
        score1 = votes1 / self.size
        return Prediction(1 if votes1 > votes0 else 0, (score0, score1))

    def predict_batch(self, xs: np.ndarray) -> np.ndarray:
        votes1 = np.zeros(xs.shape[0], dtype=np.int64)
        for member in self.members:
            votes1 += member.predict_batch(xs)
        return (2 * votes1 > self.size).astype(np.int64)

    def reset(self) -> None:
        for member in self.members:
            member.reset()

    def state_key(self) -> tuple:
        return tuple(member.state_key() for member in self.members)


def bagging_train(ensemble: OnlineBaggingEnsemble, example: Example, lam: float, rng) -> None:
    if lam <= 0.0:
        raise ValueError(f"Poisson rate must be positive, got {lam}")
    ensemble.train_poisson(example, lam, rng)
