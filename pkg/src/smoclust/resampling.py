"""Baseline class-imbalance strategies: Poisson over/undersampling bagging,
the combined under-over ramp, plain replay oversampling and its
Gaussian-noise variant."""

from __future__ import annotations

import numpy as np

from smoclust.core import ClassSizeEstimator, Example, Prediction, Schema
from smoclust.learners import GaussianNB, OnlineBaggingEnsemble

MAX_BOOST = 1000


def oob_lambda(est: ClassSizeEstimator, y: int) -> float:
    """Poisson rate that oversamples towards the majority size (>= 1)."""
    denom = est.size(y)
    if denom < 1e-9:
        return 1.0
    return est.size(est.majority()) / denom


def uob_lambda(est: ClassSizeEstimator, y: int) -> float:
    """Poisson rate that undersamples towards the minority size (<= 1)."""
    denom = est.size(y)
    if denom < 1e-9:
        return 1.0
    return est.size(est.minority()) / denom


def gau_noise_augment(example: Example, schema: Schema, v: float, p_c: float, rng) -> Example:
    """Copy of the example with bounded Gaussian noise on numeric slots and
    probabilistic category flips on categorical ones; label preserved."""
    values = example.values.copy()
    for i, attr in enumerate(schema.attributes):
        if attr.is_numeric:
            noise = rng.normal() * (v * (attr.hi - attr.lo))
            x = values[i] + noise
            if x < attr.lo:
                x = attr.lo
            elif x > attr.hi:
                x = attr.hi
            values[i] = x
        else:
            u = rng.uniform()
            n_cat = attr.n_categories
            if u < p_c and n_cat > 1:
                current = int(values[i])
                pick = rng.randint(n_cat - 1)
                if pick >= current:
                    pick += 1
                values[i] = float(pick)
    return Example(values, example.label, example.timestamp)


class _Strategy:
    """Common plumbing: name, estimator, delegation to the learner."""

    name = "strategy"

    def __init__(self, schema: Schema, rng, theta: float):
        self.schema = schema
        self.rng = rng
        self.theta = theta
        self.est = ClassSizeEstimator(theta)

    def predict(self, example: Example) -> Prediction:
        return self._learner().predict(example)

    def predict_batch(self, xs: np.ndarray) -> np.ndarray:
        return self._learner().predict_batch(xs)

    def _learner(self):
        raise NotImplementedError

    def reset(self) -> None:
        raise NotImplementedError

    def drift_reset(self) -> None:
        # Baselines reset the whole system when wrapped with a detector.
        self.reset()


class NoResample(_Strategy):
    """Train the base learner once per example; no imbalance handling."""

    name = "NoResample"

    def __init__(self, schema: Schema, rng, theta: float = 0.99, ensemble_size: int = 1):
        super().__init__(schema, rng, theta)
        self.ensemble_size = ensemble_size
        self._model = (
            GaussianNB(schema) if ensemble_size == 1 else OnlineBaggingEnsemble(schema, ensemble_size)
        )

    def _learner(self):
        return self._model

    def train(self, example: Example) -> None:
        if self.ensemble_size == 1:
            self._model.train(example)
        else:
            self._model.train_poisson(example, 1.0, self.rng)

    def reset(self) -> None:
        self._model.reset()
        self.est.reset()

    def state_key(self):
        return self._model.state_key()


class _BaggingStrategy(_Strategy):
    def __init__(self, schema: Schema, rng, theta: float = 0.99, ensemble_size: int = 10):
        super().__init__(schema, rng, theta)
        self.ensemble = OnlineBaggingEnsemble(schema, ensemble_size)

    def _learner(self):
        return self.ensemble

    def reset(self) -> None:
        self.ensemble.reset()
        self.est.reset()

    def state_key(self):
        return self.ensemble.state_key()


class OOB(_BaggingStrategy):
    """Oversampling-based online bagging: minority examples get a Poisson
    rate equal to the majority/own size ratio."""

    name = "OOB"

    def train(self, example: Example) -> None:
        self.est.update(example.label)
        self.ensemble.train_poisson(example, oob_lambda(self.est, example.label), self.rng)


class UOB(_BaggingStrategy):
    """Undersampling-based online bagging: majority examples get a Poisson
    rate equal to the minority/own size ratio."""

    name = "UOB"

    def train(self, example: Example) -> None:
        self.est.update(example.label)
        lam = uob_lambda(self.est, example.label)
        if lam > 0.0:
            self.ensemble.train_poisson(example, lam, self.rng)


class OnlineUnderOverBagging(_BaggingStrategy):
    """Member k of m trains with rate (k/m) times the oversampling rate, so
    low-index members realise undersampling through Poisson zero draws."""

    name = "OnlineUnderOverBagging"

    def train(self, example: Example) -> None:
        self.est.update(example.label)
        base = oob_lambda(self.est, example.label)
        m = self.ensemble.size
        for k, member in enumerate(self.ensemble.members, start=1):
            w = self.rng.poisson((k / m) * base)
            if w > 0:
                member.train(example, w)


class OnlineOversampling(_Strategy):
    """Rebalances by retraining on the most recent minority example until
    the estimated sizes flip (or the per-example cap is hit)."""

    name = "OnlineOversampling"

    def __init__(
        self,
        schema: Schema,
        rng,
        theta: float = 0.99,
        ensemble_size: int = 1,
        max_boost: int = MAX_BOOST,
    ):
        super().__init__(schema, rng, theta)
        self.ensemble_size = ensemble_size
        self.max_boost = max_boost
        self._model = (
            GaussianNB(schema) if ensemble_size == 1 else OnlineBaggingEnsemble(schema, ensemble_size)
        )
        self.last_example: dict[int, Example] = {}

    def _learner(self):
        return self._model

    def _train_model(self, example: Example) -> None:
        if self.ensemble_size == 1:
            self._model.train(example)
        else:
            self._model.train_poisson(example, 1.0, self.rng)

    def _synthesize(self, source: Example) -> Example:
        return source

    def train(self, example: Example) -> None:
        self._train_model(example)
        self.est.update(example.label)
        self.last_example[example.label] = example
        minority = self.est.minority()
        majority = 1 - minority
        boosts = 0
        while (
            self.est.size(minority) < self.est.size(majority)
            and minority in self.last_example
            and boosts < self.max_boost
        ):
            synth = self._synthesize(self.last_example[minority])
            self._train_model(synth)
            self.est.update(minority)
            boosts += 1

    def reset(self) -> None:
        self._model.reset()
        self.est.reset()
        self.last_example.clear()

    def state_key(self):
        return self._model.state_key()


class SMOGauNoise(OnlineOversampling):
    """Like replay oversampling, but every synthetic copy carries Gaussian
    noise on numeric slots and probabilistic category flips."""

    name = "SMOGauNoise"

    def __init__(
        self,
        schema: Schema,
        rng,
        theta: float = 0.99,
        noise_scale: float = 0.05,
        cat_change_prob: float = 0.05,
        ensemble_size: int = 1,
        max_boost: int = MAX_BOOST,
    ):
        super().__init__(schema, rng, theta, ensemble_size, max_boost)
        self.noise_scale = noise_scale
        self.cat_change_prob = cat_change_prob

    def _synthesize(self, source: Example) -> Example:
        return gau_noise_augment(source, self.schema, self.noise_scale, self.cat_change_prob, self.rng)

    def drift_reset(self) -> None:
        # Mirrors the clustered oversampler: the learner and the size
        # estimates restart while the minority memory survives.
        self._model.reset()
        self.est.reset()
