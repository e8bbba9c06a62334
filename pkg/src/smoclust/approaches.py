"""Approach registry: builds a configured strategy instance by kind name,
optionally wrapped with a drift detector."""

from __future__ import annotations

from smoclust.core import Schema
from smoclust.drift import DDMDetector, DriftResetWrapper
from smoclust.resampling import (
    MAX_BOOST,
    OOB,
    UOB,
    NoResample,
    OnlineOversampling,
    OnlineUnderOverBagging,
    SMOGauNoise,
)
from smoclust.smoclust import SMOClust

KINDS = (
    "OOB",
    "UOB",
    "OnlineUnderOverBagging",
    "OnlineOversampling",
    "SMOGauNoise",
    "SMOClust",
    "NoResample",
)

ALIASES = {
    "oUnderOverB": "OnlineUnderOverBagging",
    "oOS": "OnlineOversampling",
}

# SMOGauNoise and SMOClust carry their detector internally by default; the
# bagging baselines and plain oversampling get one only as "(d)" variants.
DEFAULT_DETECTOR = {
    "OOB": False,
    "UOB": False,
    "OnlineUnderOverBagging": False,
    "OnlineOversampling": False,
    "SMOGauNoise": True,
    "SMOClust": True,
    "NoResample": False,
}


def default_roster() -> list[dict]:
    """The comparison roster: baselines, their drift-wrapped variants and
    both oversampler variants."""
    roster = []
    for kind in ("OOB", "UOB", "OnlineUnderOverBagging", "OnlineOversampling"):
        roster.append({"name": kind, "kind": kind, "detector": False})
        roster.append({"name": kind + "_d", "kind": kind, "detector": True})
    roster.append({"name": "SMOGauNoise", "kind": "SMOGauNoise", "detector": True})
    roster.append({"name": "SMOClust", "kind": "SMOClust", "detector": True})
    return roster


def _detector_from(params: dict) -> DDMDetector:
    return DDMDetector(
        min_instances=int(params.get("ddm_min_instances", DDMDetector.DEFAULT_MIN_INSTANCES)),
        warn_factor=float(params.get("ddm_warn_factor", DDMDetector.DEFAULT_WARN_FACTOR)),
        drift_factor=float(params.get("ddm_drift_factor", DDMDetector.DEFAULT_DRIFT_FACTOR)),
    )


def build_strategy(kind: str, schema: Schema, rng, params: dict | None = None):
    """Instantiate one approach.

    ``params`` accepts: theta, ensemble_size, noise_scale, cat_change_prob,
    k, max_boost, detector (bool), ddm_* thresholds and the cluster_*
    settings for SMOClust.
    """
    params = dict(params or {})
    kind = ALIASES.get(kind, kind)
    if kind not in KINDS:
        raise ValueError(f"unknown approach kind {kind!r}")
    theta = float(params.get("theta", 0.99))
    use_detector = bool(params.get("detector", DEFAULT_DETECTOR[kind]))
    if kind == "SMOClust":
        return SMOClust(
            schema,
            rng,
            theta=theta,
            noise_scale=float(params.get("noise_scale", 0.05)),
            cat_change_prob=float(params.get("cat_change_prob", 0.05)),
            k_neighbours=int(params.get("k", 3)),
            detector=_detector_from(params) if use_detector else None,
            ensemble_size=int(params.get("ensemble_size", 1)),
            max_boost=int(params.get("max_boost", MAX_BOOST)),
            cluster_capacity=int(params.get("cluster_capacity", 100)),
            radius_factor=float(params.get("radius_factor", 2.0)),
            eps_singleton=float(params.get("eps_singleton", 0.01)),
            horizon=int(params.get("horizon", 4000)),
            recency_decay=float(params.get("recency_decay", 0.999)),
            min_ready_clusters=int(params.get("min_ready_clusters", 3)),
        )
    if kind == "SMOGauNoise":
        strategy = SMOGauNoise(
            schema,
            rng,
            theta=theta,
            noise_scale=float(params.get("noise_scale", 0.05)),
            cat_change_prob=float(params.get("cat_change_prob", 0.05)),
            ensemble_size=int(params.get("ensemble_size", 1)),
            max_boost=int(params.get("max_boost", MAX_BOOST)),
        )
    elif kind == "OnlineOversampling":
        strategy = OnlineOversampling(
            schema,
            rng,
            theta=theta,
            ensemble_size=int(params.get("ensemble_size", 1)),
            max_boost=int(params.get("max_boost", MAX_BOOST)),
        )
    elif kind == "NoResample":
        strategy = NoResample(
            schema, rng, theta=theta, ensemble_size=int(params.get("ensemble_size", 1))
        )
    else:
        cls = {"OOB": OOB, "UOB": UOB, "OnlineUnderOverBagging": OnlineUnderOverBagging}[kind]
        strategy = cls(schema, rng, theta=theta, ensemble_size=int(params.get("ensemble_size", 10)))
    if use_detector:
        return DriftResetWrapper(strategy, _detector_from(params))
    return strategy
