"""Experiment configuration: flat INI text with one section per approach.

Example::

    [experiment]
    streams = StaticIm1_Move7
    dimensions = 2
    length = 50000
    seeds = 0..9
    evaluation = holdout
    holdout_every = 1000
    holdout_size = 1000
    output = results

    [approach:SMOClust]
    kind = SMOClust
    theta = 0.99
    k = 3
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from smoclust.approaches import ALIASES, KINDS


class ConfigError(ValueError):
    pass


_APPROACH_FLOATS = (
    "theta",
    "noise_scale",
    "cat_change_prob",
    "radius_factor",
    "eps_singleton",
    "recency_decay",
    "ddm_warn_factor",
    "ddm_drift_factor",
)
_APPROACH_INTS = (
    "ensemble_size",
    "k",
    "max_boost",
    "cluster_capacity",
    "horizon",
    "min_ready_clusters",
    "ddm_min_instances",
)


@dataclass
class ApproachConfig:
    name: str
    kind: str
    params: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    streams: list[str]
    seeds: list[int]
    approaches: list[ApproachConfig]
    length: int = 200_000
    dimensions: int = 5
    drift_start: int | None = None
    drift_end: int | None = None
    evaluation: str = "holdout"  # holdout | prequential
    holdout_every: int = 1000
    holdout_size: int = 1000
    sample_every: int = 500
    eval_fading: float = 0.999
    output: str = "results"

    def validate(self) -> None:
        if not self.streams:
            raise ConfigError("config needs at least one stream")
        if not self.seeds:
            raise ConfigError("config needs at least one seed")
        if not self.approaches:
            raise ConfigError("config needs at least one approach section")
        if self.evaluation not in ("holdout", "prequential"):
            raise ConfigError(f"unknown evaluation mode {self.evaluation!r}")
        if self.length < 1:
            raise ConfigError("stream length must be positive")
        if self.holdout_every < 1 or self.holdout_size < 2 or self.holdout_size % 2:
            raise ConfigError("holdout_every must be >= 1 and holdout_size even and >= 2")
        if self.sample_every < 1:
            raise ConfigError("sample_every must be >= 1")
        if not 0.0 < self.eval_fading <= 1.0:
            raise ConfigError("eval_fading must lie in (0, 1]")
        names = [a.name for a in self.approaches]
        if len(set(names)) != len(names):
            raise ConfigError("approach names must be unique")
        for a in self.approaches:
            kind = ALIASES.get(a.kind, a.kind)
            if kind not in KINDS:
                raise ConfigError(f"approach {a.name!r} has unknown kind {a.kind!r}")
            theta = a.params.get("theta")
            if theta is not None and not 0.0 < theta < 1.0:
                raise ConfigError(f"approach {a.name!r}: theta must lie in (0, 1)")


def _parse_seeds(text: str) -> list[int]:
    seeds: list[int] = []
    for part in text.replace(",", " ").split():
        if ".." in part:
            lo_s, _, hi_s = part.partition("..")
            seeds.extend(range(int(lo_s), int(hi_s) + 1))
        else:
            seeds.append(int(part))
    return seeds


def _parse_streams(text: str) -> list[str]:
    return [s.strip() for s in text.replace("\n", ",").split(",") if s.strip()]


def parse_config_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if "experiment" not in parser:
        raise ConfigError("config needs an [experiment] section")
    exp = parser["experiment"]
    try:
        cfg = ExperimentConfig(
            streams=_parse_streams(exp.get("streams", "")),
            seeds=_parse_seeds(exp.get("seeds", "0")),
            approaches=[],
            length=exp.getint("length", 200_000),
            dimensions=exp.getint("dimensions", 5),
            drift_start=exp.getint("drift_start") if "drift_start" in exp else None,
            drift_end=exp.getint("drift_end") if "drift_end" in exp else None,
            evaluation=exp.get("evaluation", "holdout"),
            holdout_every=exp.getint("holdout_every", 1000),
            holdout_size=exp.getint("holdout_size", 1000),
            sample_every=exp.getint("sample_every", 500),
            eval_fading=exp.getfloat("eval_fading", 0.999),
            output=exp.get("output", "results"),
        )
    except ValueError as exc:
        raise ConfigError(f"malformed [experiment] value: {exc}") from None
    for section in parser.sections():
        if not section.startswith("approach:"):
            continue
        name = section.partition(":")[2].strip()
        sec = parser[section]
        params: dict = {}
        try:
            for key in _APPROACH_FLOATS:
                if key in sec:
                    params[key] = sec.getfloat(key)
            for key in _APPROACH_INTS:
                if key in sec:
                    params[key] = sec.getint(key)
            if "detector" in sec:
                params["detector"] = sec.getboolean("detector")
        except ValueError as exc:
            raise ConfigError(f"malformed value in [{section}]: {exc}") from None
        kind = sec.get("kind", name)
        cfg.approaches.append(ApproachConfig(name, kind, params))
    cfg.validate()
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())
