"""Seeded Gaussian-mixture event streams with labelled far-out anomalies."""
from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import ConfigError
from .config import SynthConfig
from .records import RawEvent

_MAX_TRIES = 10_000


def _unit(rng: np.random.Generator, d: int) -> np.ndarray:
    while True:
        v = rng.standard_normal(d)
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            return v / norm


def _far_point(rng: np.random.Generator, cfg: SynthConfig, means: np.ndarray,
               stds: np.ndarray, k: int) -> np.ndarray:
    lo, hi = cfg.anomaly_radius
    for _ in range(_MAX_TRIES):
        p = means[k] + _unit(rng, means.shape[1]) * rng.uniform(lo, hi) * stds[k]
        if np.all(np.linalg.norm(means - p, axis=1) >= 5.0 * stds):
            return p
    raise ConfigError("clusters overlap too much to place anomalies 5 std devs from every mean")


def generate_synthetic(cfg: SynthConfig, n: int, seed: int,
                       anomaly_fraction: Optional[float] = None) -> list[RawEvent]:
    """Draw ``n`` labelled events.

    Normals come from the cluster mixture; each anomaly is placed on a random
    direction around a random cluster at ``anomaly_radius`` std devs and is
    rejected until it sits at least 5 std devs from every cluster mean.
    """
    if n < 0:
        raise ConfigError(f"n must be >= 0, got {n}")
    frac = cfg.anomaly_fraction if anomaly_fraction is None else anomaly_fraction
    if not 0.0 <= frac <= 1.0:
        raise ConfigError(f"anomaly_fraction must lie in [0, 1], got {frac}")
    means = np.array([c.mean for c in cfg.clusters], dtype=np.float64)
    stds = np.array([c.std for c in cfg.clusters], dtype=np.float64)
    weights = np.array([c.weight for c in cfg.clusters], dtype=np.float64)
    weights /= weights.sum()

    rng = np.random.default_rng(seed)
    events = []
    for i in range(n):
        anomalous = bool(rng.random() < frac)
        k = int(rng.choice(len(weights), p=weights))
        if anomalous:
            x = _far_point(rng, cfg, means, stds, k)
        else:
            x = means[k] + rng.standard_normal(means.shape[1]) * stds[k]
        events.append(RawEvent(
            ts=i,
            source=f"host-{k}",
            features=[float(v) for v in x],
            label="anomaly" if anomalous else "normal",
        ))
    return events
