"""Decaying inflammation field laid over the tissue grid.

Deposits spread with a Gaussian over grid distance, every processed event
multiplies the whole field by ``decay``, and :func:`attention` turns the
hottest cells into an advisory priority share. Nothing here touches real
process priorities.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InputError
from .tissue import Coord, neighbourhood


@dataclass
class InflammationField:
    width: int
    height: int
    decay: float = 0.98
    cap: float = 5.0
    spread_sigma: float = 1.0
    level: np.ndarray = None  # type: ignore[assignment]  # (height, width)

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ConfigError(f"field dimensions must be positive, got {self.height}x{self.width}")
        if not 0.0 < self.decay < 1.0:
            raise ConfigError(f"decay must lie in (0, 1), got {self.decay}")
        if not (math.isfinite(self.cap) and self.cap > 0):
            raise ConfigError(f"cap must be > 0, got {self.cap}")
        if not (math.isfinite(self.spread_sigma) and self.spread_sigma >= 0):
            raise ConfigError(f"spread_sigma must be >= 0, got {self.spread_sigma}")
        if self.level is None:
            self.level = np.zeros((self.height, self.width), dtype=np.float64)
        else:
            self.level = np.asarray(self.level, dtype=np.float64)
            if self.level.shape != (self.height, self.width):
                raise ConfigError(f"level shape {self.level.shape} does not match grid")

    @property
    def total(self) -> float:
        return float(self.level.sum())

    def at(self, coord: Coord) -> float:
        return float(self.level[coord])

    def copy(self) -> "InflammationField":
        return InflammationField(self.width, self.height, self.decay, self.cap,
                                 self.spread_sigma, self.level.copy())


@dataclass
class AttentionReport:
    hotspots: list[tuple[Coord, float]] = field(default_factory=list)
    priority_share: float = 0.0

    def to_dict(self) -> dict:
        return {
            "hotspots": [{"row": r, "col": c, "level": lvl} for (r, c), lvl in self.hotspots],
            "priority_share": self.priority_share,
        }


def deposit(fld: InflammationField, coord: Coord, amount: float) -> InflammationField:
    r, c = coord
    if not (0 <= r < fld.height and 0 <= c < fld.width):
        raise InputError(f"coordinate {coord} lies outside the {fld.height}x{fld.width} field")
    if not (math.isfinite(amount) and amount >= 0):
        raise InputError(f"deposit amount must be finite and >= 0, got {amount}")
    if amount == 0:
        return fld
    kernel = neighbourhood(fld.height, fld.width, (r, c), fld.spread_sigma)
    np.minimum(fld.level + amount * kernel, fld.cap, out=fld.level)
    return fld


def step_decay(fld: InflammationField) -> InflammationField:
    fld.level *= fld.decay
    return fld


def attention(fld: InflammationField, k: int = 5, floor: float = 0.0) -> AttentionReport:
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    flat = fld.level.ravel()
    hot = np.flatnonzero(flat > floor)
    # stable sort on -level keeps row-major order among equal levels
    order = hot[np.argsort(-flat[hot], kind="stable")][:k]
    hotspots = [(divmod(int(i), fld.width), float(flat[i])) for i in order]
    share = min(1.0, sum(lvl for _, lvl in hotspots) / (k * fld.cap))
    return AttentionReport(hotspots=hotspots, priority_share=share)


def field_csv(fld: InflammationField) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "col", "level"])
    for r in range(fld.height):
        for c in range(fld.width):
            w.writerow([r, c, repr(float(fld.level[r, c]))])
    return buf.getvalue()
