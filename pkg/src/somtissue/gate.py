"""Novelty scoring and the emit/suppress decision for antigen events."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Mapping, Optional

from .errors import ConfigError
from .receptors import TlrEffect


@dataclass(frozen=True)
class NoveltyInputs:
    bmu_distance: float
    bmu_hit_count: int
    steps_since_bmu_hit: Optional[int]  # None: the cell was never a BMU
    map_step: int


@dataclass(frozen=True)
class GateConfig:
    distance_scale: float = 0.1
    rarity_weight: float = 0.2
    emit_threshold: float = 0.6
    danger_override: float = 0.9
    warmup_steps: int = 1000

    def __post_init__(self) -> None:
        if not (math.isfinite(self.distance_scale) and self.distance_scale > 0):
            raise ConfigError(f"distance_scale must be > 0, got {self.distance_scale}")
        if not 0.0 <= self.rarity_weight <= 1.0:
            raise ConfigError(f"rarity_weight must lie in [0, 1], got {self.rarity_weight}")
        if not 0.0 < self.emit_threshold < 1.0:
            raise ConfigError(f"emit_threshold must lie in (0, 1), got {self.emit_threshold}")
        if not 0.0 < self.danger_override <= 1.0:
            raise ConfigError(f"danger_override must lie in (0, 1], got {self.danger_override}")
        if not (isinstance(self.warmup_steps, int) and self.warmup_steps >= 0):
            raise ConfigError(f"warmup_steps must be a non-negative integer, got {self.warmup_steps}")


@dataclass
class AntigenEvent:
    ts: int
    source: str
    bmu: tuple[int, int]
    novelty: float
    danger: float
    active_receptors: list[str]
    features: list[float]
    inflammation_at_bmu: float
    extra: dict[str, Any] = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("extra")
        d["bmu"] = list(self.bmu)
        return d


def novelty_score(inp: NoveltyInputs, cfg: GateConfig) -> float:
    """Blend hit rarity with a saturating distance term; result in [0, 1]."""
    rarity = 1.0 / (1.0 + inp.bmu_hit_count)
    dist_term = -math.expm1(-inp.bmu_distance / cfg.distance_scale)
    score = cfg.rarity_weight * rarity + (1.0 - cfg.rarity_weight) * dist_term
    return min(1.0, max(0.0, score))


def should_emit(novelty: float, effect: TlrEffect, map_step: int, cfg: GateConfig) -> bool:
    if effect.danger >= cfg.danger_override:
        return True
    if map_step < cfg.warmup_steps:
        return False
    return novelty >= cfg.emit_threshold


def decide(novelty: float, effect: TlrEffect, map_step: int, cfg: GateConfig,
           context: Mapping[str, Any]) -> Optional[AntigenEvent]:
    """Build the antigen for this event, or None when the gate suppresses it.

    ``context`` supplies ts, source, bmu, active_receptors, features and
    inflammation_at_bmu.
    """
    if not should_emit(novelty, effect, map_step, cfg):
        return None
    return AntigenEvent(
        ts=context["ts"],
        source=context["source"],
        bmu=tuple(context["bmu"]),
        novelty=novelty,
        danger=effect.danger,
        active_receptors=sorted(context.get("active_receptors", ())),
        features=[float(v) for v in context["features"]],
        inflammation_at_bmu=float(context.get("inflammation_at_bmu", 0.0)),
    )
