from __future__ import annotations

from typing import Any, Optional, Union

from pydantic import BaseModel, Field


class SessionCreate(BaseModel):
    config: dict[str, Any]
    seed: Optional[int] = Field(default=None, ge=0)
    snapshot: Optional[dict[str, Any]] = None


class SessionInfo(BaseModel):
    id: str
    step: int
    width: int
    height: int
    dim: int
    events_ingested: int
    antigens_emitted: int


class EventIn(BaseModel):
    ts: int
    source: str = ""
    features: Optional[list[float]] = None
    calls: Optional[list[str]] = None
    raw: dict[str, Union[bool, int, float, str]] = Field(default_factory=dict)
    label: Optional[str] = None


class EventBatch(BaseModel):
    events: list[EventIn]


class AntigenOut(BaseModel):
    ts: int
    source: str
    bmu: tuple[int, int]
    novelty: float
    danger: float
    active_receptors: list[str]
    features: list[float]
    inflammation_at_bmu: float


class IngestResult(BaseModel):
    antigens: list[AntigenOut]
    ingested: int
    skipped: int


class Hotspot(BaseModel):
    row: int
    col: int
    level: float


class AttentionOut(BaseModel):
    hotspots: list[Hotspot]
    priority_share: float


class MetricsOut(BaseModel):
    events_ingested: int
    events_processed: int
    events_skipped: int
    antigens_emitted: int
    reduction_ratio: float
    mean_qe_per_epoch: list[float]
    epoch_size: int
    hotspots: AttentionOut
    confusion: dict[str, dict[str, int]]
    confusion_post_warmup: dict[str, dict[str, int]]
