"""The per-event tissue loop and its run metrics."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Iterator, Optional, Union

from ..errors import InputError
from ..gate import AntigenEvent, NoveltyInputs, decide, novelty_score
from ..inflammation import InflammationField, attention, deposit, step_decay
from ..receptors import effect_of, evaluate
from ..tissue import TissueMap, find_bmu, init_grid, train_step
from .config import PipelineConfig
from .normalize import NormState, normalize
from .records import RawEvent, parse_record

log = logging.getLogger(__name__)


@dataclass
class RunMetrics:
    events_ingested: int = 0
    events_processed: int = 0
    events_skipped: int = 0
    antigens_emitted: int = 0
    reduction_ratio: float = 0.0
    mean_qe_per_epoch: list[float] = field(default_factory=list)
    epoch_size: int = 1000
    hotspots: dict[str, Any] = field(default_factory=dict)
    confusion: dict[str, dict[str, int]] = field(default_factory=dict)
    confusion_post_warmup: dict[str, dict[str, int]] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class Counters:
    ingested: int = 0
    processed: int = 0
    skipped: int = 0
    emitted: int = 0
    qe_epochs: list[float] = field(default_factory=list)
    qe_sum: float = 0.0
    qe_n: int = 0
    confusion: dict[str, dict[str, int]] = field(default_factory=dict)
    confusion_post_warmup: dict[str, dict[str, int]] = field(default_factory=dict)


def _tally(table: dict[str, dict[str, int]], label: str, emitted: bool) -> None:
    row = table.setdefault(label, {"emitted": 0, "suppressed": 0})
    row["emitted" if emitted else "suppressed"] += 1


class Pipeline:
    """Owns every mutable stage: tissue map, normalizer, inflammation field.

    Not thread-safe; callers serialize access.
    """

    def __init__(self, cfg: PipelineConfig, seed: Optional[int] = None):
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else seed
        t = cfg.tissue
        self.tissue: TissueMap = init_grid(t.width, t.height, t.dim, t.schedule, self.seed)
        self.norm = NormState()
        inf = cfg.inflammation
        self.field = InflammationField(t.width, t.height, inf.decay, inf.cap, inf.spread_sigma)
        self.counters = Counters()

    def ingest(self, obj: Union[dict, RawEvent, InputError]) -> Optional[AntigenEvent]:
        """Count and process one decoded record; malformed ones are skipped."""
        try:
            if isinstance(obj, InputError):
                raise obj
            ev = obj if isinstance(obj, RawEvent) else parse_record(obj, self.cfg)
            return self.process_event(ev)
        except InputError as exc:
            self.counters.ingested += 1
            self.counters.skipped += 1
            log.warning("skipping record %d: %s", self.counters.ingested, exc)
            return None

    def ingest_all(self, records: Iterable[Union[dict, RawEvent, InputError]]) -> Iterator[AntigenEvent]:
        for obj in records:
            ag = self.ingest(obj)
            if ag is not None:
                yield ag

    def process_event(self, ev: RawEvent) -> Optional[AntigenEvent]:
        """Run one valid event through the tissue (counted as ingested and processed)."""
        cfg = self.cfg
        if len(ev.features) != cfg.tissue.dim:
            raise InputError(f"expected {cfg.tissue.dim} features, got {len(ev.features)}")
        x, _ = normalize(ev.features, self.norm)
        active = evaluate(cfg.receptors, ev.raw)
        effect = effect_of(cfg.receptors, active)

        tmap = self.tissue
        bmu, dist = find_bmu(tmap, x)
        last = int(tmap.last_hit_step[bmu])
        inputs = NoveltyInputs(
            bmu_distance=dist,
            bmu_hit_count=int(tmap.hit_count[bmu]),
            steps_since_bmu_hit=None if last < 0 else tmap.step - last,
            map_step=tmap.step,
        )
        novelty = novelty_score(inputs, cfg.gate)
        antigen = decide(novelty, effect, inputs.map_step, cfg.gate, {
            "ts": ev.ts,
            "source": ev.source,
            "bmu": bmu,
            "active_receptors": active,
            "features": x,
            "inflammation_at_bmu": self.field.at(bmu),
        })
        log.debug("ts=%s bmu=%s novelty=%.4f inputs=%s", ev.ts, bmu, novelty, inputs)

        train_step(tmap, x, effect.learn_multiplier)
        if antigen is not None:
            deposit(self.field, bmu, novelty * (1.0 + effect.danger))
        step_decay(self.field)

        c = self.counters
        c.ingested += 1
        c.processed += 1
        c.qe_sum += dist
        c.qe_n += 1
        if c.qe_n == cfg.epoch_size:
            c.qe_epochs.append(c.qe_sum / c.qe_n)
            c.qe_sum, c.qe_n = 0.0, 0
        emitted = antigen is not None
        if emitted:
            c.emitted += 1
        if ev.label is not None:
            _tally(c.confusion, ev.label, emitted)
            if inputs.map_step >= cfg.gate.warmup_steps:
                _tally(c.confusion_post_warmup, ev.label, emitted)
        return antigen

    def attention(self):
        inf = self.cfg.inflammation
        return attention(self.field, inf.hotspots, inf.floor)

    def metrics(self) -> RunMetrics:
        c = self.counters
        epochs = list(c.qe_epochs)
        if c.qe_n:
            epochs.append(c.qe_sum / c.qe_n)
        return RunMetrics(
            events_ingested=c.ingested,
            events_processed=c.processed,
            events_skipped=c.skipped,
            antigens_emitted=c.emitted,
            reduction_ratio=c.emitted / c.ingested if c.ingested else 0.0,
            mean_qe_per_epoch=epochs,
            epoch_size=self.cfg.epoch_size,
            hotspots=self.attention().to_dict(),
            confusion={k: dict(v) for k, v in sorted(c.confusion.items())},
            confusion_post_warmup={k: dict(v) for k, v in sorted(c.confusion_post_warmup.items())},
        )
