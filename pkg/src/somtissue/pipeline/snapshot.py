"""Versioned JSON snapshots of a running pipeline.

Layout::

    {"magic": "SOMTISSUE-SNAPSHOT", "version": 1,
     "sha256": <hex digest of the canonical payload>, "payload": {...}}

Floats are written with ``repr`` precision so a load restores every weight
bit for bit.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import ConfigError, SnapshotError
from ..inflammation import InflammationField
from ..tissue import TissueMap
from .config import PipelineConfig, parse_config
from .engine import Counters, Pipeline
from .normalize import NormState

MAGIC = "SOMTISSUE-SNAPSHOT"
VERSION = 1


def _canonical(payload: dict[str, Any]) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False).encode()


def _arr(a: np.ndarray | None) -> list | None:
    return None if a is None else a.tolist()


def state_dict(p: Pipeline) -> dict[str, Any]:
    t = p.tissue
    c = p.counters
    return {
        "config": dict(p.cfg.source),
        "seed": p.seed,
        "tissue": {
            "width": t.width,
            "height": t.height,
            "step": t.step,
            "weights": t.weights.tolist(),
            "hit_count": t.hit_count.tolist(),
            "last_hit_step": t.last_hit_step.tolist(),
            "cumulative_growth": t.cumulative_growth.tolist(),
        },
        "norm": {"mins": _arr(p.norm.mins), "maxs": _arr(p.norm.maxs), "count": p.norm.count},
        "field": {"level": p.field.level.tolist()},
        "counters": {
            "ingested": c.ingested, "processed": c.processed, "skipped": c.skipped,
            "emitted": c.emitted, "qe_epochs": c.qe_epochs, "qe_sum": c.qe_sum,
            "qe_n": c.qe_n, "confusion": c.confusion,
            "confusion_post_warmup": c.confusion_post_warmup,
        },
    }


def dumps(p: Pipeline) -> str:
    payload = state_dict(p)
    return json.dumps({
        "magic": MAGIC,
        "version": VERSION,
        "sha256": hashlib.sha256(_canonical(payload)).hexdigest(),
        "payload": payload,
    }, allow_nan=False)


def save_snapshot(p: Pipeline, path: str | Path) -> None:
    Path(path).write_text(dumps(p), encoding="utf-8")


def read_payload(text: str) -> dict[str, Any]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"snapshot is not valid JSON (truncated or corrupt): {exc.msg}") from None
    if not isinstance(doc, dict) or doc.get("magic") != MAGIC:
        raise SnapshotError("not a somtissue snapshot (bad magic string)")
    if doc.get("version") != VERSION:
        raise SnapshotError(f"unsupported snapshot version {doc.get('version')!r}, expected {VERSION}")
    payload = doc.get("payload")
    if not isinstance(payload, dict):
        raise SnapshotError("snapshot has no payload")
    if hashlib.sha256(_canonical(payload)).hexdigest() != doc.get("sha256"):
        raise SnapshotError("snapshot checksum mismatch (corrupt file)")
    return payload


def restore(payload: dict[str, Any], cfg: PipelineConfig | None = None) -> Pipeline:
    """Rebuild a pipeline from a payload; ``cfg`` overrides the embedded config."""
    try:
        if cfg is None:
            cfg = parse_config(payload["config"])
        p = Pipeline(cfg, seed=payload["seed"])
        t = payload["tissue"]
        if (t["width"], t["height"]) != (cfg.tissue.width, cfg.tissue.height):
            raise SnapshotError(
                f"snapshot grid {t['height']}x{t['width']} does not match config "
                f"{cfg.tissue.height}x{cfg.tissue.width}")
        p.tissue = TissueMap(
            width=t["width"], height=t["height"],
            weights=np.array(t["weights"], dtype=np.float64),
            schedule=cfg.tissue.schedule,
            hit_count=np.array(t["hit_count"], dtype=np.int64),
            last_hit_step=np.array(t["last_hit_step"], dtype=np.int64),
            cumulative_growth=np.array(t["cumulative_growth"], dtype=np.float64),
            step=int(t["step"]),
        )
        if p.tissue.dim != cfg.tissue.dim:
            raise SnapshotError(f"snapshot dimension {p.tissue.dim} does not match config {cfg.tissue.dim}")
        n = payload["norm"]
        p.norm = NormState(
            None if n["mins"] is None else np.array(n["mins"], dtype=np.float64),
            None if n["maxs"] is None else np.array(n["maxs"], dtype=np.float64),
            int(n["count"]),
        )
        inf = cfg.inflammation
        p.field = InflammationField(t["width"], t["height"], inf.decay, inf.cap, inf.spread_sigma,
                                    np.array(payload["field"]["level"], dtype=np.float64))
        p.counters = Counters(**payload["counters"])
    except SnapshotError:
        raise
    except (KeyError, TypeError, ValueError, ConfigError) as exc:
        raise SnapshotError(f"snapshot payload is malformed: {exc}") from None
    return p


def load_snapshot(path: str | Path, cfg: PipelineConfig | None = None) -> Pipeline:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot {str(path)!r}: {exc.strerror or exc}") from None
    return restore(read_payload(text), cfg)
