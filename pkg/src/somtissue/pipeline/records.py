"""Input records: parsing JSON Lines / CSV rows into RawEvents."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from numbers import Real
from typing import Any, Iterable, Iterator, Mapping, Optional, TextIO, Union

from ..errors import InputError
from .config import PipelineConfig
from .featurize import syscall_featurize

_RESERVED = {"ts", "source", "label"}


@dataclass
class RawEvent:
    ts: int
    source: str
    features: list[float]
    raw: dict[str, Any] = field(default_factory=dict)
    label: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"ts": self.ts, "source": self.source, "features": self.features}
        if self.raw:
            d["raw"] = self.raw
        if self.label is not None:
            d["label"] = self.label
        return d


def parse_record(obj: Any, cfg: PipelineConfig) -> RawEvent:
    """Validate one decoded JSON object; raises InputError when malformed."""
    if not isinstance(obj, Mapping):
        raise InputError("record is not a JSON object")
    ts = obj.get("ts")
    if not isinstance(ts, int) or isinstance(ts, bool):
        raise InputError(f"ts must be an integer, got {ts!r}")
    source = obj.get("source", "")
    if not isinstance(source, str):
        raise InputError(f"source must be a string, got {source!r}")

    if "features" in obj:
        feats = obj["features"]
        if not isinstance(feats, list) or not feats:
            raise InputError("features must be a non-empty list")
        if not all(isinstance(v, Real) and not isinstance(v, bool) for v in feats):
            raise InputError("features must be numbers")
        features = [float(v) for v in feats]
    elif "calls" in obj and cfg.featurizer is not None:
        calls = obj["calls"]
        if not isinstance(calls, list):
            raise InputError("calls must be a list of call identifiers")
        features = syscall_featurize(calls, cfg.featurizer.n, cfg.featurizer.vocab)
    else:
        raise InputError("record has no features")
    if not all(math.isfinite(v) for v in features):
        raise InputError("features must be finite")
    if len(features) != cfg.tissue.dim:
        raise InputError(f"expected {cfg.tissue.dim} features, got {len(features)}")

    raw = obj.get("raw") or {}
    if not isinstance(raw, Mapping):
        raise InputError("raw must be an object")
    for k, v in raw.items():
        if not isinstance(v, (str, bool, Real)):
            raise InputError(f"raw feature {k!r} must be a number, string or flag")
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise InputError(f"label must be a string, got {label!r}")
    return RawEvent(ts=ts, source=source, features=features, raw=dict(raw), label=label)


def iter_jsonl(stream: Iterable[str]) -> Iterator[Union[dict, InputError]]:
    """Yield decoded objects, or an InputError in place of each bad line."""
    for lineno, line in enumerate(stream, 1):
        line = line.strip()
        if not line:
            continue
        try:
            yield json.loads(line)
        except json.JSONDecodeError as exc:
            yield InputError(f"line {lineno}: invalid JSON ({exc.msg})")


def _scalar(text: str) -> Any:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def iter_csv(stream: TextIO, cfg: PipelineConfig) -> Iterator[Union[dict, InputError]]:
    """Map CSV rows onto the JSON record shape.

    Declared feature columns become ``features``; ts/source/label keep their
    meaning and any other non-empty column lands in ``raw``.
    """
    reader = csv.DictReader(stream)
    missing = [c for c in (*cfg.feature_columns, "ts") if c not in (reader.fieldnames or [])]
    if reader.fieldnames is None:
        return
    if missing:
        raise InputError(f"CSV header lacks columns {missing}")
    for row in reader:
        try:
            features = [float(row[c]) for c in cfg.feature_columns]
            ts = int(row["ts"])
        except (TypeError, ValueError) as exc:
            yield InputError(f"CSV line {reader.line_num}: {exc}")
            continue
        rec: dict[str, Any] = {"ts": ts, "source": row.get("source") or "", "features": features}
        if row.get("label"):
            rec["label"] = row["label"]
        raw = {k: _scalar(v) for k, v in row.items()
               if k not in _RESERVED and k not in cfg.feature_columns and k is not None and v != ""}
        if raw:
            rec["raw"] = raw
        yield rec


def iter_records(stream: TextIO, cfg: PipelineConfig) -> Iterator[Union[dict, InputError]]:
    if cfg.input_format == "csv":
        return iter_csv(stream, cfg)
    return iter_jsonl(stream)
