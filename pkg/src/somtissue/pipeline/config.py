"""Pipeline configuration: one JSON document covering every stage."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

from ..errors import ConfigError
from ..gate import GateConfig
from ..inflammation import InflammationField
from ..receptors import TlrRuleSet, compile_ruleset
from ..tissue import Schedule
from .featurize import enumerate_vocab

EXAMPLE_CONFIG = Path(__file__).resolve().parent.parent / "data" / "example_config.json"

_SECTIONS = {"seed", "tissue", "gate", "receptors", "inflammation", "metrics",
             "input", "featurizer", "synth"}


@dataclass(frozen=True)
class TissueConfig:
    width: int = 10
    height: int = 10
    dim: int = 2
    schedule: Schedule = field(default_factory=Schedule)


@dataclass(frozen=True)
class InflammationConfig:
    decay: float = 0.98
    cap: float = 5.0
    spread_sigma: float = 1.0
    hotspots: int = 5
    floor: float = 0.0


@dataclass(frozen=True)
class FeaturizerConfig:
    n: int
    vocab: tuple[tuple, ...]


@dataclass(frozen=True)
class ClusterSpec:
    mean: tuple[float, ...]
    std: float
    weight: float = 1.0


@dataclass(frozen=True)
class SynthConfig:
    clusters: tuple[ClusterSpec, ...]
    anomaly_fraction: float = 0.01
    anomaly_radius: tuple[float, float] = (5.0, 8.0)


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    tissue: TissueConfig = field(default_factory=TissueConfig)
    gate: GateConfig = field(default_factory=GateConfig)
    receptors: TlrRuleSet = field(default_factory=TlrRuleSet)
    inflammation: InflammationConfig = field(default_factory=InflammationConfig)
    epoch_size: int = 1000
    input_format: str = "jsonl"
    feature_columns: tuple[str, ...] = ()
    featurizer: Optional[FeaturizerConfig] = None
    synth: Optional[SynthConfig] = None
    source: Mapping[str, Any] = field(default_factory=dict, compare=False)


def _section(doc: Mapping[str, Any], key: str) -> Mapping[str, Any]:
    sec = doc.get(key) or {}
    if not isinstance(sec, Mapping):
        raise ConfigError(f"config section {key!r} must be an object")
    return sec


def _build(cls, sec: Mapping[str, Any], where: str, **extra):
    try:
        return cls(**sec, **extra)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _pos_int(v: Any, where: str) -> int:
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise ConfigError(f"{where} must be a positive integer, got {v!r}")
    return v


def _synth(sec: Mapping[str, Any], dim: int) -> SynthConfig:
    clusters = []
    for i, c in enumerate(sec.get("clusters") or []):
        where = f"synth.clusters[{i}]"
        if not isinstance(c, Mapping):
            raise ConfigError(f"{where} must be an object")
        try:
            mean = tuple(float(m) for m in c["mean"])
            std = float(c["std"])
            weight = float(c.get("weight", 1.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: needs numeric mean list and std ({exc})") from None
        if len(mean) != dim:
            raise ConfigError(f"{where}: mean has {len(mean)} components, tissue.dim is {dim}")
        if not all(math.isfinite(v) for v in (*mean, std, weight)) or std <= 0 or weight <= 0:
            raise ConfigError(f"{where}: mean/std/weight must be finite with std, weight > 0")
        clusters.append(ClusterSpec(mean, std, weight))
    if not clusters:
        raise ConfigError("synth.clusters must list at least one cluster")
    frac = sec.get("anomaly_fraction", 0.01)
    if not isinstance(frac, (int, float)) or not 0.0 <= frac <= 1.0:
        raise ConfigError(f"synth.anomaly_fraction must lie in [0, 1], got {frac!r}")
    radius = tuple(float(r) for r in sec.get("anomaly_radius", (5.0, 8.0)))
    if len(radius) != 2 or not 5.0 <= radius[0] <= radius[1] or not math.isfinite(radius[1]):
        raise ConfigError(f"synth.anomaly_radius must be [lo, hi] with 5 <= lo <= hi, got {radius}")
    return SynthConfig(tuple(clusters), float(frac), radius)  # type: ignore[arg-type]


def parse_config(doc: Mapping[str, Any]) -> PipelineConfig:
    if not isinstance(doc, Mapping):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")

    t = dict(_section(doc, "tissue"))
    schedule = _build(Schedule, _section(t, "schedule"), "tissue.schedule")
    t.pop("schedule", None)
    tissue = _build(TissueConfig, t, "tissue", schedule=schedule)
    for name in ("width", "height", "dim"):
        _pos_int(getattr(tissue, name), f"tissue.{name}")

    gate = _build(GateConfig, _section(doc, "gate"), "gate")
    infl = _build(InflammationConfig, _section(doc, "inflammation"), "inflammation")
    _pos_int(infl.hotspots, "inflammation.hotspots")
    if not infl.floor >= 0:
        raise ConfigError(f"inflammation.floor must be >= 0, got {infl.floor}")
    _build(InflammationField, {"width": 1, "height": 1, "decay": infl.decay,
                               "cap": infl.cap, "spread_sigma": infl.spread_sigma}, "inflammation")

    try:
        rules = compile_ruleset(doc.get("receptors"))
    except ConfigError as exc:
        raise ConfigError(f"receptors: {exc}") from None

    metrics = _section(doc, "metrics")
    epoch_size = _pos_int(metrics.get("epoch_size", 1000), "metrics.epoch_size")

    inp = _section(doc, "input")
    fmt = inp.get("format", "jsonl")
    if fmt not in ("jsonl", "csv"):
        raise ConfigError(f"input.format must be 'jsonl' or 'csv', got {fmt!r}")
    cols = tuple(inp.get("feature_columns") or ())
    if fmt == "csv" and len(cols) != tissue.dim:
        raise ConfigError(
            f"input.feature_columns must name {tissue.dim} columns for CSV input, got {list(cols)}")

    featurizer = None
    fz = _section(doc, "featurizer")
    if fz:
        n = _pos_int(fz.get("n"), "featurizer.n")
        vocab = tuple(enumerate_vocab(list(fz.get("alphabet") or []), n))
        if len(vocab) != tissue.dim:
            raise ConfigError(
                f"featurizer vocabulary has {len(vocab)} n-grams but tissue.dim is {tissue.dim}")
        featurizer = FeaturizerConfig(n, vocab)

    synth = _synth(_section(doc, "synth"), tissue.dim) if doc.get("synth") else None

    return PipelineConfig(seed=seed, tissue=tissue, gate=gate, receptors=rules,
                          inflammation=infl, epoch_size=epoch_size, input_format=fmt,
                          feature_columns=cols, featurizer=featurizer, synth=synth,
                          source=json.loads(json.dumps(doc)))


def load_config(path: str | Path) -> PipelineConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {str(p)!r}: {exc.strerror or exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {str(p)!r} is not valid JSON: {exc}") from None
    return parse_config(doc)
