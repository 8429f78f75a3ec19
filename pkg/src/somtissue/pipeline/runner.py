"""Batch driver behind the ``run`` command."""
from __future__ import annotations

import json
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterator, Optional

from ..errors import InputError
from ..inflammation import field_csv
from ..tissue import grid_csv
from .config import PipelineConfig
from .engine import Pipeline, RunMetrics
from .records import iter_records
from .snapshot import load_snapshot, save_snapshot


@dataclass
class RunPaths:
    input: str
    out: str
    metrics: Optional[str] = None
    grid_dump: Optional[str] = None
    field_dump: Optional[str] = None
    snapshot_out: Optional[str] = None
    snapshot_in: Optional[str] = None


@contextmanager
def open_input(path: str) -> Iterator[IO[str]]:
    if path == "-":
        yield sys.stdin
        return
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise InputError(f"cannot open input {path!r}: {exc.strerror or exc}") from None
    with fh:
        yield fh


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {path!r}: {exc.strerror or exc}") from None


def antigen_line(ag) -> str:
    return json.dumps(ag.to_dict(), separators=(",", ":")) + "\n"


def run_job(cfg: PipelineConfig, paths: RunPaths, seed: Optional[int] = None) -> RunMetrics:
    if paths.snapshot_in:
        pipe = load_snapshot(paths.snapshot_in, cfg)
    else:
        pipe = Pipeline(cfg, seed=seed)

    try:
        out = open(paths.out, "w", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot open output {paths.out!r}: {exc.strerror or exc}") from None
    with out, open_input(paths.input) as src:
        for ag in pipe.ingest_all(iter_records(src, cfg)):
            out.write(antigen_line(ag))

    metrics = pipe.metrics()
    if paths.metrics:
        _write(paths.metrics, json.dumps(metrics.to_dict(), indent=2) + "\n")
    if paths.grid_dump:
        _write(paths.grid_dump, grid_csv(pipe.tissue))
    if paths.field_dump:
        _write(paths.field_dump, field_csv(pipe.field))
    if paths.snapshot_out:
        try:
            save_snapshot(pipe, paths.snapshot_out)
        except OSError as exc:
            raise InputError(f"cannot write snapshot {paths.snapshot_out!r}: {exc.strerror or exc}") from None
    return metrics
