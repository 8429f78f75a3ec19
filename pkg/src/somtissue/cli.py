"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 input/output error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from itertools import islice
from pathlib import Path
from typing import Iterator, Optional, Sequence

from .errors import ConfigError, InputError, SnapshotError
from .pipeline.config import PipelineConfig, load_config
from .pipeline.records import iter_csv
from .pipeline.runner import RunPaths, antigen_line, open_input, run_job
from .pipeline.snapshot import load_snapshot
from .pipeline.synth import generate_synthetic

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3
BATCH = 1000

log = logging.getLogger("somtissue")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="somtissue", description=__doc__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="stream events through the tissue")
    run.add_argument("--config", required=True)
    run.add_argument("--input", required=True, help="JSON Lines or CSV file, '-' for stdin")
    run.add_argument("--out", required=True, help="antigen JSON Lines output")
    run.add_argument("--metrics")
    run.add_argument("--grid-dump")
    run.add_argument("--field-dump")
    run.add_argument("--snapshot-out")
    run.add_argument("--snapshot-in")
    run.add_argument("--seed", type=int)
    run.add_argument("--server", help="send events to a running service instead of processing locally")

    synth = sub.add_parser("synth", help="write a labelled synthetic event stream")
    synth.add_argument("--config", required=True)
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--seed", type=int)
    synth.add_argument("--out", required=True, help="output path, '-' for stdout")

    insp = sub.add_parser("inspect", help="summarize a snapshot")
    insp.add_argument("--snapshot", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return ap


def _synth(args) -> int:
    cfg = load_config(args.config)
    if cfg.synth is None:
        raise ConfigError(f"config {args.config!r} has no synth section")
    seed = cfg.seed if args.seed is None else args.seed
    events = generate_synthetic(cfg.synth, args.n, seed)
    lines = (json.dumps(ev.to_dict(), separators=(",", ":")) + "\n" for ev in events)
    if args.out == "-":
        sys.stdout.writelines(lines)
    else:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.writelines(lines)
        except OSError as exc:
            raise InputError(f"cannot write {args.out!r}: {exc.strerror or exc}") from None
    return EXIT_OK


def _inspect(args) -> int:
    p = load_snapshot(args.snapshot)
    t = p.tissue
    summary = {
        "snapshot": args.snapshot,
        "grid": {"height": t.height, "width": t.width, "dim": t.dim},
        "step": t.step,
        "cells_hit": int((t.hit_count > 0).sum()),
        "norm_count": p.norm.count,
        "field_total": p.field.total,
        "metrics": p.metrics().to_dict(),
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _wire_lines(src, cfg: PipelineConfig) -> Iterator[str]:
    if cfg.input_format == "csv":
        for rec in iter_csv(src, cfg):
            # null stands in for a bad row so the service still counts it as skipped
            yield "null" if isinstance(rec, InputError) else json.dumps(rec)
    else:
        for line in src:
            if line.strip():
                yield line


def _run_remote(args, cfg: PipelineConfig) -> int:
    import httpx

    from .service.client import ServiceError, TissueClient

    client = TissueClient(args.server)
    snapshot = None
    if args.snapshot_in:
        try:
            snapshot = json.loads(Path(args.snapshot_in).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise SnapshotError(f"cannot read snapshot {args.snapshot_in!r}: {exc}") from None
    try:
        seed = cfg.seed if args.seed is None else args.seed
        sid = client.create_session(dict(cfg.source), seed=seed, snapshot=snapshot)
        try:
            with open(args.out, "w", encoding="utf-8") as out, open_input(args.input) as src:
                lines = _wire_lines(src, cfg)
                while chunk := list(islice(lines, BATCH)):
                    for ag in client.ingest_lines(sid, chunk)["antigens"]:
                        out.write(json.dumps(ag, separators=(",", ":")) + "\n")
            dumps = [(args.metrics, lambda: json.dumps(client.metrics(sid), indent=2) + "\n"),
                     (args.grid_dump, lambda: client.grid_csv(sid)),
                     (args.field_dump, lambda: client.field_csv(sid)),
                     (args.snapshot_out, lambda: client.snapshot(sid))]
            for path, fetch in dumps:
                if path:
                    Path(path).write_text(fetch(), encoding="utf-8")
        finally:
            client.delete_session(sid)
    except ServiceError as exc:
        if exc.status == 422:
            raise ConfigError(exc.detail) from None
        raise InputError(str(exc)) from None
    except httpx.HTTPError as exc:
        raise InputError(f"cannot reach service at {args.server}: {exc}") from None
    except OSError as exc:
        raise InputError(f"{exc.filename or 'output'}: {exc.strerror or exc}") from None
    return EXIT_OK


def _run(args) -> int:
    cfg = load_config(args.config)
    if args.server:
        return _run_remote(args, cfg)
    paths = RunPaths(input=args.input, out=args.out, metrics=args.metrics,
                     grid_dump=args.grid_dump, field_dump=args.field_dump,
                     snapshot_out=args.snapshot_out, snapshot_in=args.snapshot_in)
    m = run_job(cfg, paths, seed=args.seed)
    log.info("ingested=%d emitted=%d skipped=%d reduction_ratio=%.4f",
             m.events_ingested, m.antigens_emitted, m.events_skipped, m.reduction_ratio)
    return EXIT_OK


def _serve(args) -> int:
    import uvicorn

    uvicorn.run("somtissue.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": _run, "synth": _synth, "inspect": _inspect, "serve": _serve}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InputError, SnapshotError) as exc:
        print(f"input/output error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
