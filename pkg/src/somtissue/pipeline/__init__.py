"""Ingestion, orchestration, persistence and synthetic data for the tissue."""
from .config import PipelineConfig, load_config, parse_config
from .engine import Pipeline, RunMetrics
from .featurize import enumerate_vocab, syscall_featurize
from .normalize import NormState, normalize
from .records import RawEvent, parse_record
from .snapshot import load_snapshot, save_snapshot
from .synth import generate_synthetic

__all__ = [
    "NormState", "Pipeline", "PipelineConfig", "RawEvent", "RunMetrics",
    "enumerate_vocab", "generate_synthetic", "load_config", "load_snapshot",
    "normalize", "parse_config", "parse_record", "save_snapshot", "syscall_featurize",
]
