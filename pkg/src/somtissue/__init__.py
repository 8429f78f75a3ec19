"""Artificial immune tissue: an online SOM pre-processor that forwards novel events."""
from .errors import ConfigError, InputError, SnapshotError, TissueError
from .gate import AntigenEvent, GateConfig, NoveltyInputs, decide, novelty_score
from .inflammation import AttentionReport, InflammationField, attention, deposit, step_decay
from .receptors import TlrEffect, TlrRuleSet, compile_ruleset, effect_of, evaluate
from .tissue import Schedule, TissueMap, UpdateReport, export_grid, find_bmu, init_grid, schedule_params, train_step

__version__ = "0.1.0"
