"""Receptor rules over raw event features.

A receptor is a named predicate on one raw feature. Receptors that fire
together select a learning multiplier and a danger level: the largest
matching combination wins outright, otherwise the single-receptor effects
compose (multipliers multiply, danger takes the max).

Configuration shape::

    {
      "receptors": [{"name": "brute_force", "feature": "failed_logins",
                     "op": ">=", "value": 5}],
      "singles": {"brute_force": {"mult": 2.0, "danger": 0.3}},
      "combos": [{"members": ["brute_force", "remote_shell"],
                  "mult": 4.0, "danger": 0.95}]
    }
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from numbers import Real
from typing import Any, Mapping, Union

from .errors import ConfigError

OPS = (">=", "<=", "==", "in")
RawValue = Union[float, int, str, bool]


@dataclass(frozen=True)
class TlrEffect:
    learn_multiplier: float = 1.0
    danger: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.learn_multiplier) and self.learn_multiplier >= 1.0):
            raise ConfigError(f"learn_multiplier must be >= 1, got {self.learn_multiplier}")
        if not 0.0 <= self.danger <= 1.0:
            raise ConfigError(f"danger must lie in [0, 1], got {self.danger}")


IDENTITY = TlrEffect()


def _is_number(v: Any) -> bool:
    return isinstance(v, Real) and not isinstance(v, bool)


@dataclass(frozen=True)
class ReceptorSpec:
    name: str
    feature: str
    op: str
    value: Any

    def holds(self, raw: Mapping[str, RawValue]) -> bool:
        if self.feature not in raw:
            return False
        v = raw[self.feature]
        if self.op == ">=":
            return _is_number(v) and v >= self.value
        if self.op == "<=":
            return _is_number(v) and v <= self.value
        if self.op == "==":
            return v == self.value and _is_number(v) == _is_number(self.value)
        try:
            return v in self.value  # "in": value is a frozenset
        except TypeError:
            return False


@dataclass(frozen=True)
class ComboRule:
    members: frozenset[str]
    effect: TlrEffect

    @property
    def sort_key(self) -> tuple[int, list[str]]:
        return (-len(self.members), sorted(self.members))


@dataclass(frozen=True)
class TlrRuleSet:
    receptors: tuple[ReceptorSpec, ...] = ()
    singles: Mapping[str, TlrEffect] = field(default_factory=dict)
    combos: tuple[ComboRule, ...] = ()

    @property
    def names(self) -> frozenset[str]:
        return frozenset(r.name for r in self.receptors)


def _effect(entry: Mapping[str, Any], where: str) -> TlrEffect:
    try:
        mult = float(entry.get("mult", 1.0))
        danger = float(entry.get("danger", 0.0))
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"{where}: mult/danger must be numbers ({exc})") from None
    try:
        return TlrEffect(mult, danger)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _receptor(entry: Mapping[str, Any]) -> ReceptorSpec:
    if not isinstance(entry, Mapping):
        raise ConfigError(f"receptor entries must be objects, got {entry!r}")
    name = entry.get("name")
    if not isinstance(name, str) or not name:
        raise ConfigError(f"receptor is missing a name: {entry!r}")
    feature = entry.get("feature")
    if not isinstance(feature, str) or not feature:
        raise ConfigError(f"receptor {name!r}: missing feature key")
    op = entry.get("op")
    if op not in OPS:
        raise ConfigError(f"receptor {name!r}: op must be one of {OPS}, got {op!r}")
    if "value" not in entry:
        raise ConfigError(f"receptor {name!r}: missing value")
    value = entry["value"]
    if op in (">=", "<="):
        if not _is_number(value) or not math.isfinite(value):
            raise ConfigError(f"receptor {name!r}: threshold must be a finite number, got {value!r}")
    elif op == "==":
        if _is_number(value) and not math.isfinite(value):
            raise ConfigError(f"receptor {name!r}: value must be finite")
        if not isinstance(value, (str, bool, Real)):
            raise ConfigError(f"receptor {name!r}: value must be a number, string or flag")
    else:
        if not isinstance(value, (list, tuple, set, frozenset)):
            raise ConfigError(f"receptor {name!r}: 'in' needs a list of values")
        value = frozenset(value)
    return ReceptorSpec(name=name, feature=feature, op=op, value=value)


def compile_ruleset(spec: Union[str, Mapping[str, Any], None]) -> TlrRuleSet:
    """Validate a receptor configuration (JSON text or parsed mapping)."""
    if spec is None:
        return TlrRuleSet()
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"receptor config is not valid JSON: {exc}") from None
    if not isinstance(spec, Mapping):
        raise ConfigError("receptor config must be an object")
    unknown = set(spec) - {"receptors", "singles", "combos"}
    if unknown:
        raise ConfigError(f"unknown receptor config keys: {sorted(unknown)}")

    receptors: list[ReceptorSpec] = []
    seen: set[str] = set()
    for entry in spec.get("receptors") or []:
        r = _receptor(entry)
        if r.name in seen:
            raise ConfigError(f"duplicate receptor name {r.name!r}")
        seen.add(r.name)
        receptors.append(r)

    singles: dict[str, TlrEffect] = {}
    raw_singles = spec.get("singles") or {}
    if not isinstance(raw_singles, Mapping):
        raise ConfigError("singles must map receptor names to effects")
    for name, entry in raw_singles.items():
        if name not in seen:
            raise ConfigError(f"single effect for undeclared receptor {name!r}")
        if not isinstance(entry, Mapping):
            raise ConfigError(f"single {name!r}: effect must be an object")
        singles[name] = _effect(entry, f"single {name!r}")
    for name in seen:
        singles.setdefault(name, IDENTITY)

    combos: list[ComboRule] = []
    member_sets: set[frozenset[str]] = set()
    for entry in spec.get("combos") or []:
        if not isinstance(entry, Mapping):
            raise ConfigError(f"combo entries must be objects, got {entry!r}")
        members = entry.get("members")
        if not isinstance(members, (list, tuple)) or not members:
            raise ConfigError(f"combo needs a non-empty members list: {entry!r}")
        for m in members:
            if m not in seen:
                raise ConfigError(f"combo references undeclared receptor {m!r}")
        key = frozenset(members)
        label = "+".join(sorted(key))
        if key in member_sets:
            raise ConfigError(f"duplicate combo {label!r}")
        member_sets.add(key)
        combos.append(ComboRule(members=key, effect=_effect(entry, f"combo {label!r}")))

    combos.sort(key=lambda c: c.sort_key)
    return TlrRuleSet(receptors=tuple(receptors), singles=singles, combos=tuple(combos))


def evaluate(rules: TlrRuleSet, raw: Mapping[str, RawValue] | None) -> frozenset[str]:
    if not raw:
        return frozenset()
    return frozenset(r.name for r in rules.receptors if r.holds(raw))


def effect_of(rules: TlrRuleSet, active: frozenset[str] | set[str]) -> TlrEffect:
    if not active:
        return IDENTITY
    # combos are pre-sorted: largest member set first, then lexicographic
    for combo in rules.combos:
        if combo.members <= active:
            return combo.effect
    mult, danger = 1.0, 0.0
    for name in sorted(active):
        eff = rules.singles.get(name, IDENTITY)
        mult *= eff.learn_multiplier
        danger = max(danger, eff.danger)
    return TlrEffect(mult, danger)
