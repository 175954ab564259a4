"""Experiment configuration: YAML loading, validation and full resolution.

A resolved config spells out every parameter, including all defaults, so the
metadata sidecar documents exactly what ran. The fingerprint is a hash of the
resolved config minus the output location.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from ..agent import EtlParams
from ..baselines import STRATEGY_KINDS, IpdStrategy
from ..core import ConfigError
from ..envs.grid import GridConfig
from ..envs.ipd import PayoffMatrix
from ..envs.tower import TowerConfig
from ..exploration import ExplorationParams
from ..trust import TrustParams

KINDS = ("grid", "tower", "tower_recovery", "ipd")
LEARNERS = ("etl", "qlearn", "mc")
FIXED_IPD = tuple(k for k in STRATEGY_KINDS if k not in ("delayed_coop", "delayed_defect"))
DELAYED_IPD = ("delayed_coop", "delayed_defect")

DEFAULT_EPISODES = {"grid": 500, "tower": 5000, "tower_recovery": 5000, "ipd": 1}
DEFAULT_SEEDS = {"grid": 30, "tower": 30, "tower_recovery": 30, "ipd": 1}
DEFAULT_GREEDY_UNTIL = 200
BASELINE_DEFAULTS = {
    "qlearn": {"epsilon": 0.1, "learn_rate": 0.1, "discount": 0.95},
    "mc": {"epsilon": 0.1, "discount": 0.95},
}
IPD_DEFAULTS = {"rounds": 500, "games_per_pair": 30, "include_self_play": True,
                "payoffs": dataclasses.asdict(PayoffMatrix())}

_TOP_LEVEL = {"kind", "n_seeds", "n_episodes", "master_seed", "output", "environment",
              "roster", "greedy_until_episode"}


@dataclass(frozen=True)
class AgentSpec:
    """One roster entry: a strategy identifier and its fully resolved parameters."""

    strategy: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"strategy": self.strategy, "params": _plain(self.params)}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    environment: Mapping[str, Any]
    roster: tuple[AgentSpec, ...]
    n_seeds: int
    n_episodes: int
    master_seed: int
    output: str
    greedy_until_episode: int = 0

    def resolved(self) -> dict:
        """Every parameter that influences the simulation, defaults included."""
        out = {
            "kind": self.kind,
            "n_seeds": self.n_seeds,
            "n_episodes": self.n_episodes,
            "master_seed": self.master_seed,
            "environment": _plain(self.environment),
            "roster": [a.to_dict() for a in self.roster],
        }
        if self.kind == "tower_recovery":
            out["greedy_until_episode"] = self.greedy_until_episode
        return out

    def fingerprint(self) -> str:
        blob = json.dumps(self.resolved(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_overrides(self, **changes) -> "ExperimentConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        cfg = dataclasses.replace(self, **changes)
        _check_counts(cfg.n_seeds, cfg.n_episodes)
        return cfg


def _plain(obj):
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _check_counts(n_seeds, n_episodes):
    for name, v in (("n_seeds", n_seeds), ("n_episodes", n_episodes)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ConfigError(name, "must be a positive integer")


def _build_dataclass(cls, overrides: Any, where: str):
    if overrides is None:
        overrides = {}
    if not isinstance(overrides, Mapping):
        raise ConfigError(where, "expected a mapping")
    names = {f.name for f in dataclasses.fields(cls)}
    for key in overrides:
        if key not in names:
            raise ConfigError(f"{where}.{key}", "unknown parameter")
    try:
        return cls(**overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, str(exc)) from None


def resolve_etl_params(overrides: Any, where: str) -> EtlParams:
    overrides = dict(overrides or {})
    trust = _build_dataclass(TrustParams, overrides.pop("trust", None), f"{where}.trust")
    expl = _build_dataclass(ExplorationParams, overrides.pop("exploration", None), f"{where}.exploration")
    overrides["trust"] = trust
    overrides["exploration"] = expl
    return _build_dataclass(EtlParams, overrides, where)


def _resolve_agent(entry: Any, where: str, kind: str) -> AgentSpec:
    if isinstance(entry, str):
        entry = {"strategy": entry}
    if not isinstance(entry, Mapping) or "strategy" not in entry:
        raise ConfigError(where, "roster entries need a 'strategy'")
    extra = set(entry) - {"strategy", "params", "count"}
    if extra:
        raise ConfigError(f"{where}.{sorted(extra)[0]}", "unknown roster key")
    sid = str(entry["strategy"])
    params = entry.get("params") or {}
    base, _, arg = sid.partition(":")

    if base == "etl":
        resolved = dataclasses.asdict(resolve_etl_params(params, f"{where}.params"))
        return AgentSpec("etl", resolved)
    if base in BASELINE_DEFAULTS:
        defaults = BASELINE_DEFAULTS[base]
        if not isinstance(params, Mapping):
            raise ConfigError(f"{where}.params", "expected a mapping")
        for key in params:
            if key not in defaults:
                raise ConfigError(f"{where}.params.{key}", "unknown parameter")
        merged = {**defaults, **params}
        if not 0.0 <= merged["epsilon"] <= 1.0:
            raise ConfigError(f"{where}.params.epsilon", "must lie in [0, 1]")
        return AgentSpec(base, merged)
    if kind != "ipd":
        raise ConfigError("roster", f"strategy {sid!r} is not available for {kind} experiments")
    if params:
        raise ConfigError(f"{where}.params", f"fixed strategy {sid!r} takes no parameters")
    if base in FIXED_IPD and not arg:
        return AgentSpec(base, {})
    if base in DELAYED_IPD:
        try:
            k = int(arg) if arg else 50
            IpdStrategy(base, k)
        except ValueError:
            raise ConfigError(where, f"bad switch round in {sid!r}") from None
        return AgentSpec(f"{base}:{k}", {})
    raise ConfigError(where, f"unknown strategy {sid!r}")


def _environment(kind: str, block: Any) -> dict:
    if block is None:
        block = {}
    if not isinstance(block, Mapping):
        raise ConfigError("environment", "expected a mapping")
    if kind == "grid":
        return dataclasses.asdict(_build_dataclass(GridConfig, block, "environment"))
    if kind in ("tower", "tower_recovery"):
        return dataclasses.asdict(_build_dataclass(TowerConfig, block, "environment"))
    for key in block:
        if key not in IPD_DEFAULTS:
            raise ConfigError(f"environment.{key}", "unknown parameter")
    env = {**IPD_DEFAULTS, **block}
    env["payoffs"] = dataclasses.asdict(_build_dataclass(PayoffMatrix, block.get("payoffs"), "environment.payoffs"))
    for name in ("rounds", "games_per_pair"):
        v = env[name]
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ConfigError(f"environment.{name}", "must be a positive integer")
    if not isinstance(env["include_self_play"], bool):
        raise ConfigError("environment.include_self_play", "must be true or false")
    return env


def roster_size(kind: str, environment: Mapping[str, Any]) -> Optional[int]:
    if kind == "grid":
        return environment["n_agents"]
    if kind in ("tower", "tower_recovery"):
        return environment["floors"]
    return None


def parse_config(raw: Any, source: str = "<config>") -> ExperimentConfig:
    """Validate a decoded config tree; errors name the offending field."""
    if not isinstance(raw, Mapping):
        raise ConfigError("config", f"{source} must contain a mapping at the top level")
    unknown = set(raw) - _TOP_LEVEL
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown top-level key")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise ConfigError("kind", f"must be one of {', '.join(KINDS)}")
    environment = _environment(kind, raw.get("environment"))

    entries = raw.get("roster")
    if not isinstance(entries, list) or not entries:
        raise ConfigError("roster", "must be a non-empty list")
    roster: list[AgentSpec] = []
    for i, entry in enumerate(entries):
        spec = _resolve_agent(entry, f"roster[{i}]", kind)
        count = entry.get("count", 1) if isinstance(entry, Mapping) else 1
        if not isinstance(count, int) or isinstance(count, bool) or count < 1:
            raise ConfigError(f"roster[{i}].count", "must be a positive integer")
        roster.extend([spec] * count)
    need = roster_size(kind, environment)
    if need is not None and len(roster) != need:
        raise ConfigError("roster", f"{kind} needs exactly {need} agents, got {len(roster)}")
    if kind == "ipd":
        names = [a.strategy for a in roster]
        if len(roster) < 2:
            raise ConfigError("roster", "a tournament needs at least two strategies")
        if len(set(names)) != len(names):
            raise ConfigError("roster", "tournament strategies must be distinct")

    n_seeds = raw.get("n_seeds", DEFAULT_SEEDS[kind])
    n_episodes = raw.get("n_episodes", DEFAULT_EPISODES[kind])
    _check_counts(n_seeds, n_episodes)
    master_seed = raw.get("master_seed", 0)
    if not isinstance(master_seed, int) or isinstance(master_seed, bool) or not 0 <= master_seed < 2**64:
        raise ConfigError("master_seed", "must be an integer in [0, 2**64)")
    greedy = 0
    if kind == "tower_recovery":
        greedy = raw.get("greedy_until_episode", DEFAULT_GREEDY_UNTIL)
        if not isinstance(greedy, int) or isinstance(greedy, bool) or greedy < 0:
            raise ConfigError("greedy_until_episode", "must be a non-negative integer")
    elif "greedy_until_episode" in raw:
        raise ConfigError("greedy_until_episode", "only valid for tower_recovery experiments")
    output = raw.get("output", f"results/{kind}.csv")
    if not isinstance(output, str) or not output:
        raise ConfigError("output", "must be a file path")
    return ExperimentConfig(kind, environment, tuple(roster), n_seeds, n_episodes,
                            master_seed, output, greedy)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError("config", f"no such file: {path}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"{path} is not valid YAML: {exc}") from None
    return parse_config(raw, str(path))
