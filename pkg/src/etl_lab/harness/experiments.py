"""Multi-seed experiment execution and metrics persistence."""

from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from .. import __version__
from ..agent import EtlAgent
from ..baselines import FixedStrategyPlayer, ForcedGreedyWrapper, IpdStrategy, McControlAgent, QLearnerAgent
from ..core import MASK64, ConfigError, RngStream, UsageError
from ..envs.grid import GridConfig, GridEnv
from ..envs.ipd import PayoffMatrix, TournamentResult, match_success, round_robin
from ..envs.tower import TowerConfig, TowerEnv
from ..signals import map_signals_grid, map_signals_ipd, map_signals_tower
from .config import AgentSpec, ExperimentConfig, resolve_etl_params

CSV_VERSION = 1
OUTPUT_DIR_ENV = "ETL_LAB_OUTPUT_DIR"
TOOL = "etl-lab"


def csv_columns(config: ExperimentConfig) -> list[str]:
    if config.kind == "ipd":
        return ["seed", "game", "strategy_a", "strategy_b", "total_a", "total_b", "success_a", "success_b"]
    n = len(config.roster)
    returns = [f"return_agent{i}" for i in range(n)]
    if config.kind == "grid":
        return ["seed", "episode", "conflicts_per_step", "cooldown_fraction", "remaining_resources", *returns]
    return ["seed", "episode", "success", "deaths", *returns, "mean_trust"]


def version_line(config: ExperimentConfig) -> str:
    return f"# {TOOL} metrics v{CSV_VERSION} kind={config.kind} fingerprint={config.fingerprint()}"


def run_seed_master(config: ExperimentConfig, seed_index: int) -> int:
    return (config.master_seed + seed_index) & MASK64


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def build_agent(spec: AgentSpec, n_actions: int, mapper: Callable, rng: RngStream):
    p = spec.params
    if spec.strategy == "etl":
        return EtlAgent(n_actions, mapper, rng, resolve_etl_params(p, "roster.params"))
    if spec.strategy == "qlearn":
        return QLearnerAgent(n_actions, rng, p["epsilon"], p["learn_rate"], p["discount"])
    if spec.strategy == "mc":
        return McControlAgent(n_actions, rng, p["epsilon"], p["discount"])
    kind, _, arg = spec.strategy.partition(":")
    strategy = IpdStrategy(kind, int(arg)) if arg else IpdStrategy(kind)
    return FixedStrategyPlayer(strategy, rng)


def _episode_rows(config: ExperimentConfig, seed_index: int) -> Iterable[list]:
    """Train a fresh roster for one seed and yield one row per episode."""
    master = run_seed_master(config, seed_index)
    env_cfg = dict(config.environment)
    if config.kind == "grid":
        env, mapper = GridEnv(GridConfig(**env_cfg)), map_signals_grid
    else:
        env, mapper = TowerEnv(TowerConfig(**env_cfg)), map_signals_tower
    agents = [build_agent(spec, env.n_actions, mapper, RngStream.derived(master, 1 + i))
              for i, spec in enumerate(config.roster)]
    if config.kind == "tower_recovery" and config.greedy_until_episode > 0:
        agents = [ForcedGreedyWrapper(a, config.greedy_until_episode) for a in agents]
    env_rng = RngStream.derived(master, 0)
    for episode in range(config.n_episodes):
        m = env.play(agents, env_rng)
        if config.kind == "grid":
            x = m.extra
            yield [seed_index, episode, x["conflicts_per_step"], x["cooldown_fraction"],
                   x["remaining_resources"], *m.returns]
        else:
            x = m.extra
            yield [seed_index, episode, x["success"], x["deaths"], *m.returns, x["mean_trust"]]


def run_tournament(config: ExperimentConfig, seed_index: int = 0) -> TournamentResult:
    """Play the round-robin of an ``ipd`` config for one seed, keeping every match."""
    if config.kind != "ipd":
        raise ConfigError("kind", "a tournament needs an ipd experiment")
    env = config.environment
    entries = [(spec.strategy, _ipd_factory(spec)) for spec in config.roster]
    return round_robin(entries, env["games_per_pair"], env["rounds"],
                       master_seed=run_seed_master(config, seed_index),
                       include_self_play=env["include_self_play"], matrix=PayoffMatrix(**env["payoffs"]))


def _ipd_rows(config: ExperimentConfig, seed_index: int) -> Iterable[list]:
    result = run_tournament(config, seed_index)
    for game, (a, b, res) in enumerate(result.matches):
        yield [seed_index, game, a, b, res.totals[0], res.totals[1],
               match_success(res, 0), match_success(res, 1)]


def _ipd_factory(spec: AgentSpec):
    def make(rng: RngStream):
        return build_agent(spec, 2, map_signals_ipd, rng)
    return make


def experiment_rows(config: ExperimentConfig) -> Iterable[list]:
    gen = _ipd_rows if config.kind == "ipd" else _episode_rows
    for seed_index in range(config.n_seeds):
        yield from gen(config, seed_index)


def render_csv(config: ExperimentConfig, rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(version_line(config) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_columns(config))
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def metadata(config: ExperimentConfig) -> dict:
    return {
        "tool": TOOL,
        "tool_version": __version__,
        "csv_version": CSV_VERSION,
        "fingerprint": config.fingerprint(),
        "columns": csv_columns(config),
        "config": config.resolved(),
    }


def output_path(config: ExperimentConfig, out_dir: Optional[str | Path] = None) -> Path:
    """``out_dir`` wins, then the output-directory environment variable, then the config."""
    target = Path(config.output)
    directory = out_dir if out_dir is not None else os.environ.get(OUTPUT_DIR_ENV) or None
    if directory is not None:
        target = Path(directory) / target.name
    return target


def sidecar_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".meta.json")


def run_experiment(config: ExperimentConfig, out_dir: Optional[str | Path] = None) -> Path:
    """Run every seed, then write the CSV and its metadata sidecar. Returns the CSV path.

    Rows are written only after all runs finish, in (seed, episode) order.
    """
    if config.kind == "tower_recovery":
        return run_recovery_protocol(config, out_dir)
    return _run(config, out_dir)


def run_recovery_protocol(config: ExperimentConfig, out_dir: Optional[str | Path] = None) -> Path:
    if config.kind != "tower_recovery":
        raise ConfigError("kind", "the recovery protocol needs a tower_recovery experiment")
    return _run(config, out_dir)


def _run(config: ExperimentConfig, out_dir) -> Path:
    text = render_csv(config, list(experiment_rows(config)))
    path = output_path(config, out_dir)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(text)
    with open(sidecar_path(path), "w") as f:
        json.dump(metadata(config), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def read_metrics(path: str | Path) -> tuple[dict, list[str], list[list[str]]]:
    """Parse a metrics CSV into (version info, column names, rows of strings)."""
    with open(path, newline="") as f:
        first = f.readline().rstrip("\n")
        rows = list(csv.reader(f))
    prefix = f"# {TOOL} metrics v"
    if not first.startswith(prefix):
        raise UsageError(f"{path}: missing the '{prefix}N' version line")
    info = {}
    for item in first.split()[4:]:
        key, _, value = item.partition("=")
        info[key] = value
    try:
        info["version"] = int(first[len(prefix):].split()[0])
    except (ValueError, IndexError):
        raise UsageError(f"{path}: malformed version line") from None
    if info["version"] != CSV_VERSION:
        raise UsageError(f"{path}: unsupported metrics version {info['version']}")
    if not rows:
        raise UsageError(f"{path}: missing column header")
    return info, rows[0], rows[1:]
