"""Cross-seed aggregation of metrics files."""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from ..core import UsageError
from .experiments import read_metrics

EPISODE_KEYS = ("seed", "episode")
IPD_COLUMNS = ["seed", "game", "strategy_a", "strategy_b", "total_a", "total_b", "success_a", "success_b"]


class SchemaError(UsageError):
    """A metrics file does not have the columns its kind requires."""

    def __init__(self, path, message: str, column: str | None = None):
        super().__init__(f"{path}: {message}")
        self.column = column


@dataclass
class SummaryTable:
    columns: list[str]
    rows: list[list]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def trailing_means(values: list, window: int) -> list:
    """Mean of the last ``window`` values at each index; shorter prefixes use what exists.

    ``None`` entries are skipped; a window holding only ``None`` yields ``None``.
    """
    if window < 1:
        raise UsageError("window must be a positive integer")
    out = []
    for i in range(len(values)):
        chunk = [v for v in values[max(0, i - window + 1): i + 1] if v is not None]
        out.append(math.fsum(chunk) / len(chunk) if chunk else None)
    return out


def _number(text: str, path, column: str):
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        raise SchemaError(path, f"non-numeric value {text!r} in column {column}", column) from None


def summarize(path: str | Path, window: int) -> SummaryTable:
    """Per-episode cross-seed means plus trailing rolling means (episode kinds), or
    per-strategy success rates (tournaments)."""
    if not isinstance(window, int) or window < 1:
        raise UsageError("window must be a positive integer")
    info, columns, rows = read_metrics(path)
    kind = info.get("kind")
    if kind == "ipd":
        return _summarize_ipd(path, columns, rows)
    if columns[:2] != list(EPISODE_KEYS) or len(columns) < 3:
        raise SchemaError(path, "expected columns to start with seed,episode", "episode")
    required = ("conflicts_per_step", "cooldown_fraction", "remaining_resources") if kind == "grid" \
        else ("success", "deaths", "mean_trust")
    for name in required:
        if name not in columns:
            raise SchemaError(path, f"missing column {name}", name)
    series = columns[2:]
    sums: dict[int, list[list[float]]] = defaultdict(lambda: [[] for _ in series])
    seeds: dict[int, set] = defaultdict(set)
    for row in rows:
        if len(row) != len(columns):
            raise SchemaError(path, f"row has {len(row)} fields, header has {len(columns)}")
        episode = int(row[1])
        seeds[episode].add(row[0])
        for j, name in enumerate(series):
            v = _number(row[2 + j], path, name)
            if v is not None:
                sums[episode][j].append(v)
    episodes = sorted(sums)
    means = {name: [] for name in series}
    for e in episodes:
        for j, name in enumerate(series):
            vals = sums[e][j]
            means[name].append(math.fsum(vals) / len(vals) if vals else None)
    rolling = {name: trailing_means(means[name], window) for name in series}
    out_cols = ["episode", "n_seeds"]
    for name in series:
        out_cols += [name, f"{name}_rolling"]
    out_rows = []
    for i, e in enumerate(episodes):
        row = [e, len(seeds[e])]
        for name in series:
            row += [means[name][i], rolling[name][i]]
        out_rows.append(row)
    return SummaryTable(out_cols, out_rows)


def _summarize_ipd(path, columns, rows) -> SummaryTable:
    if columns != IPD_COLUMNS:
        raise SchemaError(path, "tournament files need columns " + ",".join(IPD_COLUMNS))
    games: dict[str, int] = defaultdict(int)
    wins: dict[str, int] = defaultdict(int)
    totals: dict[str, list[float]] = defaultdict(list)
    order: list[str] = []
    for row in rows:
        if len(row) != len(columns):
            raise SchemaError(path, f"row has {len(row)} fields, header has {len(columns)}")
        for name, total, success in ((row[2], row[4], row[6]), (row[3], row[5], row[7])):
            if name not in games:
                order.append(name)
            games[name] += 1
            wins[name] += success == "1"
            totals[name].append(_number(total, path, "total"))
    out = []
    for name in order:
        out.append([name, games[name], wins[name], wins[name] / games[name],
                    math.fsum(totals[name]) / games[name]])
    return SummaryTable(["strategy", "games", "successes", "success_rate", "mean_total"], out)
