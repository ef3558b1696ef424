"""Render regret figures from experiment CSV files.

Two figure kinds are supported, mirroring the two CSV schemas the simulator
emits: ``curves`` (per-round traces; plotted as mean cumulative regret vs
round with standard-error bands) and ``scan`` (final regret per axis value).
Aggregation is a pure function of the CSV contents, so identical input bytes
always produce identical plotted series.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

CURVE_COLUMNS = ("agent", "replication", "t", "cum_regret")
SCAN_COLUMNS = ("agent", "axis", "axis_value", "replication", "final_regret")

# Fixed styling so an agent keeps its color across every figure.
AGENT_COLORS = {
    "ucb": "tab:red",
    "c-ucb": "tab:blue",
    "cl-ucb": "tab:green",
    "ts-beta": "tab:orange",
    "c-ts-beta": "tab:purple",
    "ts-gauss": "tab:brown",
    "c-ts-gauss": "tab:cyan",
    "cl-ts": "tab:olive",
}
FALLBACK_COLORS = ("tab:pink", "tab:gray", "black", "gold")


class FigureError(Exception):
    pass


@dataclass(frozen=True)
class FigureSpec:
    csv_path: str | Path
    kind: str  # "curves" | "scan"
    out_path: str | Path
    agents: tuple[str, ...] = ()


@dataclass(frozen=True)
class Series:
    agent: str
    x: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray


def _read_csv(path: str | Path, required: tuple[str, ...]) -> list[dict]:
    try:
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            header = reader.fieldnames or []
            missing = [c for c in required if c not in header]
            if missing:
                raise FigureError(
                    f"{path}: missing required column(s) {', '.join(missing)}"
                )
            return list(reader)
    except OSError as exc:
        raise FigureError(f"cannot read {path}: {exc}")


def _select_agents(rows: list[dict], agents: tuple[str, ...]) -> list[str]:
    present: list[str] = []
    for row in rows:
        if row["agent"] not in present:
            present.append(row["agent"])
    if not agents:
        return present
    unknown = [a for a in agents if a not in present]
    if unknown:
        raise FigureError(
            f"agent(s) not in CSV: {', '.join(unknown)} (have: {', '.join(present)})"
        )
    return [a for a in agents]


def _mean_stderr(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = stack.mean(axis=0)
    if stack.shape[0] > 1:
        stderr = stack.std(axis=0, ddof=1) / np.sqrt(stack.shape[0])
    else:
        stderr = np.zeros(stack.shape[1])
    return mean, stderr


def curve_series(path: str | Path, agents: tuple[str, ...] = ()) -> list[Series]:
    """Mean cumulative-regret curve (and standard error) per agent."""
    rows = _read_csv(path, CURVE_COLUMNS)
    if not rows:
        raise FigureError(f"{path}: no data rows")
    wanted = _select_agents(rows, agents)
    out = []
    for agent in wanted:
        per_rep: dict[int, list[tuple[int, float]]] = {}
        for row in rows:
            if row["agent"] != agent:
                continue
            per_rep.setdefault(int(row["replication"]), []).append(
                (int(row["t"]), float(row["cum_regret"]))
            )
        reps = sorted(per_rep)
        curves = []
        for rep in reps:
            points = sorted(per_rep[rep])
            curves.append([v for _, v in points])
        stack = np.asarray(curves)
        t = np.asarray(sorted(t for t, _ in per_rep[reps[0]]))
        mean, stderr = _mean_stderr(stack)
        out.append(Series(agent=agent, x=t, mean=mean, stderr=stderr))
    return out


def scan_series(path: str | Path, agents: tuple[str, ...] = ()) -> list[Series]:
    """Mean final regret (and standard error) per agent per axis value."""
    rows = _read_csv(path, SCAN_COLUMNS)
    if not rows:
        raise FigureError(f"{path}: no data rows")
    wanted = _select_agents(rows, agents)
    out = []
    for agent in wanted:
        by_value: dict[int, dict[int, float]] = {}
        for row in rows:
            if row["agent"] != agent:
                continue
            by_value.setdefault(int(row["axis_value"]), {})[
                int(row["replication"])
            ] = float(row["final_regret"])
        values = sorted(by_value)
        stack = np.asarray(
            [[by_value[v][r] for v in values] for r in sorted(by_value[values[0]])]
        )
        mean, stderr = _mean_stderr(stack)
        out.append(Series(agent=agent, x=np.asarray(values), mean=mean, stderr=stderr))
    return out


def _color(agent: str, fallback_index: int) -> str:
    if agent in AGENT_COLORS:
        return AGENT_COLORS[agent]
    return FALLBACK_COLORS[fallback_index % len(FALLBACK_COLORS)]


def build_figure(spec: FigureSpec) -> tuple[plt.Figure, list[Series]]:
    """Build the matplotlib figure for a spec without writing it."""
    if spec.kind == "curves":
        series = curve_series(spec.csv_path, tuple(spec.agents))
        xlabel = "round"
        title = "Cumulative regret"
    elif spec.kind == "scan":
        series = scan_series(spec.csv_path, tuple(spec.agents))
        rows = _read_csv(spec.csv_path, SCAN_COLUMNS)
        axis = rows[0]["axis"] if rows else "value"
        xlabel = axis
        title = f"Final regret vs {axis}"
    else:
        raise FigureError(f"unknown figure kind {spec.kind!r} (expected curves or scan)")

    fig, ax = plt.subplots(figsize=(6.0, 4.0), layout="constrained")
    for i, s in enumerate(series):
        color = _color(s.agent, i)
        if spec.kind == "curves":
            ax.plot(s.x, s.mean, label=s.agent, color=color, linewidth=1.6)
            ax.fill_between(
                s.x, s.mean - s.stderr, s.mean + s.stderr, color=color, alpha=0.2
            )
        else:
            ax.errorbar(
                s.x, s.mean, yerr=s.stderr, label=s.agent, color=color, marker="o"
            )
            ax.set_xticks(s.x)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("cumulative regret")
    ax.set_title(title)
    ax.legend()
    return fig, series


def render(spec: FigureSpec) -> Path:
    """Render one image per spec; returns the written path."""
    fig, _ = build_figure(spec)
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    try:
        fig.savefig(out, dpi=150)
    except OSError as exc:
        raise FigureError(f"cannot write {out}: {exc}")
    finally:
        plt.close(fig)
    return out
