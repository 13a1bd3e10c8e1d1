"""Data series behind each figure panel.

Every builder returns :class:`Table` objects with a fixed column order and a
deterministic row order; rendering is left to downstream tools.
"""

from __future__ import annotations

import dataclasses
import io
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .carnot import DEFAULT_PATH_SAMPLES, CarnotCycle, build_cycle, feasible_start
from .core import DEFAULT_CONSTANTS, LOG2, ModelConstants, exp_or_inf, log_evidence
from .fisher import compare_series, default_ratio_grid
from .solvers import isotherm_apex, trace_isotherm, transition_point

FIG1A_N = (10, 50, 100, 500, 1000)
FIG1B_N = tuple(float(v) for v in np.round(np.logspace(0, 4, 25), 10))
FIG2_LEVELS = (2.0, 2.25, 2.5, 3.0, 4.0)
FIG2C_LEVEL = 2.25
FIG3_CYCLES = ((1.0, 2.0), (2.0, 4.0))
FIG3_EXPANSION_RATIO = 2.0
FIG4_N = (10, 20, 50, 100)

PANELS = ("1a", "1b", "1c", "2a", "2b", "2c", "3", "4")


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


@dataclass
class Table:
    name: str
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(format_value(v) for v in row) + "\n")
        return buf.getvalue()

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, row)) for row in self.rows]

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def figure_constants(which: str, consts: ModelConstants = DEFAULT_CONSTANTS, k_given: bool = False) -> ModelConstants:
    """Constants a panel runs with by default.

    Panel 4 always uses C_V = R/2. Panel 3 shifts the entropy offset to
    -C_V ln 2 unless one was given: with k = 0 the evidence never drops below
    2^(R/C_V) > 1, so the E = 1 isotherm would not exist.
    """
    if which == "4":
        return dataclasses.replace(consts, C_V=0.5 * consts.R)
    if which == "3" and not k_given:
        return dataclasses.replace(consts, entropy_offset_k=-consts.C_V * LOG2)
    return consts


def figure_1a(consts: ModelConstants = DEFAULT_CONSTANTS, points: int = 101) -> Table:
    table = Table("1a", ("n", "x_over_n", "E"))
    for n in FIG1A_N:
        for r in np.linspace(0.0, 0.5, points):
            r = float(r)
            table.rows.append((n, r, exp_or_inf(log_evidence(n, r * n, consts))))
    return table


def figure_1b(consts: ModelConstants = DEFAULT_CONSTANTS, n_values: Sequence[float] = FIG1B_N) -> Table:
    table = Table("1b", ("n", "x_over_n_at_trp"))
    for n in n_values:
        table.rows.append((float(n), transition_point(float(n), consts=consts).ratio))
    return table


def figure_1c(
    consts: ModelConstants = DEFAULT_CONSTANTS, n_points: int = 34, x_points: int = 26
) -> Table:
    table = Table("1c", ("n", "x", "E"))
    for n in np.linspace(10.0, 1000.0, n_points):
        n = float(n)
        for x in np.linspace(0.0, 0.5 * n, x_points):
            x = float(x)
            table.rows.append((n, x, exp_or_inf(log_evidence(n, x, consts))))
    return table


def _isotherm_rows(e_level: float, consts: ModelConstants, samples: int):
    apex = isotherm_apex(e_level, consts)
    trace = trace_isotherm(e_level, 0.01 * apex.n, apex.n, samples, consts)
    return [s for _, s in trace.samples()]


def figure_2a(consts: ModelConstants = DEFAULT_CONSTANTS, samples: int = 100) -> Table:
    table = Table("2a", ("e_level", "n", "x"))
    for e in FIG2_LEVELS:
        for s in _isotherm_rows(e, consts, samples):
            table.rows.append((e, s.point.n, s.point.x))
    return table


def figure_2b(consts: ModelConstants = DEFAULT_CONSTANTS, samples: int = 100) -> Table:
    table = Table("2b", ("e_level", "n", "x_over_n"))
    for e in FIG2_LEVELS:
        for s in _isotherm_rows(e, consts, samples):
            table.rows.append((e, s.point.n, s.point.ratio))
    return table


def figure_2c(consts: ModelConstants = DEFAULT_CONSTANTS, samples: int = 200) -> Table:
    table = Table("2c", ("V_E", "P_E"))
    for s in _isotherm_rows(FIG2C_LEVEL, consts, samples):
        table.rows.append((s.V_E, s.P_E))
    return table


def figure_3_cycles(
    consts: ModelConstants,
    expansion_ratio: float = FIG3_EXPANSION_RATIO,
    path_samples: int = DEFAULT_PATH_SAMPLES,
) -> list[tuple[str, CarnotCycle]]:
    out = []
    for e1, e2 in FIG3_CYCLES:
        start = feasible_start(e1, e2, expansion_ratio, consts)
        cycle = build_cycle(e1, e2, start, expansion_ratio, path_samples, consts)
        out.append((f"{e1:g}-{e2:g}", cycle))
    return out


def figure_3(
    consts: ModelConstants,
    expansion_ratio: float = FIG3_EXPANSION_RATIO,
    path_samples: int = DEFAULT_PATH_SAMPLES,
) -> tuple[Table, Table]:
    """Path table and summary table for the two cycles."""
    path = Table("3", ("cycle_id", "stroke", "V_E", "P_E"))
    summary = Table(
        "3_summary",
        ("cycle_id", "e1", "e2", "W_A", "W_B", "W_C", "W_D", "q1_over_q2", "efficiency"),
    )
    for cycle_id, cycle in figure_3_cycles(consts, expansion_ratio, path_samples):
        for stroke in cycle.strokes:
            for s in stroke.path:
                path.rows.append((cycle_id, stroke.name, s.V_E, s.P_E))
        w = cycle.works
        summary.rows.append(
            (cycle_id, cycle.e1, cycle.e2, w["A"], w["B"], w["C"], w["D"], cycle.q_ratio, cycle.efficiency)
        )
    return path, summary


def figure_4(consts: ModelConstants = DEFAULT_CONSTANTS, points: int = 100) -> Table:
    consts = figure_constants("4", consts)
    table = Table("4", ("panel_n", "x_over_n", "E", "E_approx", "fi_over_2pi"))
    for n in FIG4_N:
        for c in compare_series(n, default_ratio_grid(points), consts):
            table.rows.append((n, c.ratio, c.e_exact, c.e_approx, c.fi_over_2pi))
    return table


_BUILDERS: dict[str, Callable[..., Any]] = {
    "1a": figure_1a,
    "1b": figure_1b,
    "1c": figure_1c,
    "2a": figure_2a,
    "2b": figure_2b,
    "2c": figure_2c,
    "3": figure_3,
    "4": figure_4,
}


def build_figure(which: str, consts: ModelConstants = DEFAULT_CONSTANTS, k_given: bool = False) -> list[Table]:
    """All tables for one panel, with the panel's default constants applied."""
    if which not in _BUILDERS:
        raise ValueError(f"unknown figure panel {which!r}; choose from {', '.join(PANELS)}")
    result = _BUILDERS[which](figure_constants(which, consts, k_given))
    return list(result) if isinstance(result, tuple) else [result]
