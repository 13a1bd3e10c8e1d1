"""Command-line front end emitting CSV or JSON data series.

Exit codes: 0 on success, 1 when a Carnot audit fails, 2 on invalid input or
a failed computation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from .carnot import DEFAULT_PATH_SAMPLES, AuditTolerances, CarnotCycle, audit_cycle, build_cycle, feasible_start
from .core import ModelConstants, ObservationPoint, Side, make_state, state_at
from .errors import DomainError, EvidenceError, InfeasibleTargetError
from .figures import PANELS, Table, build_figure, figure_constants
from .fisher import compare_series, default_ratio_grid
from .solvers import (
    SOLVER_TOL,
    Branch,
    solve_x_for_evidence,
    trace_adiabat,
    trace_isotherm,
    transition_point,
)

EXIT_OK = 0
EXIT_AUDIT = 1
EXIT_ERROR = 2

# A point counts as "at" the transition point within this fraction of n.
AT_TRP_RTOL = 1e-6


@dataclasses.dataclass(frozen=True)
class RunConfig:
    consts: ModelConstants
    tol: float = SOLVER_TOL
    output_format: str = "csv"
    output_path: Path | None = None
    k_given: bool = False


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model and output")
    g.add_argument("--cv", type=float, default=1.5, help="heat capacity C_V (default 1.5)")
    g.add_argument("--r", type=float, default=1.0, help="gas constant R (default 1)")
    g.add_argument("--side", choices=[s.value for s in Side], default=Side.ONE_SIDED.value)
    g.add_argument("--k", type=float, default=None, help="entropy offset (default 0)")
    g.add_argument("--tol", type=float, default=SOLVER_TOL, help="solver tolerance")
    g.add_argument("--format", dest="output_format", choices=["csv", "json"], default=None)
    g.add_argument("--out", type=Path, default=None, help="output file (default stdout)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="evtherm", description="Thermodynamics of binomial evidence.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", parents=[common], help="full state at (n, x)")
    p.add_argument("n", type=float)
    p.add_argument("x", type=float)

    p = sub.add_parser("trp", parents=[common], help="transition point at n")
    p.add_argument("n", type=float)

    p = sub.add_parser("isotherm", parents=[common], help="trace E = level over an n range")
    p.add_argument("e_level", type=float)
    p.add_argument("n_lo", type=float)
    p.add_argument("n_hi", type=float)
    p.add_argument("samples", type=int)

    p = sub.add_parser("adiabat", parents=[common], help="trace S_E = level over an n range")
    p.add_argument("s_level", type=float)
    p.add_argument("n_lo", type=float)
    p.add_argument("n_hi", type=float)
    p.add_argument("samples", type=int)

    p = sub.add_parser("carnot", parents=[common], help="build and audit a Carnot cycle")
    p.add_argument("e1", type=float)
    p.add_argument("e2", type=float)
    p.add_argument("--start-n", type=float, default=None, help="start n (default: auto)")
    p.add_argument("--start-x", type=float, default=None, help="start x; solved on --branch if omitted")
    p.add_argument("--branch", choices=[b.value for b in Branch], default=Branch.RIGHT.value)
    p.add_argument("--position", type=float, default=0.5, help="auto start placement in (0, 1]")
    p.add_argument("--ratio", type=float, default=2.0, help="isothermal expansion ratio")
    p.add_argument("--samples", type=int, default=DEFAULT_PATH_SAMPLES, help="path samples per stroke")

    p = sub.add_parser("fisher", parents=[common], help="E vs Fisher information at C_V = R/2")
    p.add_argument("n", type=float)
    p.add_argument("--grid", type=float, nargs="+", default=None, help="x/n values in (0, 1/2]")
    p.add_argument("--points", type=int, default=100, help="size of the default grid")

    p = sub.add_parser("figure", parents=[common], help="data series for a figure panel")
    p.add_argument("which", choices=PANELS)
    return parser


def _config(args) -> RunConfig:
    consts = ModelConstants(
        R=args.r,
        C_V=args.cv,
        side=Side(args.side),
        entropy_offset_k=0.0 if args.k is None else args.k,
    )
    if not (math.isfinite(args.tol) and args.tol > 0):
        raise DomainError(f"--tol must be positive, got {args.tol}")
    return RunConfig(
        consts=consts,
        tol=args.tol,
        output_format=args.output_format or ("json" if args.command == "carnot" else "csv"),
        output_path=args.out,
        k_given=args.k is not None,
    )


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


def _render(table: Table, fmt: str) -> str:
    if fmt == "csv":
        return table.to_csv()
    records = [{k: _json_value(v) for k, v in r.items()} for r in table.records()]
    return json.dumps(records if len(records) != 1 else records[0], indent=2) + "\n"


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


def trp_side(n: float, x: float, consts: ModelConstants) -> str:
    """'left', 'at' or 'right' of the transition point; 'n/a' where undefined."""
    if consts.side is not Side.ONE_SIDED or n <= 0:
        return "n/a"
    x_star = transition_point(n, consts=consts).x_star
    if abs(x - x_star) <= AT_TRP_RTOL * n:
        return "at"
    return "left" if x < x_star else "right"


def cmd_state(args, cfg: RunConfig) -> int:
    s = state_at(args.n, args.x, cfg.consts)
    table = Table("state", ("n", "x", "x_over_n", "S_E", "log_V_E", "V_E", "E", "P_E", "side"))
    table.rows.append(
        (s.n, s.x, s.point.ratio, s.S_E, s.log_V_E, s.V_E, s.E, s.P_E, trp_side(s.n, s.x, cfg.consts))
    )
    _emit(_render(table, cfg.output_format), cfg.output_path)
    return EXIT_OK


def cmd_trp(args, cfg: RunConfig) -> int:
    tp = transition_point(args.n, tol=cfg.tol, consts=cfg.consts)
    table = Table("trp", ("n", "x_star", "x_over_n", "e_min", "residual"))
    table.rows.append((tp.n, tp.x_star, tp.ratio, tp.e_min, tp.residual))
    _emit(_render(table, cfg.output_format), cfg.output_path)
    return EXIT_OK


def cmd_isotherm(args, cfg: RunConfig) -> int:
    trace = trace_isotherm(args.e_level, args.n_lo, args.n_hi, args.samples, cfg.consts, cfg.tol)
    table = Table("isotherm", ("e_level", "branch", "n", "x", "x_over_n", "V_E", "P_E", "E", "S_E"))
    for branch, s in trace.samples():
        table.rows.append(
            (args.e_level, branch.value, s.point.n, s.point.x, s.point.ratio, s.V_E, s.P_E, s.E, s.S_E)
        )
    _emit(_render(table, cfg.output_format), cfg.output_path)
    return EXIT_OK


def cmd_adiabat(args, cfg: RunConfig) -> int:
    path = trace_adiabat(args.s_level, args.n_lo, args.n_hi, args.samples, cfg.consts)
    table = Table("adiabat", ("s_level", "n", "x", "x_over_n", "V_E", "P_E", "E", "S_E"))
    for s in path:
        table.rows.append((args.s_level, s.point.n, s.point.x, s.point.ratio, s.V_E, s.P_E, s.E, s.S_E))
    _emit(_render(table, cfg.output_format), cfg.output_path)
    return EXIT_OK


def _carnot_start(args, cfg: RunConfig):
    consts = cfg.consts
    if args.start_n is None:
        if args.start_x is not None:
            raise DomainError("--start-x requires --start-n")
        return feasible_start(args.e1, args.e2, args.ratio, consts, args.position)
    if args.start_x is None:
        x = solve_x_for_evidence(args.start_n, args.e2, Branch(args.branch), consts, tol=cfg.tol)
        return make_state(ObservationPoint(args.start_n, x), consts)
    return state_at(args.start_n, args.start_x, consts)


def cycle_report(cycle: CarnotCycle, audit) -> dict:
    nodes = {}
    for s in cycle.strokes:
        st = s.start
        nodes[s.name] = {
            "n": st.n, "x": st.x, "E": st.E, "S_E": st.S_E, "log_V_E": st.log_V_E, "P_E": st.P_E,
        }
    return {
        "e1": cycle.e1,
        "e2": cycle.e2,
        "expansion_ratio": cycle.expansion_ratio,
        "nodes": nodes,
        "W_analytic": cycle.works,
        "W_numeric": cycle.works_numeric,
        "q2": cycle.q2,
        "q1": cycle.q1,
        "q1_over_q2": cycle.q_ratio,
        "efficiency": cycle.efficiency,
        "net_work": cycle.net_work,
        "closure_residual": cycle.closure_residual,
        "audit_passed": audit.passed,
        "audit": audit.as_dict(),
    }


def cmd_carnot(args, cfg: RunConfig) -> int:
    if not args.e2 > args.e1:
        raise DomainError(f"e2 must exceed e1, got e1={args.e1}, e2={args.e2}")
    start = _carnot_start(args, cfg)
    cycle = build_cycle(args.e1, args.e2, start, args.ratio, args.samples, cfg.consts)
    audit = audit_cycle(cycle, AuditTolerances())
    report = cycle_report(cycle, audit)
    if cfg.output_format == "json":
        text = json.dumps(report, indent=2) + "\n"
    else:
        w = cycle.works
        table = Table(
            "carnot",
            ("e1", "e2", "W_A", "W_B", "W_C", "W_D", "q1_over_q2", "efficiency", "audit_passed"),
        )
        table.rows.append(
            (cycle.e1, cycle.e2, w["A"], w["B"], w["C"], w["D"], cycle.q_ratio, cycle.efficiency, audit.passed)
        )
        text = table.to_csv()
    _emit(text, cfg.output_path)
    if not audit.passed:
        failed = [k for k, v in audit.items.items() if not v.passed]
        print(f"audit failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_AUDIT
    return EXIT_OK


def cmd_fisher(args, cfg: RunConfig) -> int:
    consts = figure_constants("4", cfg.consts)
    if not math.isclose(cfg.consts.C_V, consts.C_V):
        print(f"note: using C_V = R/2 = {consts.C_V:g}", file=sys.stderr)
    grid = args.grid if args.grid is not None else default_ratio_grid(args.points)
    table = Table("fisher", ("n", "x_over_n", "E", "E_approx", "fi_over_2pi", "rel_gap"))
    for c in compare_series(args.n, grid, consts):
        table.rows.append((c.n, c.ratio, c.e_exact, c.e_approx, c.fi_over_2pi, c.relative_gap))
    _emit(_render(table, cfg.output_format), cfg.output_path)
    return EXIT_OK


def _summary_path(path: Path) -> Path:
    return path.with_name(f"{path.stem}_summary{path.suffix or '.csv'}")


def cmd_figure(args, cfg: RunConfig) -> int:
    tables = build_figure(args.which, cfg.consts, cfg.k_given)
    if cfg.output_path is None:
        sys.stdout.write("\n".join(_render(t, cfg.output_format) for t in tables))
        return EXIT_OK
    _emit(_render(tables[0], cfg.output_format), cfg.output_path)
    for t in tables[1:]:
        _emit(_render(t, cfg.output_format), _summary_path(cfg.output_path))
    return EXIT_OK


COMMANDS = {
    "state": cmd_state,
    "trp": cmd_trp,
    "isotherm": cmd_isotherm,
    "adiabat": cmd_adiabat,
    "carnot": cmd_carnot,
    "fisher": cmd_fisher,
    "figure": cmd_figure,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except InfeasibleTargetError as exc:
        node = f" (node {exc.node})" if exc.node else ""
        print(f"error{node}: {exc}", file=sys.stderr)
    except (EvidenceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
