"""Four-stroke evidential Carnot cycles.

Strokes, in order:

    A  isothermal expansion at e2      (V_E grows by ``expansion_ratio``)
    B  adiabatic expansion  e2 -> e1   (constant S_E of node B)
    C  isothermal compression at e1
    D  adiabatic compression e1 -> e2  (constant S_E of node A)

Work is positive when done by the system. For this ideal-gas system the heat
absorbed at e2 equals W_A and the heat rejected at e1 equals |W_C|.

All four nodes are placed on the inner sheet (the side of the volume fold that
contains the transition point), where (E, V_E) fixes the state uniquely.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .core import DEFAULT_CONSTANTS, EvidentialState, ModelConstants, ObservationPoint, make_state
from .errors import DomainError, InfeasibleTargetError, SolverError
from .solvers import (
    SOLVER_TOL,
    PathSample,
    Sheet,
    adiabat_fold,
    adiabat_point,
    evidence_floor,
    isotherm_point,
    sheet_of,
    solve_state,
)

DEFAULT_PATH_SAMPLES = 2048


class StrokeKind(str, enum.Enum):
    ISOTHERMAL = "isothermal"
    ADIABATIC = "adiabatic"


@dataclass(frozen=True)
class Stroke:
    name: str
    kind: StrokeKind
    start: EvidentialState
    end: EvidentialState
    path: tuple[PathSample, ...]
    w_analytic: float
    w_numeric: float

    def reversed(self) -> "Stroke":
        return Stroke(
            name=self.name,
            kind=self.kind,
            start=self.end,
            end=self.start,
            path=tuple(reversed(self.path)),
            w_analytic=-self.w_analytic,
            w_numeric=-self.w_numeric,
        )


@dataclass(frozen=True)
class CarnotCycle:
    e1: float
    e2: float
    strokes: tuple[Stroke, Stroke, Stroke, Stroke]
    q2: float
    q1: float
    efficiency: float
    closure_residual: float
    expansion_ratio: float = float("nan")

    @property
    def q_ratio(self) -> float:
        return self.q1 / self.q2

    @property
    def works(self) -> dict[str, float]:
        return {s.name: s.w_analytic for s in self.strokes}

    @property
    def works_numeric(self) -> dict[str, float]:
        return {s.name: s.w_numeric for s in self.strokes}

    @property
    def net_work(self) -> float:
        return sum(s.w_analytic for s in self.strokes)

    def reversed(self) -> "CarnotCycle":
        """The same cycle run backwards (a refrigerator): every work changes sign."""
        strokes = tuple(s.reversed() for s in reversed(self.strokes))
        return dataclasses.replace(self, strokes=strokes)


def work_numeric(path) -> float:
    """Trapezoidal integral of P_E dV_E along ``path`` in traversal order.

    Raises:
        DomainError: If the path has fewer than two samples or a non-finite volume.
    """
    if len(path) < 2:
        raise DomainError("work_numeric needs at least two path samples")
    v = np.array([math.exp(s.log_V_E) for s in path])
    p = np.array([s.P_E for s in path])
    if not np.all(np.isfinite(v)):
        raise DomainError("path contains a non-finite volume")
    return float(np.sum(0.5 * (p[1:] + p[:-1]) * np.diff(v)))


def _isothermal_path(start: EvidentialState, end: EvidentialState, e_level: float,
                     samples: int, consts: ModelConstants) -> tuple[PathSample, ...]:
    # x/n is a global coordinate along an isotherm; the n root at each ratio
    # is seeded from the previous sample.
    ratios = np.linspace(start.point.ratio, end.point.ratio, samples)
    out = []
    n_hint = start.n
    for r in ratios:
        st = isotherm_point(e_level, float(min(r, 0.5)), consts, n_hint=n_hint)
        n_hint = st.n
        out.append(PathSample.from_state(st))
    return tuple(out)


def _adiabatic_path(start: EvidentialState, end: EvidentialState, s_level: float,
                    samples: int, consts: ModelConstants) -> tuple[PathSample, ...]:
    if s_level - consts.entropy_offset_k <= 0:
        # Zero-entropy adiabat is the line x = n/2.
        ns = np.linspace(start.n, end.n, samples)
        return tuple(
            PathSample.from_state(make_state(ObservationPoint(float(n), 0.5 * float(n)), consts))
            for n in ns
        )
    ratios = np.linspace(start.point.ratio, end.point.ratio, samples)
    return tuple(PathSample.from_state(adiabat_point(s_level, float(r), consts)) for r in ratios)


def _isothermal_stroke(name, start, end, e_level, samples, consts) -> Stroke:
    path = _isothermal_path(start, end, e_level, samples, consts)
    e_mean = 0.5 * (start.E + end.E)
    w = consts.R * e_mean * (end.log_V_E - start.log_V_E)
    return Stroke(name, StrokeKind.ISOTHERMAL, start, end, path, w, work_numeric(path))


def _adiabatic_stroke(name, start, end, s_level, samples, consts) -> Stroke:
    path = _adiabatic_path(start, end, s_level, samples, consts)
    w = consts.C_V * (start.E - end.E)
    return Stroke(name, StrokeKind.ADIABATIC, start, end, path, w, work_numeric(path))


def _node(label: str, e: float, log_v: float, consts: ModelConstants, sheet: Sheet) -> EvidentialState:
    try:
        return solve_state(e, log_v, consts=consts, sheet=sheet)
    except InfeasibleTargetError as exc:
        raise InfeasibleTargetError(f"node {label}: {exc}", node=label) from exc
    except SolverError as exc:
        raise InfeasibleTargetError(f"node {label}: {exc}", node=label) from exc


def build_cycle(
    e1: float,
    e2: float,
    start: EvidentialState,
    expansion_ratio: float = 2.0,
    path_samples: int = DEFAULT_PATH_SAMPLES,
    consts: ModelConstants = DEFAULT_CONSTANTS,
    tol: float = 1e-8,
) -> CarnotCycle:
    """Build the cycle that starts at ``start`` on the e2 isotherm.

    Node B sits on the e2 isotherm at V_B = expansion_ratio * V_A, node C on
    B's adiabat at E = e1, node D on A's adiabat at E = e1.

    Raises:
        DomainError: On invalid levels, ratio or a start off the e2 isotherm.
        InfeasibleTargetError: If a node has no state; ``node`` names it.
    """
    if not 0 < e1 < e2:
        raise DomainError(f"need 0 < e1 < e2, got e1={e1}, e2={e2}")
    if not expansion_ratio > 1:
        raise DomainError(f"expansion_ratio must be > 1, got {expansion_ratio}")
    if path_samples < 2:
        raise DomainError("path_samples must be >= 2")
    if abs(start.log_E - math.log(e2)) > tol:
        raise DomainError(f"start has E={start.E:.12g}, expected e2={e2}")
    sheet = sheet_of(start, consts)
    R, C_V = consts.R, consts.C_V
    a = start
    b = _node("B", e2, a.log_V_E + math.log(expansion_ratio), consts, sheet)
    c = _node("C", e1, (b.S_E - C_V * math.log(e1)) / R, consts, sheet)
    d = _node("D", e1, (a.S_E - C_V * math.log(e1)) / R, consts, sheet)

    strokes = (
        _isothermal_stroke("A", a, b, e2, path_samples, consts),
        _adiabatic_stroke("B", b, c, b.S_E, path_samples, consts),
        _isothermal_stroke("C", c, d, e1, path_samples, consts),
        _adiabatic_stroke("D", d, a, a.S_E, path_samples, consts),
    )
    q2 = strokes[0].w_analytic
    q1 = abs(strokes[2].w_analytic)
    last = strokes[3].path[-1]
    closure = math.hypot(last.log_V_E - a.log_V_E, math.log(last.E) - a.log_E)
    return CarnotCycle(
        e1=e1,
        e2=e2,
        strokes=strokes,
        q2=q2,
        q1=q1,
        efficiency=1.0 - q1 / q2,
        closure_residual=closure,
        expansion_ratio=expansion_ratio,
    )


def max_cycle_entropy(e1: float, consts: ModelConstants = DEFAULT_CONSTANTS) -> float:
    """Largest S_E whose adiabat still reaches E = e1 on the inner sheet.

    The smallest E on an adiabat (at its fold) grows with S_E, so nodes at
    e1 exist exactly for S_E below this bound.
    """
    floor = evidence_floor(consts)
    if not e1 > floor:
        raise InfeasibleTargetError(
            f"E={e1} is not above the model's lower bound {floor:.12g}; no isotherm exists",
            node="C",
        )
    k = consts.entropy_offset_k
    log_e1 = math.log(e1)

    def g(s):
        return math.log(adiabat_fold(k + s, consts).E) - log_e1

    lo, hi = 1e-9, 1.0
    if g(lo) >= 0:
        return k
    while g(hi) < 0:
        lo = hi
        hi *= 2.0
        if hi > 1e9:
            raise SolverError(f"entropy bound for E={e1} not bracketed")
    return k + brentq(g, lo, hi, xtol=1e-13, rtol=1e-14)


def feasible_start(
    e1: float,
    e2: float,
    expansion_ratio: float = 2.0,
    consts: ModelConstants = DEFAULT_CONSTANTS,
    position: float = 0.5,
) -> EvidentialState:
    """Pick a start state on the e2 isotherm for which every node exists.

    The node entropies are S_A and S_A + R ln(expansion_ratio); both must lie
    in [k, max_cycle_entropy(e1)]. ``position`` in (0, 1] places S_A within
    the admissible interval.

    Raises:
        InfeasibleTargetError: If no start admits the requested ratio.
    """
    if not 0 < e1 < e2:
        raise DomainError(f"need 0 < e1 < e2, got e1={e1}, e2={e2}")
    if not 0 < position <= 1:
        raise DomainError(f"position must lie in (0, 1], got {position}")
    k = consts.entropy_offset_k
    span = max_cycle_entropy(e1, consts) - k - consts.R * math.log(expansion_ratio)
    if span <= 0:
        raise InfeasibleTargetError(
            f"expansion ratio {expansion_ratio} is too large for a cycle between "
            f"E={e1} and E={e2}",
            node="C",
        )
    s_a = k + position * span
    log_v = (s_a - consts.C_V * math.log(e2)) / consts.R
    return _node("A", e2, log_v, consts, Sheet.INNER)


@dataclass
class AuditItem:
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)


@dataclass
class AuditReport:
    items: dict[str, AuditItem] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items.values())

    def as_dict(self) -> dict:
        return {
            name: {"residual": item.value, "tolerance": item.tolerance, "passed": item.passed}
            for name, item in self.items.items()
        }


@dataclass(frozen=True)
class AuditTolerances:
    q_ratio: float = 1e-6
    q_ratio_numeric: float = 1e-4
    adiabatic_cancellation: float = 1e-8
    closure: float = 1e-8
    stroke_work: float = 1e-4
    efficiency: float = 1e-6
    net_work: float = 1e-6


def audit_cycle(cycle: CarnotCycle, tolerances: AuditTolerances = AuditTolerances()) -> AuditReport:
    """Residual checks of a cycle against the ideal-gas Carnot identities.

    Heats are recomputed from the strokes, so a tampered stroke shows up
    even if the cached ``q1``/``q2`` were left alone.
    """
    wa, wb, wc, wd = (s.w_analytic for s in cycle.strokes)
    na, _, nc, _ = (s.w_numeric for s in cycle.strokes)
    target = cycle.e1 / cycle.e2
    q_ratio = abs(wc) / wa
    report = AuditReport()
    items = report.items
    items["q_ratio"] = AuditItem(abs(q_ratio / target - 1.0), tolerances.q_ratio)
    items["q_ratio_numeric"] = AuditItem(abs(abs(nc) / na / target - 1.0), tolerances.q_ratio_numeric)
    items["adiabatic_cancellation"] = AuditItem(
        abs(wb + wd) / max(abs(wb), 1e-300), tolerances.adiabatic_cancellation
    )
    items["closure"] = AuditItem(cycle.closure_residual, tolerances.closure)
    for s in cycle.strokes:
        items[f"work_numeric_{s.name}"] = AuditItem(
            abs(s.w_numeric - s.w_analytic) / max(1.0, abs(s.w_analytic)), tolerances.stroke_work
        )
    items["efficiency"] = AuditItem(
        max(abs(cycle.efficiency - (1.0 - q_ratio)), abs(cycle.efficiency - (1.0 - target))),
        tolerances.efficiency,
    )
    items["net_work"] = AuditItem(
        abs((wa + wb + wc + wd) - (wa - abs(wc))) / max(abs(wa), 1e-300), tolerances.net_work
    )
    return report
