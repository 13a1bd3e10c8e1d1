"""Root finding and curve tracing on the evidential state surface.

For fixed n, E is unimodal in x: it falls to a minimum at the transition
point and rises again towards x = n/2. Points left of the minimum favour a
biased coin, points right of it favour a fair one, so a value of E only
identifies a state once its branch is known. Every solver that inverts E
therefore takes an explicit :class:`Branch`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .core import (
    DEFAULT_CONSTANTS,
    LOG2,
    EvidentialState,
    ModelConstants,
    ObservationPoint,
    Side,
    entropy,
    entropy_rate,
    exp_or_inf,
    log_evidence,
    make_state,
)
from .errors import (
    DomainError,
    InfeasibleTargetError,
    NoSolutionError,
    SolverError,
    TargetRangeError,
)
from .numerics import QuadratureConfig, posterior_log_odds_mean

SOLVER_TOL = 1e-10
COORD_RTOL = 1e-8
# Tighter than the library default: the stationarity residual is a ratio of
# two integrals and has to be resolved well below SOLVER_TOL.
TRP_QUADRATURE = QuadratureConfig(rel_tol=1e-13, max_subdivisions=4000)


class Branch(str, enum.Enum):
    LEFT = "left_of_trp"
    RIGHT = "right_of_trp"


@dataclass(frozen=True)
class TransitionPoint:
    n: float
    x_star: float
    e_min: float
    residual: float

    @property
    def ratio(self) -> float:
        return self.x_star / self.n


@dataclass(frozen=True)
class PathSample:
    point: ObservationPoint
    log_V_E: float
    P_E: float
    E: float
    S_E: float

    @classmethod
    def from_state(cls, state: EvidentialState) -> "PathSample":
        return cls(state.point, state.log_V_E, state.P_E, state.E, state.S_E)

    @property
    def V_E(self) -> float:
        return exp_or_inf(self.log_V_E)


@dataclass
class IsothermTrace:
    """Isotherm sampled on an n grid, one list per branch.

    ``gaps`` lists grid values of n at which a branch has no solution. The
    apex (largest feasible n, where the branches meet at the transition point)
    is reported separately when it lies inside the requested range.
    """

    e_level: float
    left: list[PathSample] = field(default_factory=list)
    right: list[PathSample] = field(default_factory=list)
    gaps: list[tuple[str, float]] = field(default_factory=list)
    apex: TransitionPoint | None = None

    def samples(self) -> list[tuple[Branch, PathSample]]:
        # Left branch ascending in n up to the apex, right branch back down,
        # i.e. traversal order along the curve from large to small V_E.
        out = [(Branch.LEFT, s) for s in self.left]
        out += [(Branch.RIGHT, s) for s in reversed(self.right)]
        return out


def _check_one_sided(consts: ModelConstants) -> None:
    if consts.side is not Side.ONE_SIDED:
        raise DomainError("the transition point is defined for the one-sided model only")


def trp_residual(
    n: float,
    x: float,
    consts: ModelConstants = DEFAULT_CONSTANTS,
    cfg: QuadratureConfig = TRP_QUADRATURE,
) -> float:
    """R * E[ln(theta/(1-theta))] - ln(x/(n-x)); zero exactly where dE/dx = 0."""
    return consts.R * posterior_log_odds_mean(n, x, cfg) - math.log(x / (n - x))


def transition_point(
    n: float,
    tol: float = SOLVER_TOL,
    consts: ModelConstants = DEFAULT_CONSTANTS,
    cfg: QuadratureConfig = TRP_QUADRATURE,
) -> TransitionPoint:
    """Locate the x that minimizes E for fixed n.

    The stationarity condition balances the posterior mean log-odds on
    (0, 1/2) against the log-odds at the maximum-likelihood estimate; C_V only
    scales the derivative and drops out.

    Raises:
        DomainError: If n <= 0 or the model is two-sided.
        SolverError: If no sign change is found on (0, n/2).
    """
    _check_one_sided(consts)
    if not n > 0:
        raise DomainError(f"n must be > 0, got {n}")
    half = 0.5 * n

    def g(x):
        return trp_residual(n, x, consts, cfg)

    # g falls from +inf at x -> 0 to R * (negative mean) at x = n/2.
    scan = []
    lo = 0.25 * n
    g_lo = g(lo)
    scan.append((lo, g_lo))
    while g_lo <= 0:
        lo *= 0.1
        if lo < 1e-300:
            raise SolverError(f"no sign change for the transition point at n={n}", scan=scan)
        g_lo = g(lo)
        scan.append((lo, g_lo))
    hi = half
    g_hi = g(hi)
    scan.append((hi, g_hi))
    if g_hi >= 0:
        raise SolverError(f"no sign change for the transition point at n={n}", scan=scan)
    x_star = brentq(g, lo, hi, xtol=1e-14 * n, rtol=4 * np.finfo(float).eps, maxiter=200)
    residual = g(x_star)
    if abs(residual) > tol:
        raise SolverError(
            f"transition point residual {residual:.3g} exceeds tol {tol:.3g} at n={n}",
            scan=scan,
        )
    e_min = exp_or_inf(log_evidence(n, x_star, consts))
    return TransitionPoint(n=n, x_star=x_star, e_min=e_min, residual=residual)


def branch_split(n: float, consts: ModelConstants = DEFAULT_CONSTANTS) -> float:
    """Cheap minimizer of E over x in [0, n/2].

    Brent minimization of ln E only (no quadrature); accurate to about 1e-8 n,
    which is enough to separate the two monotone branches.
    """
    _check_one_sided(consts)
    res = minimize_scalar(
        lambda x: log_evidence(n, x, consts),
        bounds=(0.0, 0.5 * n),
        method="bounded",
        options={"xatol": 1e-10 * n, "maxiter": 500},
    )
    return float(res.x)


def _bracket_solve(f, lo, hi, scale):
    return brentq(f, lo, hi, xtol=1e-15 * max(scale, 1e-300), rtol=4 * np.finfo(float).eps, maxiter=300)


def solve_x_for_entropy(n: float, s_target: float, consts: ModelConstants = DEFAULT_CONSTANTS) -> float:
    """Return the x in [0, n/2] with S_E(n, x) = s_target.

    S_E falls strictly from n ln2 + k at x = 0 to k at x = n/2.

    Raises:
        TargetRangeError: If s_target is outside [k, n ln2 + k].
    """
    if not n > 0:
        raise DomainError(f"n must be > 0, got {n}")
    k = consts.entropy_offset_k
    s = s_target - k
    top = n * LOG2
    slack = 1e-12 * max(1.0, top)
    if s < -slack or s > top + slack:
        raise TargetRangeError(f"entropy {s_target} outside [{k}, {top + k}] for n={n}")
    if s <= 0:
        return 0.5 * n
    if s >= top:
        return 0.0
    base = ModelConstants(R=consts.R, C_V=consts.C_V, side=Side.ONE_SIDED)

    def f(x):
        return entropy(ObservationPoint(n, x), base) - s

    return _bracket_solve(f, 0.0, 0.5 * n, n)


def _evidence_on_branch(
    n: float,
    log_e: float,
    branch: Branch,
    x_split: float,
    log_e_split: float,
    consts: ModelConstants,
    tol: float,
) -> float:
    branch = Branch(branch)
    if log_e < log_e_split - tol:
        raise NoSolutionError(
            f"E={math.exp(log_e):.12g} is below the minimum E={math.exp(log_e_split):.12g} at n={n}",
            e_min=math.exp(log_e_split),
        )
    if log_e <= log_e_split:
        return x_split
    if branch is Branch.LEFT:
        lo, hi = 0.0, x_split
        end = log_evidence(n, 0.0, consts)
    else:
        lo, hi = x_split, 0.5 * n
        end = log_evidence(n, 0.5 * n, consts)
    if log_e > end:
        if log_e - end <= tol:
            return lo if branch is Branch.LEFT else hi
        raise TargetRangeError(
            f"E={math.exp(log_e):.12g} exceeds the {branch.value} branch end value "
            f"{math.exp(end):.12g} at n={n}"
        )

    def f(x):
        return log_evidence(n, x, consts) - log_e

    return _bracket_solve(f, lo, hi, n)


def solve_x_for_evidence(
    n: float,
    e_target: float,
    branch: Branch,
    consts: ModelConstants = DEFAULT_CONSTANTS,
    tol: float = SOLVER_TOL,
    trp: TransitionPoint | None = None,
) -> float:
    """Return x on ``branch`` with E(n, x) = e_target.

    Raises:
        NoSolutionError: If e_target is below the minimum of E at this n.
        TargetRangeError: If e_target exceeds the branch end value.
    """
    if not e_target > 0:
        raise DomainError(f"e_target must be > 0, got {e_target}")
    if trp is None:
        trp = transition_point(n, consts=consts)
    return _evidence_on_branch(
        n, math.log(e_target), branch, trp.x_star, math.log(trp.e_min), consts, tol
    )


def solve_x_for_evidence_fast(
    n: float,
    e_target: float,
    branch: Branch,
    consts: ModelConstants = DEFAULT_CONSTANTS,
    tol: float = SOLVER_TOL,
) -> float:
    """Same as :func:`solve_x_for_evidence` but splits branches with :func:`branch_split`."""
    x_split = branch_split(n, consts)
    return _evidence_on_branch(
        n, math.log(e_target), branch, x_split, log_evidence(n, x_split, consts), consts, tol
    )


def branch_of(point: ObservationPoint, consts: ModelConstants = DEFAULT_CONSTANTS) -> Branch:
    if point.n == 0:
        return Branch.RIGHT
    return Branch.LEFT if point.x < branch_split(point.n, consts) else Branch.RIGHT


# ---------------------------------------------------------------------------
# Adiabats and two-dimensional state solving
#
# Along an adiabat S_E - k = n * entropy_rate(x/n), so the ratio p = x/n
# parametrizes the curve in closed form: n = (S_E - k) / entropy_rate(p),
# running from n = (S_E - k)/ln2 at p = 0 to n -> inf as p -> 1/2. ln V_E
# rises along it to a single maximum (the fold, near p ~ 0.12) and falls
# monotonically after. The fold splits the plane into two sheets; on each,
# (E, V_E) determines (n, x) uniquely.


class Sheet(str, enum.Enum):
    INNER = "inner"
    OUTER = "outer"


@dataclass(frozen=True)
class Fold:
    s_level: float
    ratio: float
    n: float
    log_V_E: float
    E: float


def adiabat_point(
    s_level: float, ratio: float, consts: ModelConstants = DEFAULT_CONSTANTS
) -> EvidentialState:
    """State on the adiabat S_E = s_level at x/n = ratio (closed form)."""
    s = s_level - consts.entropy_offset_k
    if not s > 0:
        raise DomainError(f"adiabat_point needs S_E > k, got S_E - k = {s}")
    if not 0.0 <= ratio < 0.5:
        raise DomainError(f"ratio must lie in [0, 1/2), got {ratio}")
    n = s / entropy_rate(ratio)
    return make_state(ObservationPoint(n, min(ratio * n, 0.5 * n)), consts)


def _fold_cached(s_level: float, consts: ModelConstants) -> Fold:
    res = minimize_scalar(
        lambda p: -adiabat_point(s_level, p, consts).log_V_E,
        bounds=(0.0, 0.5 - 1e-9),
        method="bounded",
        options={"xatol": 1e-13, "maxiter": 500},
    )
    p = float(res.x)
    st = adiabat_point(s_level, p, consts)
    return Fold(s_level=s_level, ratio=p, n=st.n, log_V_E=st.log_V_E, E=st.E)


_FOLDS: dict = {}


def adiabat_fold(s_level: float, consts: ModelConstants = DEFAULT_CONSTANTS) -> Fold:
    """Point of largest V_E (smallest E) on the adiabat S_E = s_level."""
    key = (s_level, consts)
    if key not in _FOLDS:
        if len(_FOLDS) > 4096:
            _FOLDS.clear()
        _FOLDS[key] = _fold_cached(s_level, consts)
    return _FOLDS[key]


def sheet_of(state: EvidentialState, consts: ModelConstants = DEFAULT_CONSTANTS) -> Sheet:
    """Which side of the adiabat's fold a state lies on."""
    if state.S_E - consts.entropy_offset_k <= 0:
        return Sheet.INNER
    fold = adiabat_fold(state.S_E, consts)
    return Sheet.INNER if state.point.ratio >= fold.ratio else Sheet.OUTER


def _zero_entropy_state(log_v_target: float, consts: ModelConstants, tol: float) -> EvidentialState:
    # S_E = k forces x = n/2; ln V_E there falls from ln(1/2) at n = 0.
    def f(n):
        return make_state(ObservationPoint(n, 0.5 * n), consts).log_V_E - log_v_target

    top = f(0.0)
    if abs(top) <= tol:
        return make_state(ObservationPoint(0.0, 0.0), consts)
    if top < 0:
        raise SolverError(f"ln V_E={log_v_target:.6g} exceeds ln(1/2) on the zero-entropy adiabat")
    hi = 1.0
    while f(hi) > 0:
        hi *= 2.0
        if hi > 1e12:
            raise SolverError("zero-entropy adiabat search failed to bracket")
    n = _bracket_solve(f, 0.0, hi, hi)
    return make_state(ObservationPoint(n, 0.5 * n), consts)


def solve_state(
    e_target: float,
    log_v_target: float,
    n_hint: float | None = None,
    branch: Branch | None = None,
    consts: ModelConstants = DEFAULT_CONSTANTS,
    tol: float = SOLVER_TOL,
    sheet: Sheet | None = None,
) -> EvidentialState:
    """Find the state with the given E and ln V_E.

    The pair forces S_E = C_V ln E + R ln V_E; the state is then found on
    that adiabat by a bracketed search over x/n with n in closed form. The
    sheet is taken from ``sheet`` if given, otherwise from which side of the
    fold ``n_hint`` lies on, otherwise the inner sheet. ``branch``, when given,
    is checked against the solution.

    Raises:
        InfeasibleTargetError: If the forced entropy is below k.
        SolverError: If the target is unreachable on the chosen sheet, or the
            solution lies on the other branch.
    """
    if not e_target > 0:
        raise DomainError(f"e_target must be > 0, got {e_target}")
    k = consts.entropy_offset_k
    s_level = consts.C_V * math.log(e_target) + consts.R * log_v_target
    if s_level < k - tol:
        raise InfeasibleTargetError(
            f"targets E={e_target:.6g}, ln V_E={log_v_target:.6g} force "
            f"S_E={s_level:.6g} < {k:.6g}"
        )
    if s_level - k <= tol * max(1.0, abs(k)):
        state = _zero_entropy_state(log_v_target, consts, tol)
    else:
        fold = adiabat_fold(s_level, consts)
        if sheet is None:
            sheet = Sheet.INNER if n_hint is None or n_hint >= fold.n else Sheet.OUTER
        sheet = Sheet(sheet)
        gap = fold.log_V_E - log_v_target
        if gap < -tol:
            raise SolverError(
                f"ln V_E={log_v_target:.6g} exceeds the largest volume {fold.log_V_E:.6g} "
                f"on the S_E={s_level:.6g} adiabat (E={e_target:.6g} is below its "
                f"minimum {fold.E:.6g})"
            )

        def h(p):
            return adiabat_point(s_level, p, consts).log_V_E - log_v_target

        if gap <= tol:
            p_sol = fold.ratio
        elif sheet is Sheet.INNER:
            # ln V_E -> -inf as p -> 1/2; halve the distance until below target.
            lo, hi = fold.ratio, 0.5 - 0.5 * (0.5 - fold.ratio)
            while h(hi) > 0:
                lo = hi
                hi = 0.5 - 0.5 * (0.5 - hi)
                if 0.5 - hi < 1e-15:
                    raise SolverError("inner-sheet search failed to bracket a solution")
            p_sol = _bracket_solve(h, lo, hi, 1.0)
        else:
            if h(0.0) > 0:
                raise SolverError(
                    f"ln V_E={log_v_target:.6g} is below the outer-sheet range on the "
                    f"S_E={s_level:.6g} adiabat"
                )
            p_sol = _bracket_solve(h, 0.0, fold.ratio, 1.0)
        state = adiabat_point(s_level, p_sol, consts)
    if branch is not None and state.n > 0:
        found = branch_of(state.point, consts)
        if found is not Branch(branch):
            x_split = branch_split(state.n, consts)
            if abs(state.x - x_split) > 1e-6 * state.n:
                raise SolverError(
                    f"solution (n={state.n:.6g}, x={state.x:.6g}) lies on {found.value}, "
                    f"not {Branch(branch).value}"
                )
    return state


def evidence_floor(consts: ModelConstants = DEFAULT_CONSTANTS) -> float:
    """Infimum of E over the one-sided model, reached as n -> 0.

    S_E - ln V_E >= ln 2 because LR / max LR <= 1 on an interval of length 1/2,
    so E >= 2^(R/C_V) exp(k/C_V).
    """
    return math.exp((consts.entropy_offset_k + consts.R * LOG2) / consts.C_V)


def isotherm_point(
    e_level: float,
    ratio: float,
    consts: ModelConstants = DEFAULT_CONSTANTS,
    n_hint: float | None = None,
) -> EvidentialState:
    """State on the isotherm E = e_level at x/n = ratio.

    E is strictly increasing in n at fixed x/n, so each ratio in [0, 1/2]
    meets the isotherm exactly once.

    Raises:
        NoSolutionError: If e_level is at or below :func:`evidence_floor`.
    """
    if not 0.0 <= ratio <= 0.5:
        raise DomainError(f"ratio must lie in [0, 1/2], got {ratio}")
    floor = evidence_floor(consts)
    if not e_level > floor:
        raise NoSolutionError(
            f"E={e_level} is not above the model's lower bound {floor:.12g}", e_min=floor
        )
    log_e = math.log(e_level)

    def f(n):
        return log_evidence(n, ratio * n, consts) - log_e

    hi = n_hint if n_hint and n_hint > 0 else 1.0
    lo = 0.0
    if f(hi) < 0:
        while True:
            lo = hi
            hi *= 2.0
            if f(hi) >= 0:
                break
            if hi > 1e12:
                raise SolverError(f"isotherm E={e_level} not bracketed at ratio {ratio}")
    else:
        probe = hi
        while probe > 1e-12:
            probe *= 0.5
            if f(probe) < 0:
                lo = probe
                break
            hi = probe
    n = _bracket_solve(f, lo, hi, hi)
    return make_state(ObservationPoint(n, min(ratio * n, 0.5 * n)), consts)


def trace_adiabat(
    s_level: float,
    n_lo: float,
    n_hi: float,
    samples: int,
    consts: ModelConstants = DEFAULT_CONSTANTS,
) -> list[PathSample]:
    """Sample the constant-S_E curve on a uniform n grid over [n_lo, n_hi].

    Grid points with n ln2 < s_level - k carry no solution and are skipped.

    Raises:
        NoSolutionError: If no grid point is feasible.
    """
    if samples < 2:
        raise DomainError("samples must be >= 2")
    if not 0 < n_lo < n_hi:
        raise DomainError(f"need 0 < n_lo < n_hi, got ({n_lo}, {n_hi})")
    out = []
    for n in np.linspace(n_lo, n_hi, samples):
        n = float(n)
        if n * LOG2 < s_level - consts.entropy_offset_k - 1e-12 * max(1.0, n):
            continue
        x = solve_x_for_entropy(n, s_level, consts)
        out.append(PathSample.from_state(make_state(ObservationPoint(n, x), consts)))
    if not out:
        raise NoSolutionError(f"adiabat S_E={s_level} has no state with n in [{n_lo}, {n_hi}]")
    return out


# ---------------------------------------------------------------------------
# Isotherms


def isotherm_apex(
    e_level: float,
    consts: ModelConstants = DEFAULT_CONSTANTS,
    n_hint: float = 10.0,
) -> TransitionPoint:
    """Largest n reached by the isotherm E = e_level.

    The minimum of E over x grows with n, so the isotherm ends where that
    minimum equals e_level; both branches meet there at the transition point.

    Raises:
        NoSolutionError: If e_level is below E at n -> 0.
    """
    _check_one_sided(consts)
    log_e = math.log(e_level)
    floor = (consts.entropy_offset_k - consts.R * math.log(0.5)) / consts.C_V
    if log_e <= floor:
        raise NoSolutionError(
            f"E={e_level} is below the lower bound {math.exp(floor):.12g} of the model",
            e_min=math.exp(floor),
        )

    def f(n):
        return log_evidence(n, branch_split(n, consts), consts) - log_e

    # f < 0 as n -> 0 because log_e lies above the floor.
    lo, hi = 1e-9, max(n_hint, 1e-3)
    while f(hi) < 0:
        lo = hi
        hi *= 2.0
        if hi > 1e9:
            raise SolverError(f"isotherm apex for E={e_level} not bracketed")
    n_max = _bracket_solve(f, lo, hi, hi)
    return transition_point(n_max, consts=consts)


def trace_isotherm(
    e_level: float,
    n_lo: float,
    n_hi: float,
    samples: int,
    consts: ModelConstants = DEFAULT_CONSTANTS,
    tol: float = SOLVER_TOL,
) -> IsothermTrace:
    """Sample the isotherm E = e_level on a uniform n grid, per branch.

    Raises:
        NoSolutionError: If no grid point carries a solution on either branch.
    """
    if samples < 2:
        raise DomainError("samples must be >= 2")
    if not 0 < n_lo < n_hi:
        raise DomainError(f"need 0 < n_lo < n_hi, got ({n_lo}, {n_hi})")
    trace = IsothermTrace(e_level=e_level)
    log_e = math.log(e_level)
    for n in np.linspace(n_lo, n_hi, samples):
        n = float(n)
        x_split = branch_split(n, consts)
        log_e_split = log_evidence(n, x_split, consts)
        for branch, bucket in ((Branch.LEFT, trace.left), (Branch.RIGHT, trace.right)):
            try:
                x = _evidence_on_branch(n, log_e, branch, x_split, log_e_split, consts, tol)
            except (NoSolutionError, TargetRangeError):
                trace.gaps.append((branch.value, n))
                continue
            bucket.append(PathSample.from_state(make_state(ObservationPoint(n, x), consts)))
    if not trace.left and not trace.right:
        raise NoSolutionError(
            f"isotherm E={e_level} has no state with n in [{n_lo}, {n_hi}]"
        )
    try:
        apex = isotherm_apex(e_level, consts, n_hint=n_hi)
    except (NoSolutionError, SolverError):
        apex = None
    if apex is not None and n_lo <= apex.n <= n_hi:
        trace.apex = apex
    return trace
