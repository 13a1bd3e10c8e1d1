"""Special functions and log-domain quadrature.

Everything here works with logarithms of the quantities it integrates so that
factors such as ``2**n`` for ``n`` in the millions never have to be formed.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from .errors import ConvergenceError, DomainError

_FPMIN = 1e-300
_CF_EPS = 1e-16


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for :func:`log_quadrature`.

    Attributes:
        rel_tol: Target relative error of the integral.
        abs_tol: Target absolute error (linear domain); 0 disables it.
        max_subdivisions: Upper bound on the number of panels.
        gl_points: Gauss-Legendre nodes per panel.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 0.0
    max_subdivisions: int = 2000
    gl_points: int = 32

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be > 0, got {self.rel_tol}")
        if not self.abs_tol >= 0:
            raise DomainError(f"abs_tol must be >= 0, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")
        if self.gl_points < 2:
            raise DomainError("gl_points must be >= 2")


DEFAULT_QUADRATURE = QuadratureConfig()


def log_gamma(z: float) -> float:
    """Natural log of the gamma function for z > 0."""
    if not z > 0 or math.isinf(z):
        raise DomainError(f"log_gamma requires a finite z > 0, got {z}")
    return math.lgamma(z)


def log_beta(a: float, b: float) -> float:
    """ln B(a, b) for a, b > 0."""
    if not (a > 0 and b > 0):
        raise DomainError(f"log_beta requires a, b > 0, got ({a}, {b})")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _beta_cf(p: float, a: float, b: float, max_iter: int) -> float:
    # Modified Lentz evaluation of the incomplete-beta continued fraction.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * p / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * p / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * p / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ConvergenceError(
        f"incomplete beta continued fraction did not converge in {max_iter} "
        f"iterations for p={p}, a={a}, b={b}",
        best_estimate=h,
    )


def _cf_iterations(a: float, b: float) -> int:
    # Convergence takes O(sqrt(max(a, b))) terms near the distribution mean.
    return 500 + int(20.0 * math.sqrt(max(a, b)))


def _check_beta_args(p: float, a: float, b: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if not (a > 0 and b > 0):
        raise DomainError(f"a and b must be > 0, got ({a}, {b})")


def log_reg_inc_beta(p: float, a: float, b: float) -> float:
    """ln I_p(a, b), accurate both when I is tiny and when I is close to 1."""
    _check_beta_args(p, a, b)
    if p == 0.0:
        return -math.inf
    if p == 1.0:
        return 0.0
    max_iter = _cf_iterations(a, b)
    log_front = a * math.log(p) + b * math.log1p(-p) - log_beta(a, b)
    if p <= a / (a + b):
        return log_front + math.log(_beta_cf(p, a, b, max_iter)) - math.log(a)
    # Symmetry switch: I_p(a, b) = 1 - I_{1-p}(b, a).
    log_comp = log_front + math.log(_beta_cf(1.0 - p, b, a, max_iter)) - math.log(b)
    if log_comp >= 0.0:
        raise ConvergenceError(
            f"complementary incomplete beta exceeded 1 for p={p}, a={a}, b={b}",
            best_estimate=0.0,
        )
    return math.log1p(-math.exp(log_comp))


def reg_inc_beta(p: float, a: float, b: float) -> float:
    """Regularized incomplete beta function I_p(a, b).

    Uses the continued fraction with a log-domain prefactor and the usual
    symmetry switch for p > a / (a + b).

    Raises:
        DomainError: If p is outside [0, 1] or a, b are not positive.
        ConvergenceError: If the continued fraction does not converge.
    """
    return math.exp(log_reg_inc_beta(p, a, b))


@lru_cache(maxsize=16)
def _gauss_legendre(points: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(points)
    return nodes, weights


class _Panel:
    __slots__ = ("a", "b", "log_est", "log_err")

    def __init__(self, a, b, log_est, log_err):
        self.a = a
        self.b = b
        self.log_est = log_est
        self.log_err = log_err

    def __lt__(self, other):
        # heapq is a min-heap; the panel with the largest error pops first.
        return self.log_err > other.log_err


def _log_gl(f_log, a: float, b: float, nodes, weights) -> tuple[float, np.ndarray, np.ndarray]:
    half = 0.5 * (b - a)
    theta = a + half * (nodes + 1.0)
    vals = np.asarray(f_log(theta), dtype=float)
    if vals.shape != theta.shape:
        vals = np.broadcast_to(vals, theta.shape)
    return half, vals, weights


def _panel(f_log, a: float, b: float, nodes, weights) -> _Panel:
    mid = 0.5 * (a + b)
    h_whole, whole, w = _log_gl(f_log, a, b, nodes, weights)
    h_left, left, _ = _log_gl(f_log, a, mid, nodes, weights)
    h_right, right, _ = _log_gl(f_log, mid, b, nodes, weights)
    if np.any(np.isnan(whole)) or np.any(np.isnan(left)) or np.any(np.isnan(right)):
        raise DomainError(f"integrand returned NaN on [{a}, {b}]")
    shift = max(whole.max(), left.max(), right.max())
    if shift == -math.inf:
        return _Panel(a, b, -math.inf, -math.inf)
    i_whole = h_whole * float(np.dot(w, np.exp(whole - shift)))
    i_halves = h_left * float(np.dot(w, np.exp(left - shift))) + h_right * float(
        np.dot(w, np.exp(right - shift))
    )
    err = abs(i_halves - i_whole)
    log_est = shift + math.log(i_halves) if i_halves > 0 else -math.inf
    log_err = shift + math.log(err) if err > 0 else -math.inf
    return _Panel(a, b, log_est, log_err)


def _logsumexp(values: Iterable[float]) -> float:
    arr = np.fromiter(values, dtype=float)
    if arr.size == 0:
        return -math.inf
    m = arr.max()
    if m == -math.inf:
        return -math.inf
    return float(m + math.log(np.exp(arr - m).sum()))


def log_quadrature(
    f_log: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    points: Iterable[float] = (),
    initial_panels: int = 8,
) -> float:
    """Return ln of the integral of exp(f_log(theta)) over [lo, hi].

    ``f_log`` must accept a numpy array of abscissae. Each panel is integrated
    with Gauss-Legendre nodes after subtracting the panel maximum, and the
    panel with the largest error estimate is bisected until the summed
    error falls below the tolerance. ``points`` seeds extra breakpoints, which
    is how callers make sure a narrow peak is seen by the first pass.

    Raises:
        DomainError: If the interval is empty or the integrand returns NaN.
        ConvergenceError: If ``cfg.max_subdivisions`` is exhausted; the best
            estimate (a log value) is attached.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    nodes, weights = _gauss_legendre(cfg.gl_points)
    breaks = sorted({lo, hi, *(float(p) for p in points if lo < p < hi)})
    edges = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        edges.extend(np.linspace(a, b, initial_panels + 1)[:-1].tolist())
    edges.append(hi)

    heap = [_panel(f_log, a, b, nodes, weights) for a, b in zip(edges[:-1], edges[1:])]
    heapq.heapify(heap)
    while True:
        log_total = _logsumexp(p.log_est for p in heap)
        log_error = _logsumexp(p.log_err for p in heap)
        if log_total == -math.inf:
            return -math.inf
        if log_error == -math.inf:
            return log_total
        if log_error - log_total <= math.log(cfg.rel_tol):
            return log_total
        if cfg.abs_tol > 0 and log_error <= math.log(cfg.abs_tol):
            return log_total
        if len(heap) >= cfg.max_subdivisions:
            raise ConvergenceError(
                f"log_quadrature exceeded {cfg.max_subdivisions} panels on "
                f"[{lo}, {hi}] (relative error estimate "
                f"{math.exp(log_error - log_total):.3g})",
                best_estimate=log_total,
            )
        worst = heapq.heappop(heap)
        mid = 0.5 * (worst.a + worst.b)
        if not worst.a < mid < worst.b:
            raise ConvergenceError(
                f"log_quadrature cannot split panel [{worst.a}, {worst.b}] further",
                best_estimate=log_total,
            )
        heapq.heappush(heap, _panel(f_log, worst.a, mid, nodes, weights))
        heapq.heappush(heap, _panel(f_log, mid, worst.b, nodes, weights))


def _log_kernel(n: float, x: float):
    log2 = math.log(2.0)

    def f(theta):
        # Terms with a zero exponent are dropped so that 0 * log(0) never
        # appears when a panel collapses onto an endpoint.
        out = np.full(np.shape(theta), n * log2)
        with np.errstate(divide="ignore"):
            if x > 0:
                out = out + x * np.log(theta)
            if n - x > 0:
                out = out + (n - x) * np.log1p(-theta)
        return out

    return f


def beta_breakpoints(n: float, x: float, lo: float, hi: float) -> list[float]:
    """Panel breakpoints clustered around the peak of theta^x (1-theta)^(n-x)."""
    a = x + 1.0
    b = n - x + 1.0
    mode = x / n if n > 0 else 0.5
    sd = math.sqrt(a * b / ((a + b) ** 2 * (a + b + 1.0)))
    pts = [mode]
    for k in (0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0, 40.0):
        pts.append(mode - k * sd)
        pts.append(mode + k * sd)
    return sorted(p for p in pts if lo < p < hi)


def log_lr_integral(
    n: float, x: float, lo: float = 0.0, hi: float = 0.5, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> float:
    """ln of the integral of 2^n theta^x (1-theta)^(n-x) over [lo, hi] by quadrature."""
    return log_quadrature(_log_kernel(n, x), lo, hi, cfg, points=beta_breakpoints(n, x, lo, hi))


def posterior_log_odds_mean(
    n: float, x: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE, hi: float = 0.5
) -> float:
    """Mean of ln(theta/(1-theta)) under the density prop. to theta^x (1-theta)^(n-x) on (0, hi).

    With the default ``hi = 0.5`` the log-odds is negative over the whole range,
    so the numerator is integrated as exp(log kernel + log(-log-odds)) and the
    result is always negative.

    Raises:
        DomainError: If n <= 0 or x is outside [0, n * hi] (clipped to [0, n]).
        ConvergenceError: If either quadrature fails to converge.
    """
    if not n > 0:
        raise DomainError(f"n must be > 0, got {n}")
    if not 0.0 <= x <= n * min(hi, 1.0) + 1e-12 * n:
        raise DomainError(f"x must lie in [0, {n * hi}], got {x}")
    if not 0.0 < hi <= 1.0:
        raise DomainError(f"hi must lie in (0, 1], got {hi}")
    kernel = _log_kernel(n, x)
    pts = beta_breakpoints(n, x, 0.0, hi)
    log_den = log_quadrature(kernel, 0.0, hi, cfg, points=pts)
    if hi <= 0.5:

        def neg_num(theta):
            return kernel(theta) + np.log(np.log1p(-theta) - np.log(theta))

        return -math.exp(log_quadrature(neg_num, 0.0, hi, cfg, points=pts) - log_den)

    # Log-odds changes sign at 1/2: integrate both signed parts separately.
    pts_lo = [p for p in pts if p < 0.5]
    pts_hi = [p for p in pts if p > 0.5]

    def neg_part(theta):
        return kernel(theta) + np.log(np.log1p(-theta) - np.log(theta))

    def pos_part(theta):
        return kernel(theta) + np.log(np.log(theta) - np.log1p(-theta))

    neg = math.exp(log_quadrature(neg_part, 0.0, 0.5, cfg, points=pts_lo) - log_den)
    pos = math.exp(log_quadrature(pos_part, 0.5, hi, cfg, points=pts_hi) - log_den)
    return pos - neg
