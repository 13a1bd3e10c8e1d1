"""Evidence versus observed Fisher information (C_V = R/2).

Integrating the LR over the whole unit interval gives the beta-function
volume 2^n x!(n-x)!/(n+1)!; Stirling's formula then turns E into
((n+1)/n)^(2n) (n+1)^3 / (e^2 2 pi x (n-x)), which tends to
E_approx = (n+1)^3 / (2 pi x (n-x)) and, for large n, to FI_obs / (2 pi)
with FI_obs = n^3 / (x (n-x)).

The exact E used for comparison always comes from the one-sided volume; the
full-interval volume is only the device behind the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .core import DEFAULT_CONSTANTS, LOG2, ModelConstants, Side, exp_or_inf, log_evidence
from .errors import DomainError, InfiniteInformationError

TWO_PI = 2.0 * math.pi


def _check_interior(n: float, x: float, what: str) -> None:
    if not n > 0:
        raise DomainError(f"n must be > 0, got {n}")
    if not 0 <= x <= n:
        raise DomainError(f"x must lie in [0, n], got x={x}, n={n}")
    if x == 0 or x == n:
        raise InfiniteInformationError(f"{what} is infinite at x={x}, n={n}")


def fi_obs(n: float, x: float) -> float:
    """Observed binomial Fisher information at theta = x/n."""
    _check_interior(n, x, "observed Fisher information")
    return n**3 / (x * (n - x))


def e_approx(n: float, x: float) -> float:
    """Large-n closed-form approximation to E at C_V = R/2."""
    _check_interior(n, x, "E_approx")
    return (n + 1.0) ** 3 / (TWO_PI * x * (n - x))


def e_stirling(n: float, x: float) -> float:
    """E at C_V = R/2 from the Stirling form of the full-interval volume.

    Keeps the ((n+1)/n)^(2n) / e^2 factor that :func:`e_approx` drops.
    """
    _check_interior(n, x, "Stirling E")
    log_factor = 2.0 * n * math.log1p(1.0 / n) - 2.0
    return math.exp(log_factor) * e_approx(n, x)


def log_factorial_volume(n: int, x: int) -> float:
    """ln(2^n x! (n-x)! / (n+1)!) for integers 0 <= x <= n."""
    if int(n) != n or int(x) != x:
        raise DomainError(f"integer n and x required, got n={n}, x={x}")
    n, x = int(n), int(x)
    if n < 0 or not 0 <= x <= n:
        raise DomainError(f"need 0 <= x <= n, got x={x}, n={n}")
    return n * LOG2 + math.lgamma(x + 1) + math.lgamma(n - x + 1) - math.lgamma(n + 2)


def log_stirling_volume(n: float, x: float) -> float:
    """ln of 2^n x^x (n-x)^(n-x) / (n+1)^(n+1) * e * sqrt(2 pi x (n-x) / (n+1))."""
    _check_interior(n, x, "Stirling volume")
    return (
        n * LOG2
        + x * math.log(x)
        + (n - x) * math.log(n - x)
        - (n + 1.0) * math.log(n + 1.0)
        + 1.0
        + 0.5 * math.log(TWO_PI * x * (n - x) / (n + 1.0))
    )


@dataclass(frozen=True)
class FisherComparison:
    n: float
    x: float
    e_exact: float
    e_approx: float
    fi_over_2pi: float

    @property
    def ratio(self) -> float:
        return self.x / self.n

    @property
    def relative_gap(self) -> float:
        """|E - FI_obs / 2 pi| / E."""
        return abs(self.e_exact - self.fi_over_2pi) / self.e_exact


FISHER_CONSTANTS = ModelConstants.half_capacity()


def compare_point(n: float, x: float, consts: ModelConstants = FISHER_CONSTANTS) -> FisherComparison:
    _check_fisher_constants(consts)
    return FisherComparison(
        n=n,
        x=x,
        e_exact=exp_or_inf(log_evidence(n, x, consts)),
        e_approx=e_approx(n, x),
        fi_over_2pi=fi_obs(n, x) / TWO_PI,
    )


def _check_fisher_constants(consts: ModelConstants) -> None:
    if not math.isclose(consts.C_V, 0.5 * consts.R, rel_tol=1e-12):
        raise DomainError(f"the Fisher comparison requires C_V = R/2, got C_V={consts.C_V}, R={consts.R}")
    if consts.side is not Side.ONE_SIDED:
        raise DomainError("the Fisher comparison uses the one-sided volume")


def compare_series(
    n: float,
    ratio_grid: Iterable[float],
    consts: ModelConstants = FISHER_CONSTANTS,
) -> list[FisherComparison]:
    """E, E_approx and FI_obs/(2 pi) at x = r n for each r in ``ratio_grid``.

    Raises:
        DomainError: If C_V != R/2, the model is two-sided, or a ratio is
            outside (0, 1/2].
    """
    _check_fisher_constants(consts)
    out = []
    for r in ratio_grid:
        if not 0 < r <= 0.5:
            raise DomainError(f"grid ratios must lie in (0, 1/2], got {r}")
        out.append(compare_point(n, r * n, consts))
    return out


def default_ratio_grid(points: int = 100) -> list[float]:
    return [0.5 * (i + 1) / points for i in range(points)]


__all__ = [
    "FISHER_CONSTANTS",
    "DEFAULT_CONSTANTS",
    "FisherComparison",
    "compare_point",
    "compare_series",
    "default_ratio_grid",
    "e_approx",
    "e_stirling",
    "fi_obs",
    "log_factorial_volume",
    "log_stirling_volume",
]
