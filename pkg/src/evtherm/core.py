"""Thermodynamic state of the binomial evidential system.

A state is labelled by a continuous pair (n, x) and carries the evidential
volume, entropy, evidence and pressure. Every quantity is kept as a logarithm;
the linear accessors exponentiate on demand and can overflow to ``inf`` for
extreme inputs.

The equation of state is only trustworthy away from the very-low-evidence
end of the range (the entropy form of the ideal-gas law is known to break
down as temperature approaches zero); states are still computed there.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError
from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureConfig,
    log_beta,
    log_lr_integral,
    log_reg_inc_beta,
)

LOG2 = math.log(2.0)
_LOG_MAX = math.log(1.7976931348623157e308)


def exp_or_inf(value: float) -> float:
    """exp(value), returning inf instead of raising on overflow."""
    return math.inf if value > _LOG_MAX else math.exp(value)


class Side(str, enum.Enum):
    ONE_SIDED = "one_sided"
    TWO_SIDED = "two_sided"


@dataclass(frozen=True)
class ModelConstants:
    """Physics-analogue constants.

    ``C_V = 1.5 R`` is the monatomic-gas value used for the main results;
    :meth:`half_capacity` gives the ``C_V = R / 2`` variant used for the Fisher
    information comparison.
    """

    R: float = 1.0
    C_V: float = 1.5
    side: Side = Side.ONE_SIDED
    entropy_offset_k: float = 0.0

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError(f"R must be > 0, got {self.R}")
        if not self.C_V > 0:
            raise DomainError(f"C_V must be > 0, got {self.C_V}")
        object.__setattr__(self, "side", Side(self.side))

    @classmethod
    def half_capacity(cls, R: float = 1.0, **kwargs) -> "ModelConstants":
        return cls(R=R, C_V=0.5 * R, **kwargs)

    @property
    def x_limit(self) -> float:
        """Upper bound on x / n for the configured side."""
        return 0.5 if self.side is Side.ONE_SIDED else 1.0


DEFAULT_CONSTANTS = ModelConstants()


@dataclass(frozen=True)
class ObservationPoint:
    n: float
    x: float

    def __post_init__(self):
        if not (math.isfinite(self.n) and self.n >= 0):
            raise DomainError(f"n must be finite and >= 0, got {self.n}")
        if not (math.isfinite(self.x) and 0 <= self.x <= self.n):
            raise DomainError(f"x must lie in [0, n], got x={self.x}, n={self.n}")

    @property
    def ratio(self) -> float:
        return self.x / self.n if self.n > 0 else 0.0

    def check_side(self, side: Side) -> None:
        """Raise DomainError if x is outside the range allowed for ``side``."""
        if Side(side) is Side.ONE_SIDED and self.x > 0.5 * self.n:
            raise DomainError(f"one-sided model requires x <= n/2, got x={self.x}, n={self.n}")


@dataclass(frozen=True)
class EvidentialState:
    """Full thermodynamic state at one observation point."""

    point: ObservationPoint
    log_V_E: float
    S_E: float
    log_E: float
    log_P_E: float

    @property
    def n(self) -> float:
        return self.point.n

    @property
    def x(self) -> float:
        return self.point.x

    @property
    def V_E(self) -> float:
        return exp_or_inf(self.log_V_E)

    @property
    def E(self) -> float:
        return exp_or_inf(self.log_E)

    @property
    def P_E(self) -> float:
        return exp_or_inf(self.log_P_E)


def log_lr(theta: float, point: ObservationPoint) -> float:
    """ln LR(theta; n, x) with theta = 1/2 in the denominator.

    Returns ``-inf`` where the likelihood vanishes (e.g. theta = 0 with x > 0).
    """
    if not 0.0 <= theta <= 1.0:
        raise DomainError(f"theta must lie in [0, 1], got {theta}")
    n, x = point.n, point.x
    total = n * LOG2
    if x > 0:
        if theta == 0.0:
            return -math.inf
        total += x * math.log(theta)
    if n - x > 0:
        if theta == 1.0:
            return -math.inf
        total += (n - x) * math.log1p(-theta)
    return total


def log_volume(
    point: ObservationPoint,
    consts: ModelConstants = DEFAULT_CONSTANTS,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> float:
    """ln V_E, the log of the area under the LR curve.

    One-sided: n ln2 + ln B(x+1, n-x+1) + ln I_{1/2}(x+1, n-x+1).
    Two-sided: n ln2 + ln B(x+1, n-x+1).

    ``cfg`` is accepted for interface symmetry with
    :func:`log_volume_quadrature`; the closed form does not use it.
    """
    point.check_side(consts.side)
    a = point.x + 1.0
    b = point.n - point.x + 1.0
    base = point.n * LOG2 + log_beta(a, b)
    if consts.side is Side.TWO_SIDED:
        return base
    return base + log_reg_inc_beta(0.5, a, b)


def log_volume_quadrature(
    point: ObservationPoint,
    consts: ModelConstants = DEFAULT_CONSTANTS,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> float:
    """ln V_E by direct log-domain quadrature of the LR (independent route)."""
    point.check_side(consts.side)
    return log_lr_integral(point.n, point.x, 0.0, consts.x_limit, cfg)


def _kl_half(d: float) -> float:
    # KL(Bernoulli((1-d)/2) || Bernoulli(1/2)) as an even series in d; every
    # term is positive so the result never dips below zero near d = 0.
    d2 = d * d
    term = d2
    total = 0.0
    k = 1
    while True:
        inc = term / (2 * k * (2 * k - 1))
        total += inc
        if inc <= 1e-17 * total:
            return total
        term *= d2
        k += 1


def entropy_rate(p: float) -> float:
    """Per-toss entropy p ln(2p) + (1-p) ln(2(1-p)) for p = x/n in [0, 1]."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    d = 1.0 - 2.0 * p
    if abs(d) < 0.1:
        return _kl_half(d)
    rate = LOG2
    if p > 0:
        rate += p * math.log(p)
    if p < 1:
        rate += (1.0 - p) * math.log1p(-p)
    return rate


def entropy(point: ObservationPoint, consts: ModelConstants = DEFAULT_CONSTANTS) -> float:
    """Evidential entropy S_E = ln of the maximized LR, plus the offset k."""
    point.check_side(consts.side)
    if point.n == 0:
        return consts.entropy_offset_k
    return point.n * entropy_rate(point.x / point.n) + consts.entropy_offset_k


def make_state(
    point: ObservationPoint,
    consts: ModelConstants = DEFAULT_CONSTANTS,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> EvidentialState:
    """Assemble V_E, S_E, E and P_E for one observation point."""
    log_v = log_volume(point, consts, cfg)
    s = entropy(point, consts)
    log_e = (s - consts.R * log_v) / consts.C_V
    log_p = math.log(consts.R) + log_e - log_v
    return EvidentialState(point=point, log_V_E=log_v, S_E=s, log_E=log_e, log_P_E=log_p)


def state_at(
    n: float,
    x: float,
    consts: ModelConstants = DEFAULT_CONSTANTS,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> EvidentialState:
    return make_state(ObservationPoint(n, x), consts, cfg)


def log_evidence(n: float, x: float, consts: ModelConstants = DEFAULT_CONSTANTS) -> float:
    """ln E at (n, x); the scalar workhorse for the solvers."""
    point = ObservationPoint(n, x)
    return (entropy(point, consts) - consts.R * log_volume(point, consts)) / consts.C_V
