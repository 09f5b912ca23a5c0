"""Closed-form leading-order laws for Sobolev-type balls.

Covers the Pinsker-type entropy and risk constants for Sobolev balls with a
quadratic confining potential, the weighted Sobolev entropy and volume laws
with their Gamma-function constant Xi, the equal-exponent logarithmic law,
and compact embeddings between weighted spaces.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError
from .numerics import log_gamma, unit_ball_volume

TWO_PI = 2.0 * math.pi


class Variable(str, enum.Enum):
    EPS = "eps"
    LAMBDA = "lambda"
    KAPPA = "kappa"


@dataclass(frozen=True)
class AsymptoticLaw:
    """constant * v**exponent * ln(1/v)**log_power."""

    constant: float
    exponent: float
    log_power: int = 0
    variable: Variable = Variable.EPS

    def __post_init__(self):
        if not self.constant > 0:
            raise ValueError(f"law constant must be positive, got {self.constant!r}")
        if self.log_power not in (0, 1):
            raise ValueError(f"log_power must be 0 or 1, got {self.log_power!r}")

    def __call__(self, v: float) -> float:
        out = self.constant * v**self.exponent
        if self.log_power:
            out *= math.log(1.0 / v)
        return out


def _check(**params: float) -> None:
    for name, value in params.items():
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value!r}")


def _check_dim(d: int) -> int:
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    return int(d)


def _confinement(c: float, d: int) -> float:
    return (TWO_PI * math.sqrt(c)) ** d


def pinsker_entropy_constant(s: float, c: float, d: int) -> float:
    """s * omega_{2d} / (2d (2 pi sqrt c)^d): coefficient of eps^(-2d/s)."""
    _check(s=s, c=c)
    d = _check_dim(d)
    return s * unit_ball_volume(2 * d) / (2 * d * _confinement(c, d))


def pinsker_entropy_law(s: float, c: float, d: int) -> AsymptoticLaw:
    return AsymptoticLaw(pinsker_entropy_constant(s, c, d), -2.0 * d / s, 0, Variable.EPS)


def pinsker_risk_asymptote(s: float, c: float, d: int, kappa: float) -> float:
    """Leading-order minimax risk of the Sobolev ball with confinement c."""
    _check(s=s, c=c, kappa=kappa)
    d = _check_dim(d)
    inner = d * s * unit_ball_volume(2 * d) * kappa**2 / (_confinement(c, d) * (d + s) * (2 * d + s))
    return (d + s) / d * inner ** (s / (d + s))


def pinsker_risk_law(s: float, c: float, d: int) -> AsymptoticLaw:
    unit = pinsker_risk_asymptote(s, c, d, 1.0)
    return AsymptoticLaw(unit, 2.0 * s / (d + s), 0, Variable.KAPPA)


def log_xi_constant(r: float, s: float, d: int) -> float:
    _check(r=r, s=s)
    d = _check_dim(d)
    if r == s:
        raise DomainError("Xi is undefined for r == s; use the logarithmic law instead")
    lo, hi = min(r, s), max(r, s)
    return (
        math.log(lo)
        + log_gamma(d * (hi - lo) / (2.0 * lo))
        + log_gamma(d / 2.0)
        - math.log(2.0)
        - log_gamma(d * hi / (2.0 * lo))
    )


def xi_constant(r: float, s: float, d: int) -> float:
    """min * Gamma(d|s-r|/(2 min)) Gamma(d/2) / (2 Gamma(d max/(2 min))).

    Evaluated in log space; raises DomainError when r == s.
    """
    return math.exp(log_xi_constant(r, s, d))


def xi_constant_even(r: float, s: float, d: int) -> float:
    """Factorial form of Xi for even d = 2k."""
    _check(r=r, s=s)
    d = _check_dim(d)
    if d % 2:
        raise ValueError(f"factorial form needs even d, got {d}")
    if r == s:
        raise DomainError("Xi is undefined for r == s")
    k = d // 2
    lo, hi = min(r, s), max(r, s)
    denom = 2.0 * math.prod(k * hi - j * lo for j in range(1, k + 1))
    return math.factorial(k - 1) * lo ** (k + 1) / denom


def weighted_volume_asymptote(s: float, r: float, c: float, d: int) -> AsymptoticLaw:
    """Small-lambda law of the weighted Sobolev volume function."""
    _check(s=s, r=r, c=c)
    d = _check_dim(d)
    base = unit_ball_volume(d) ** 2 / _confinement(c, d)
    if r == s:
        return AsymptoticLaw(d * base / s, -d / s, 1, Variable.LAMBDA)
    lo = min(r, s)
    # d/lo * Xi equals d Gamma(d|s-r|/(2lo)) Gamma(d/2) / (2 Gamma(d hi/(2lo))).
    return AsymptoticLaw(d / lo * xi_constant(r, s, d) * base, -d / lo, 0, Variable.LAMBDA)


def weighted_entropy_asymptote(s: float, r: float, c: float, d: int) -> AsymptoticLaw:
    """Small-eps entropy law of the weighted Sobolev ball."""
    _check(s=s, r=r, c=c)
    d = _check_dim(d)
    base = unit_ball_volume(d) ** 2 / _confinement(c, d)
    if r == s:
        return AsymptoticLaw(base, -d / s, 1, Variable.EPS)
    return AsymptoticLaw(base * xi_constant(r, s, d), -d / min(r, s), 0, Variable.EPS)


def embedding_entropy_asymptote(
    s1: float, r1: float, s2: float, r2: float, c: float, d: int
) -> AsymptoticLaw:
    """Entropy law of the embedding H^(s1,r1) -> H^(s2,r2): the weighted law at the differences."""
    if not (s1 > s2 >= 0 and r1 > r2 >= 0):
        raise ValueError(f"need s1 > s2 >= 0 and r1 > r2 >= 0, got ({s1}, {r1}, {s2}, {r2})")
    return weighted_entropy_asymptote(s1 - s2, r1 - r2, c, d)


CONSTANTS_COLUMNS = ("family", "s", "r", "c", "d", "constant", "exponent", "log_power")


def constants_row(family: str, s: float, r: float, c: float, d: int, law: AsymptoticLaw) -> dict:
    return {
        "family": family,
        "s": float(s),
        "r": float(r),
        "c": float(c),
        "d": int(d),
        "constant": law.constant,
        "exponent": law.exponent,
        "log_power": law.log_power,
    }
