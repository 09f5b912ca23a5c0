"""Positive decaying phase-space symbols sigma(x, omega) on R^{2d}.

Only inverse (decaying) symbols are represented.  The compact operator of
interest is the inverse of a positive-order operator, so all downstream
computations run on the reciprocal symbol.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .numerics import unit_ball_volume

TWO_PI = 2.0 * math.pi


class SymbolKind(str, enum.Enum):
    SCHRODINGER_INVERSE = "schrodinger_inverse"
    WEIGHTED_SOBOLEV_INVERSE = "weighted_sobolev_inverse"
    POWER_LAW_RADIAL = "power_law_radial"
    CUSTOM = "custom"


@dataclass(frozen=True)
class HypoMeta:
    """Hypoellipticity exponents: decay between orders m_minus and m_plus."""

    m_minus: float
    m_plus: float
    rho: float = 1.0

    def __post_init__(self):
        if not (self.m_plus >= self.m_minus > 0):
            raise ValueError(f"need m_plus >= m_minus > 0, got {self.m_minus}, {self.m_plus}")
        if not (0 < self.rho <= 1):
            raise ValueError(f"rho must lie in (0, 1], got {self.rho}")


@dataclass(frozen=True)
class Envelope:
    """Upper decay bound sigma(z) <= scale * (1 + |z|^2)^(-order/2).

    Used to build the ball that contains a superlevel set {sigma > lambda}.
    """

    scale: float
    order: float

    def radius(self, lam: float) -> float:
        """Radius of the ball {scale*(1+|z|^2)^(-order/2) > lam}; 0 if empty."""
        r2 = (self.scale / lam) ** (2.0 / self.order) - 1.0
        return math.sqrt(r2) if r2 > 0 else 0.0


@dataclass(frozen=True)
class SymbolDescriptor:
    kind: SymbolKind
    d: int
    s: float = 0.0
    r: float = 0.0
    c: float = 1.0
    sup_value: float = 1.0
    hypo_meta: Optional[HypoMeta] = None
    envelope: Optional[Envelope] = None
    # power_law_radial: sigma(z) = amplitude * min(1, (|z|/length)^(-2d/alpha))
    alpha: float = 0.0
    length: float = 1.0
    custom_eval: Optional[Callable[..., float]] = field(default=None, compare=False)
    custom_vectorized: bool = False

    def __call__(self, x, omega) -> float:
        return evaluate(self, x, omega)

    def evaluate_many(self, z: np.ndarray) -> np.ndarray:
        """Evaluate at phase-space points ``z`` of shape (n, 2d), x first."""
        z = np.asarray(z, dtype=float)
        x, w = z[:, : self.d], z[:, self.d:]
        return _evaluate_arrays(self, x, w)

    @property
    def label(self) -> str:
        if self.kind is SymbolKind.SCHRODINGER_INVERSE:
            return f"schrodinger-inv:d={self.d},s={self.s:g},c={self.c:g}"
        if self.kind is SymbolKind.WEIGHTED_SOBOLEV_INVERSE:
            return f"weighted-inv:d={self.d},s={self.s:g},r={self.r:g},c={self.c:g}"
        if self.kind is SymbolKind.POWER_LAW_RADIAL:
            amp = f",amp={self.sup_value:.12g}" if self.sup_value != 1.0 else ""
            return f"power-law:alpha={self.alpha:g},d={self.d},coef={power_law_coefficient(self):.12g}{amp}"
        return f"custom:d={self.d}"


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value


def _dimension(d: int) -> int:
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    return int(d)


def make_schrodinger_inverse(s: float, c: float, d: int) -> SymbolDescriptor:
    """(1 + c|x|^2 + (2 pi |omega|)^2)^(-s/2), the inverse Schroedinger symbol."""
    s = _positive("s", s)
    c = _positive("c", c)
    d = _dimension(d)
    m = min(1.0, c, TWO_PI**2)
    return SymbolDescriptor(
        kind=SymbolKind.SCHRODINGER_INVERSE,
        d=d,
        s=s,
        c=c,
        sup_value=1.0,
        hypo_meta=HypoMeta(s, s, 1.0),
        envelope=Envelope(m ** (-s / 2.0), s),
    )


def make_weighted_sobolev_inverse(s: float, r: float, c: float, d: int) -> SymbolDescriptor:
    """(1 + (2 pi |omega|)^2)^(-s/2) (1 + c|x|^2)^(-r/2)."""
    s = _positive("s", s)
    r = _positive("r", r)
    c = _positive("c", c)
    d = _dimension(d)
    # (1+a t^2) >= min(1,a)(1+t^2) per factor, then both factors are bounded
    # by the joint radial decay of the smaller order.
    scale = min(1.0, c) ** (-r / 2.0)
    return SymbolDescriptor(
        kind=SymbolKind.WEIGHTED_SOBOLEV_INVERSE,
        d=d,
        s=s,
        r=r,
        c=c,
        sup_value=1.0,
        hypo_meta=HypoMeta(min(r, s), r + s, 1.0),
        envelope=Envelope(scale, min(r, s)),
    )


def make_power_law_radial(
    alpha: float,
    d: int,
    coefficient: float | None = None,
    amplitude: float = 1.0,
) -> SymbolDescriptor:
    """Radial fixture with an exactly power-law volume function.

    ``sigma(z) = amplitude * min(1, (|z|/L)^(-2d/alpha))`` has
    ``V(lam) = coefficient * (lam/amplitude)^(-alpha)`` below the amplitude.
    By default L = 1, i.e. ``coefficient`` is the volume of the unit ball in
    R^{2d}.
    """
    alpha = _positive("alpha", alpha)
    d = _dimension(d)
    amplitude = _positive("amplitude", amplitude)
    ball = unit_ball_volume(2 * d)
    if coefficient is None:
        length = 1.0
    else:
        length = (_positive("coefficient", coefficient) / ball) ** (1.0 / (2 * d))
    beta = 2.0 * d / alpha
    return SymbolDescriptor(
        kind=SymbolKind.POWER_LAW_RADIAL,
        d=d,
        sup_value=amplitude,
        hypo_meta=HypoMeta(beta, beta, 1.0),
        envelope=Envelope(amplitude * (1.0 + length**2) ** (beta / 2.0), beta),
        alpha=alpha,
        length=length,
    )


def make_custom(
    func: Callable[..., float],
    d: int,
    sup_value: float,
    envelope: Envelope | tuple[float, float] | None = None,
    hypo_meta: HypoMeta | None = None,
    vectorized: bool = False,
) -> SymbolDescriptor:
    """Wrap a user symbol ``func(x, omega)``.

    ``envelope`` (scale, order) must bound the symbol from above; it is what
    the Monte Carlo volume estimator samples from.  With ``vectorized=True``
    ``func`` receives arrays of shape (n, d) and returns shape (n,).
    """
    if envelope is not None and not isinstance(envelope, Envelope):
        envelope = Envelope(*envelope)
    return SymbolDescriptor(
        kind=SymbolKind.CUSTOM,
        d=_dimension(d),
        sup_value=_positive("sup_value", sup_value),
        hypo_meta=hypo_meta,
        envelope=envelope,
        custom_eval=func,
        custom_vectorized=vectorized,
    )


def power_law_coefficient(sym: SymbolDescriptor) -> float:
    """Volume coefficient of a power_law_radial symbol at unit amplitude."""
    return unit_ball_volume(2 * sym.d) * sym.length ** (2 * sym.d)


def _evaluate_arrays(sym: SymbolDescriptor, x: np.ndarray, w: np.ndarray) -> np.ndarray:
    kind = sym.kind
    if kind is SymbolKind.SCHRODINGER_INVERSE:
        q = 1.0 + sym.c * np.sum(x * x, axis=1) + TWO_PI**2 * np.sum(w * w, axis=1)
        return q ** (-sym.s / 2.0)
    if kind is SymbolKind.WEIGHTED_SOBOLEV_INVERSE:
        qw = 1.0 + TWO_PI**2 * np.sum(w * w, axis=1)
        qx = 1.0 + sym.c * np.sum(x * x, axis=1)
        return qw ** (-sym.s / 2.0) * qx ** (-sym.r / 2.0)
    if kind is SymbolKind.POWER_LAW_RADIAL:
        rho = np.sqrt(np.sum(x * x, axis=1) + np.sum(w * w, axis=1)) / sym.length
        beta = 2.0 * sym.d / sym.alpha
        with np.errstate(divide="ignore"):
            tail = np.where(rho > 1.0, rho ** (-beta), 1.0)
        return sym.sup_value * tail
    if sym.custom_eval is None:
        raise ValueError("custom symbol has no evaluation callback")
    if sym.custom_vectorized:
        return np.asarray(sym.custom_eval(x, w), dtype=float)
    return np.fromiter(
        (sym.custom_eval(xi, wi) for xi, wi in zip(x, w)), dtype=float, count=x.shape[0]
    )


def evaluate(sym: SymbolDescriptor, x, omega) -> float:
    """Point evaluation sigma(x, omega); both points must live in R^d."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if x.shape != (sym.d,) or omega.shape != (sym.d,):
        raise ValueError(
            f"expected points in R^{sym.d}, got shapes {x.shape} and {omega.shape}"
        )
    val = float(_evaluate_arrays(sym, x[None, :], omega[None, :])[0])
    # Strict positivity is a standing assumption of the entropy theory.
    assert val > 0, f"symbol must be strictly positive, got {val} at ({x}, {omega})"
    return val


def sup_value(sym: SymbolDescriptor) -> float:
    return sym.sup_value
