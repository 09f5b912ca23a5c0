"""Phase-space volume functions V(lam) = |{(x, omega) : sigma(x, omega) > lam}|.

Three evaluation methods are available: exact closed forms, a semi-analytic
one-dimensional reduction for the weighted Sobolev family, and Monte Carlo
sampling inside an envelope ball for arbitrary symbols.  The module also
offers direct phase-space integrals of F(sigma), which give an evaluation
path that never touches V.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError
from .numerics import (
    DEFAULT_REL_TOL,
    BallSampler,
    MCEstimate,
    integrate_adaptive,
    mc_estimate,
    unit_ball_volume,
)
from .symbols import SymbolDescriptor, SymbolKind, power_law_coefficient

TWO_PI = 2.0 * math.pi


class VolumeMethod(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    SEMI_ANALYTIC = "semi_analytic"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class MCConfig:
    samples: int = 1_000_000
    seed: int = 0


@dataclass(frozen=True)
class VolumeFunction:
    """Evaluable V(lam) bound to a symbol.

    Calling the object with a scalar returns a float; with an array it
    returns an array of the same shape.  V vanishes from ``cutoff`` upward.
    """

    symbol: SymbolDescriptor
    method: VolumeMethod
    cutoff: float
    mc_config: Optional[MCConfig] = None
    rel_tol: float = DEFAULT_REL_TOL

    @property
    def exact(self) -> bool:
        return self.method is not VolumeMethod.MONTE_CARLO

    def _scalar(self, lam: float) -> float:
        sym = self.symbol
        if self.method is VolumeMethod.CLOSED_FORM:
            if sym.kind is SymbolKind.SCHRODINGER_INVERSE:
                return volume_closed_form_schrodinger(sym.s, sym.c, sym.d, lam)
            return volume_closed_form_power_law(sym, lam)
        if self.method is VolumeMethod.SEMI_ANALYTIC:
            return volume_weighted_semi_analytic(sym.s, sym.r, sym.c, sym.d, lam, self.rel_tol)
        cfg = self.mc_config or MCConfig()
        return volume_monte_carlo(sym, lam, cfg.samples, cfg.seed).mean

    def __call__(self, lam):
        arr = np.asarray(lam, dtype=float)
        if arr.ndim == 0:
            return self._scalar(float(arr))
        if self.method is VolumeMethod.CLOSED_FORM:
            sym = self.symbol
            if sym.kind is SymbolKind.SCHRODINGER_INVERSE:
                return _schrodinger_array(sym.s, sym.c, sym.d, arr)
            return _power_law_array(sym, arr)
        flat = np.fromiter((self._scalar(float(t)) for t in arr.ravel()), dtype=float, count=arr.size)
        return flat.reshape(arr.shape)

    def estimate(self, lam: float) -> MCEstimate:
        """Monte Carlo estimate with its standard error (monte_carlo method only)."""
        if self.method is not VolumeMethod.MONTE_CARLO:
            raise ConfigurationError(f"{self.method.value} volume has no Monte Carlo estimate")
        cfg = self.mc_config or MCConfig()
        return volume_monte_carlo(self.symbol, lam, cfg.samples, cfg.seed)


def volume_fn(
    sym: SymbolDescriptor,
    mc_config: MCConfig | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
    force_monte_carlo: bool = False,
) -> VolumeFunction:
    """Pick the most exact volume evaluator available for the symbol's family."""
    if force_monte_carlo or sym.kind is SymbolKind.CUSTOM:
        if sym.envelope is None:
            raise ConfigurationError("Monte Carlo volume needs a sampling envelope on the symbol")
        method = VolumeMethod.MONTE_CARLO
        mc_config = mc_config or MCConfig()
    elif sym.kind is SymbolKind.WEIGHTED_SOBOLEV_INVERSE:
        method = VolumeMethod.SEMI_ANALYTIC
    else:
        method = VolumeMethod.CLOSED_FORM
    return VolumeFunction(sym, method, sym.sup_value, mc_config, rel_tol)


def _schrodinger_prefactor(c: float, d: int) -> float:
    return unit_ball_volume(2 * d) / (TWO_PI * math.sqrt(c)) ** d


def volume_closed_form_schrodinger(s: float, c: float, d: int, lam: float) -> float:
    """Exact volume of {(1 + c|x|^2 + (2 pi|omega|)^2)^(-s/2) > lam}: a scaled 2d-ball."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    if lam >= 1.0:
        return 0.0
    return _schrodinger_prefactor(c, d) * math.expm1(-2.0 / s * math.log(lam)) ** d


def _schrodinger_array(s, c, d, lam):
    out = np.zeros_like(lam)
    m = lam < 1.0
    out[m] = _schrodinger_prefactor(c, d) * np.expm1(-2.0 / s * np.log(lam[m])) ** d
    return out


def volume_closed_form_power_law(sym: SymbolDescriptor, lam: float) -> float:
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    if lam >= sym.sup_value:
        return 0.0
    return power_law_coefficient(sym) * (lam / sym.sup_value) ** (-sym.alpha)


def _power_law_array(sym, lam):
    out = np.zeros_like(lam)
    m = lam < sym.sup_value
    out[m] = power_law_coefficient(sym) * (lam[m] / sym.sup_value) ** (-sym.alpha)
    return out


def volume_weighted_semi_analytic(
    s: float, r: float, c: float, d: int, lam: float, rel_tol: float = DEFAULT_REL_TOL
) -> float:
    """Weighted Sobolev volume via the exact polar reduction to one quadrature.

    With u = |x'|^d and v = |omega'|^d the 2d-dimensional indicator integral
    becomes (omega_d^2/(2 pi sqrt c)^d) * int_0^{v_lam} h(v) dv, where h(v)
    is the admissible u-length at fixed v.  The v-integral is done in
    log(v) beyond v = 1 because its range grows like lam^(-d/r).
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    if lam >= 1.0:
        return 0.0
    log_inv = -math.log(lam)
    v_max = math.expm1(2.0 / r * log_inv) ** (d / 2.0)
    if v_max <= 0.0:
        return 0.0

    def h_of_logv(y):
        # v^(2/d) = exp(2y/d); the bracket is lam^(-2/s)(1+v^(2/d))^(-r/s) - 1.
        inner = np.expm1(2.0 / s * log_inv - r / s * np.log1p(np.exp(2.0 * y / d)))
        return np.maximum(inner, 0.0) ** (d / 2.0)

    def h(v):
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore"):
            y = np.log(v)
        return h_of_logv(y)

    prefactor = unit_ball_volume(d) ** 2 / (TWO_PI * math.sqrt(c)) ** d
    if v_max <= 1.0:
        total = integrate_adaptive(h, 0.0, v_max, rel_tol=rel_tol).value
    else:
        head = integrate_adaptive(h, 0.0, 1.0, rel_tol=rel_tol).value
        tail = integrate_adaptive(
            lambda y: h_of_logv(y) * np.exp(y), 0.0, math.log(v_max), rel_tol=rel_tol
        ).value
        total = head + tail
    return prefactor * total


def envelope_ball(sym: SymbolDescriptor, lam: float) -> BallSampler | None:
    """Ball in R^{2d} containing {sigma > lam}, or None when the set is empty."""
    if sym.envelope is None:
        raise ConfigurationError(f"{sym.kind.value} symbol has no sampling envelope")
    radius = sym.envelope.radius(lam)
    if radius <= 0.0:
        return None
    return BallSampler(2 * sym.d, radius)


def volume_monte_carlo(sym: SymbolDescriptor, lam: float, n: int, seed: int) -> MCEstimate:
    """Unbiased estimate of V(lam) by uniform sampling in the envelope ball."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    if lam >= sym.sup_value:
        return MCEstimate(0.0, 0.0, int(n), int(seed))
    ball = envelope_ball(sym, lam)
    if ball is None:
        return MCEstimate(0.0, 0.0, int(n), int(seed))
    return mc_estimate(lambda z: (sym.evaluate_many(z) > lam).astype(float), ball, n, seed)


def phase_space_mc(
    sym: SymbolDescriptor,
    g: Callable[[np.ndarray], np.ndarray],
    level: float,
    n: int,
    seed: int,
) -> MCEstimate:
    """Monte Carlo estimate of the phase-space integral of g(sigma).

    ``g`` must vanish wherever sigma <= level, so the envelope ball at
    ``level`` covers its support.
    """
    if level >= sym.sup_value:
        return MCEstimate(0.0, 0.0, int(n), int(seed))
    ball = envelope_ball(sym, level)
    if ball is None:
        return MCEstimate(0.0, 0.0, int(n), int(seed))
    return mc_estimate(lambda z: g(sym.evaluate_many(z)), ball, n, seed)


def phase_space_integral(
    sym: SymbolDescriptor,
    g: Callable[[np.ndarray], np.ndarray],
    level: float,
    rel_tol: float = DEFAULT_REL_TOL,
    mc_config: MCConfig | None = None,
) -> tuple[float, float]:
    """Integral of g(sigma(x, omega)) over R^{2d}, straight from the symbol.

    ``g`` maps symbol values to integrand values and must vanish for
    sigma <= level.  Built-in families use their radial (or product-radial)
    structure; custom symbols fall back to Monte Carlo.  Returns
    ``(value, error_estimate)``.
    """
    if level >= sym.sup_value:
        return 0.0, 0.0
    d = sym.d
    if sym.kind is SymbolKind.SCHRODINGER_INVERSE:
        rmax = math.sqrt(math.expm1(-2.0 / sym.s * math.log(level)))
        sphere = 2 * d * unit_ball_volume(2 * d)

        def radial(rho):
            rho = np.asarray(rho, dtype=float)
            return g((1.0 + rho * rho) ** (-sym.s / 2.0)) * rho ** (2 * d - 1)

        res = integrate_adaptive(radial, 0.0, rmax, rel_tol=rel_tol, breakpoints=[1.0])
        scale = sphere / (TWO_PI * math.sqrt(sym.c)) ** d
        return scale * res.value, scale * res.error_estimate
    if sym.kind is SymbolKind.POWER_LAW_RADIAL:
        beta = 2.0 * d / sym.alpha
        rmax = sym.length * (level / sym.sup_value) ** (-1.0 / beta)
        sphere = 2 * d * unit_ball_volume(2 * d)

        def radial(rho):
            rho = np.asarray(rho, dtype=float)
            with np.errstate(divide="ignore"):
                sig = sym.sup_value * np.minimum(1.0, (rho / sym.length) ** (-beta))
            return g(sig) * rho ** (2 * d - 1)

        res = integrate_adaptive(radial, 0.0, rmax, rel_tol=rel_tol, breakpoints=[sym.length])
        return sphere * res.value, sphere * res.error_estimate
    if sym.kind is SymbolKind.WEIGHTED_SOBOLEV_INVERSE:
        s, r = sym.s, sym.r
        sphere = d * unit_ball_volume(d)
        vmax = math.sqrt(math.expm1(-2.0 / r * math.log(level)))
        inner_tol = rel_tol / 10.0

        def inner(v: float) -> float:
            wv = (1.0 + v * v) ** (-r / 2.0)
            umax2 = math.expm1(-2.0 / s * math.log(level / wv)) if wv > level else 0.0
            if umax2 <= 0.0:
                return 0.0
            f = lambda u: g((1.0 + u * u) ** (-s / 2.0) * wv) * u ** (d - 1)
            bps = [1.0] if umax2 > 1.0 else None
            return integrate_adaptive(
                f, 0.0, math.sqrt(umax2), rel_tol=inner_tol, breakpoints=bps
            ).value * v ** (d - 1)

        res = integrate_adaptive(inner, 0.0, vmax, rel_tol=rel_tol, breakpoints=[1.0])
        scale = sphere**2 / (TWO_PI * math.sqrt(sym.c)) ** d
        # Inner solves run at a tenth of the outer tolerance.
        return scale * res.value, scale * (res.error_estimate + inner_tol * abs(res.value))
    cfg = mc_config or MCConfig()
    est = phase_space_mc(sym, g, level, cfg.samples, cfg.seed)
    return est.mean, est.std_error


def rv_index_estimate(V: VolumeFunction | Callable[[float], float], lambda_grid: Sequence[float]) -> float:
    """Least-squares slope of ln V against ln(1/lam): the regular-variation index."""
    lam = np.asarray(lambda_grid, dtype=float)
    if lam.size < 3:
        raise ValueError("rv_index_estimate needs at least 3 grid points")
    if np.any(lam <= 0) or np.any(np.diff(lam) >= 0):
        raise ValueError("lambda grid must be strictly decreasing and positive")
    if lam[0] / lam[-1] < 100.0:
        raise ValueError("lambda grid must span at least two decades")
    vals = np.array([float(V(float(t))) for t in lam])
    if np.any(vals <= 0):
        bad = lam[vals <= 0][0]
        raise DomainError(f"volume vanishes at lambda={bad!r}; index undefined")
    slope, _ = np.polyfit(np.log(1.0 / lam), np.log(vals), 1)
    return float(slope)
