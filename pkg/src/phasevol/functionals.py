"""Entropy, entropy numbers, critical radius and minimax risk.

Every functional accepts either a :class:`VolumeFunction` (symbol-level
route) or an :class:`EigenvalueSequence` (spectral route).  On the volume
route the type-tau integrals are quadratures of V(lam)/lam^tau up to the
symbol supremum; on the spectral route they are exact eigenvalue sums.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import BracketError
from .numerics import (
    DEFAULT_REL_TOL,
    DEFAULT_ROOT_TOL,
    find_root_bracketed,
    integrate_to_cutoff,
)
from .spectral import EigenvalueSequence, critical_sum, type_integral_exact
from .symbols import SymbolDescriptor
from .volume import MCConfig, VolumeFunction, phase_space_integral, phase_space_mc, volume_fn

Source = Union[VolumeFunction, EigenvalueSequence]

# The critical-radius equation is solved to 1e-10; its quadratures must be
# well below that.
SOLVER_REL_TOL = 1e-12


class EntropyRoute(str, enum.Enum):
    SYMBOL_LOG_INTEGRAL = "symbol_log_integral"
    VOLUME_INTEGRAL = "volume_integral"
    SPECTRAL_SUM = "spectral_sum"


class Route(str, enum.Enum):
    VOLUME = "volume"
    SPECTRAL = "spectral"
    CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class EntropyValue:
    eps: float
    value: float
    route: EntropyRoute
    error_estimate: float = 0.0


@dataclass(frozen=True)
class CriticalRadius:
    kappa: float
    eps_kappa: float
    residual: float
    route: Route


@dataclass(frozen=True)
class RiskValue:
    kappa: float
    value: float
    eps_kappa: float
    route: Route


class PowerLawClosedForms(NamedTuple):
    eps: float
    risk: float
    entropy_constant: float


def _as_source(source) -> Source:
    if isinstance(source, SymbolDescriptor):
        return volume_fn(source)
    if isinstance(source, (VolumeFunction, EigenvalueSequence)):
        return source
    raise TypeError(f"expected a VolumeFunction or EigenvalueSequence, got {type(source).__name__}")


def _cutoff(source: Source) -> float:
    if isinstance(source, VolumeFunction):
        return source.cutoff
    return source.largest


def _positive(name: str, value: float) -> float:
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return float(value)


def _log_plus(eps: float):
    return lambda sig: np.log(np.maximum(sig / eps, 1.0))


def _volume_moment(V: VolumeFunction, eps: float, tau: int, rel_tol: float) -> tuple[float, float]:
    """I_tau(eps) on the volume route as (value, error_estimate)."""
    if eps >= V.cutoff:
        return 0.0, 0.0
    if V.exact:
        res = integrate_to_cutoff(lambda lam: V(lam) / lam**tau, eps, V.cutoff, rel_tol=rel_tol)
        return res.value, res.error_estimate
    # Monte Carlo volumes are integrated at the sample level: by the
    # layer-cake identity I_tau is the phase-space integral of G(sigma) with
    # G(t) = int_eps^t lam^(-tau) dlam.
    if tau == 1:
        g = _log_plus(eps)
    else:
        p = tau - 1
        g = lambda sig: np.maximum(eps ** (-p) - sig ** (-p), 0.0) / p
    cfg = V.mc_config or MCConfig()
    est = phase_space_mc(V.symbol, g, eps, cfg.samples, cfg.seed)
    return est.mean, est.std_error


def entropy_log_integral(
    sym: SymbolDescriptor,
    eps: float,
    rel_tol: float = DEFAULT_REL_TOL,
    mc_config: MCConfig | None = None,
) -> EntropyValue:
    """Phase-space integral of ln_+(sigma/eps), evaluated directly on the symbol.

    This path integrates over (x, omega) using the symbol's radial
    structure and never forms V, so it is an independent check of
    :func:`entropy_from_volume`.
    """
    eps = _positive("eps", eps)
    if eps >= sym.sup_value:
        return EntropyValue(eps, 0.0, EntropyRoute.SYMBOL_LOG_INTEGRAL, 0.0)
    value, err = phase_space_integral(sym, _log_plus(eps), eps, rel_tol, mc_config)
    return EntropyValue(eps, value, EntropyRoute.SYMBOL_LOG_INTEGRAL, err)


def entropy_from_volume(V: VolumeFunction, eps: float, rel_tol: float = DEFAULT_REL_TOL) -> EntropyValue:
    """int_eps^sup V(lam)/lam dlam."""
    eps = _positive("eps", eps)
    value, err = _volume_moment(V, eps, 1, rel_tol)
    return EntropyValue(eps, value, EntropyRoute.VOLUME_INTEGRAL, err)


def entropy_from_spectrum(seq: EigenvalueSequence, eps: float) -> EntropyValue:
    """Exact type-1 sum: sum over eigenvalues of ln_+(lambda_n/eps)."""
    eps = _positive("eps", eps)
    return EntropyValue(eps, type_integral_exact(seq, 1, eps), EntropyRoute.SPECTRAL_SUM, 0.0)


def entropy(source, eps: float, rel_tol: float = DEFAULT_REL_TOL) -> EntropyValue:
    source = _as_source(source)
    if isinstance(source, EigenvalueSequence):
        return entropy_from_spectrum(source, eps)
    return entropy_from_volume(source, eps, rel_tol)


def _lower_bracket(g, hi: float) -> float:
    """Walk down from ``hi`` by decades until ``g`` turns positive."""
    x = hi - math.log(2.0)
    for _ in range(700):
        if g(x) > 0:
            return x
        x -= math.log(10.0)
        if x < math.log(1e-300):
            break
    raise BracketError("could not find a lower bracket: the defining function never turned positive")


def entropy_number(source, n: float, tol: float = DEFAULT_ROOT_TOL, rel_tol: float = SOLVER_REL_TOL) -> float:
    """e_n = inf{eps > 0 : H(eps) <= n}, the generalized inverse of the entropy."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n!r}")
    source = _as_source(source)
    top = _cutoff(source)
    if n == 0 or top <= 0:
        return top
    scale = max(1.0, float(n))

    def g(t: float) -> float:
        return (entropy(source, math.exp(t), rel_tol).value - n) / scale

    hi = math.log(top)
    lo = _lower_bracket(g, hi)
    res = find_root_bracketed(g, lo, hi, tol=tol)
    return math.exp(res.root)


def _critical_function(source: Source, eps: float, rel_tol: float) -> float:
    """2 I_3(eps) - I_2(eps)/eps for either route."""
    if isinstance(source, EigenvalueSequence):
        return critical_sum(source, eps)
    V = source
    if eps >= V.cutoff:
        return 0.0
    if V.exact:
        integrand = lambda lam: V(lam) * (2.0 / lam**3 - 1.0 / (eps * lam**2))
        return integrate_to_cutoff(integrand, eps, V.cutoff, rel_tol=rel_tol).value
    cfg = V.mc_config or MCConfig()
    g = lambda sig: np.maximum(1.0 / (eps * sig) - 1.0 / sig**2, 0.0)
    return phase_space_mc(V.symbol, g, eps, cfg.samples, cfg.seed).mean


def critical_function(source, eps: float, rel_tol: float = SOLVER_REL_TOL) -> float:
    """Left side of the critical-radius equation divided by kappa^2."""
    return _critical_function(_as_source(source), _positive("eps", eps), rel_tol)


def critical_radius(
    source,
    kappa: float,
    tol: float = DEFAULT_ROOT_TOL,
    rel_tol: float = SOLVER_REL_TOL,
) -> CriticalRadius:
    """Solve kappa^2 (2 I_3(eps) - I_2(eps)/eps) = 1 for eps in (0, sup).

    The left side decreases strictly from +inf to 0 on (0, sup), so the
    root is unique.  The solve runs in log(eps).
    """
    kappa = _positive("kappa", kappa)
    source = _as_source(source)
    route = Route.SPECTRAL if isinstance(source, EigenvalueSequence) else Route.VOLUME
    top = _cutoff(source)
    k2 = kappa * kappa

    def g(t: float) -> float:
        return k2 * _critical_function(source, math.exp(t), rel_tol) - 1.0

    hi = math.log(top)
    lo = _lower_bracket(g, hi)
    res = find_root_bracketed(g, lo, hi, tol=tol)
    return CriticalRadius(kappa, math.exp(res.root), res.residual, route)


def minimax_risk(
    source,
    kappa: float,
    tol: float = DEFAULT_ROOT_TOL,
    rel_tol: float = SOLVER_REL_TOL,
) -> RiskValue:
    """kappa^2 * eps_kappa * I_2(eps_kappa) at the solved critical radius."""
    source = _as_source(source)
    cr = critical_radius(source, kappa, tol, rel_tol)
    eps = cr.eps_kappa
    if isinstance(source, EigenvalueSequence):
        i2 = type_integral_exact(source, 2, eps)
    else:
        i2, _ = _volume_moment(source, eps, 2, rel_tol)
    return RiskValue(cr.kappa, cr.kappa**2 * eps * i2, eps, cr.route)


def power_law_closed_forms(c_frak: float, alpha: float, kappa: float) -> PowerLawClosedForms:
    """Leading-order (eps_kappa, risk, entropy constant) for V ~ c_frak * lam^(-alpha)."""
    c_frak = _positive("c_frak", c_frak)
    alpha = _positive("alpha", alpha)
    kappa = _positive("kappa", kappa)
    base = kappa**2 * c_frak * alpha / ((alpha + 1.0) * (alpha + 2.0))
    eps = base ** (1.0 / (alpha + 2.0))
    risk = (alpha + 2.0) / alpha * base ** (2.0 / (alpha + 2.0))
    return PowerLawClosedForms(eps, risk, c_frak / alpha)


def closed_form_risk(c_frak: float, alpha: float, kappa: float) -> RiskValue:
    forms = power_law_closed_forms(c_frak, alpha, kappa)
    return RiskValue(float(kappa), forms.risk, forms.eps, Route.CLOSED_FORM)
