"""Numerical kernel: adaptive quadrature, bracketed roots, Monte Carlo, Gamma.

Everything here is pure given its inputs.  Integrands may be written either
for scalars or for numpy arrays; the quadrature tries the array call first
and falls back to element-wise evaluation.
"""

from __future__ import annotations

import heapq
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Protocol, Sequence

import numpy as np

from .errors import BracketError, ConvergenceError

DEFAULT_REL_TOL = 1e-9
DEFAULT_ROOT_TOL = 1e-10
ABS_FLOOR = 1e-14

# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (non-negative half).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-point node set, ordered left to right, and matching weights.
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
_KRONROD_W = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
_GAUSS_W = np.zeros(15)
_GAUSS_W[[1, 3, 5]] = _WG[:3]
_GAUSS_W[7] = _WG[3]
_GAUSS_W[[9, 11, 13]] = _WG[2::-1]


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    subdivisions: int


@dataclass(frozen=True)
class RootResult:
    root: float
    residual: float
    bracket_lo: float
    bracket_hi: float
    iterations: int


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int


def _vectorized(f: Callable) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap ``f`` so it maps a 1-D array to a float array of the same shape."""
    state = {"array_ok": True}

    def call(x: np.ndarray) -> np.ndarray:
        if state["array_ok"]:
            try:
                y = np.asarray(f(x), dtype=float)
                if y.shape == x.shape:
                    return y
                if y.ndim == 0:
                    return np.full(x.shape, float(y))
            except (TypeError, ValueError):
                pass
            state["array_ok"] = False
        return np.fromiter((float(f(float(t))) for t in x), dtype=float, count=x.size)

    return call


def _gk15(fv: Callable[[np.ndarray], np.ndarray], a: float, b: float):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    y = fv(mid + half * _NODES)
    if not np.all(np.isfinite(y)):
        raise ValueError(f"integrand is not finite on [{a!r}, {b!r}]")
    kronrod = half * float(np.dot(_KRONROD_W, y))
    gauss = half * float(np.dot(_GAUSS_W, y))
    resabs = abs(half) * float(np.dot(_KRONROD_W, np.abs(y)))
    return kronrod, abs(kronrod - gauss), resabs


def _initial_panels(a: float, b: float, breakpoints: Iterable[float] | None) -> list[float]:
    pts = {a, b}
    if breakpoints is not None:
        pts.update(float(p) for p in breakpoints if a < p < b)
    edges = sorted(pts)
    out = [edges[0]]
    for lo, hi in zip(edges[:-1], edges[1:]):
        # Geometric pre-refinement toward a small positive lower end; the
        # integrands here blow up like a power of 1/lambda near zero.
        if lo > 0.0 and hi / lo > 4.0:
            m = int(math.ceil(math.log(hi / lo) / math.log(4.0)))
            out.extend(lo * (hi / lo) ** (k / m) for k in range(1, m))
        out.append(hi)
    return out


def integrate_adaptive(
    f: Callable,
    a: float,
    b: float,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = ABS_FLOOR,
    max_subdivisions: int = 4000,
    breakpoints: Iterable[float] | None = None,
) -> QuadratureResult:
    """Globally adaptive Gauss-Kronrod (7/15) integration of ``f`` over [a, b].

    The panel with the largest error estimate is bisected until the summed
    estimate drops below ``max(rel_tol*|value|, abs_tol)``.  Endpoint
    singularities are resolved by repeated bisection toward the endpoint
    since the rule never samples the endpoints themselves.  Known interior
    discontinuities should be passed as ``breakpoints``.
    """
    a = float(a)
    b = float(b)
    if not a < b:
        raise ValueError(f"integrate_adaptive requires a < b, got [{a!r}, {b!r}]")
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    fv = _vectorized(f)
    edges = _initial_panels(a, b, breakpoints)
    heap: list[tuple[float, float, float, float, float]] = []
    total = 0.0
    total_err = 0.0
    total_abs = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err, rabs = _gk15(fv, lo, hi)
        heapq.heappush(heap, (-err, lo, hi, val, rabs))
        total += val
        total_err += err
        total_abs += rabs
    eps = np.finfo(float).eps

    def target() -> float:
        return max(rel_tol * abs(total), abs_tol, 50.0 * eps * total_abs)

    while total_err > target():
        if len(heap) >= max_subdivisions:
            raise ConvergenceError(
                f"quadrature on [{a!r}, {b!r}] did not converge in {max_subdivisions} panels",
                partial=QuadratureResult(total, total_err, len(heap)),
            )
        neg_err, lo, hi, val, rabs = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            # Panel cannot be split further in floating point.
            raise ConvergenceError(
                f"quadrature panel collapsed at {lo!r}",
                partial=QuadratureResult(total, total_err, len(heap) + 1),
            )
        v1, e1, r1 = _gk15(fv, lo, mid)
        v2, e2, r2 = _gk15(fv, mid, hi)
        heapq.heappush(heap, (-e1, lo, mid, v1, r1))
        heapq.heappush(heap, (-e2, mid, hi, v2, r2))
        total += v1 + v2 - val
        total_err += e1 + e2 + neg_err
        total_abs += r1 + r2 - rabs
        # Re-sum occasionally so the running totals do not drift.
        if len(heap) % 64 == 0:
            total = math.fsum(item[3] for item in heap)
            total_err = math.fsum(-item[0] for item in heap)
    total = math.fsum(item[3] for item in heap)
    total_err = math.fsum(-item[0] for item in heap)
    return QuadratureResult(total, max(total_err, 0.0), len(heap))


def integrate_to_cutoff(
    f: Callable,
    a: float,
    cutoff: float,
    rel_tol: float = DEFAULT_REL_TOL,
    **kwargs,
) -> QuadratureResult:
    """Integrate ``f`` over [a, cutoff], where ``f`` vanishes beyond ``cutoff``.

    Returns an exact zero when ``a >= cutoff``.
    """
    if a >= cutoff:
        return QuadratureResult(0.0, 0.0, 1)
    return integrate_adaptive(f, a, cutoff, rel_tol=rel_tol, **kwargs)


def find_root_bracketed(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = DEFAULT_ROOT_TOL,
    max_iter: int = 500,
) -> RootResult:
    """Hybrid false-position / bisection root finder.

    Uses the Illinois variant of regula falsi and falls back to bisection
    whenever a step fails to halve the bracket, so the bracket shrinks
    geometrically.  Stops when ``|g(root)| <= tol`` or the bracket width
    drops to ``tol * max(1, |root|)``.
    """
    lo = float(lo)
    hi = float(hi)
    if not lo < hi:
        raise ValueError(f"invalid bracket [{lo!r}, {hi!r}]")
    glo = float(g(lo))
    ghi = float(g(hi))
    if abs(glo) <= tol:
        return RootResult(lo, glo, lo, lo, 0)
    if abs(ghi) <= tol:
        return RootResult(hi, ghi, hi, hi, 0)
    if glo * ghi > 0:
        raise BracketError(f"no sign change on [{lo!r}, {hi!r}]: g(lo)={glo!r}, g(hi)={ghi!r}")

    last = None
    prev_width = hi - lo
    x, gx = lo, glo
    for it in range(1, max_iter + 1):
        width = hi - lo
        x = (lo * ghi - hi * glo) / (ghi - glo)
        if not lo < x < hi or width > 0.5 * prev_width:
            x = 0.5 * (lo + hi)
            last = None
        prev_width = width
        gx = float(g(x))
        if abs(gx) <= tol:
            return RootResult(x, gx, lo, hi, it)
        if (gx > 0) == (glo > 0):
            lo, glo = x, gx
            if last == "lo":
                ghi *= 0.5
            last = "lo"
        else:
            hi, ghi = x, gx
            if last == "hi":
                glo *= 0.5
            last = "hi"
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, abs(x)) or not lo < mid < hi:
            return RootResult(x, gx, lo, hi, it)
    raise ConvergenceError(
        f"root finder did not converge in {max_iter} iterations",
        partial=RootResult(x, gx, lo, hi, max_iter),
    )


_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def log_gamma(x: float) -> float:
    """Natural log of Euler's Gamma function for positive real ``x``.

    Lanczos approximation (g=7, 9 terms); arguments below 1/2 are shifted up
    by one with the recurrence.
    """
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise ValueError(f"log_gamma requires x > 0, got {x!r}")
    if x < 0.5:
        return log_gamma(x + 1.0) - math.log(x)
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(acc)


def unit_ball_volume(d: int) -> float:
    """Lebesgue measure of the unit ball in R^d."""
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    return math.exp(0.5 * d * math.log(math.pi) - log_gamma(0.5 * d + 1.0))


class RegionSampler(Protocol):
    """Uniform sampler over a region of known volume."""

    dim: int
    volume: float

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray: ...


@dataclass(frozen=True)
class BoxSampler:
    lo: Sequence[float]
    hi: Sequence[float]

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.hi, self.lo)))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        return lo + (hi - lo) * rng.random((n, lo.size))


@dataclass(frozen=True)
class BallSampler:
    dim: int
    radius: float

    @property
    def volume(self) -> float:
        return unit_ball_volume(self.dim) * self.radius**self.dim

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        g = rng.standard_normal((n, self.dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        rad = self.radius * rng.random(n) ** (1.0 / self.dim)
        return g * rad[:, None]


MC_BLOCK = 1 << 16


def substream(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for block ``index`` of stream ``seed``."""
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def _pool_size() -> int:
    env = os.environ.get("PHASEVOL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def mc_estimate(
    integrand: Callable[[np.ndarray], np.ndarray],
    sampler: RegionSampler,
    n: int,
    seed: int,
    workers: int | None = None,
) -> MCEstimate:
    """Monte Carlo estimate of the integral of ``integrand`` over ``sampler``'s region.

    Samples are drawn in fixed-size blocks, each from its own substream, and
    block statistics are merged in block order, so the result depends only
    on ``(seed, n)`` and not on how many workers ran.
    """
    if n < 2:
        raise ValueError(f"mc_estimate needs at least 2 samples, got {n}")
    vol = float(sampler.volume)
    sizes = [MC_BLOCK] * (n // MC_BLOCK)
    if n % MC_BLOCK:
        sizes.append(n % MC_BLOCK)

    def block(i: int):
        pts = sampler.sample(substream(seed, i), sizes[i])
        y = vol * np.asarray(integrand(pts), dtype=float)
        m = float(y.mean())
        return y.size, m, float(np.sum((y - m) ** 2))

    workers = workers or _pool_size()
    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(block, range(len(sizes))))
    else:
        stats = [block(i) for i in range(len(sizes))]

    # Chan et al. pairwise merge, in block order.
    count, mean, m2 = stats[0]
    for nb, mb, m2b in stats[1:]:
        tot = count + nb
        delta = mb - mean
        mean += delta * nb / tot
        m2 += m2b + delta * delta * count * nb / tot
        count = tot
    var = m2 / (count - 1)
    return MCEstimate(mean, math.sqrt(var / count), count, int(seed))
