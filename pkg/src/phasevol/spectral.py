"""Exact spectra, eigenvalue-counting functions and type-tau integrals.

The harmonic-oscillator family provides closed-form eigenvalues for the
inverse Schroedinger operator and serves as the spectral oracle for the
symbol-level formulas.  Sequences are materialized lazily, one level
(eigenvalue plus multiplicity) at a time.
"""

from __future__ import annotations

import bisect
import math
import threading
from itertools import count
from typing import Iterable, Iterator

import numpy as np

from .numerics import unit_ball_volume

TWO_PI = 2.0 * math.pi


class EigenvalueSequence:
    """Nonincreasing eigenvalues stored as (value, multiplicity) levels.

    ``generator`` yields further levels in strictly decreasing order and is
    consumed on demand.  Extension is serialized by a lock; the level lists
    are only ever appended to, so concurrent readers stay consistent.
    """

    def __init__(self, levels: Iterable[tuple[float, int]] = (), generator: Iterator[tuple[float, int]] | None = None):
        self._values: list[float] = []
        self._neg: list[float] = []
        self._mult: list[int] = []
        self._cum: list[int] = [0]
        self._gen = generator
        self._pending: tuple[float, int] | None = None
        self._lock = threading.Lock()
        for value, mult in levels:
            self._append(float(value), int(mult))

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "EigenvalueSequence":
        """Group a finite list of positive eigenvalues into levels."""
        vals = sorted((float(v) for v in values), reverse=True)
        if any(v <= 0 for v in vals):
            raise ValueError("eigenvalues must be positive")
        levels: list[list] = []
        for v in vals:
            if levels and levels[-1][0] == v:
                levels[-1][1] += 1
            else:
                levels.append([v, 1])
        return cls([(v, m) for v, m in levels])

    def _append(self, value: float, mult: int) -> None:
        if not value > 0:
            raise ValueError(f"eigenvalues must be positive, got {value!r}")
        if mult < 1:
            raise ValueError(f"multiplicity must be >= 1, got {mult!r}")
        if self._values and not value < self._values[-1]:
            raise ValueError("levels must be strictly decreasing")
        # _neg is appended last: readers bisect on it and index the others.
        self._values.append(value)
        self._mult.append(mult)
        self._cum.append(self._cum[-1] + mult)
        self._neg.append(-value)

    def _peek(self) -> tuple[float, int] | None:
        if self._pending is None and self._gen is not None:
            try:
                self._pending = next(self._gen)
            except StopIteration:
                self._gen = None
        return self._pending

    def extend_to(self, lam: float) -> None:
        """Materialize every level with eigenvalue >= lam."""
        if self._values and self._values[-1] < lam:
            return
        with self._lock:
            while True:
                nxt = self._peek()
                if nxt is None or nxt[0] < lam:
                    return
                self._pending = None
                self._append(float(nxt[0]), int(nxt[1]))

    @property
    def levels(self) -> list[tuple[float, int]]:
        return list(zip(self._values, self._mult))

    @property
    def floor(self) -> float:
        """Smallest eigenvalue materialized so far (inf when empty)."""
        return self._values[-1] if self._values else math.inf

    @property
    def largest(self) -> float:
        if not self._values:
            with self._lock:
                nxt = self._peek()
                if nxt is None:
                    return 0.0
                if not self._values:
                    self._pending = None
                    self._append(float(nxt[0]), int(nxt[1]))
        return self._values[0]

    @property
    def exhausted(self) -> bool:
        return self._peek() is None

    def arrays(self, lam: float) -> tuple[np.ndarray, np.ndarray]:
        """Values and multiplicities of all levels >= lam."""
        self.extend_to(lam)
        k = bisect.bisect_right(self._neg, -lam)
        return np.asarray(self._values[:k]), np.asarray(self._mult[:k], dtype=np.int64)

    def count_at_or_above(self, lam: float) -> int:
        self.extend_to(lam)
        return self._cum[bisect.bisect_right(self._neg, -lam)]

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        return f"EigenvalueSequence(levels={len(self._values)}, floor={self.floor!r}, lazy={self._gen is not None})"


def _harmonic_levels(s: float, c: float, d: int) -> Iterator[tuple[float, int]]:
    rc = math.sqrt(c)
    for k in count():
        value = (1.0 + rc * (2 * k + d)) ** (-s / 2.0)
        yield value, math.comb(k + d - 1, d - 1)


def harmonic_spectrum(s: float, c: float, d: int, floor: float) -> EigenvalueSequence:
    """Eigenvalues of (I + c|x|^2 - Laplacian)^(-s/2), materialized down to ``floor``.

    Level k has eigenvalue (1 + sqrt(c)(2k + d))^(-s/2) with multiplicity
    C(k+d-1, d-1), from the d-dimensional harmonic oscillator.  Further
    levels are produced lazily on request.
    """
    if s <= 0 or c <= 0:
        raise ValueError("s and c must be positive")
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    if not floor > 0:
        raise ValueError(f"floor must be positive, got {floor!r}")
    seq = EigenvalueSequence(generator=_harmonic_levels(s, c, int(d)))
    seq.extend_to(floor)
    return seq


def harmonic_base_levels(c: float, d: int) -> Iterator[tuple[float, int]]:
    """Increasing eigenvalues 1 + sqrt(c)(2k + d) of I + c|x|^2 - Laplacian."""
    rc = math.sqrt(c)
    for k in count():
        yield 1.0 + rc * (2 * k + d), math.comb(k + d - 1, d - 1)


def count_at_or_above(seq: EigenvalueSequence, lam: float) -> int:
    """M(lam) = #{n : lambda_n >= lam}, multiplicities included."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    return seq.count_at_or_above(lam)


def count_upward(base: Iterable, lam: float) -> int:
    """M_up(lam) = #{n : mu_n < lam} for a nondecreasing sequence ``base``.

    Items are plain values or (value, multiplicity) pairs.  Iteration stops
    at the first value >= lam, so infinite generators are fine.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    total = 0
    prev = -math.inf
    for item in base:
        value, mult = (item, 1) if np.ndim(item) == 0 else item
        if value < prev:
            raise ValueError("base eigenvalues must be nondecreasing")
        prev = value
        if value >= lam:
            break
        total += int(mult)
    return total


def upward_volume_harmonic(c: float, d: int, lam: float) -> float:
    """|{1 + c|x|^2 + (2 pi |omega|)^2 < lam}|, the sublevel volume of the base symbol."""
    if lam <= 1.0:
        return 0.0
    return unit_ball_volume(2 * d) * (lam - 1.0) ** d / (TWO_PI * math.sqrt(c)) ** d


def type_integral_exact(seq: EigenvalueSequence, tau: int, eps: float) -> float:
    """I_tau(eps) = int_eps^inf M(lam) lam^(-tau) dlam as an exact eigenvalue sum.

    I_1 = sum ln(lambda_n/eps)_+, and for tau >= 2
    I_tau = sum (eps^(1-tau) - lambda_n^(1-tau))_+ / (tau - 1).
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    if int(tau) != tau or tau < 1:
        raise ValueError(f"tau must be a positive integer, got {tau!r}")
    vals, mult = seq.arrays(eps)
    # Levels sitting exactly at eps contribute zero; drop them so rounding
    # in the power terms cannot leave a stray ulp.
    keep = vals > eps
    vals, mult = vals[keep], mult[keep]
    if vals.size == 0:
        return 0.0
    if tau == 1:
        terms = np.log(vals / eps)
    else:
        p = tau - 1
        terms = (eps ** (-p) - vals ** (-p)) / p
    return math.fsum(mult * terms)


def critical_sum(seq: EigenvalueSequence, eps: float) -> float:
    """2 I_3(eps) - I_2(eps)/eps, summed as sum (1/(eps lambda_n) - 1/lambda_n^2)_+."""
    vals, mult = seq.arrays(eps)
    keep = vals > eps
    vals, mult = vals[keep], mult[keep]
    if vals.size == 0:
        return 0.0
    return math.fsum(mult * (1.0 / (eps * vals) - 1.0 / vals**2))


def spectrum_rows(seq: EigenvalueSequence, floor: float) -> list[dict]:
    """Rows (k, eigenvalue, multiplicity, cumulative_count) down to ``floor``."""
    vals, mult = seq.arrays(floor)
    cum = np.cumsum(mult)
    return [
        {"k": k, "eigenvalue": float(v), "multiplicity": int(m), "cumulative_count": int(n)}
        for k, (v, m, n) in enumerate(zip(vals, mult, cum))
    ]

