"""Roots of the generalized Lundberg equation ``(lam + delta - c s)**n = lam**n p(s)``.

With ``p(s) = q_num(s) / q_den(s)`` the equation is cleared of denominators
into the polynomial ``L(s) = (lam + delta - c s)**n q_den(s) - lam**n q_num(s)``
of degree ``n + m``.  Every exponential basis used by the barrier solvers is
built from its roots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import NumericalError, ValidationError
from .expopoly import find_roots
from .model import IncomeCondition, ModelSpec, gain_lt, income_condition

RESIDUAL_TOL = 1e-9


def characteristic(spec: ModelSpec, delta: float | None = None) -> np.ndarray:
    """Ascending real coefficients of ``L(s)``."""
    delta = spec.delta if delta is None else delta
    if delta < 0:
        raise ValidationError("delta must be nonnegative")
    lt = gain_lt(spec.gains)
    q_num, q_den = lt.numerator.real, lt.denominator.real
    left = P.polymul(P.polypow([spec.lam + delta, -spec.c], spec.n), q_den)
    return P.polysub(left, spec.lam**spec.n * q_num)


def relative_residual(coeffs: np.ndarray, s: complex) -> float:
    """``|L(s)|`` measured against the size of its individual terms."""
    mags = np.abs(coeffs) * np.abs(s) ** np.arange(len(coeffs))
    scale = float(np.sum(mags))
    return abs(P.polyval(s, coeffs)) / scale if scale > 0 else 0.0


@dataclass(frozen=True)
class LundbergRootSet:
    roots: tuple[tuple[complex, int], ...]
    delta: float
    degree: int
    residual: float
    coeffs: np.ndarray = field(repr=False, compare=False)

    @property
    def counts(self) -> tuple[int, int, int]:
        """Multiplicity-weighted numbers of (positive, negative, null) real parts."""
        pos = sum(k for r, k in self.roots if r != 0 and r.real > 0)
        neg = sum(k for r, k in self.roots if r != 0 and r.real < 0)
        null = sum(k for r, k in self.roots if r == 0)
        return pos, neg, null

    def positive(self) -> list[complex]:
        out = []
        for r, k in self.roots:
            if r != 0 and r.real > 0:
                out.extend([r] * k)
        return out

    def negative(self) -> list[complex]:
        out = []
        for r, k in self.roots:
            if r != 0 and r.real < 0:
                out.extend([r] * k)
        return out

    @property
    def null_multiplicity(self) -> int:
        return self.counts[2]

    def flat(self) -> list[complex]:
        out = []
        for r, k in self.roots:
            out.extend([r] * k)
        return out


def _pair_conjugates(roots: list[tuple[complex, int]]) -> list[tuple[complex, int]]:
    # real-coefficient polynomial: make conjugate partners exact mirrors
    upper = [(r, k) for r, k in roots if r.imag > 0]
    lower = [(r, k) for r, k in roots if r.imag < 0]
    real = [(complex(r.real, 0.0), k) for r, k in roots if r.imag == 0]
    if len(upper) != len(lower):
        raise NumericalError("complex Lundberg roots do not come in conjugate pairs")
    paired = []
    remaining = list(lower)
    for r, k in upper:
        j = min(range(len(remaining)), key=lambda i: abs(remaining[i][0] - r.conjugate()))
        paired.append((r, k))
        paired.append((r.conjugate(), k))
        remaining.pop(j)
    out = real + paired
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


def solve(spec: ModelSpec, delta: float | None = None) -> LundbergRootSet:
    """All ``n + m`` roots of ``L`` with multiplicities.

    At ``delta = 0`` the null root is known analytically; it is removed by exact
    deflation (twice on the income boundary, where it is double) before the
    remaining roots are computed.
    """
    delta = spec.delta if delta is None else float(delta)
    coeffs = characteristic(spec, delta)
    degree = len(coeffs) - 1
    work = coeffs.astype(float)
    null = 0
    if delta == 0.0:
        null = 2 if income_condition(spec) is IncomeCondition.BOUNDARY else 1
        for _ in range(null):
            work = work[1:]  # drop the constant term and divide by s
        coeffs = coeffs.copy()
        coeffs[:null] = 0.0  # these vanish analytically; only roundoff remains
    found = find_roots(work) if len(work) > 1 else []
    roots = _pair_conjugates([(complex(r), k) for r, k in found])
    if null:
        roots = [(0j, null)] + roots
        roots.sort(key=lambda t: (t[0].real, t[0].imag))
    total = sum(k for _, k in roots)
    if total != degree:
        raise NumericalError(f"found {total} roots for a degree-{degree} Lundberg polynomial")
    residual = 0.0
    for r, k in roots:
        d = coeffs
        for _ in range(k):
            residual = max(residual, relative_residual(d, r))
            d = P.polyder(d)
    if residual > RESIDUAL_TOL:
        raise NumericalError(f"Lundberg root residual {residual:.3g} exceeds {RESIDUAL_TOL}")
    return LundbergRootSet(tuple(roots), delta, degree, residual, coeffs)


def expected_counts(spec: ModelSpec, delta: float | None = None) -> tuple[int, int, int]:
    """Root counts implied by the income condition (at delta = 0) or by delta > 0."""
    delta = spec.delta if delta is None else delta
    m = len(gain_lt(spec.gains).denominator) - 1
    n = spec.n
    if delta > 0:
        return n, m, 0
    cond = income_condition(spec)
    if cond is IncomeCondition.SATISFIED:
        return n, m - 1, 1
    if cond is IncomeCondition.VIOLATED:
        return n - 1, m, 1
    return n - 1, m - 1, 2
