"""Solvers for the barrier problem shared by the dividend quantities.

For a surplus started at ``u`` in ``[0, b]`` every barrier quantity ``f``
satisfies

    ((1 + delta/lam) I + (c/lam) D)**n f(u) = int_0^{b-u} f(u+y) p(y) dy + T(b-u),
    f^(i)(0) = 0,  i < n,

where ``T(z)`` is the expected payoff of a gain that jumps over the barrier
from distance ``z``.  ``T`` is an exponential polynomial in ``z`` whose rates are
the gain rates.  Two independent solution methods are provided.

* :class:`AnnihilatorSolver` expands ``f`` over ``u**j exp(-r u)`` for all
  Lundberg roots ``r`` and matches the gain-rate coefficients of the
  remaining boundary term against ``T``.
* :class:`TransformSolver` works with ``g(z) = f(b - z)``, whose Laplace
  transform in ``z`` is rational with the ``n`` unknown values
  ``g^(j)(0)``; these are fixed by ``g^(i)(b) = 0``.

Both return the solution as an :class:`ExpoPolynomial` in ``u`` whose terms
stay bounded on ``[0, b]``.
"""

from __future__ import annotations

import cmath
import math
from functools import lru_cache

import numpy as np
import scipy.linalg
from numpy.polynomial import polynomial as P

from . import lundberg
from .errors import NumericalError, RepresentationError, ValidationError
from .expopoly import RATE_MERGE_TOL, ExpoPolynomial, correlate, partial_fractions
from .model import ModelSpec, gain_lt, gain_poles

COND_LIMIT = 1e12


def _equilibrate(mat: np.ndarray):
    rows = np.max(np.abs(mat), axis=1)
    rows[rows == 0] = 1.0
    scaled = mat / rows[:, None]
    cols = np.max(np.abs(scaled), axis=0)
    cols[cols == 0] = 1.0
    return scaled / cols[None, :], rows, cols


class _Factorized:
    """Equilibrated LU factorization with a condition-number guard."""

    def __init__(self, mat: np.ndarray, what: str):
        scaled, self.rows, self.cols = _equilibrate(mat)
        cond = np.linalg.cond(scaled)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise NumericalError(f"{what}: boundary system is singular or ill-conditioned (cond {cond:.3g})")
        self.cond = float(cond)
        self.lu = scipy.linalg.lu_factor(scaled)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        y = scipy.linalg.lu_solve(self.lu, rhs / self.rows)
        return y / self.cols


def gain_keys(spec: ModelSpec) -> list[tuple[float, int]]:
    """``(rate, power)`` pairs spanned by tails of the gain density."""
    return [(r, q) for r, k in gain_poles(spec.gains) for q in range(k)]


def key_coefficients(f: ExpoPolynomial, keys: list[tuple[float, int]]) -> np.ndarray:
    """Coefficients of ``f`` on ``z**q exp(-rate z)`` for each key; anything else is an error."""
    out = np.zeros(len(keys), dtype=complex)
    scale = max((abs(c) for c, _, _ in f.terms), default=0.0)
    for c, p, r in f.terms:
        for idx, (beta, q) in enumerate(keys):
            if q == p and abs(r - beta) <= RATE_MERGE_TOL * max(1.0, abs(beta)):
                out[idx] += c
                break
        else:
            if abs(c) > 1e-12 * scale:
                raise RepresentationError(f"term u^{p} e^(-{r} u) is outside the gain-rate family")
    return out


def _check_b(b: float) -> float:
    b = float(b)
    if not (math.isfinite(b) and b >= 0):
        raise ValidationError("barrier must be finite and nonnegative")
    return b


class AnnihilatorSolver:
    """Exponential-sum solution over all ``n + m`` Lundberg roots."""

    def __init__(self, spec: ModelSpec, delta: float, b: float):
        self.spec, self.delta, self.b = spec, float(delta), _check_b(b)
        self.roots = lundberg.solve(spec, self.delta)
        self.keys = gain_keys(spec)
        n = spec.n
        pscale = max(self.b, 1.0)
        basis = []
        for r, k in self.roots.roots:
            for j in range(k):
                # growing exponentials are pinned to 1 at u = b
                log_amp = r * self.b if r.real < 0 else 0.0
                basis.append(ExpoPolynomial([(cmath.exp(log_amp) / pscale**j, j, r)]))
        self.basis = basis
        size = len(basis)
        if size != n + len(self.keys):
            raise NumericalError("Lundberg root count does not match the number of conditions")
        p_expo = spec.gains.as_expo()
        mat = np.zeros((size, size), dtype=complex)
        for col, e in enumerate(basis):
            for i in range(n):
                mat[i, col] = complex(e.derivative(i).evaluate_complex(0.0))
            tail = correlate(e.shift(self.b), p_expo, formal=True)
            mat[n:, col] = key_coefficients(tail, self.keys)
        self.matrix = mat
        self._lu = _Factorized(mat, "annihilator method") if self.b > 0 else None

    def solve(self, tail: ExpoPolynomial) -> ExpoPolynomial:
        if self.b == 0:
            return ExpoPolynomial()
        rhs = np.concatenate([np.zeros(self.spec.n, dtype=complex), key_coefficients(tail, self.keys)])
        coef = self._lu.solve(rhs)
        return sum((a * e for a, e in zip(coef, self.basis)), ExpoPolynomial())


def _falling(l: int, t: int) -> float:
    return math.perm(l, t)


def _d_monomial_exp(l: int, r: complex, i: int, z: float) -> complex:
    """``D^i [z**l exp(r z)]`` at ``z`` without the ``exp(r z)`` factor."""
    total = 0j
    for t in range(min(i, l) + 1):
        total += math.comb(i, t) * _falling(l, t) * z ** (l - t) * r ** (i - t)
    return total


def _erlang_operator_polys(spec: ModelSpec, delta: float) -> list[np.ndarray]:
    """``A_j(s)``: polynomials multiplying the unknown initial values ``g^(j)(0)``."""
    n, lam, c = spec.n, spec.lam, spec.c
    out = []
    for j in range(n):
        coeffs = np.zeros(n, dtype=float)
        for i in range(j + 1, n + 1):
            coeffs[i - 1 - j] += math.comb(n, i) * (lam + delta) ** (n - i) * (-c) ** i
        out.append(coeffs)
    return out


class TransformSolver:
    """Laplace-transform method in ``z = b - u`` with unknown initial values."""

    def __init__(self, spec: ModelSpec, delta: float, b: float):
        self.spec, self.delta, self.b = spec, float(delta), _check_b(b)
        self.roots = lundberg.solve(spec, self.delta)
        self.lead = complex(self.roots.coeffs[-1])
        self.q_den = gain_lt(spec.gains).denominator
        self.key_list = [(r, l) for r, k in self.roots.roots for l in range(k)]
        self.growing = [idx for idx, (r, _) in enumerate(self.key_list) if r.real > 0]
        # inverse transforms of q_den * A_j / L, one coefficient vector per unknown
        self.unknown_tables = [
            self._flatten(partial_fractions(P.polymul(self.q_den, a), self.lead, self.roots.roots))
            for a in _erlang_operator_polys(spec, self.delta)
        ]
        n, g = spec.n, len(self.growing)
        size = n + g
        mat = np.zeros((size, size), dtype=complex)
        # rows 0..g-1: amplitude of each growing key at z = b
        for row, idx in enumerate(self.growing):
            r, _ = self.key_list[idx]
            for j in range(n):
                mat[row, j] = self.unknown_tables[j][idx]
            mat[row, n + row] = -cmath.exp(-r * self.b)
        # rows g..g+n-1: g^(i)(b) = 0
        for i in range(n):
            row = g + i
            for idx, (r, l) in enumerate(self.key_list):
                if idx in self.growing:
                    continue
                w = _d_monomial_exp(l, r, i, self.b) * cmath.exp(r * self.b)
                for j in range(n):
                    mat[row, j] += self.unknown_tables[j][idx] * w
            for col, idx in enumerate(self.growing):
                r, l = self.key_list[idx]
                mat[row, n + col] = _d_monomial_exp(l, r, i, self.b)
        self.matrix = mat
        self._lu = _Factorized(mat, "transform method") if self.b > 0 else None

    @staticmethod
    def _flatten(tables: list[np.ndarray]) -> np.ndarray:
        return np.concatenate(tables)

    def tail_table(self, tail: ExpoPolynomial) -> np.ndarray:
        """Inverse transform coefficients of ``lam**n T(s) q_den(s) / L(s)``."""
        poly = np.zeros(1, dtype=complex)
        for c, q, beta in tail.terms:
            if beta == 0:
                raise RepresentationError("payoff tail must decay")
            den = P.polypow([beta, 1.0], q + 1)
            quot, rem = P.polydiv(self.q_den.astype(complex), den)
            if np.max(np.abs(rem)) > 1e-9 * max(1.0, np.max(np.abs(self.q_den))):
                raise RepresentationError(f"payoff tail has a pole at {-beta} outside the gain transform")
            poly = P.polyadd(poly, c * math.factorial(q) * quot)
        poly = poly * self.spec.lam**self.spec.n
        return self._flatten(partial_fractions(poly, self.lead, self.roots.roots))

    def solve(self, tail: ExpoPolynomial, return_initial: bool = False):
        if self.b == 0:
            return (ExpoPolynomial(), np.zeros(self.spec.n)) if return_initial else ExpoPolynomial()
        n = self.spec.n
        kt = self.tail_table(tail)
        rhs = np.zeros(n + len(self.growing), dtype=complex)
        for row, idx in enumerate(self.growing):
            rhs[row] = -kt[idx]
        for i in range(n):
            acc = 0j
            for idx, (r, l) in enumerate(self.key_list):
                if idx in self.growing:
                    continue
                acc += kt[idx] * _d_monomial_exp(l, r, i, self.b) * cmath.exp(r * self.b)
            rhs[len(self.growing) + i] = -acc
        sol = self._lu.solve(rhs)
        initial = sol[:n]
        amps = dict(zip(self.growing, sol[n:]))
        terms = []
        for idx, (r, l) in enumerate(self.key_list):
            if idx in amps:
                coef_u = amps[idx]
            else:
                coef = kt[idx] + sum(initial[j] * self.unknown_tables[j][idx] for j in range(n))
                coef_u = coef * cmath.exp(r * self.b)
            # (b - u)^l e^{-r u}
            for t in range(l + 1):
                terms.append((coef_u * math.comb(l, t) * self.b ** (l - t) * (-1) ** t, t, r))
        rep = ExpoPolynomial(terms)
        return (rep, initial) if return_initial else rep


@lru_cache(maxsize=256)
def annihilator_solver(spec: ModelSpec, delta: float, b: float) -> AnnihilatorSolver:
    return AnnihilatorSolver(spec, delta, b)


@lru_cache(maxsize=256)
def transform_solver(spec: ModelSpec, delta: float, b: float) -> TransformSolver:
    return TransformSolver(spec, delta, b)


def solver_spec(spec: ModelSpec) -> ModelSpec:
    """Cache key: the model parameters the solvers depend on."""
    return spec.with_(delta=0.0, barrier=None)


# payoff tails ---------------------------------------------------------------------
def overshoot_moment_tail(spec: ModelSpec, k: int) -> ExpoPolynomial:
    """``T(z) = int_0^inf t**k p(z + t) dt``."""
    return correlate(ExpoPolynomial.monomial(1.0, k, 0.0), spec.gains.as_expo())


def overshoot_cdf_tail(spec: ModelSpec, x: float) -> ExpoPolynomial:
    """``T(z) = P(z < X <= z + x)`` with ``X`` a gain."""
    sv = spec.gains.survival_expo()
    return sv - sv.shift(x)


def overshoot_survival_tail(spec: ModelSpec) -> ExpoPolynomial:
    return spec.gains.survival_expo()


def overshoot_density_tail(spec: ModelSpec, x: float) -> ExpoPolynomial:
    return spec.gains.as_expo().shift(x)


def barrier_integral(spec: ModelSpec, f: ExpoPolynomial, b: float) -> ExpoPolynomial:
    """``u -> int_0^(b-u) f(u + y) p(y) dy`` for ``u`` in ``[0, b]``."""
    p_expo = spec.gains.as_expo()
    whole = correlate(p_expo, f, formal=True)
    beyond = correlate(f.shift(b), p_expo, formal=True).reflect(b)
    return whole - beyond


def ide_sides(spec: ModelSpec, delta: float, b: float, f: ExpoPolynomial, tail: ExpoPolynomial):
    """Left and right sides of the barrier equation for ``f`` (both in ``u``)."""
    from .expopoly import apply_operator

    left = apply_operator(f, 1.0 + delta / spec.lam, spec.c / spec.lam, spec.n)
    right = barrier_integral(spec, f, b) + tail.reflect(b)
    return left, right
