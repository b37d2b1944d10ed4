"""Closed-form algebra for exponential polynomials and rational Laplace transforms.

An :class:`ExpoPolynomial` is a finite sum ``sum_i c_i * u**p_i * exp(-r_i * u)``
with complex coefficients and rates.  Every analytic quantity of the package
lives in this family, and the operations here (calculus, tail convolutions
against a density, Laplace transforms and their inversion) never leave it.

A :class:`RationalFunction` stores numerator and denominator as dense complex
coefficient arrays in ascending degree.
"""

from __future__ import annotations

import cmath
import math
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import NumericalError, RepresentationError, ValidationError

RATE_MERGE_TOL = 1e-8
ROOT_CLUSTER_TOL = 1e-6
PRUNE_TOL = 1e-14
IMAG_TOL = 1e-10


def _scale(z: complex) -> float:
    return max(1.0, abs(z))


def _magnitude(coeff: complex, power: int, rate: complex) -> float:
    # size of a term measured against u**p / p! * max(1,|r|)**p, so that the
    # high-power terms of long gain-count chains are not pruned away
    if coeff == 0:
        return 0.0
    return math.exp(math.log(abs(coeff)) + math.lgamma(power + 1) - power * math.log(_scale(rate)))


class ExpoPolynomial:
    """Immutable sum of terms ``coeff * u**power * exp(-rate*u)``.

    ``terms`` is a tuple of ``(coeff, power, rate)`` kept in canonical form:
    rates closer than ``RATE_MERGE_TOL`` (relative) are merged, duplicate
    ``(rate, power)`` pairs are summed, negligible coefficients are pruned and
    the terms are sorted by ``(rate, power)``.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[complex, int, complex]] = ()):
        self.terms = _canonical(terms)

    # ---- construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, value: complex) -> "ExpoPolynomial":
        return cls([(value, 0, 0.0)])

    @classmethod
    def monomial(cls, coeff: complex = 1.0, power: int = 0, rate: complex = 0.0) -> "ExpoPolynomial":
        return cls([(coeff, power, rate)])

    @classmethod
    def erlang_density(cls, shape: int, rate: float) -> "ExpoPolynomial":
        coeff = rate**shape / math.factorial(shape - 1)
        return cls([(coeff, shape - 1, rate)])

    @classmethod
    def erlang_survival(cls, shape: int, rate: float) -> "ExpoPolynomial":
        return cls([(rate**i / math.factorial(i), i, rate) for i in range(shape)])

    # ---- inspection -------------------------------------------------------------
    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __repr__(self) -> str:
        body = " + ".join(f"({c:.6g})u^{p}e^(-({r:.6g})u)" for c, p, r in self.terms)
        return f"ExpoPolynomial({body or '0'})"

    @property
    def rates(self) -> list[complex]:
        out: list[complex] = []
        for _, _, r in self.terms:
            if not out or out[-1] != r:
                out.append(r)
        return out

    def coefficient_map(self) -> dict[tuple[complex, int], complex]:
        return {(r, p): c for c, p, r in self.terms}

    def is_zero(self) -> bool:
        return not self.terms

    # ---- arithmetic ---------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, ExpoPolynomial):
            return ExpoPolynomial(self.terms + other.terms)
        return ExpoPolynomial(self.terms + ((complex(other), 0, 0.0),))

    __radd__ = __add__

    def __neg__(self):
        return ExpoPolynomial((-c, p, r) for c, p, r in self.terms)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, ExpoPolynomial):
            return ExpoPolynomial(
                (c1 * c2, p1 + p2, r1 + r2) for c1, p1, r1 in self.terms for c2, p2, r2 in other.terms
            )
        k = complex(other)
        return ExpoPolynomial((k * c, p, r) for c, p, r in self.terms)

    __rmul__ = __mul__

    def __truediv__(self, k):
        return self * (1.0 / complex(k))

    # ---- evaluation ------------------------------------------------------------------
    def evaluate_complex(self, u):
        u_arr = np.asarray(u, dtype=float)
        out = np.zeros(u_arr.shape, dtype=complex)
        positive = u_arr > 0
        logu = np.log(np.where(positive, u_arr, 1.0))
        for c, p, r in self.terms:
            if p == 0:
                out = out + c * np.exp(-r * u_arr)
            else:
                # keep the phase of c apart so a real negative c stays real
                val = (c / abs(c)) * np.exp(math.log(abs(c)) + p * logu - r * u_arr)
                out = out + np.where(positive, val, 0.0)
        return out if out.ndim else complex(out)

    def evaluate(self, u):
        """Real value at ``u``; raises if the imaginary residue is not negligible."""
        z = np.asarray(self.evaluate_complex(u))
        bad = np.abs(z.imag) > IMAG_TOL * (1.0 + np.abs(z.real))
        if np.any(bad):
            raise RepresentationError(f"function is not real-representable (imag residue {np.max(np.abs(z.imag)):.3g})")
        re = z.real
        return float(re) if re.ndim == 0 else re

    __call__ = evaluate

    # ---- calculus ------------------------------------------------------------------------
    def derivative(self, order: int = 1) -> "ExpoPolynomial":
        f = self
        for _ in range(order):
            out = []
            for c, p, r in f.terms:
                if p > 0:
                    out.append((c * p, p - 1, r))
                if r != 0:
                    out.append((-r * c, p, r))
            f = ExpoPolynomial(out)
        return f

    differentiate = derivative

    def antiderivative_tail(self, formal: bool = False) -> "ExpoPolynomial":
        """``u -> int_u^inf f(t) dt``.

        With ``formal=True`` the closed form is returned for any nonzero rate
        (the analytic continuation in the rate), otherwise every rate must have a
        positive real part.
        """
        out = []
        for c, p, r in self.terms:
            if r == 0 or (not formal and r.real <= 0):
                raise RepresentationError(f"tail integral diverges for rate {r}")
            # int_u^inf t^p e^{-rt} dt = e^{-ru} sum_l p!/l! u^l / r^{p-l+1}
            for l in range(p + 1):
                out.append((c * math.factorial(p) / math.factorial(l) / r ** (p - l + 1), l, r))
        return ExpoPolynomial(out)

    def antiderivative(self) -> "ExpoPolynomial":
        """``u -> int_0^u f(t) dt``."""
        out = []
        for c, p, r in self.terms:
            if r == 0:
                out.append((c / (p + 1), p + 1, 0.0))
                continue
            for l in range(p + 1):
                out.append((-c * math.factorial(p) / math.factorial(l) / r ** (p - l + 1), l, r))
            out.append((c * math.factorial(p) / r ** (p + 1), 0, 0.0))
        return ExpoPolynomial(out)

    def shift(self, h: float) -> "ExpoPolynomial":
        """``u -> f(u + h)``."""
        out = []
        for c, p, r in self.terms:
            base = c * cmath.exp(-r * h)
            for l in range(p + 1):
                out.append((base * math.comb(p, l) * h ** (p - l), l, r))
        return ExpoPolynomial(out)

    def reflect(self, b: float) -> "ExpoPolynomial":
        """``u -> f(b - u)``."""
        out = []
        for c, p, r in self.terms:
            base = c * cmath.exp(-r * b)
            for l in range(p + 1):
                out.append((base * math.comb(p, l) * b ** (p - l) * (-1) ** l, l, -r))
        return ExpoPolynomial(out)

    def laplace(self, with_poles: bool = False):
        return laplace(self, with_poles)

    def laplace_at(self, s: complex) -> complex:
        """Value of the Laplace transform at ``s`` (needs ``Re(s + rate) > 0``)."""
        total = 0j
        for c, p, r in self.terms:
            sr = s + r
            if sr.real <= 0:
                raise RepresentationError(f"Laplace transform diverges at s={s} for rate {r}")
            total += cmath.exp(cmath.log(c) + math.lgamma(p + 1) - (p + 1) * cmath.log(sr))
        return total


# ---------------------------------------------------------------------------------------
def _canonical(terms) -> tuple:
    reps: list[complex] = []
    acc: dict[tuple[int, int], complex] = {}
    for c, p, r in terms:
        c = complex(c)
        if c == 0:
            continue
        p = int(p)
        if p < 0:
            raise ValidationError("negative power in exponential polynomial")
        r = complex(r)
        idx = None
        for i, rep in enumerate(reps):
            if abs(rep - r) <= RATE_MERGE_TOL * _scale(rep):
                idx = i
                break
        if idx is None:
            reps.append(r)
            idx = len(reps) - 1
        acc[(idx, p)] = acc.get((idx, p), 0j) + c
    if not acc:
        return ()
    # growing terms (Re rate < 0) are never pruned: a tiny coefficient can be
    # matched by a huge exponential on a long interval
    mags = {k: _magnitude(c, k[1], reps[k[0]]) for k, c in acc.items() if reps[k[0]].real >= 0}
    top = max(mags.values(), default=0.0)
    out = [
        (c, p, reps[i])
        for (i, p), c in acc.items()
        if c != 0 and ((i, p) not in mags or mags[(i, p)] > PRUNE_TOL * top)
    ]
    out.sort(key=lambda t: (t[2].real, t[2].imag, t[1]))
    return tuple(out)


def _pow_int_factorial_ratio(n: int, k: int) -> float:
    return math.factorial(n) / math.factorial(k)


def correlate(f: ExpoPolynomial, g: ExpoPolynomial, formal: bool = False) -> ExpoPolynomial:
    """``z -> int_0^inf f(t) g(z + t) dt`` in closed form.

    Needs ``Re(r_f + r_g) > 0`` for every pair of rates unless ``formal`` is
    set, in which case the analytic continuation is used (only an exact rate
    collision ``r_f + r_g = 0`` is refused).
    """
    out = []
    for c1, p1, r1 in f.terms:
        for c2, p2, r2 in g.terms:
            rs = r1 + r2
            if abs(rs) <= RATE_MERGE_TOL * max(_scale(r1), _scale(r2)):
                raise RepresentationError(f"pole collision at rate {r2} (sum of rates vanishes)")
            if not formal and rs.real <= 0:
                raise RepresentationError(f"divergent tail integral for rate sum {rs}")
            log_rs = cmath.log(rs)
            for l in range(p2 + 1):
                # c1 c2 C(p2,l) (p1+l)! / rs^(p1+l+1) z^(p2-l) e^{-r2 z}
                logmag = (
                    math.log(math.comb(p2, l)) + math.lgamma(p1 + l + 1) - (p1 + l + 1) * log_rs
                )
                out.append((c1 * c2 * cmath.exp(logmag), p2 - l, r2))
    return ExpoPolynomial(out)


def convolve(f: ExpoPolynomial, g: ExpoPolynomial) -> ExpoPolynomial:
    """``w -> int_0^w f(w - x) g(x) dx`` in closed form.

    Rates that differ by a small nonzero amount ``d`` produce partial-fraction
    coefficients of order ``d**-(i+j+2)`` that cancel, so accuracy degrades
    as the rates approach each other without merging."""
    out = []
    for c1, i, r1 in f.terms:
        for c2, j, r2 in g.terms:
            base = c1 * c2 * math.factorial(i) * math.factorial(j)
            a, b = i + 1, j + 1
            d = r2 - r1
            if abs(d) <= RATE_MERGE_TOL * max(_scale(r1), _scale(r2)):
                # 1/(s+r)^(a+b)
                out.append((base / math.factorial(a + b - 1), a + b - 1, r1))
                continue
            # partial fractions of 1/((s+r1)^a (s+r2)^b), d = r2 - r1
            for k in range(1, a + 1):
                coef = math.comb(a - k + b - 1, a - k) * (-1) ** (a - k) * d ** (-(a + b - k))
                out.append((base * coef / math.factorial(k - 1), k - 1, r1))
            for k in range(1, b + 1):
                coef = math.comb(b - k + a - 1, b - k) * (-1) ** (b - k) * (-d) ** (-(a + b - k))
                out.append((base * coef / math.factorial(k - 1), k - 1, r2))
    return ExpoPolynomial(out)


def dickson_hipp(f: ExpoPolynomial, s: complex, x: float) -> complex:
    """``T_s f(x) = int_0^inf e^{-s t} f(t + x) dt``."""
    total = 0j
    for c, p, r in f.terms:
        sr = s + r
        if sr.real <= 0 if isinstance(sr, complex) else sr <= 0:
            raise RepresentationError(f"Dickson-Hipp integral diverges at s={s} for rate {r}")
        base = c * cmath.exp(-r * x)
        for l in range(p + 1):
            total += base * math.comb(p, l) * x ** (p - l) * math.factorial(l) / sr ** (l + 1)
    return total


def apply_operator(f: ExpoPolynomial, identity_coeff: float, derivative_coeff: float, n: int) -> ExpoPolynomial:
    """``(identity_coeff * I + derivative_coeff * D)**n f``."""
    for _ in range(n):
        f = identity_coeff * f + derivative_coeff * f.derivative()
    return f


def solve_shifted_ode(rhs: ExpoPolynomial, kappa: complex, n: int, initial: Sequence[complex] | None = None) -> ExpoPolynomial:
    """Solve ``(D + kappa)**n y = rhs`` with ``y^(i)(0) = initial[i]`` for ``i < n``.

    Terms of ``rhs`` at the resonant rate ``kappa`` get their powers raised by
    ``n`` (n-fold integration); other rates use the terminating inverse series
    of ``(D + kappa - r)**n`` on polynomials.
    """
    by_rate: dict[complex, dict[int, complex]] = {}
    for c, p, r in rhs.terms:
        by_rate.setdefault(r, {})[p] = c
    particular = []
    for r, poly in by_rate.items():
        d = kappa - r
        deg = max(poly)
        coeffs = np.zeros(deg + 1, dtype=complex)
        for p, c in poly.items():
            coeffs[p] = c
        if abs(d) <= RATE_MERGE_TOL * max(_scale(kappa), _scale(r)):
            q = coeffs
            for _ in range(n):
                q = P.polyint(q)
        else:
            # (d + D)^{-n} = d^{-n} sum_k C(-n,k) (D/d)^k, terminating on polynomials
            q = np.zeros(deg + 1, dtype=complex)
            deriv = coeffs.copy()
            for k in range(deg + 1):
                binom = (-1) ** k * math.comb(n + k - 1, k)
                q[: len(deriv)] += binom * deriv / d ** (n + k)
                deriv = P.polyder(deriv) if len(deriv) > 1 else np.zeros(1, dtype=complex)
        particular.extend((c, p, r) for p, c in enumerate(q) if c != 0)
    y = ExpoPolynomial(particular)
    target = np.zeros(n, dtype=complex) if initial is None else np.asarray(initial, dtype=complex)
    current = np.array([complex(y.derivative(i).evaluate_complex(0.0)) for i in range(n)])
    basis = [ExpoPolynomial.monomial(1.0, j, kappa) for j in range(n)]
    mat = np.array([[complex(bf.derivative(i).evaluate_complex(0.0)) for bf in basis] for i in range(n)])
    h = np.linalg.solve(mat, target - current)
    return y + ExpoPolynomial((h[j], j, kappa) for j in range(n))


# ---------------------------------------------------------------------------------------
def _trim(coeffs) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    nz = np.nonzero(arr)[0]
    if len(nz) == 0:
        return np.zeros(1, dtype=complex)
    return arr[: nz[-1] + 1].copy()


def _degree(coeffs: np.ndarray) -> int:
    return len(coeffs) - 1 if np.any(coeffs) else -1


def find_roots(coeffs, cluster_tol: float = ROOT_CLUSTER_TOL, max_newton: int = 50) -> list[tuple[complex, int]]:
    """Roots of a polynomial (ascending coefficients) with multiplicities.

    Companion-matrix eigenvalues, Newton polishing, then clustering of roots
    closer than ``cluster_tol`` (relative) into a single multiple root which is
    polished on the corresponding derivative.
    """
    c = _trim(coeffs)
    deg = _degree(c)
    if deg <= 0:
        return []
    raw = np.roots(c[::-1])
    polished = [_newton(c, complex(z), max_newton) for z in raw]
    # cluster
    n = len(polished)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(polished[i] - polished[j]) <= cluster_tol * max(_scale(polished[i]), _scale(polished[j])):
                parent[find(i)] = find(j)
    groups: dict[int, list[complex]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(polished[i])
    clusters = [members for members in groups.values()]
    clusters = _verified_merge(c, clusters, max_newton)
    real_coeffs = bool(np.all(np.abs(c.imag) == 0))
    out = []
    for members in clusters:
        k = len(members)
        centre = complex(np.mean(members))
        if k > 1:
            centre = _newton(P.polyder(c, k - 1), centre, max_newton)
        if real_coeffs and abs(centre.imag) <= cluster_tol * _scale(centre):
            centre = complex(centre.real, 0.0)
        out.append((centre, k))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


MERGE_RADIUS = 1e-3
MERGE_RESIDUAL = 1e-11


def _relative_value(c: np.ndarray, z: complex) -> float:
    scale = float(np.sum(np.abs(c) * np.abs(z) ** np.arange(len(c))))
    return abs(P.polyval(z, c)) / scale if scale > 0 else 0.0


def _verified_merge(c: np.ndarray, clusters: list[list[complex]], iters: int) -> list[list[complex]]:
    """Merge nearby clusters when the merged point is a genuine multiple root.

    A root of multiplicity k splits by about eps**(1/k) under eigenvalue
    computation, which exceeds the plain clustering radius for k >= 3.  Two
    clusters closer than ``MERGE_RADIUS`` are merged only if the polished
    centre annihilates every derivative below the combined multiplicity.
    """
    changed = True
    while changed and len(clusters) > 1:
        changed = False
        centres = [complex(np.mean(m)) for m in clusters]
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                if abs(centres[i] - centres[j]) > MERGE_RADIUS * max(_scale(centres[i]), _scale(centres[j])):
                    continue
                merged = clusters[i] + clusters[j]
                k = len(merged)
                centre = _newton(P.polyder(c, k - 1), complex(np.mean(merged)), iters)
                d = c
                ok = True
                for _ in range(k):
                    if _relative_value(d, centre) > MERGE_RESIDUAL:
                        ok = False
                        break
                    d = P.polyder(d)
                if ok:
                    clusters = [m for idx, m in enumerate(clusters) if idx not in (i, j)] + [merged]
                    changed = True
                    break
            if changed:
                break
    return clusters


def cancel_known_factors(numerator, factors: Sequence[tuple[complex, int]], tol: float = 1e-10):
    """Divide out ``(s - root)`` from ``numerator`` wherever it vanishes at a known root.

    Returns the reduced numerator and the remaining ``(root, multiplicity)`` list.
    """
    num = _trim(numerator)
    remaining = []
    for root, k in factors:
        while k > 0 and _degree(num) > 0 and _relative_value(num, root) <= tol:
            q, _ = P.polydiv(num, np.array([-root, 1.0], dtype=complex))
            num = _trim(q)
            k -= 1
        if k:
            remaining.append((root, k))
    return num, remaining


def _newton(c: np.ndarray, z: complex, iters: int) -> complex:
    dc = P.polyder(c)
    best, best_res = z, abs(P.polyval(z, c))
    for _ in range(iters):
        fz = P.polyval(z, c)
        dz = P.polyval(z, dc)
        if dz == 0:
            break
        step = fz / dz
        z = z - step
        res = abs(P.polyval(z, c))
        if res < best_res:
            best, best_res = z, res
        if abs(step) <= 1e-16 * _scale(z):
            break
    return best


class RationalFunction:
    """Ratio of two complex polynomials stored as ascending coefficient arrays."""

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator, denominator=(1.0,)):
        num = _trim(numerator)
        den = _trim(denominator)
        if _degree(den) < 0:
            raise ValidationError("zero denominator")
        self.numerator = num
        self.denominator = den

    def __repr__(self) -> str:
        return f"RationalFunction(num={np.round(self.numerator, 12)}, den={np.round(self.denominator, 12)})"

    @classmethod
    def polynomial(cls, coeffs) -> "RationalFunction":
        return cls(coeffs, (1.0,))

    @property
    def num_degree(self) -> int:
        return _degree(self.numerator)

    @property
    def den_degree(self) -> int:
        return _degree(self.denominator)

    def is_strictly_proper(self) -> bool:
        return self.num_degree < self.den_degree

    def __call__(self, s):
        return P.polyval(s, self.numerator) / P.polyval(s, self.denominator)

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        return RationalFunction([complex(other)])

    def __add__(self, other):
        o = self._coerce(other)
        num = P.polyadd(P.polymul(self.numerator, o.denominator), P.polymul(o.numerator, self.denominator))
        return RationalFunction(num, P.polymul(self.denominator, o.denominator))

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.numerator, self.denominator)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        return RationalFunction(P.polymul(self.numerator, o.numerator), P.polymul(self.denominator, o.denominator))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return RationalFunction(P.polymul(self.numerator, o.denominator), P.polymul(self.denominator, o.numerator))

    def derivative(self, order: int = 1) -> "RationalFunction":
        r = self
        for _ in range(order):
            num = P.polysub(P.polymul(P.polyder(r.numerator), r.denominator), P.polymul(r.numerator, P.polyder(r.denominator)))
            r = RationalFunction(num, P.polymul(r.denominator, r.denominator))
        return r

    def poles(self) -> list[tuple[complex, int]]:
        return find_roots(self.denominator)

    def zeros(self) -> list[tuple[complex, int]]:
        return find_roots(self.numerator)

    def monic(self) -> "RationalFunction":
        lead = self.denominator[-1]
        return RationalFunction(self.numerator / lead, self.denominator / lead)

    def reduce(self, tol: float = ROOT_CLUSTER_TOL) -> "RationalFunction":
        """Cancel common roots of numerator and denominator; result has monic denominator."""
        if self.num_degree <= 0 or self.den_degree <= 0:
            return self.monic()
        zs = dict(find_roots(self.numerator, tol))
        ps = dict(find_roots(self.denominator, tol))
        cancelled = False
        for p in list(ps):
            for z in list(zs):
                if abs(p - z) <= tol * max(_scale(p), _scale(z)):
                    k = min(ps[p], zs[z])
                    ps[p] -= k
                    zs[z] -= k
                    cancelled = True
                    if zs[z] == 0:
                        del zs[z]
                    break
        if not cancelled:
            return self.monic()
        num = np.array([self.numerator[-1]], dtype=complex)
        for z, k in zs.items():
            num = P.polymul(num, P.polyfromroots([z] * k)) if k else num
        den = np.array([1.0 + 0j])
        for p, k in ps.items():
            if k:
                den = P.polymul(den, P.polyfromroots([p] * k))
        return RationalFunction(num / self.denominator[-1], den)

    def as_polynomial(self, tol: float = 1e-9) -> np.ndarray:
        """Exact quotient when the denominator divides the numerator."""
        q, rem = P.polydiv(self.numerator, self.denominator)
        scale = max(1.0, float(np.max(np.abs(self.numerator))))
        if np.max(np.abs(rem)) > tol * scale:
            raise RepresentationError("denominator does not divide numerator")
        return _trim(q)

    def real_coefficients(self, tol: float = 1e-12) -> bool:
        return bool(
            np.all(np.abs(self.numerator.imag) <= tol * (1 + np.abs(self.numerator.real)))
            and np.all(np.abs(self.denominator.imag) <= tol * (1 + np.abs(self.denominator.real)))
        )


def laplace(f: ExpoPolynomial, with_poles: bool = False):
    """Term ``u^j e^{-ru}`` maps to ``j!/(s+r)^(j+1)``; summed over a common denominator.

    The poles are known exactly, so common factors are cancelled by synthetic
    division at those points instead of by numerical root finding.  With
    ``with_poles`` the remaining ``(pole, multiplicity)`` list is returned too.
    """
    if f.is_zero():
        rf = RationalFunction([0.0])
        return (rf, []) if with_poles else rf
    top: dict[complex, int] = {}
    for _, p, r in f.terms:
        top[r] = max(top.get(r, 0), p + 1)
    num = np.zeros(1, dtype=complex)
    for c, p, r in f.terms:
        piece = np.array([c * math.factorial(p)], dtype=complex)
        piece = P.polymul(piece, P.polypow([r, 1.0], top[r] - p - 1))
        for r2, k2 in top.items():
            if r2 != r:
                piece = P.polymul(piece, P.polypow([r2, 1.0], k2))
        num = P.polyadd(num, piece)
    num, poles = cancel_known_factors(num, [(-r, k) for r, k in top.items()])
    den = np.array([1.0 + 0j])
    for p, k in poles:
        den = P.polymul(den, P.polypow([-p, 1.0], k))
    rf = RationalFunction(num, den)
    return (rf, poles) if with_poles else rf


def _taylor(c: np.ndarray, at: complex, order: int) -> np.ndarray:
    """First ``order`` Taylor coefficients of a polynomial about ``at``."""
    out = np.zeros(order, dtype=complex)
    d = c
    fact = 1.0
    for l in range(order):
        out[l] = P.polyval(at, d) / fact
        d = P.polyder(d) if len(d) > 1 else np.zeros(1, dtype=complex)
        fact *= l + 1
    return out


def partial_fractions(numerator, denominator_lead: complex, poles: Sequence[tuple[complex, int]]) -> list[np.ndarray]:
    """Inverse-transform coefficients of ``numerator / (lead * prod (s - p)**k)``.

    Returns one array per pole; entry ``l`` is the coefficient of
    ``u**l * exp(p*u)`` in the inverse Laplace transform.
    """
    num = _trim(numerator)
    out = []
    for idx, (p, k) in enumerate(poles):
        # E(s) = lead * prod_{q != p} (s - q)^{k_q}, expanded about p
        e_series = np.zeros(k, dtype=complex)
        e_series[0] = denominator_lead
        for jdx, (q, kq) in enumerate(poles):
            if jdx == idx:
                continue
            d = p - q
            factor = np.array([math.comb(kq, l) * d ** (kq - l) if l <= kq else 0.0 for l in range(k)], dtype=complex)
            e_series = np.convolve(e_series, factor)[:k]
        n_series = _taylor(num, p, k)
        quot = np.zeros(k, dtype=complex)
        for l in range(k):
            acc = n_series[l] - np.dot(quot[:l], e_series[l:0:-1]) if l else n_series[0]
            quot[l] = acc / e_series[0]
        # quot[l] multiplies 1/(s-p)^(k-l), whose inverse is u^(k-l-1)/(k-l-1)! e^{pu}
        coef = np.zeros(k, dtype=complex)
        for l in range(k):
            j = k - l
            coef[j - 1] = quot[l] / math.factorial(j - 1)
        out.append(coef)
    return out


def invert_rational(r: RationalFunction, poles: Sequence[tuple[complex, int]] | None = None) -> ExpoPolynomial:
    """Inverse Laplace transform of a strictly proper rational function.

    Partial fractions at the (clustered) denominator roots: a pole ``-rate`` of
    multiplicity ``k`` yields the terms ``u^0 .. u^(k-1)`` times ``e^{-rate u}``.
    ``poles`` may be supplied when the denominator roots are already known
    (they must account for the full denominator degree).
    """
    if not r.is_strictly_proper():
        raise ValidationError("invert_rational needs a strictly proper rational function")
    if r.num_degree < 0:
        return ExpoPolynomial()
    pole_list = list(poles) if poles is not None else r.poles()
    if sum(k for _, k in pole_list) != r.den_degree:
        raise NumericalError("pole multiplicities do not match the denominator degree")
    tables = partial_fractions(r.numerator, r.denominator[-1], pole_list)
    return ExpoPolynomial(
        (coef[l], l, -p) for (p, _), coef in zip(pole_list, tables) for l in range(len(coef))
    )
