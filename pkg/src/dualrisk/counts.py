"""Gain counts: exactly ``m`` gains before ruin, and exactly ``m`` gains to first pass a target.

``q(u, m)``: probability that exactly ``m`` gains arrive before ruin (no barrier).
Starting from ``q(u, 0) = P(W > u/c)`` each step solves

    (D + a)**n q(., m) = a**n * int_0^inf q(. + x, m - 1) p(x) dx,   q^(i)(0, m) = 0,

with ``a = lam / c``.  Every ``q(., m)`` is ``poly(u) * exp(-a u)``.

``r(u, b, m)``: probability that the ``m``-th gain is the first to carry the
surplus above ``b`` when ruin is ignored.  It depends on ``v = b - u`` only and

    r_1(v) = E[Pbar(v + c W)],
    r_m(v) = E[int_0^{v + cW} p(x) r_{m-1}(v + cW - x) dx].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ValidationError
from .expopoly import ExpoPolynomial, RationalFunction, apply_operator, convolve, correlate, solve_shifted_ode
from .model import IncomeCondition, ModelSpec, income_condition

DEFAULT_CAP = 50


@dataclass(frozen=True)
class GainCountState:
    """``q(., m)`` together with the tail integral it was built from."""

    spec: ModelSpec
    m: int
    q_rep: ExpoPolynomial
    omega_rep: ExpoPolynomial | None

    def __call__(self, u):
        return _eval_nonneg(self.q_rep, u)


@dataclass(frozen=True)
class TargetCountState:
    spec: ModelSpec
    m: int
    r_rep: ExpoPolynomial  # function of v = b - u, float coefficients
    exact: "_RationalExpo | None" = None

    def __call__(self, v):
        if self.exact is None:
            return _eval_nonneg(self.r_rep, v)
        v = np.asarray(v, dtype=float)
        if np.any(v < 0):
            raise ValidationError("argument must be nonnegative")
        out = np.vectorize(self.exact.evaluate, otypes=[float])(v)
        return float(out) if out.ndim == 0 else out


def _eval_nonneg(f: ExpoPolynomial, x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValidationError("argument must be nonnegative")
    out = f.evaluate(x)
    return float(out) if np.ndim(out) == 0 else out


def _check_m(m: int, cap: int) -> int:
    if int(m) != m or m < 0:
        raise ValidationError("gain count must be a nonnegative integer")
    if m > cap:
        raise ValidationError(f"gain count {m} exceeds the cap {cap}")
    return int(m)


def _count_key(spec: ModelSpec) -> ModelSpec:
    # q and r only see n, a = lam/c and the gains
    return spec.with_(delta=0.0, barrier=None)


# ---- gains before ruin ------------------------------------------------------------
def q0_expo(spec: ModelSpec) -> ExpoPolynomial:
    """Erlang(n, a) survival function in ``u``."""
    return ExpoPolynomial.erlang_survival(spec.n, spec.a)


def convolve_tail(f: ExpoPolynomial, spec: ModelSpec) -> ExpoPolynomial:
    """``u -> int_0^inf f(u + x) p(x) dx``."""
    return correlate(spec.gains.as_expo(), f)


@lru_cache(maxsize=64)
def _q_chain(spec: ModelSpec, m: int) -> tuple[GainCountState, ...]:
    if m == 0:
        return (GainCountState(spec, 0, q0_expo(spec), None),)
    prev = _q_chain(spec, m - 1)
    omega = convolve_tail(prev[-1].q_rep, spec)
    a, n = spec.a, spec.n
    q_m = solve_shifted_ode(a**n * omega, a, n, np.zeros(n))
    return prev + (GainCountState(spec, m, q_m, omega),)


def q_state(spec: ModelSpec, m: int, cap: int = DEFAULT_CAP) -> GainCountState:
    m = _check_m(m, cap)
    return _q_chain(_count_key(spec), m)[m]


def q(spec: ModelSpec, u, m: int, cap: int = DEFAULT_CAP):
    """Probability of exactly ``m`` gains before ruin from surplus ``u``."""
    return q_state(spec, m, cap)(u)


def q_distribution(spec: ModelSpec, u, max_m: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    return np.array([q(spec, u, m, cap) for m in range(max_m + 1)])


def ide_sides(spec: ModelSpec, m: int, cap: int = DEFAULT_CAP) -> tuple[ExpoPolynomial, ExpoPolynomial]:
    """Both sides of ``(I + D/a)**n q(., m) = int_0^inf q(. + x, m - 1) p(x) dx`` (right side 0 for ``m = 0``)."""
    state = q_state(spec, m, cap)
    left = apply_operator(state.q_rep, 1.0, 1.0 / spec.a, spec.n)
    if m == 0:
        return left, ExpoPolynomial([])
    prev = q_state(spec, m - 1, cap).q_rep
    return left, correlate(spec.gains.as_expo(), prev)


def q1_closed_form(spec: ModelSpec, u):
    """``q(u, 1) = sum_{j<n} B_j u**(n+j) exp(-a u)`` with coefficients from the gain transform at ``a``."""
    n, a = spec.n, spec.a
    u = np.asarray(u, dtype=float)
    total = np.zeros_like(u)
    for j in range(n):
        s = sum((-a) ** i / math.factorial(i) * spec.gains.lt_value(a, i).real for i in range(n - j))
        b_j = a ** (n + j) / math.factorial(n + j) * s
        total = total + b_j * u ** (n + j)
    out = total * np.exp(-a * u)
    return float(out) if out.ndim == 0 else out


def omega_q0_expo(spec: ModelSpec) -> ExpoPolynomial:
    """Closed form of ``int_0^inf q(u + x, 0) p(x) dx`` as ``sum_l C_l u**l exp(-a u)``."""
    n, a = spec.n, spec.a
    terms = []
    for l in range(n):
        s = sum((-a) ** j / math.factorial(j) * spec.gains.lt_value(a, j) for j in range(n - l))
        terms.append((a**l / math.factorial(l) * s, l, a))
    return ExpoPolynomial(terms)


def omega_q0(spec: ModelSpec, u):
    return _eval_nonneg(omega_q0_expo(spec), u)


def omega_q0_lt(spec: ModelSpec, s: complex) -> complex:
    """Laplace transform of :func:`omega_q0` at ``s`` (``Re s > -a``)."""
    n, a = spec.n, spec.a
    if (s + a).real <= 0:
        raise ValidationError("transform needs Re(s) > -a")
    total = 0j
    for l in range(n):
        inner = sum((-a) ** j / math.factorial(j) * spec.gains.lt_value(a, j) for j in range(n - l))
        total += a**l * inner / (s + a) ** (l + 1)
    return total


def q_lt(spec: ModelSpec, s: complex, m: int, cap: int = DEFAULT_CAP) -> complex:
    """Laplace transform in ``u`` of ``q(., m)``."""
    n, a = spec.n, spec.a
    if (s + a).real <= 0:
        raise ValidationError("transform needs Re(s) > -a")
    m = _check_m(m, cap)
    if m == 0:
        if s == 0:
            return n / a  # limit of (1 - (a/(a+s))**n) / s
        return (1.0 - (a / (a + s)) ** n) / s
    omega = q_state(spec, m, cap).omega_rep
    return omega.laplace_at(s) / (1.0 + s / a) ** n


# ---- gains to reach a target -------------------------------------------------------
class _RationalExpo:
    """Real exponential polynomial with exact rational coefficients and rates.

    The target-count chain mixes the gain rates with partial fractions whose
    coefficients grow geometrically in ``m`` while the function stays below
    one, so a float representation cancels catastrophically after a few dozen
    steps.  Here the algebra is exact and evaluation uses enough decimal digits
    to absorb the cancellation.
    """

    def __init__(self, terms: dict[tuple[Fraction, int], Fraction]):
        self.terms = {k: c for k, c in terms.items() if c != 0}

    def to_expo(self) -> ExpoPolynomial:
        return ExpoPolynomial((float(c), p, float(r)) for (r, p), c in self.terms.items())

    def evaluate(self, v: float) -> float:
        vq = Fraction(v)
        groups: dict[Fraction, Fraction] = {}
        for (r, p), c in self.terms.items():
            groups[r] = groups.get(r, Fraction(0)) + c * vq**p
        biggest = max((abs(x) for x in groups.values()), default=Fraction(0))
        digits = 30 + max(0, len(str(int(biggest))))
        with localcontext() as ctx:
            ctx.prec = digits
            dv = Decimal(vq.numerator) / Decimal(vq.denominator)
            total = Decimal(0)
            for r, poly in groups.items():
                dr = Decimal(r.numerator) / Decimal(r.denominator)
                total += Decimal(poly.numerator) / Decimal(poly.denominator) * (-dr * dv).exp()
            return float(total)


def _add_term(acc: dict, rate: Fraction, power: int, coeff: Fraction) -> None:
    key = (rate, power)
    acc[key] = acc.get(key, Fraction(0)) + coeff


def _exact_gain_terms(spec: ModelSpec) -> list[tuple[Fraction, int, Fraction]]:
    """Gain density as ``(coeff, power, rate)`` with rational entries."""
    out = []
    for comp in spec.gains.components:
        rate = Fraction(comp.rate)
        coeff = Fraction(comp.weight) * rate**comp.shape / math.factorial(comp.shape - 1)
        out.append((coeff, comp.shape - 1, rate))
    return out


def _exact_correlate_kernel(spec: ModelSpec, f: dict) -> dict:
    """``v -> E[f(v + c W)]`` with ``cW ~ Erlang(n, a)``: ``int_0^inf k(t) f(v + t) dt``."""
    n, a = spec.n, Fraction(spec.lam) / Fraction(spec.c)
    lead = a**n / math.factorial(n - 1)
    acc: dict = {}
    for (r, p), c in f.items():
        for l in range(p + 1):
            # int t^(n-1+l) e^{-(a+r)t} dt = (n-1+l)! / (a+r)^(n+l)
            val = c * math.comb(p, l) * lead * math.factorial(n - 1 + l) / (a + r) ** (n + l)
            _add_term(acc, r, p - l, val)
    return acc


def _exact_convolve(gains: list, f: dict) -> dict:
    """``w -> int_0^w p(x) f(w - x) dx`` in rational arithmetic."""
    acc: dict = {}
    for c1, i, r1 in gains:
        for (r2, j), c2 in f.items():
            base = c1 * c2 * math.factorial(i) * math.factorial(j)
            a, b = i + 1, j + 1
            if r1 == r2:
                _add_term(acc, r1, a + b - 1, base / math.factorial(a + b - 1))
                continue
            d = r2 - r1
            for k in range(1, a + 1):
                coef = math.comb(a - k + b - 1, a - k) * (-1) ** (a - k) / d ** (a + b - k)
                _add_term(acc, r1, k - 1, base * coef / math.factorial(k - 1))
            for k in range(1, b + 1):
                coef = math.comb(b - k + a - 1, b - k) * (-1) ** (b - k) / (-d) ** (a + b - k)
                _add_term(acc, r2, k - 1, base * coef / math.factorial(k - 1))
    return acc


@lru_cache(maxsize=64)
def _r_chain(spec: ModelSpec, m: int) -> tuple[TargetCountState, ...]:
    gains = _exact_gain_terms(spec)
    if m == 1:
        survival: dict = {}
        for comp in spec.gains.components:
            rate = Fraction(comp.rate)
            for i in range(comp.shape):
                _add_term(survival, rate, i, Fraction(comp.weight) * rate**i / math.factorial(i))
        exact = _RationalExpo(_exact_correlate_kernel(spec, survival))
        return (TargetCountState(spec, 1, exact.to_expo(), exact),)
    prev = _r_chain(spec, m - 1)
    inner = _exact_convolve(gains, prev[-1].exact.terms)
    exact = _RationalExpo(_exact_correlate_kernel(spec, inner))
    return prev + (TargetCountState(spec, m, exact.to_expo(), exact),)


def r_state(spec: ModelSpec, m: int, cap: int = DEFAULT_CAP) -> TargetCountState:
    m = _check_m(m, cap)
    if m < 1:
        raise ValidationError("at least one gain is needed to pass the target")
    return _r_chain(_count_key(spec), m)[m - 1]


def _v(u, b):
    u = np.asarray(u, dtype=float)
    if np.any(u < 0) or np.any(u > b):
        raise ValidationError("need 0 <= u <= b")
    return b - u


def r(spec: ModelSpec, u, b: float, m: int, cap: int = DEFAULT_CAP):
    """Probability that the ``m``-th gain is the first to carry the surplus above ``b`` (ruin ignored)."""
    return r_state(spec, m, cap)(_v(u, b))


def r00_recursive(spec: ModelSpec, m: int, cap: int = DEFAULT_CAP) -> float:
    """``r(b, b, m)`` from derivatives at ``s = a`` of ``s p(s) R_{m-1}(s)``.

    ``R_{m-1}`` is the Laplace transform of ``r(0, ., m-1)``.
    """
    if m < 2:
        raise ValidationError("the recursion starts at m = 2")
    from .model import gain_lt

    prev, poles = r_state(spec, m - 1, cap).r_rep.laplace(with_poles=True)
    prod = gain_lt(spec.gains) * prev * RationalFunction.polynomial([0.0, 1.0])
    a = spec.a
    total = 0.0
    d = prod
    for k in range(spec.n):
        total += (-a) ** k / math.factorial(k) * complex(d(a)).real
        d = d.derivative()
    return float(total)


@dataclass(frozen=True)
class TailEstimate:
    value: float
    approximate: bool
    std_error: float = 0.0
    method: str = "complement"


def r_tail(spec: ModelSpec, u, b: float, M: int, cap: int = DEFAULT_CAP, paths: int = 200_000, seed: int = 0) -> TailEstimate:
    """``P(tau_u < inf) - sum_{m<=M} r(u, b, m)``.

    When the target is reached almost surely this is ``1 - partial sum``.
    Otherwise the total mass is estimated by simulation and flagged approximate.
    """
    partial = sum(r(spec, u, b, m, cap) for m in range(1, M + 1))
    if income_condition(spec) is not IncomeCondition.VIOLATED:
        val = 1.0 - partial
        if val < -1e-9:
            from .errors import NumericalError

            raise NumericalError(f"gain-count probabilities exceed one by {-val:.3g}")
        return TailEstimate(max(val, 0.0), False)
    from . import sim

    est = sim.target_reach_probability(spec, float(u), float(b), paths=paths, seed=seed)
    return TailEstimate(est.mean - partial, True, est.std_error, "simulation")
