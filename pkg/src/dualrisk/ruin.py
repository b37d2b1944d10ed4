"""Laplace transform of the ruin time and the ultimate ruin probability (no barrier)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lundberg
from .errors import NumericalError, ValidationError
from .expopoly import ExpoPolynomial, apply_operator, correlate
from .lundberg import LundbergRootSet
from .model import IncomeCondition, ModelSpec, income_condition

DISTINCT_RTOL = 1e-7


@dataclass(frozen=True)
class RuinTransform:
    """``psi(u, delta) = E[exp(-delta T_u); T_u < inf]`` as an exponential sum in ``u``."""

    spec: ModelSpec
    delta: float
    representation: ExpoPolynomial
    roots_used: LundbergRootSet | None

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u < 0):
            raise ValidationError("initial surplus must be nonnegative")
        out = self.representation.evaluate(u)
        return float(out) if np.ndim(out) == 0 else out


def _coefficients(rhos: list[complex], target: float) -> list[complex]:
    # interpolation weights fixing the i-th derivative at 0 to (-target)**i, i < n
    coeffs = []
    for k, rk in enumerate(rhos):
        prod = 1.0 + 0j
        for i, ri in enumerate(rhos):
            if i != k:
                prod *= (ri - target) / (ri - rk)
        coeffs.append(prod)
    return coeffs


def _check_distinct(rhos: list[complex]) -> None:
    for i in range(len(rhos)):
        for j in range(i + 1, len(rhos)):
            if abs(rhos[i] - rhos[j]) <= DISTINCT_RTOL * max(1.0, abs(rhos[i]), abs(rhos[j])):
                raise NumericalError("repeated positive Lundberg roots: the exponential-sum formula degenerates")


def ruin_transform(spec: ModelSpec, delta: float | None = None) -> RuinTransform:
    """Build ``psi(., delta)``.  For ``delta == 0`` this is the ruin probability."""
    delta = spec.delta if delta is None else float(delta)
    if delta < 0:
        raise ValidationError("delta must be nonnegative")
    if delta == 0.0 and income_condition(spec) is not IncomeCondition.SATISFIED:
        return RuinTransform(spec, 0.0, ExpoPolynomial.constant(1.0), None)
    roots = lundberg.solve(spec, delta)
    rhos = roots.positive()
    if len(rhos) != spec.n:
        raise NumericalError(f"expected {spec.n} roots with positive real part, found {len(rhos)}")
    _check_distinct(rhos)
    coeffs = _coefficients(rhos, delta / spec.c)
    rep = ExpoPolynomial((ck, 0, rk) for ck, rk in zip(coeffs, rhos))
    return RuinTransform(spec, delta, rep, roots)


def psi(spec: ModelSpec, delta: float, u):
    """``E[exp(-delta T_u); T_u < inf]`` for ``delta > 0``."""
    if delta <= 0:
        raise ValidationError("psi needs delta > 0; use psi_ultimate for the ruin probability")
    return ruin_transform(spec, delta)(u)


def psi_ultimate(spec: ModelSpec, u):
    """Probability of ultimate ruin; identically one unless the income condition holds."""
    return ruin_transform(spec, 0.0)(u)


def ide_sides(transform: RuinTransform) -> tuple[ExpoPolynomial, ExpoPolynomial]:
    """Both sides of the integro-differential equation, as functions of ``u``.

    Left: ``((1 + delta/lam) I + (c/lam) D)**n psi``.  Right: ``int_0^inf psi(u+x) p(x) dx``.
    """
    spec = transform.spec
    left = apply_operator(transform.representation, 1.0 + transform.delta / spec.lam, spec.c / spec.lam, spec.n)
    right = correlate(spec.gains.as_expo(), transform.representation)
    return left, right
