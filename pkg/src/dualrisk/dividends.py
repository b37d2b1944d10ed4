"""Discounted dividends under a reflecting barrier ``b``.

``phi_k(u) = E[exp(-delta tau_u) D_u**k]`` where ``tau_u`` is the first time the
surplus jumps above ``b`` (before ruin) and ``D_u`` is the overshoot paid out.
Aggregate moments ``V_order(u; b, delta)`` follow from the renewal structure:
after the first dividend the process restarts from ``b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _barrier
from .errors import NumericalError, ValidationError
from .expopoly import ExpoPolynomial
from .model import ModelSpec

MAX_ORDER = 4
DENOM_FLOOR = 1e-12


@dataclass(frozen=True)
class DividendTransform:
    """``phi_k`` on ``[0, b]`` stored as a function of ``z = b - u``."""

    spec: ModelSpec
    k: int
    delta_effective: float
    representation: ExpoPolynomial
    boundary_constants: np.ndarray

    @property
    def barrier(self) -> float:
        return self.spec.require_barrier()

    def in_u(self) -> ExpoPolynomial:
        return self.representation.reflect(self.barrier)

    def __call__(self, u):
        return _evaluate(self.representation, self.barrier, self.k, u)


def _evaluate(rep_z: ExpoPolynomial, b: float, k: int, u):
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValidationError("initial surplus must be nonnegative")
    z = np.clip(b - u, 0.0, b)
    inside = rep_z.evaluate(z)
    out = np.where(u > b, np.maximum(u - b, 0.0) ** k, inside)
    return float(out) if out.ndim == 0 else out


def _check_order(k: int, max_order: int) -> int:
    if int(k) != k or k < 0:
        raise ValidationError("moment order must be a nonnegative integer")
    if k > max_order:
        raise ValidationError(f"moment order {k} exceeds the configured maximum {max_order}")
    return int(k)


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not (math.isfinite(delta) and delta >= 0):
        raise ValidationError("delta must be finite and nonnegative")
    return delta


def dividend_transform(
    spec: ModelSpec, k: int, delta: float, max_order: int = MAX_ORDER, method: str = "transform"
) -> DividendTransform:
    """Solve the barrier problem for ``phi_k`` with discount ``delta``.

    ``method`` picks the transform solver (default) or the annihilator solver.
    """
    k = _check_order(k, max_order)
    delta = _check_delta(delta)
    b = spec.require_barrier()
    key = _barrier.solver_spec(spec)
    tail = _barrier.overshoot_moment_tail(key, k)
    if method == "transform":
        rep_u, initial = _barrier.transform_solver(key, delta, b).solve(tail, return_initial=True)
        constants = np.asarray(initial)
    elif method == "annihilator":
        rep_u = _barrier.annihilator_solver(key, delta, b).solve(tail)
        rep_z = rep_u.reflect(b)
        constants = np.array([rep_z.derivative(j).evaluate_complex(0.0) for j in range(spec.n)])
    else:
        raise ValidationError(f"unknown method {method!r}")
    return DividendTransform(spec, k, delta, rep_u.reflect(b), constants)


def phi(spec: ModelSpec, k: int, delta: float, u, max_order: int = MAX_ORDER):
    """``E[exp(-delta tau_u) D_u**k]``; equals ``(u - b)**k`` above the barrier."""
    return dividend_transform(spec, k, delta, max_order)(u)


def _v_at_barrier(spec: ModelSpec, order: int, delta: float, max_order: int) -> list[float]:
    # V_j(b; b, delta) for j = 0..order
    b = spec.require_barrier()
    vals = [1.0]
    for j in range(1, order + 1):
        phis = [phi(spec, k, j * delta, b, max_order) for k in range(j + 1)]
        denom = 1.0 - phis[0]
        if denom < DENOM_FLOOR:
            raise NumericalError(f"1 - E[exp(-{j} delta tau_b)] = {denom:.3g} is too small")
        num = math.fsum(math.comb(j, k) * phis[k] * vals[j - k] for k in range(1, j + 1))
        vals.append(num / denom)
    return vals


def v_moment(spec: ModelSpec, order: int, delta: float, u, max_order: int = MAX_ORDER):
    """``order``-th moment of the aggregate discounted dividends from surplus ``u``."""
    if int(order) != order or order < 0:
        raise ValidationError("order must be a nonnegative integer")
    order = int(order)
    delta = _check_delta(delta)
    if order > 0 and delta <= 0:
        raise ValidationError("aggregate dividend moments need delta > 0")
    _check_order(order, max_order)
    b = spec.require_barrier()
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValidationError("initial surplus must be nonnegative")
    if order == 0:
        out = np.ones_like(u)
        return float(out) if out.ndim == 0 else out
    vb = _v_at_barrier(spec, order, delta, max_order)
    total = np.zeros_like(u)
    for k in range(order + 1):
        total = total + math.comb(order, k) * np.asarray(phi(spec, k, order * delta, u, max_order)) * vb[order - k]
    return float(total) if total.ndim == 0 else total


def expected_dividends(spec: ModelSpec, delta: float, u):
    """``V(u; b, delta)``, the expected discounted dividends."""
    return v_moment(spec, 1, delta, u)


def first_dividend_share(spec: ModelSpec, delta: float, u):
    """Fraction of ``V(u; b, delta)`` contributed by the first dividend."""
    v = np.asarray(v_moment(spec, 1, delta, u))
    if np.any(v <= 0):
        raise NumericalError("expected dividends vanish; the share is undefined")
    out = np.asarray(phi(spec, 1, delta, u)) / v
    return float(out) if out.ndim == 0 else out


def ide_sides(transform: DividendTransform) -> tuple[ExpoPolynomial, ExpoPolynomial]:
    """Both sides of the barrier equation for ``phi_k`` as functions of ``u`` on ``[0, b]``."""
    spec = transform.spec
    f = transform.in_u()
    tail = _barrier.overshoot_moment_tail(spec, transform.k)
    return _barrier.ide_sides(spec, transform.delta_effective, transform.barrier, f, tail)
