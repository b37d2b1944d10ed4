"""Distribution of the first dividend amount and the barrier-before-ruin probability.

``G(u, b; x) = P(tau_u < T_u, D_u <= x)`` with ``tau_u`` the first passage above
``b`` and ``T_u`` the ruin time.  On ``[0, b]`` it is an exponential sum over the
Lundberg roots at ``delta = 0``; ``chi(u, b) = G(u, b; inf)``.
"""

from __future__ import annotations

import numpy as np

from . import _barrier
from .errors import NumericalError, ValidationError
from .expopoly import ExpoPolynomial
from .lundberg import LundbergRootSet
from .model import ModelSpec


class DividendDistribution:
    """Annihilator-method solver for one ``(spec, b)``; right sides vary with ``x``."""

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self.b = spec.require_barrier()
        self._key = _barrier.solver_spec(spec)
        self._solver = _barrier.annihilator_solver(self._key, 0.0, self.b)

    @property
    def basis_roots(self) -> LundbergRootSet:
        return self._solver.roots

    def cdf_rep(self, x: float) -> ExpoPolynomial:
        return self._solver.solve(_barrier.overshoot_cdf_tail(self._key, x))

    def chi_rep(self) -> ExpoPolynomial:
        return self._solver.solve(_barrier.overshoot_survival_tail(self._key))

    def density_rep(self, x: float) -> ExpoPolynomial:
        return self._solver.solve(_barrier.overshoot_density_tail(self._key, x))


def _distribution(spec: ModelSpec) -> DividendDistribution:
    return DividendDistribution(spec)


def _check_u(spec: ModelSpec, u) -> tuple[np.ndarray, float]:
    b = spec.require_barrier()
    u = np.asarray(u, dtype=float)
    if np.any(u < 0) or not np.all(np.isfinite(u)):
        raise ValidationError("initial surplus must be finite and nonnegative")
    return u, b


def _check_x(x: float) -> float:
    x = float(x)
    if not (np.isfinite(x) and x >= 0):
        raise ValidationError("dividend level x must be finite and nonnegative")
    return x


def _scalar(out: np.ndarray):
    return float(out) if out.ndim == 0 else out


def _inside(rep: ExpoPolynomial, u: np.ndarray, b: float) -> np.ndarray:
    # ruin is immediate from zero surplus, so every quantity vanishes there
    vals = np.asarray(rep.evaluate(np.clip(u, 0.0, b)))
    return np.where(u == 0, 0.0, vals)


def G(spec: ModelSpec, u, x: float):
    """Probability that the first dividend arrives before ruin and is at most ``x``."""
    u, b = _check_u(spec, u)
    x = _check_x(x)
    rep = _distribution(spec).cdf_rep(x)
    above = ((u > b) & (u - b <= x)).astype(float)
    return _scalar(np.where(u > b, above, _inside(rep, u, b)))


def G_via_lt(spec: ModelSpec, u, x: float):
    """``G`` through the transform method in ``z = b - u``; an independent check of :func:`G`."""
    u, b = _check_u(spec, u)
    x = _check_x(x)
    key = _barrier.solver_spec(spec)
    rep = _barrier.transform_solver(key, 0.0, b).solve(_barrier.overshoot_cdf_tail(key, x))
    above = ((u > b) & (u - b <= x)).astype(float)
    return _scalar(np.where(u > b, above, _inside(rep, u, b)))


def chi(spec: ModelSpec, u):
    """Probability of reaching the barrier before ruin."""
    u, b = _check_u(spec, u)
    rep = _distribution(spec).chi_rep()
    return _scalar(np.where(u > b, 1.0, _inside(rep, u, b)))


def xi(spec: ModelSpec, u):
    """Probability of ruin before reaching the barrier."""
    return _scalar(1.0 - np.asarray(chi(spec, u)))


def g_density(spec: ModelSpec, u, x: float):
    """``dG/dx`` for ``u`` in ``[0, b]``."""
    u, b = _check_u(spec, u)
    if np.any(u > b):
        raise ValidationError("the density is defined for 0 <= u <= b")
    x = _check_x(x)
    return _scalar(_inside(_distribution(spec).density_rep(x), u, b))


def g_conditional(spec: ModelSpec, u, x: float):
    """Density of the first dividend given that it is paid before ruin."""
    mass = np.asarray(chi(spec, u))
    if np.any(mass <= 0):
        raise NumericalError("the barrier is never reached before ruin; conditional density undefined")
    return _scalar(np.asarray(g_density(spec, u, x)) / mass)


def ide_sides(spec: ModelSpec, x: float | None = None) -> tuple[ExpoPolynomial, ExpoPolynomial]:
    """Both sides of the barrier equation for ``G(., b; x)`` (``chi`` when ``x`` is None)."""
    dist = _distribution(spec)
    key = _barrier.solver_spec(spec)
    if x is None:
        rep, tail = dist.chi_rep(), _barrier.overshoot_survival_tail(key)
    else:
        rep, tail = dist.cdf_rep(x), _barrier.overshoot_cdf_tail(key, x)
    return _barrier.ide_sides(key, 0.0, dist.b, rep, tail)
