"""Independent numerical oracles: quadrature residuals of the integro-differential equations."""

import math

import numpy as np
from scipy import integrate

from dualrisk.model import ModelSpec


def operator_left(spec: ModelSpec, f, u: float, delta: float) -> float:
    """``((1 + delta/lam) I + (c/lam) D)**n f`` at ``u`` by the binomial expansion of derivatives."""
    a0, a1 = 1.0 + delta / spec.lam, spec.c / spec.lam
    return math.fsum(
        math.comb(spec.n, j) * a0 ** (spec.n - j) * a1**j * float(f.derivative(j).evaluate(u)) for j in range(spec.n + 1)
    )


def tail_integral(spec: ModelSpec, fun, u: float, upper: float = np.inf) -> float:
    """``int_0^upper fun(u + y) p(y) dy`` by adaptive quadrature."""
    dens = spec.gains.density
    return integrate.quad(lambda y: fun(u + y) * float(dens(y)), 0.0, upper, limit=200, epsabs=1e-13, epsrel=1e-11)[0]


def barrier_residual(spec: ModelSpec, rep_u, outside, delta: float, b: float, u: float) -> float:
    """Residual of the barrier equation at ``u`` in ``(0, b)``.

    ``rep_u`` is the solution on ``[0, b]``; ``outside(w)`` its value for ``w > b``.
    """
    left = operator_left(spec, rep_u, u, delta)
    inner = tail_integral(spec, lambda w: float(rep_u.evaluate(w)), u, b - u)
    dens = spec.gains.density
    over = integrate.quad(lambda y: outside(u + y) * float(dens(y)), b - u, np.inf, limit=200, epsabs=1e-13, epsrel=1e-11)[0]
    return left - inner - over
