"""Problem instances for the Erlang(n) renewal dual risk model.

The surplus evolves as ``U(t) = u - c t + S(t)``: expenses flow out at rate
``c`` and gains arrive after Erlang(n, lambda) waiting times.  Gains follow a
finite signed mixture of Erlang laws so that their Laplace transform is a
rational function with real poles.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ValidationError
from .expopoly import ExpoPolynomial, RationalFunction, cancel_known_factors

BOUNDARY_RTOL = 1e-12
DENSITY_TOL = -1e-12


@dataclass(frozen=True)
class GainComponent:
    weight: float
    rate: float
    shape: int


@dataclass(frozen=True)
class GainDistribution:
    """Signed mixture of Erlang densities.

    ``p(x) = sum_i w_i * beta_i**alpha_i * x**(alpha_i-1) * exp(-beta_i x) / (alpha_i-1)!``
    """

    components: tuple[GainComponent, ...]

    def __init__(self, components: Sequence[Any]):
        merged: dict[tuple[float, int], float] = {}
        for comp in components:
            if isinstance(comp, GainComponent):
                w, r, a = comp.weight, comp.rate, comp.shape
            elif isinstance(comp, dict):
                w, r, a = comp["weight"], comp["rate"], comp.get("shape", 1)
            else:
                w, r, a = comp
            w, r = float(w), float(r)
            if not math.isfinite(w) or not math.isfinite(r):
                raise ValidationError("gain weights and rates must be finite")
            if r <= 0:
                raise ValidationError(f"gain rate must be positive, got {r}")
            if int(a) != a or a < 1:
                raise ValidationError(f"gain shape must be a positive integer, got {a}")
            key = (r, int(a))
            merged[key] = merged.get(key, 0.0) + w
        comps = tuple(GainComponent(w, r, a) for (r, a), w in sorted(merged.items()) if w != 0.0)
        if not comps:
            raise ValidationError("gain distribution needs at least one component")
        object.__setattr__(self, "components", comps)
        total = math.fsum(c.weight for c in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"gain weights must sum to 1, got {total!r}")
        grid = self._check_grid()
        dens = self.density(grid)
        if np.min(dens) < DENSITY_TOL:
            x_bad = grid[int(np.argmin(dens))]
            raise ValidationError(f"gain density is negative at x={x_bad:.6g}")
        if self.mean <= 0:
            raise ValidationError("gain mean must be positive")

    # ---- constructors ---------------------------------------------------------
    @classmethod
    def erlang(cls, shape: int, rate: float) -> "GainDistribution":
        return cls([(1.0, rate, shape)])

    @classmethod
    def exponential(cls, rate: float) -> "GainDistribution":
        return cls([(1.0, rate, 1)])

    def _check_grid(self) -> np.ndarray:
        top = 20.0 / min(c.rate for c in self.components)
        return np.concatenate([[0.0], np.geomspace(top * 1e-9, top, 2000)])

    # ---- closed forms ----------------------------------------------------------
    def as_expo(self) -> ExpoPolynomial:
        return ExpoPolynomial(
            (c.weight * c.rate**c.shape / math.factorial(c.shape - 1), c.shape - 1, c.rate)
            for c in self.components
        )

    def survival_expo(self) -> ExpoPolynomial:
        return ExpoPolynomial(
            (c.weight * c.rate**i / math.factorial(i), i, c.rate)
            for c in self.components
            for i in range(c.shape)
        )

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, self.as_expo().evaluate(np.maximum(x, 0.0)), 0.0)

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, self.survival_expo().evaluate(np.maximum(x, 0.0)), 1.0)

    def cdf(self, x):
        return 1.0 - self.survival(x)

    def lt_value(self, s: complex, k: int = 0) -> complex:
        """k-th derivative of the Laplace transform at ``s``."""
        total = 0j
        for c in self.components:
            # d^k/ds^k (b/(b+s))^a = b^a (-1)^k (a)_k / (b+s)^(a+k)
            rising = math.gamma(c.shape + k) / math.gamma(c.shape)
            total += c.weight * c.rate**c.shape * (-1) ** k * rising / (c.rate + s) ** (c.shape + k)
        return total

    def moment(self, k: int) -> float:
        return math.fsum(
            c.weight * math.gamma(c.shape + k) / (math.gamma(c.shape) * c.rate**k) for c in self.components
        )

    @property
    def mean(self) -> float:
        return self.moment(1)

    @property
    def rates(self) -> list[float]:
        return sorted({c.rate for c in self.components})

    def to_list(self) -> list[dict]:
        return [{"weight": c.weight, "rate": c.rate, "shape": c.shape} for c in self.components]


class IncomeCondition(enum.Enum):
    SATISFIED = "Satisfied"
    VIOLATED = "Violated"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class ModelSpec:
    """Erlang(n, lam) waiting times, expense rate ``c``, gains, interest force and barrier."""

    n: int
    lam: float
    c: float
    gains: GainDistribution
    delta: float = 0.0
    barrier: float | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        for name in ("lam", "c"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive and finite, got {v}")
        if not (math.isfinite(self.delta) and self.delta >= 0):
            raise ValidationError(f"delta must be nonnegative, got {self.delta}")
        if self.barrier is not None and not (math.isfinite(self.barrier) and self.barrier >= 0):
            raise ValidationError(f"barrier must be nonnegative, got {self.barrier}")
        if not isinstance(self.gains, GainDistribution):
            raise ValidationError("gains must be a GainDistribution")

    @property
    def a(self) -> float:
        return self.lam / self.c

    @property
    def mean_wait(self) -> float:
        return self.n / self.lam

    def with_(self, **changes) -> "ModelSpec":
        fields = dict(n=self.n, lam=self.lam, c=self.c, gains=self.gains, delta=self.delta, barrier=self.barrier)
        fields.update(changes)
        return ModelSpec(**fields)

    def require_barrier(self) -> float:
        if self.barrier is None:
            raise ValidationError("this quantity needs a barrier b")
        return float(self.barrier)

    # ---- serialization -----------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "lambda": self.lam,
            "c": self.c,
            "delta": self.delta,
            "barrier": self.barrier,
            "gains": self.gains.to_list(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        try:
            gains = GainDistribution(d["gains"])
            return cls(
                n=d["n"],
                lam=float(d["lambda"]),
                c=float(d["c"]),
                gains=gains,
                delta=float(d.get("delta", 0.0) or 0.0),
                barrier=None if d.get("barrier") is None else float(d["barrier"]),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed model spec: {exc!r}") from exc

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"spec is not valid JSON: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "ModelSpec":
        return cls.from_json(Path(path).read_text())


def income_condition(spec: ModelSpec) -> IncomeCondition:
    """Compare expected expenses between gains, ``c n / lam``, with the mean gain."""
    cost = spec.c * spec.n / spec.lam
    mu = spec.gains.mean
    if abs(cost - mu) <= BOUNDARY_RTOL * max(abs(cost), abs(mu)):
        return IncomeCondition.BOUNDARY
    return IncomeCondition.SATISFIED if cost < mu else IncomeCondition.VIOLATED


def _gain_lt_parts(gains: GainDistribution):
    top: dict[float, int] = {}
    for c in gains.components:
        top[c.rate] = max(top.get(c.rate, 0), c.shape)
    num = np.zeros(1)
    for c in gains.components:
        piece = np.array([c.weight * c.rate**c.shape])
        piece = P.polymul(piece, P.polypow([c.rate, 1.0], top[c.rate] - c.shape))
        for r2, k2 in top.items():
            if r2 != c.rate:
                piece = P.polymul(piece, P.polypow([r2, 1.0], k2))
        num = P.polyadd(num, piece)
    num, poles = cancel_known_factors(num, [(-r, k) for r, k in top.items()])
    return num.real, [(-p.real, k) for p, k in poles]


def gain_poles(gains: GainDistribution) -> list[tuple[float, int]]:
    """``(rate, multiplicity)`` of the factors ``(s + rate)`` left in the reduced denominator."""
    return _gain_lt_parts(gains)[1]


def gain_lt(gains: GainDistribution) -> RationalFunction:
    """Reduced rational Laplace transform of the gain density (monic denominator)."""
    num, poles = _gain_lt_parts(gains)
    den = np.array([1.0])
    for r, k in poles:
        den = P.polymul(den, P.polypow([r, 1.0], k))
    return RationalFunction(num, den)


def gain_moment(gains: GainDistribution, k: int) -> float:
    if k < 1:
        raise ValidationError("moment order must be at least 1")
    return gains.moment(k)


# reference instances used throughout the examples, tests and tables
def erlang2_gains() -> GainDistribution:
    return GainDistribution.erlang(2, 1.0)


def combexp_gains() -> GainDistribution:
    """Density ``3 e^{-1.5x} - 3 e^{-3x}``."""
    return GainDistribution([(2.0, 1.5, 1), (-1.0, 3.0, 1)])
