"""Monte Carlo simulation of the dual surplus process.

Between events the surplus falls linearly at rate ``c``; gains arrive after
Erlang(n, lam) waiting times.  Ruin is detected exactly (the surplus hits 0 at
``x / c`` after the last event) and a reflecting barrier pays the overshoot.

Paths are simulated in fixed-size blocks.  Block ``i`` draws from its own
stream seeded by ``(seed, i)``, so results do not depend on how blocks are
distributed over worker threads, and per-path values are reduced in block
order with ``math.fsum``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import NumericalError, ValidationError
from .model import GainDistribution, ModelSpec

DISCOUNT_FLOOR = 1e-12
BISECT_TOL = 1e-12
DEFAULT_BLOCK = 8192


# ---- configuration and results -----------------------------------------------------
@dataclass(frozen=True)
class SimulationConfig:
    spec: ModelSpec
    paths: int = 100_000
    seed: int = 0
    max_events_per_path: int = 1_000_000
    horizon: float | None = None
    workers: int = 1
    block_size: int = DEFAULT_BLOCK

    def __post_init__(self):
        if int(self.paths) != self.paths or self.paths < 1:
            raise ValidationError("paths must be a positive integer")
        if self.max_events_per_path < 1:
            raise ValidationError("max_events_per_path must be positive")
        if self.horizon is not None and not self.horizon > 0:
            raise ValidationError("horizon must be positive")
        if self.workers < 1 or self.block_size < 1:
            raise ValidationError("workers and block_size must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must fit in 64 bits")


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n: int
    censored_fraction: float = 0.0

    def within(self, value: float, k: float = 3.0) -> bool:
        return abs(self.mean - value) <= k * self.std_error


@dataclass
class PathOutcome:
    ruin_time: float | None = None
    first_barrier_time: float | None = None
    first_dividend: float | None = None
    dividends: list[tuple[float, float]] = field(default_factory=list)
    gains_before_ruin: int | None = None
    gains_to_target: int | None = None
    censored: bool = False


# ---- quantities -------------------------------------------------------------------------
@dataclass(frozen=True)
class RuinLT:
    delta: float


@dataclass(frozen=True)
class DiscountedDividendMoment:
    k: int
    delta: float


@dataclass(frozen=True)
class BarrierProb:
    pass


@dataclass(frozen=True)
class DividendCdfAt:
    x: tuple[float, ...] | float


@dataclass(frozen=True)
class GainCountRuinPmf:
    M: int


@dataclass(frozen=True)
class GainCountTargetPmf:
    M: int


@dataclass(frozen=True)
class AggregateDividends:
    delta: float
    order: int = 1


Quantity = Union[
    RuinLT, DiscountedDividendMoment, BarrierProb, DividendCdfAt, GainCountRuinPmf, GainCountTargetPmf, AggregateDividends
]


# ---- sampling ------------------------------------------------------------------------------
def sample_gain(gains: GainDistribution, uniform):
    """Invert the closed-form distribution function by bisection."""
    u = np.asarray(uniform, dtype=float)
    if np.any((u <= 0) | (u >= 1)):
        raise ValidationError("uniform input must lie in (0, 1)")
    lo = np.zeros_like(u)
    hi = np.full_like(u, 1.0 / min(gains.rates))
    for _ in range(200):
        short = gains.cdf(hi) < u
        if not np.any(short):
            break
        hi = np.where(short, 2.0 * hi, hi)
    else:
        raise NumericalError("could not bracket the gain quantile")
    for _ in range(200):
        if np.all(hi - lo <= BISECT_TOL * np.maximum(1.0, hi)):
            break
        mid = 0.5 * (lo + hi)
        below = gains.cdf(mid) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    else:
        raise NumericalError("gain quantile bisection did not converge")
    out = 0.5 * (lo + hi)
    return float(out) if out.ndim == 0 else out


def _gain_sampler(gains: GainDistribution):
    comps = gains.components
    if all(c.weight > 0 for c in comps):
        weights = np.array([c.weight for c in comps])
        weights = weights / weights.sum()
        shapes = np.array([c.shape for c in comps], dtype=float)
        scales = np.array([1.0 / c.rate for c in comps])

        def draw(rng: np.random.Generator, size: int) -> np.ndarray:
            if len(comps) == 1:
                return rng.gamma(shapes[0], scales[0], size)
            idx = rng.choice(len(comps), size=size, p=weights)
            return rng.gamma(shapes[idx], scales[idx])

        return draw

    def draw_signed(rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size)
        u = np.clip(u, 1e-300, 1.0 - 1e-16)
        return np.atleast_1d(sample_gain(gains, u))

    return draw_signed


class _Block:
    """Shared per-block state: RNG and samplers."""

    def __init__(self, spec: ModelSpec, rng: np.random.Generator):
        self.spec = spec
        self.rng = rng
        self._gain = _gain_sampler(spec.gains)

    def waits(self, size: int) -> np.ndarray:
        # sum of n exponential(lam) phases
        return self.rng.standard_exponential((size, self.spec.n)).sum(axis=1) / self.spec.lam

    def gains(self, size: int) -> np.ndarray:
        return self._gain(self.rng, size)


# ---- block kernels: each returns (values, censored) ---------------------------------------
def _first_passage(blk: _Block, u: float, size: int, cfg: SimulationConfig):
    """Race between ruin and the first jump above the barrier."""
    spec = blk.spec
    b = spec.require_barrier()
    c = spec.c
    x = np.full(size, float(u))
    t = np.zeros(size)
    tau = np.full(size, np.inf)
    amount = np.zeros(size)
    censored = np.zeros(size, dtype=bool)
    if u > b:
        tau[:] = 0.0
        amount[:] = u - b
        return tau, amount, censored
    if u == 0:
        return tau, amount, censored
    active = np.arange(size)
    events = 0
    horizon = cfg.horizon if cfg.horizon is not None else np.inf
    while active.size:
        if events >= cfg.max_events_per_path:
            censored[active] = True
            break
        w = blk.waits(active.size)
        xa = x[active] - c * w
        ruined = xa <= 0
        xa = xa + np.where(ruined, 0.0, blk.gains(active.size))
        t[active] += w
        over = (~ruined) & (xa > b)
        hit = active[over]
        tau[hit] = t[hit]
        amount[hit] = xa[over] - b
        x[active] = xa
        late = t[active] > horizon
        keep = ~(ruined | over | late)
        tau[active[late & over]] = np.inf
        active = active[keep]
        events += 1
    return tau, amount, censored


def _ruin_lt(blk: _Block, u: float, delta: float, size: int, cfg: SimulationConfig):
    c = blk.spec.c
    x = np.full(size, float(u))
    t = np.zeros(size)
    value = np.zeros(size)
    censored = np.zeros(size, dtype=bool)
    if u == 0:
        value[:] = 1.0
        return value, censored
    horizon = cfg.horizon if cfg.horizon is not None else np.inf
    active = np.arange(size)
    events = 0
    while active.size:
        if events >= cfg.max_events_per_path:
            censored[active] = True
            break
        w = blk.waits(active.size)
        xa = x[active] - c * w
        ruined = xa <= 0
        t_ruin = t[active] + x[active] / c
        ok = ruined & (t_ruin <= horizon)
        value[active[ok]] = np.exp(-delta * t_ruin[ok])
        t[active] += w
        xa = xa + np.where(ruined, 0.0, blk.gains(active.size))
        x[active] = xa
        keep = ~ruined & (t[active] <= horizon)
        if delta > 0:
            # ruin cannot occur before t + x/c, so the remaining contribution is bounded
            keep &= np.exp(-delta * (t[active] + xa / c)) >= DISCOUNT_FLOOR
        active = active[keep]
        events += 1
    return value, censored


def _gain_counts(blk: _Block, u: float, M: int, size: int, cfg: SimulationConfig, target: float | None):
    """Gains counted until ruin (``target is None``) or until the surplus first exceeds ``target``.

    Returns the count, or ``M + 1`` when it exceeds ``M``.
    """
    c = blk.spec.c
    x = np.full(size, float(u))
    count = np.zeros(size, dtype=np.int64)
    censored = np.zeros(size, dtype=bool)
    if target is None and u == 0:
        return count, censored
    if target is not None and u > target:
        raise ValidationError("the target must not lie below the initial surplus")
    t = np.zeros(size)
    horizon = cfg.horizon if cfg.horizon is not None else np.inf
    active = np.arange(size)
    events = 0
    while active.size:
        if events >= cfg.max_events_per_path:
            censored[active] = True
            break
        w = blk.waits(active.size)
        xa = x[active] - c * w
        t[active] += w
        if target is None:
            done = xa <= 0
            xa = xa + np.where(done, 0.0, blk.gains(active.size))
            count[active] += ~done
        else:
            xa = xa + blk.gains(active.size)
            count[active] += 1
            done = xa > target
        x[active] = xa
        late = t[active] > horizon
        count[active[late & ~done]] = M + 1
        keep = ~done & ~late & (count[active] <= M)
        active = active[keep]
        events += 1
    return np.minimum(count, M + 1), censored


def _aggregate(blk: _Block, u: float, delta: float, order: int, size: int, cfg: SimulationConfig):
    spec = blk.spec
    b = spec.require_barrier()
    c = spec.c
    x = np.full(size, float(u))
    t = np.zeros(size)
    total = np.zeros(size)
    censored = np.zeros(size, dtype=bool)
    if u > b:
        total[:] = u - b
        x[:] = b
    if u == 0:
        return total**order, censored
    horizon = cfg.horizon if cfg.horizon is not None else np.inf
    active = np.arange(size)
    events = 0
    while active.size:
        if events >= cfg.max_events_per_path:
            censored[active] = True
            break
        w = blk.waits(active.size)
        xa = x[active] - c * w
        ruined = xa <= 0
        t[active] += w
        xa = xa + np.where(ruined, 0.0, blk.gains(active.size))
        over = (~ruined) & (xa > b)
        ta = t[active]
        pay = over & (ta <= horizon)
        total[active[pay]] += np.exp(-delta * ta[pay]) * (xa[pay] - b)
        xa = np.where(over, b, xa)
        x[active] = xa
        keep = ~ruined & (ta <= horizon) & (np.exp(-delta * ta) >= DISCOUNT_FLOOR)
        active = active[keep]
        events += 1
    return total**order, censored


def _block_values(cfg: SimulationConfig, quantity: Quantity, u: float, blk: _Block, size: int):
    if isinstance(quantity, RuinLT):
        return _ruin_lt(blk, u, quantity.delta, size, cfg)
    if isinstance(quantity, (DiscountedDividendMoment, BarrierProb, DividendCdfAt)):
        tau, amount, censored = _first_passage(blk, u, size, cfg)
        reached = np.isfinite(tau)
        if isinstance(quantity, BarrierProb):
            return reached.astype(float), censored
        if isinstance(quantity, DividendCdfAt):
            xs = np.atleast_1d(np.asarray(quantity.x, dtype=float))
            return (reached[:, None] & (amount[:, None] <= xs[None, :])).astype(float), censored
        disc = np.where(reached, np.exp(-quantity.delta * np.where(reached, tau, 0.0)), 0.0)
        return disc * amount**quantity.k, censored
    if isinstance(quantity, (GainCountRuinPmf, GainCountTargetPmf)):
        target = None if isinstance(quantity, GainCountRuinPmf) else cfg.spec.require_barrier()
        count, censored = _gain_counts(blk, u, quantity.M, size, cfg, target)
        return (count[:, None] == np.arange(quantity.M + 1)[None, :]).astype(float), censored
    if isinstance(quantity, AggregateDividends):
        return _aggregate(blk, u, quantity.delta, quantity.order, size, cfg)
    raise ValidationError(f"unknown quantity {quantity!r}")


def _run_blocks(cfg: SimulationConfig, kernel) -> list:
    """Apply ``kernel(block, size)`` to every block in order, possibly on several threads."""
    sizes = []
    left = cfg.paths
    while left > 0:
        sizes.append(min(cfg.block_size, left))
        left -= sizes[-1]

    def one(job):
        index, size = job
        ss = np.random.SeedSequence(int(cfg.seed), spawn_key=(index,))
        blk = _Block(cfg.spec, np.random.Generator(np.random.Philox(ss)))
        return kernel(blk, size)

    jobs = list(enumerate(sizes))
    if cfg.workers == 1:
        return [one(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(one, jobs))


def _validate(cfg: SimulationConfig, quantity: Quantity, u: float) -> None:
    if not (math.isfinite(u) and u >= 0):
        raise ValidationError("initial surplus must be finite and nonnegative")
    needs_barrier = (DiscountedDividendMoment, BarrierProb, DividendCdfAt, GainCountTargetPmf, AggregateDividends)
    if isinstance(quantity, needs_barrier):
        cfg.spec.require_barrier()
    delta = getattr(quantity, "delta", 0.0)
    if delta < 0:
        raise ValidationError("delta must be nonnegative")
    if isinstance(quantity, AggregateDividends) and (delta <= 0 or quantity.order < 1):
        raise ValidationError("aggregate dividends need delta > 0 and order >= 1")
    if isinstance(quantity, (GainCountRuinPmf, GainCountTargetPmf)) and quantity.M < 0:
        raise ValidationError("M must be nonnegative")


def _reduce(values: np.ndarray) -> Estimate:
    n = values.size
    mean = math.fsum(values) / n
    if n > 1:
        var = math.fsum((values - mean) ** 2) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = 0.0
    return Estimate(mean, se, n)


def run(cfg: SimulationConfig, quantity: Quantity, u: float):
    """Estimate ``quantity`` from surplus ``u``.

    Returns one :class:`Estimate`, or a list of them for pmf and cdf quantities.
    Censored paths are dropped from every estimator; their fraction is reported.
    """
    u = float(u)
    _validate(cfg, quantity, u)
    results = _run_blocks(cfg, lambda blk, size: _block_values(cfg, quantity, u, blk, size))
    values = np.concatenate([v for v, _ in results])
    censored = np.concatenate([c for _, c in results])
    kept = values[~censored]
    frac = float(censored.mean())
    if kept.shape[0] == 0:
        raise NumericalError("every path was censored")
    if kept.ndim == 1:
        est = _reduce(kept)
        return Estimate(est.mean, est.std_error, est.n, frac)
    out = []
    for col in range(kept.shape[1]):
        est = _reduce(kept[:, col])
        out.append(Estimate(est.mean, est.std_error, est.n, frac))
    return out


def target_reach_probability(
    spec: ModelSpec, u: float, b: float, paths: int = 100_000, seed: int = 0, max_events: int = 2000
) -> Estimate:
    """``P(surplus ever exceeds b)`` with ruin ignored.

    Paths still below ``b`` after ``max_events`` gains count as never reaching it;
    their fraction is reported as ``censored_fraction``.
    """
    cfg = SimulationConfig(spec, paths=paths, seed=seed, max_events_per_path=max_events + 1)
    if u > b:
        return Estimate(1.0, 0.0, paths, 0.0)
    results = _run_blocks(cfg, lambda blk, size: _gain_counts(blk, u, max_events, size, cfg, b))
    count = np.concatenate([cnt for cnt, _ in results])
    reached = (count <= max_events).astype(float)
    est = _reduce(reached)
    return Estimate(est.mean, est.std_error, est.n, float(1.0 - est.mean))


# ---- single-path tracer ---------------------------------------------------------------------
def trace_path(
    spec: ModelSpec,
    u: float,
    rng: np.random.Generator,
    max_events: int = 10_000,
    horizon: float | None = None,
    target: float | None = None,
) -> PathOutcome:
    """Follow one path with full bookkeeping (dividends, ruin, gain counts).

    The path runs until ruin, ``max_events`` or ``horizon``.  Gains to ``target``
    are counted on a copy of the process that ignores ruin and the barrier.
    """
    b = spec.barrier
    c = spec.c
    blk = _Block(spec, rng)
    out = PathOutcome()
    x, t, gains = float(u), 0.0, 0
    free_x, free_gains = float(u), 0
    if b is not None and x > b:
        out.first_barrier_time, out.first_dividend = 0.0, x - b
        out.dividends.append((0.0, x - b))
        x = b
    if x == 0:
        out.ruin_time, out.gains_before_ruin = 0.0, 0
    events = 0
    while True:
        main_done = out.ruin_time is not None
        free_done = target is None or out.gains_to_target is not None
        if main_done and free_done:
            break
        if events >= max_events or (horizon is not None and t > horizon):
            out.censored = horizon is None
            break
        w = float(blk.waits(1)[0])
        g = float(blk.gains(1)[0])
        if not main_done:
            if x - c * w <= 0:
                out.ruin_time = t + x / c
                out.gains_before_ruin = gains
            else:
                x = x - c * w + g
                gains += 1
                if b is not None and x > b:
                    if out.first_barrier_time is None:
                        out.first_barrier_time, out.first_dividend = t + w, x - b
                    out.dividends.append((t + w, x - b))
                    x = b
        if not free_done:
            free_x = free_x - c * w + g
            free_gains += 1
            if free_x > target:
                out.gains_to_target = free_gains
        t += w
        events += 1
    return out
