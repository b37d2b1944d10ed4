import math

import numpy as np
import pytest

from dualrisk import dividends, ruin, sim
from dualrisk.errors import ValidationError
from dualrisk.model import GainDistribution, combexp_gains
from dualrisk.tables import combexp_spec, erlang_spec


def test_sample_gain_inverts_cdf():
    exp1 = GainDistribution.exponential(1.0)
    assert sim.sample_gain(exp1, 1 - math.exp(-1)) == pytest.approx(1.0, abs=1e-10)
    assert sim.sample_gain(exp1, 1e-12) < 1e-10
    us = np.linspace(0.01, 0.99, 50)
    xs = sim.sample_gain(combexp_gains(), us)
    assert np.all(np.diff(xs) > 0)
    assert np.allclose(combexp_gains().cdf(xs), us, atol=1e-11)
    with pytest.raises(ValidationError):
        sim.sample_gain(exp1, 1.0)


def test_signed_mixture_mean():
    rng = np.random.default_rng(0)
    draws = sim.sample_gain(combexp_gains(), rng.random(1_000_000))
    se = draws.std(ddof=1) / math.sqrt(draws.size)
    assert abs(draws.mean() - 1.0) <= 3 * se


def test_zero_surplus_ruins_immediately(spec_c1):
    est = sim.run(sim.SimulationConfig(spec_c1, paths=1000), sim.RuinLT(0.02), 0.0)
    assert est.mean == 1.0 and est.std_error == 0.0


@pytest.mark.parametrize(
    "quantity",
    [sim.RuinLT(0.02), sim.DiscountedDividendMoment(1, 0.02), sim.DividendCdfAt((0.5, 2.0)),
     sim.GainCountRuinPmf(3), sim.GainCountTargetPmf(3), sim.AggregateDividends(0.05, 1)],
)
def test_identical_across_worker_counts(quantity):
    spec = erlang_spec(2.1).with_(barrier=3.0)
    base = sim.SimulationConfig(spec, paths=30_000, seed=17, block_size=4096)
    one = sim.run(base, quantity, 1.0)
    many = sim.run(sim.SimulationConfig(spec, paths=30_000, seed=17, block_size=4096, workers=4), quantity, 1.0)
    assert one == many


def test_seed_changes_estimate(spec_c1):
    a = sim.run(sim.SimulationConfig(spec_c1, paths=5000, seed=1), sim.RuinLT(0.02), 1.0)
    b = sim.run(sim.SimulationConfig(spec_c1, paths=5000, seed=2), sim.RuinLT(0.02), 1.0)
    assert a != b


def test_ruin_transform_against_analytic(spec_c21):
    est = sim.run(sim.SimulationConfig(spec_c21, paths=100_000, seed=4), sim.RuinLT(0.05), 1.5)
    assert abs(est.mean - ruin.psi(spec_c21, 0.05, 1.5)) <= 4 * est.std_error


def test_violated_spec_always_ruins(spec_c21):
    est = sim.run(sim.SimulationConfig(spec_c21, paths=20_000, seed=5), sim.RuinLT(0.0), 2.0)
    assert est.mean == 1.0
    assert est.censored_fraction < 1e-4


def test_barrier_or_ruin_first():
    spec = erlang_spec(1.0).with_(barrier=3.0)
    prob = sim.run(sim.SimulationConfig(spec, paths=40_000, seed=6), sim.BarrierProb(), 1.0)
    rng = np.random.default_rng(7)
    n = 10_000
    ruin_first = 0
    for _ in range(n):
        out = sim.trace_path(spec, 1.0, rng)
        if out.first_barrier_time is None or (out.ruin_time is not None and out.ruin_time < out.first_barrier_time):
            ruin_first += 1
    frac = ruin_first / n
    se = math.hypot(prob.std_error, math.sqrt(frac * (1 - frac) / n))
    assert abs(prob.mean + frac - 1.0) <= 3 * se


def test_trace_path_dividends_sum_matches_v():
    spec = erlang_spec(2.1).with_(barrier=2.0)
    d = 0.05
    rng = np.random.default_rng(8)
    totals = []
    for _ in range(20_000):
        out = sim.trace_path(spec, 1.0, rng)
        totals.append(math.fsum(math.exp(-d * t) * amt for t, amt in out.dividends))
    totals = np.array(totals)
    se = totals.std(ddof=1) / math.sqrt(totals.size)
    assert abs(totals.mean() - dividends.v_moment(spec, 1, d, 1.0)) <= 4 * se


def test_censoring_is_reported():
    spec = erlang_spec(0.75).with_(barrier=14.0)
    cfg = sim.SimulationConfig(spec, paths=2000, seed=3, max_events_per_path=5)
    est = sim.run(cfg, sim.BarrierProb(), 10.0)
    assert 0.05 < est.censored_fraction < 0.95
    assert est.n == round(2000 * (1 - est.censored_fraction))


def test_signed_gains_simulation(comb_c075):
    spec = comb_c075.with_(barrier=2.0)
    est = sim.run(sim.SimulationConfig(spec, paths=50_000, seed=10), sim.DiscountedDividendMoment(0, 0.02), 1.0)
    assert abs(est.mean - dividends.phi(spec, 0, 0.02, 1.0)) <= 4 * est.std_error


def test_validation(spec_c1):
    cfg = sim.SimulationConfig(spec_c1, paths=100)
    with pytest.raises(ValidationError):
        sim.run(cfg, sim.BarrierProb(), 1.0)
    with pytest.raises(ValidationError):
        sim.run(cfg, sim.RuinLT(0.02), -1.0)
    with pytest.raises(ValidationError):
        sim.run(cfg.__class__(spec_c1.with_(barrier=2.0), paths=100), sim.AggregateDividends(0.0), 1.0)
