import numpy as np
import pytest
from scipy import integrate

from conftest import spec_family
from dualrisk import divdist, sim
from dualrisk.errors import ValidationError
from dualrisk.tables import combexp_spec, erlang_spec
from oracles import barrier_residual


def interior(b, num=20):
    return np.linspace(0.0, b, num + 2)[1:-1]


def test_cdf_monotone_with_limit_chi():
    for spec in spec_family(41, 6, barrier=6.0):
        us = interior(spec.barrier, 6)
        xs = np.linspace(0.0, 30.0, 31)
        vals = np.array([divdist.G(spec, us, x) for x in xs])
        assert np.all(np.diff(vals, axis=0) >= -1e-12)
        assert np.allclose(divdist.G(spec, us, 80.0), divdist.chi(spec, us), atol=1e-10)
        assert np.allclose(divdist.chi(spec, us) + divdist.xi(spec, us), 1.0)
        assert np.all((vals >= -1e-12) & (vals <= 1 + 1e-12))


def test_annihilator_and_transform_agree_random_points():
    rng = np.random.default_rng(5)
    specs = spec_family(42, 10, barrier=8.0)
    worst = 0.0
    for _ in range(50):
        spec = specs[int(rng.integers(len(specs)))]
        u = float(rng.uniform(0, spec.barrier))
        x = float(rng.uniform(0, 5))
        worst = max(worst, abs(divdist.G(spec, u, x) - divdist.G_via_lt(spec, u, x)))
    assert worst <= 1e-8


def test_density_is_derivative_of_cdf():
    spec = erlang_spec(1.0).with_(barrier=5.0)
    us = np.array([1.0, 2.5, 4.0])
    h = 1e-5
    for x in (0.3, 1.0, 2.5):
        fd = (divdist.G(spec, us, x + h) - divdist.G(spec, us, x - h)) / (2 * h)
        assert np.allclose(divdist.g_density(spec, us, x), fd, atol=1e-7)


def test_conditional_density_integrates_to_one():
    spec = combexp_spec(0.75).with_(barrier=5.0)
    for u in (1.0, 3.0):
        total = integrate.quad(lambda x: divdist.g_conditional(spec, u, x), 0, np.inf, limit=200)[0]
        assert total == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("idx", range(10))
def test_ide_residual(idx):
    spec = spec_family(43, 10, barrier=8.0)[idx]
    b = spec.barrier
    us = interior(b)
    for x in (None, 0.7, 2.0):
        left, right = divdist.ide_sides(spec, x)
        assert np.max(np.abs(left.evaluate(us) - right.evaluate(us))) <= 1e-7
        dist = divdist.DividendDistribution(spec)
        rep = dist.chi_rep() if x is None else dist.cdf_rep(x)
        outside = (lambda w: 1.0) if x is None else (lambda w, x=x: float(w - b <= x))
        for u in us[::5]:
            assert abs(barrier_residual(spec, rep, outside, 0.0, b, u)) <= 1e-7


def test_boundary_values():
    spec = erlang_spec(1.0).with_(barrier=5.0)
    assert divdist.G(spec, 0.0, 1.0) == 0.0
    assert divdist.chi(spec, 0.0) == 0.0
    assert divdist.G(spec, 6.0, 2.0) == 1.0
    assert divdist.G(spec, 6.0, 0.5) == 0.0
    assert divdist.chi(spec, 6.0) == 1.0
    with pytest.raises(ValidationError):
        divdist.g_density(spec, 6.0, 1.0)
    with pytest.raises(ValidationError):
        divdist.G(spec, 1.0, -1.0)


def test_against_simulation():
    spec = erlang_spec(1.0).with_(barrier=5.0)
    cfg = sim.SimulationConfig(spec, paths=100_000, seed=9)
    ests = sim.run(cfg, sim.DividendCdfAt((0.5, 1.0, 3.0)), 2.0)
    for x, est in zip((0.5, 1.0, 3.0), ests):
        assert abs(est.mean - divdist.G(spec, 2.0, x)) <= 4 * est.std_error
    est = sim.run(cfg, sim.BarrierProb(), 2.0)
    assert abs(est.mean - divdist.chi(spec, 2.0)) <= 4 * est.std_error
