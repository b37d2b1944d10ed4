import numpy as np
import pytest
from scipy import integrate, stats

from conftest import spec_family
from dualrisk import counts, ruin, sim
from dualrisk.errors import ValidationError
from dualrisk.model import IncomeCondition, income_condition
from dualrisk.tables import combexp_spec, erlang_spec
from oracles import tail_integral

US = np.linspace(0.0, 6.0, 13)


def test_q0_is_erlang_survival():
    for spec in spec_family(51, 6):
        ref = stats.gamma.sf(US / spec.c, a=spec.n, scale=1.0 / spec.lam)
        assert np.allclose(counts.q(spec, US, 0), ref, atol=1e-14)


def test_q1_closed_form():
    for spec in spec_family(52, 9, n_max=4) + [erlang_spec(1.0), combexp_spec(0.75)]:
        assert np.max(np.abs(counts.q(spec, US, 1) - counts.q1_closed_form(spec, US))) <= 1e-10


def test_q_transform_matches_quadrature():
    spec = combexp_spec(0.75)
    for m in (0, 1, 3):
        for s in (0.0, 0.7):
            ref = integrate.quad(lambda u: np.exp(-s * u) * counts.q(spec, u, m), 0, np.inf, limit=200)[0]
            assert complex(counts.q_lt(spec, s, m)).real == pytest.approx(ref, rel=1e-8, abs=1e-12)


def test_omega_q0_against_quadrature():
    spec = erlang_spec(1.0)
    for u in (0.0, 1.0, 2.5):
        ref = tail_integral(spec, lambda w: counts.q(spec, w, 0), u)
        assert counts.omega_q0(spec, u) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("idx", range(10))
def test_q_ide_residual(idx):
    spec = spec_family(53, 10)[idx]
    grid = np.linspace(0.3, 6.0, 20)
    for m in range(4):
        left, right = counts.ide_sides(spec, m)
        assert np.max(np.abs(left.evaluate(grid) - right.evaluate(grid))) <= 1e-7
        if m:
            prev = lambda w, m=m: counts.q(spec, w, m - 1)  # noqa: E731
            for u in grid[::5]:
                res = float(left.evaluate(u)) - tail_integral(spec, prev, u)
                assert abs(res) <= 1e-7
        for i in range(spec.n):
            if m:
                assert abs(counts.q_state(spec, m).q_rep.derivative(i).evaluate(0.0)) <= 1e-12


def test_q_sums_to_ruin_probability():
    for spec in (erlang_spec(0.75), erlang_spec(1.0)):
        for u in (0.5, 1.0, 3.0):
            total = counts.q_distribution(spec, u, 50).sum()
            assert abs(total - ruin.psi_ultimate(spec, u)) <= 1e-6


def test_r_sums_to_one_when_satisfied():
    for spec in (erlang_spec(0.75), erlang_spec(1.0)):
        assert income_condition(spec) is IncomeCondition.SATISFIED
        for v in (0.0, 1.0, 2.0):
            tail = counts.r_tail(spec, 0.0, v, 50)
            assert not tail.approximate
            assert tail.value <= 1e-6


def test_r_depends_on_gap_only():
    spec = erlang_spec(1.0)
    for m in (1, 2, 4):
        assert counts.r(spec, 1.0, 3.0, m) == pytest.approx(counts.r(spec, 4.0, 6.0, m), rel=1e-12)


def test_r00_recursion():
    for spec in (erlang_spec(1.0), erlang_spec(0.75), combexp_spec(0.75)):
        for m in range(2, 11):
            assert abs(counts.r(spec, 0.0, 0.0, m) - counts.r00_recursive(spec, m)) <= 1e-9


def test_r_chain_is_stable_for_signed_gains():
    # partial-fraction coefficients grow geometrically here; values must still decay
    spec = combexp_spec(0.75)
    vals = np.array([counts.r(spec, 0.0, 0.0, m) for m in range(20, 41)])
    assert np.all(vals > 0) and np.all(np.diff(vals) < 0)


def test_r1_against_quadrature():
    spec = combexp_spec(0.75)
    for v in (0.0, 1.5):
        ref = integrate.quad(
            lambda t: stats.gamma.pdf(t, a=spec.n, scale=1.0 / spec.a) * float(spec.gains.survival(v + t)), 0, np.inf
        )[0]
        assert counts.r(spec, 0.0, v, 1) == pytest.approx(ref, abs=1e-12)


def test_violated_tail_uses_simulation():
    spec = erlang_spec(2.1)
    tail = counts.r_tail(spec, 1.0, 3.0, 2, paths=20_000, seed=1)
    assert tail.approximate and tail.method == "simulation"
    assert 0.0 <= tail.value <= 1.0


def test_pmf_against_simulation():
    spec = erlang_spec(1.0).with_(barrier=3.0)
    cfg = sim.SimulationConfig(spec, paths=100_000, seed=2)
    ests = sim.run(cfg, sim.GainCountTargetPmf(3), 1.0)
    for m in (1, 2, 3):
        assert abs(ests[m].mean - counts.r(spec, 1.0, 3.0, m)) <= 4 * ests[m].std_error
    ests = sim.run(cfg, sim.GainCountRuinPmf(3), 1.0)
    for m in range(4):
        assert abs(ests[m].mean - counts.q(spec, 1.0, m)) <= 4 * ests[m].std_error


def test_invalid_counts():
    spec = erlang_spec(1.0)
    with pytest.raises(ValidationError):
        counts.q(spec, 1.0, -1)
    with pytest.raises(ValidationError):
        counts.q(spec, 1.0, 51)
    with pytest.raises(ValidationError):
        counts.r(spec, 4.0, 3.0, 1)
    with pytest.raises(ValidationError):
        counts.r(spec, 1.0, 3.0, 0)
