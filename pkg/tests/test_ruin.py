import numpy as np
import pytest

from conftest import spec_family
from dualrisk import ruin
from dualrisk.errors import ValidationError
from dualrisk.model import IncomeCondition, income_condition
from oracles import operator_left, tail_integral

GRID = np.linspace(0.25, 6.0, 20)


def test_zero_surplus_is_immediate_ruin(spec_c1):
    assert ruin.psi(spec_c1, 0.02, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert ruin.psi_ultimate(spec_c1, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_reference_value(spec_c1):
    # checked against 2e5-path simulation: 0.53805 +- 0.0011
    assert ruin.psi(spec_c1, 0.02, 1.0) == pytest.approx(0.537671, abs=1e-6)


def test_violated_and_boundary_ruin_is_certain():
    for spec in spec_family(5, 9):
        if income_condition(spec) is IncomeCondition.SATISFIED:
            continue
        assert np.allclose(ruin.psi_ultimate(spec, GRID), 1.0, atol=1e-10)


def test_satisfied_ruin_probability_decreases():
    for spec in spec_family(5, 9)[::3]:
        vals = ruin.psi_ultimate(spec, GRID)
        assert np.all(np.diff(vals) < 0)
        assert np.all((vals > 0) & (vals < 1))


def test_transform_below_probability():
    for spec in spec_family(6, 6):
        assert np.all(ruin.psi(spec, spec.delta, GRID) <= ruin.psi_ultimate(spec, GRID) + 1e-12)


@pytest.mark.parametrize("idx", range(10))
def test_ide_residual_formal_and_quadrature(idx):
    spec = spec_family(21, 10)[idx]
    for delta in (spec.delta, 0.0):
        tr = ruin.ruin_transform(spec, delta)
        left, right = ruin.ide_sides(tr)
        assert np.max(np.abs(left.evaluate(GRID) - right.evaluate(GRID))) <= 1e-7
        f = tr.representation
        for u in GRID[::4]:
            res = operator_left(spec, f, u, delta) - tail_integral(spec, lambda w: float(f.evaluate(w)), u)
            assert abs(res) <= 1e-7


def test_negative_surplus_rejected(spec_c1):
    with pytest.raises(ValidationError):
        ruin.psi(spec_c1, 0.02, -1.0)
