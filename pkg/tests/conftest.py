import numpy as np
import pytest

from dualrisk.model import GainDistribution, IncomeCondition, ModelSpec, income_condition
from dualrisk.tables import combexp_spec, erlang_spec

REGIMES = ("satisfied", "violated", "boundary")


def random_gains(rng: np.random.Generator) -> GainDistribution:
    kind = rng.integers(3)
    if kind == 0:
        return GainDistribution.erlang(int(rng.integers(1, 4)), float(rng.uniform(0.5, 2.5)))
    if kind == 1:
        # signed combination of exponentials with nonnegative density
        b1 = float(rng.uniform(0.5, 2.0))
        b2 = b1 * float(rng.uniform(1.5, 3.0))
        t = float(rng.uniform(0.1, 0.9)) * b1 / (b2 - b1)
        return GainDistribution([(1.0 + t, b1, 1), (-t, b2, 1)])
    w = float(rng.uniform(0.2, 0.8))
    return GainDistribution([(w, float(rng.uniform(0.5, 1.5)), 1), (1 - w, float(rng.uniform(1.6, 3.0)), 2)])


def random_spec(rng: np.random.Generator, regime: str, n_max: int = 3, barrier: float | None = None) -> ModelSpec:
    n = int(rng.integers(1, n_max + 1))
    lam = float(rng.uniform(0.8, 3.0))
    gains = random_gains(rng)
    c_boundary = gains.mean * lam / n
    factor = {"satisfied": rng.uniform(0.4, 0.85), "violated": rng.uniform(1.15, 2.0), "boundary": 1.0}[regime]
    spec = ModelSpec(n=n, lam=lam, c=float(c_boundary * factor), gains=gains, delta=float(rng.uniform(0.01, 0.2)),
                     barrier=barrier)
    expected = {"satisfied": IncomeCondition.SATISFIED, "violated": IncomeCondition.VIOLATED,
                "boundary": IncomeCondition.BOUNDARY}[regime]
    assert income_condition(spec) is expected
    return spec


def spec_family(seed: int, count: int, barrier: float | None = None, n_max: int = 3) -> list[ModelSpec]:
    """``count`` random specs cycling through the three income regimes."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        b = None if barrier is None else float(rng.uniform(1.0, barrier))
        out.append(random_spec(rng, REGIMES[i % 3], n_max=n_max, barrier=b))
    return out


@pytest.fixture
def spec_c1():
    return erlang_spec(1.0)


@pytest.fixture
def spec_c075():
    return erlang_spec(0.75)


@pytest.fixture
def spec_c21():
    return erlang_spec(2.1)


@pytest.fixture
def comb_c075():
    return combexp_spec(0.75)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[k])
