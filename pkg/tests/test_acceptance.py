"""Acceptance criteria, one test each.

Every test records a one-line verdict in ``VERDICTS``; the terminal summary
hook in ``conftest.py`` prints them after the run, and running this file as a
script prints them directly.
"""

import sys
import time

import numpy as np
from scipy import stats

from conftest import spec_family
from dualrisk import counts, divdist, dividends, lundberg, ruin, sim, tables
from dualrisk.model import IncomeCondition, income_condition
from oracles import barrier_residual, operator_left, tail_integral

VERDICTS: dict[int, str] = {}
MC_PATHS = 1_000_000
MC_SEED = 2024


def record(number: int, ok: bool, detail: str) -> None:
    VERDICTS[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    assert ok, VERDICTS[number]


# ---- 1 --------------------------------------------------------------------------------------
ANALYTIC = [str(k) for k in list(range(1, 9)) + list(range(10, 14)) + list(range(15, 19))]


def test_criterion_1_analytic_tables():
    bad, slow, total_cells = [], [], 0
    for tid in ANALYTIC:
        start = time.perf_counter()
        res = tables.reproduce(tid)
        elapsed = time.perf_counter() - start
        total_cells += sum(c.golden is not None for row in res.cells for c in row)
        fails = res.failures(tables.ABS_TOL)
        if fails:
            bad.append(f"T{tid}:{len(fails)}")
        if elapsed >= 10.0:
            slow.append(f"T{tid}:{elapsed:.1f}s")
    n_bad = sum(int(b.split(":")[1]) for b in bad)
    detail = f"{total_cells - n_bad}/{total_cells} cells within {tables.ABS_TOL:g}"
    if bad:
        detail += "; mismatching cells per table " + " ".join(bad)
    if slow:
        detail += "; slow " + " ".join(slow)
    record(1, not bad and not slow, detail)


# ---- 2 --------------------------------------------------------------------------------------
def test_criterion_2_gain_count_tables():
    worst = 0.0
    fails = 0
    for tid in ("9", "14"):
        res = tables.reproduce(tid)
        fails += len(res.failures())
        worst = max(worst, res.max_abs_diff())
    record(2, fails == 0, f"tables 9 and 14: {fails} mismatching cells, max abs diff {worst:.2e}")


# ---- 3 --------------------------------------------------------------------------------------
def test_criterion_3_closed_forms():
    specs = spec_family(301, 9, barrier=8.0) + [tables.erlang_spec(1.0).with_(barrier=5.0),
                                               tables.combexp_spec(0.75).with_(barrier=5.0)]
    us = np.linspace(0.0, 8.0, 17)
    q0_err = max(
        np.max(np.abs(counts.q(s, us, 0) - stats.gamma.sf(us / s.c, a=s.n, scale=1.0 / s.lam))) for s in specs
    )
    q1_err = max(np.max(np.abs(counts.q(s, us, 1) - counts.q1_closed_form(s, us))) for s in specs)
    rng = np.random.default_rng(303)
    g_err = 0.0
    for _ in range(50):
        s = specs[int(rng.integers(len(specs)))]
        u, x = float(rng.uniform(0, s.barrier)), float(rng.uniform(0, 6))
        g_err = max(g_err, abs(divdist.G(s, u, x) - divdist.G_via_lt(s, u, x)))
    r_err = 0.0
    for s in (tables.erlang_spec(1.0), tables.erlang_spec(0.75), tables.combexp_spec(0.75)):
        for m in range(2, 11):
            r_err = max(r_err, abs(counts.r(s, 0.0, 0.0, m) - counts.r00_recursive(s, m)))
    ok = q0_err <= 1e-14 and q1_err <= 1e-10 and g_err <= 1e-8 and r_err <= 1e-9
    record(3, ok, f"q0 {q0_err:.1e}, q1 {q1_err:.1e}, G methods {g_err:.1e} (50 points), r(0,0,m) {r_err:.1e}")


# ---- 4 --------------------------------------------------------------------------------------
def test_criterion_4_ide_residuals():
    specs = spec_family(401, 10, barrier=8.0)
    regimes = {income_condition(s) for s in specs}
    worst = {"psi": 0.0, "phi": 0.0, "G": 0.0, "q": 0.0}
    for s in specs:
        b = s.barrier
        inside = np.linspace(0.0, b, 22)[1:-1]
        free = np.linspace(0.3, 8.0, 20)
        for delta in (s.delta, 0.0):
            f = ruin.ruin_transform(s, delta).representation
            for u in free:
                res = operator_left(s, f, u, delta) - tail_integral(s, lambda w: float(f.evaluate(w)), u)
                worst["psi"] = max(worst["psi"], abs(res))
        for k in range(3):
            tr = dividends.dividend_transform(s, k, s.delta)
            rep = tr.in_u()
            scale = max(1.0, float(np.max(np.abs(tr(inside)))))
            for u in inside:
                res = barrier_residual(s, rep, lambda w, k=k: (w - b) ** k, s.delta, b, u)
                worst["phi"] = max(worst["phi"], abs(res) / scale)
        dist = divdist.DividendDistribution(s)
        for x in (0.5, 2.0):
            rep = dist.cdf_rep(x)
            for u in inside:
                res = barrier_residual(s, rep, lambda w, x=x: float(w - b <= x), 0.0, b, u)
                worst["G"] = max(worst["G"], abs(res))
        for m in (1, 2, 3):
            f = counts.q_state(s, m).q_rep
            for u in free:
                # c / lam = 1 / a, so the delta = 0 operator is (I + D/a)**n
                res = operator_left(s, f, u, 0.0) - tail_integral(s, lambda w, m=m: counts.q(s, w, m - 1), u)
                worst["q"] = max(worst["q"], abs(res))
    ok = max(worst.values()) <= 1e-7 and len(regimes) == 3
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    record(4, ok, f"max residual over 10 specs ({len(regimes)} income regimes, 20 points each): {detail}")


# ---- 5 --------------------------------------------------------------------------------------
def test_criterion_5_probability_structure():
    msgs, ok = [], True
    specs = spec_family(501, 6, barrier=6.0)
    mono = 0.0
    lim = 0.0
    for s in specs:
        us = np.linspace(0.0, s.barrier, 9)[1:]
        vals = np.array([divdist.G(s, us, x) for x in np.linspace(0, 40, 41)])
        mono = max(mono, float(np.max(-np.diff(vals, axis=0))))
        lim = max(lim, float(np.max(np.abs(divdist.G(s, us, 80.0) - divdist.chi(s, us)))))
        lim = max(lim, float(np.max(np.abs(divdist.chi(s, us) + divdist.xi(s, us) - 1.0))))
    ok &= mono <= 1e-12 and lim <= 1e-10
    msgs.append(f"G monotone (worst drop {max(mono, 0):.1e}), G->chi and chi+xi=1 ({lim:.1e})")
    q_gap = 0.0
    for s in (tables.erlang_spec(0.75), tables.erlang_spec(1.0)):
        for u in (0.5, 1.0, 3.0):
            q_gap = max(q_gap, abs(counts.q_distribution(s, u, 50).sum() - ruin.psi_ultimate(s, u)))
    ok &= q_gap <= 1e-6
    msgs.append(f"sum q - psi {q_gap:.1e}")
    r_tail = 0.0
    for s in (tables.erlang_spec(0.75), tables.erlang_spec(1.0)):
        for v in (0.0, 1.0, 2.0):
            r_tail = max(r_tail, counts.r_tail(s, 0.0, v, 50).value)
    ok &= r_tail <= 1e-6
    msgs.append(f"r tail {r_tail:.1e}")
    psi_gap = 0.0
    for s in spec_family(502, 12):
        if income_condition(s) is IncomeCondition.VIOLATED:
            psi_gap = max(psi_gap, float(np.max(np.abs(ruin.psi_ultimate(s, np.linspace(0, 10, 11)) - 1.0))))
    ok &= psi_gap <= 1e-12
    msgs.append(f"violated psi = 1 ({psi_gap:.1e})")
    record(5, ok, "; ".join(msgs))


# ---- 6 --------------------------------------------------------------------------------------
def _mc_pairs():
    c1b5 = tables.erlang_spec(1.0).with_(barrier=5.0)
    c21b2 = tables.erlang_spec(2.1).with_(barrier=2.0)
    c1b3 = tables.erlang_spec(1.0).with_(barrier=3.0)
    c21 = tables.erlang_spec(2.1)
    return [
        ("psi(1.5, 0.05), c=2.1", c21, sim.RuinLT(0.05), 1.5, [ruin.psi(c21, 0.05, 1.5)]),
        ("phi0, phi1 at u=2, b=5, c=1", c1b5, (sim.DiscountedDividendMoment(0, 0.02), sim.DiscountedDividendMoment(1, 0.02)),
         2.0, [dividends.phi(c1b5, 0, 0.02, 2.0), dividends.phi(c1b5, 1, 0.02, 2.0)]),
        ("V(1; 2, 0.05), c=2.1", c21b2, sim.AggregateDividends(0.05, 1), 1.0, [dividends.v_moment(c21b2, 1, 0.05, 1.0)]),
        ("G(2, 5; x), x=0.5,1,3, c=1", c1b5, sim.DividendCdfAt((0.5, 1.0, 3.0)), 2.0,
         [divdist.G(c1b5, 2.0, x) for x in (0.5, 1.0, 3.0)]),
        ("q(1, m), m<=4, c=1", c1b5, sim.GainCountRuinPmf(4), 1.0, [counts.q(c1b5, 1.0, m) for m in range(5)]),
        ("r(1, 3, m), m<=3, c=1", c1b3, sim.GainCountTargetPmf(3), 1.0, [0.0] + [counts.r(c1b3, 1.0, 3.0, m) for m in (1, 2, 3)]),
    ]


def test_criterion_6_monte_carlo():
    start = time.perf_counter()
    worst, lines = 0.0, []
    for label, spec, quantity, u, exact in _mc_pairs():
        cfg = sim.SimulationConfig(spec, paths=MC_PATHS, seed=MC_SEED, workers=4)
        ests = []
        for q in quantity if isinstance(quantity, tuple) else (quantity,):
            out = sim.run(cfg, q, u)
            ests.extend(out if isinstance(out, list) else [out])
        z = max(abs(e.mean - x) / e.std_error if e.std_error > 0 else (0.0 if e.mean == x else np.inf)
                for e, x in zip(ests, exact))
        worst = max(worst, z)
        lines.append(f"{label} z={z:.2f}")
    elapsed = time.perf_counter() - start
    ok = worst <= 3.0 and elapsed < 300
    record(6, ok, f"{len(lines)} pairs at {MC_PATHS:.0e} paths, max |z| {worst:.2f}, {elapsed:.0f}s ({'; '.join(lines)})")


# ---- 7 --------------------------------------------------------------------------------------
def test_criterion_7_root_structure():
    mismatches, worst = 0, 0.0
    for s in spec_family(701, 50, n_max=5):
        for delta in (s.delta, 0.0):
            rs = lundberg.solve(s, delta)
            mismatches += rs.counts != lundberg.expected_counts(s, delta)
            worst = max(worst, rs.residual)
    record(7, mismatches == 0 and worst <= 1e-9,
           f"50 specs x 2 deltas: {mismatches} count mismatches, max residual {worst:.1e}")


# ---- 8 --------------------------------------------------------------------------------------
def test_criterion_8_determinism():
    spec = tables.erlang_spec(1.0).with_(barrier=3.0)
    quantities = [sim.RuinLT(0.02), sim.DiscountedDividendMoment(1, 0.02), sim.BarrierProb(), sim.DividendCdfAt(1.0),
                  sim.GainCountRuinPmf(3), sim.GainCountTargetPmf(3), sim.AggregateDividends(0.05, 2)]
    differ = []
    for q in quantities:
        runs = [sim.run(sim.SimulationConfig(spec, paths=40_000, seed=99, block_size=4096, workers=w), q, 1.0)
                for w in (1, 3, 8)]
        if not (runs[0] == runs[1] == runs[2]):
            differ.append(type(q).__name__)
    record(8, not differ, f"{len(quantities)} quantities identical for 1, 3 and 8 workers" if not differ
           else "differ: " + ", ".join(differ))


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    for t in tests:
        try:
            t()
        except AssertionError:
            pass
    for k in sorted(VERDICTS):
        print(VERDICTS[k])
    sys.exit(0 if all("PASS" in v for v in VERDICTS.values()) else 1)
