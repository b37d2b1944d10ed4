"""Reference tables: built-in parameter sets, golden values and builders.

Each table is computed from the library and compared cell by cell with the
embedded reference values.  Ids ``"1"`` to ``"18"`` are the numbered tables;
``"C1"``, ``"C2"`` and ``"C3"`` are the combination-of-exponentials
counterparts of tables 1, 4 and 7.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import counts, dividends, divdist
from .model import ModelSpec, combexp_gains, erlang2_gains

DELTA = 0.02
ABS_TOL = 5e-4
SCI_RTOL = 5e-2


@dataclass(frozen=True)
class Cell:
    value: float
    golden: float | None
    sci: bool = False

    @property
    def abs_diff(self) -> float | None:
        return None if self.golden is None else abs(self.value - self.golden)

    def ok(self, tol: float = ABS_TOL) -> bool:
        if self.golden is None:
            return True
        if self.abs_diff > tol:
            return False
        if self.sci:
            return self.abs_diff <= SCI_RTOL * abs(self.golden)
        return True


@dataclass
class TableResult:
    table_id: str
    title: str
    row_name: str
    rows: list[str]
    columns: list[str]
    cells: list[list[Cell]]

    def max_abs_diff(self) -> float:
        diffs = [c.abs_diff for row in self.cells for c in row if c.abs_diff is not None]
        return max(diffs, default=0.0)

    def failures(self, tol: float = ABS_TOL) -> list[tuple[str, str, Cell]]:
        out = []
        for r, row in zip(self.rows, self.cells):
            for col, cell in zip(self.columns, row):
                if not cell.ok(tol):
                    out.append((r, col, cell))
        return out

    def passed(self, tol: float = ABS_TOL) -> bool:
        return not self.failures(tol)


@dataclass(frozen=True)
class TableDef:
    table_id: str
    title: str
    spec: ModelSpec
    row_name: str
    rows: list
    columns: list[str]
    golden: list[list]
    builder: Callable[["TableDef"], np.ndarray] = field(repr=False)

    def compute(self) -> TableResult:
        values = np.asarray(self.builder(self), dtype=float)
        cells = []
        for i, grow in enumerate(self.golden):
            row = []
            for j, g in enumerate(grow):
                sci = isinstance(g, str)
                gv = None if g is None else float(g)
                row.append(Cell(float(values[i, j]), gv, sci))
            cells.append(row)
        return TableResult(self.table_id, self.title, self.row_name, [_label(r) for r in self.rows], self.columns, cells)


def _label(r) -> str:
    if isinstance(r, tuple):
        return "(" + ",".join(_label(x) for x in r) + ")"
    if isinstance(r, float) and r.is_integer():
        return str(int(r))
    return str(r)


# ---- parameter sets ---------------------------------------------------------------------
def erlang_spec(c: float, lam: float = 2.0) -> ModelSpec:
    return ModelSpec(n=2, lam=lam, c=c, gains=erlang2_gains(), delta=DELTA)


def combexp_spec(c: float, lam: float = 2.0) -> ModelSpec:
    return ModelSpec(n=2, lam=lam, c=c, gains=combexp_gains(), delta=DELTA)


# ---- builders ----------------------------------------------------------------------------
def _barrier_rows(td: TableDef) -> np.ndarray:
    out = []
    for b in td.rows:
        s = td.spec.with_(barrier=float(b))
        out.append(
            [
                dividends.phi(s, 0, DELTA, b),
                dividends.phi(s, 1, DELTA, b),
                dividends.v_moment(s, 1, DELTA, b),
                divdist.chi(s, b),
            ]
        )
    return np.array(out)


def _pair_rows(td: TableDef) -> np.ndarray:
    out = []
    for u, b in td.rows:
        s = td.spec.with_(barrier=float(b))
        p1 = dividends.phi(s, 1, DELTA, u)
        p0 = dividends.phi(s, 0, DELTA, u)
        vb = dividends.v_moment(s, 1, DELTA, b)
        out.append([p1, p0, vb, p0 * vb, dividends.v_moment(s, 1, DELTA, u), divdist.chi(s, u)])
    return np.array(out)


def _g_grid(b: float, xs: list[float]):
    def build(td: TableDef) -> np.ndarray:
        s = td.spec.with_(barrier=b)
        return np.array([[divdist.G(s, u, x) for x in xs] for u in td.rows])

    return build


def _q_grid(us: list[float]):
    def build(td: TableDef) -> np.ndarray:
        return np.array([[counts.q(td.spec, u, m) for u in us] for m in td.rows])

    return build


def _r_grid(b: float, us: list[float]):
    def build(td: TableDef) -> np.ndarray:
        out = []
        for m in (1, 2):
            out.append([counts.r(td.spec, u, b, m) for u in us])
        out.append([counts.r_tail(td.spec, u, b, 2).value for u in us])
        return np.array(out)

    return build


# ---- golden values ----------------------------------------------------------------------------
B_ROWS = [1, 2, 3, 4, 5, 7, 9, 10]
PAIR_ROWS = [(1, 2), (1, 9), (3, 6), (5, 9)]
BARRIER_COLS = ["phi0(b)", "phi1(b)", "V(b,b)", "chi(b,b)"]
PAIR_COLS = ["phi1(u)", "phi0(u)", "V(b,b)", "phi0(u)*V(b,b)", "V(u,b)", "chi(u,b)"]
Q_US = [0, 0.2, 0.5, 0.7, 1, 3, 5, 10]
R_ROWS = ["1", "2", ">=3"]
R5_US = [0, 0.2, 0.5, 0.7, 1, 2, 3, 4, 5]
R10_US = [0, 0.2, 0.5, 0.7, 1, 3, 5, 8, 10]
R10_US_ALT = [0, 0.2, 0.7, 1, 3, 5, 8, 9, 10]

T1 = [
    [0.66445, 1.18567, 3.53353, 0.67466],
    [0.90939, 1.51352, 16.70411, 0.93280],
    [0.95824, 1.57111, 37.62031, 0.98707],
    [0.96715, 1.58134, 48.13442, 0.99755],
    [0.96874, 1.58316, 50.64987, 0.99954],
    [0.96908, 1.58354, 51.21171, 0.99998],
    [0.96909, 1.58355, 51.22976, 1.00000],
    [0.96909, 1.58355, 51.23025, 1.00000],
]
T2 = [
    [0.50218, 0.91481, 1.83765, 0.50822],
    [0.79762, 1.32791, 6.56131, 0.81577],
    [0.90491, 1.45485, 15.29962, 0.93251],
    [0.94222, 1.49649, 25.89859, 0.97527],
    [0.95513, 1.51064, 33.66764, 0.99092],
    [0.96116, 1.51719, 39.05850, 0.99877],
    [0.96188, 1.51798, 39.82178, 0.99983],
    [0.96194, 1.51805, 39.89141, 0.99994],
]
T3 = [
    [0.18569, 0.35710, 0.43853, 0.18677],
    [0.37520, 0.67356, 1.07805, 0.37956],
    [0.49632, 0.84771, 1.68302, 0.50504],
    [0.57398, 0.94912, 2.22789, 0.58756],
    [0.62610, 1.01327, 2.71002, 0.64473],
    [0.68915, 1.08716, 3.49733, 0.71788],
    [0.72393, 1.12633, 4.07993, 0.76240],
    [0.73554, 1.13917, 4.30751, 0.77865],
]
T4 = [
    [0.94704, 0.63804, 16.70411, 10.65792, 11.60496, 0.65587],
    [0.81080, 0.57189, 51.22976, 29.29770, 30.10850, 0.65537],
    [1.27723, 0.91397, 51.12592, 46.72777, 48.00500, 0.98639],
    [1.27042, 0.91014, 51.22976, 46.62648, 47.89690, 0.99951],
]
T5 = [
    [0.68765, 0.45254, 6.56131, 2.96927, 3.65691, 0.46254],
    [0.52816, 0.38404, 39.82178, 15.29300, 15.82116, 0.44598],
    [1.16429, 0.84462, 37.51689, 31.68760, 32.85189, 0.91918],
    [1.21507, 0.88320, 39.82178, 35.17081, 36.38588, 0.98898],
]
T6 = [
    [0.22002, 0.12751, 1.07805, 0.13747, 0.35748, 0.12863],
    [0.04402, 0.03084, 4.07993, 0.12582, 0.16984, 0.03465],
    [0.38458, 0.26199, 3.13178, 0.82050, 1.20507, 0.27667],
    [0.45775, 0.32041, 4.07993, 1.30723, 1.76498, 0.35670],
]
T7 = [
    [0.185349, 0.31486, 0.385064, 0.41919, 0.41919],
    [0.324635, 0.551758, 0.674932, 0.73482, 0.762214],
    [0.379865, 0.647155, 0.792408, 0.863104, 0.895462],
    [0.393353, 0.677656, 0.8336, 0.909861, 0.944866],
    [0.363765, 0.663592, 0.834962, 0.920472, 0.960195],
]
T8_XS = [1, 2, 3, 5, 7, 9, 10]
T8 = [
    [0.185125, 0.314405, 0.384471, 0.4341, 0.443882, 0.445621, 0.445828],
    [0.32454, 0.55118, 0.674011, 0.761016, 0.778164, 0.781213, 0.781576],
    [0.381331, 0.647632, 0.791958, 0.894188, 0.914338, 0.917919, 0.918347],
    [0.402645, 0.683834, 0.83623, 0.944175, 0.965452, 0.969233, 0.969685],
    [0.410505, 0.697198, 0.852579, 0.96264, 0.984334, 0.98819, 0.98865],
    [0.413332, 0.702069, 0.858571, 0.969433, 0.991285, 0.995169, 0.995633],
    [0.414052, 0.703625, 0.860646, 0.971903, 0.993837, 0.997736, 0.998202],
    [0.412789, 0.703074, 0.860789, 0.972672, 0.99475, 0.998676, 0.999145],
    [0.405047, 0.697517, 0.857887, 0.972288, 0.994959, 0.999, 0.999484],
    [0.367508, 0.669949, 0.842736, 0.968972, 0.994436, 0.999017, 0.999567],
]
# strings mark cells printed in scientific notation
T9 = [
    [1, 0.938448, 0.735759, 0.591833, 0.406006, 0.017351, 0.0004994, "4.33e-8"],
    [0, 0.014697, 0.054501, 0.075185, 0.090224, 0.021482, 0.0014293, "4.12e-7"],
    [0, 0.003270, 0.013852, 0.020929, 0.028787, 0.015305, 0.0018590, "1.47e-6"],
    [0, 0.001317, 0.005707, 0.008798, 0.012558, 0.009655, 0.0017568, "3.16e-6"],
    [0, 0.000655, 0.002866, 0.004454, 0.006455, 0.006024, 0.0014366, "4.97e-6"],
    [0, 0.000364, 0.001600, 0.002496, 0.003648, 0.003820, 0.0010973, "6.39e-6"],
]
T10 = [
    [0.01996, 0.02365, 0.03045, 0.03598, 0.04613, 0.10326, 0.22055, 0.43600, 0.74074],
    [0.08858, 0.09870, 0.11543, 0.12760, 0.14729, 0.22093, 0.28195, 0.26824, 0.13900],
    [0.89146, 0.87765, 0.85412, 0.83642, 0.80658, 0.67581, 0.49750, 0.29576, 0.12026],
]
T11 = [
    [0.00024, 0.00028, 0.00037, 0.00044, 0.00058, 0.00351, 0.01996, 0.22055, 0.74074],
    [0.00317, 0.00368, 0.00459, 0.00532, 0.00661, 0.02631, 0.08858, 0.28195, 0.13900],
    [0.99659, 0.99603, 0.99503, 0.99424, 0.99280, 0.97018, 0.89146, 0.49750, 0.12026],
]
T12 = [
    [0.01996, 0.02365, 0.03045, 0.03598, 0.0461, 0.10326, 0.22055, 0.43601, 0.74074],
    [0.08858, 0.09870, 0.11543, 0.12760, 0.14729, 0.22093, 0.28195, 0.26825, 0.14268],
    [0.89146, 0.87765, 0.85412, 0.83642, 0.80661, 0.67581, 0.4975, 0.29574, 0.11658],
]
T13 = [
    [0.00024, 0.00028, 0.00044, 0.00058, 0.00351, 0.01996, 0.22055, 0.43601, 0.74074],
    [0.00317, 0.00368, 0.00532, 0.00661, 0.02631, 0.08858, 0.28195, 0.26825, 0.14268],
    [0.99659, 0.99604, 0.99424, 0.99281, 0.97018, 0.89146, 0.4975, 0.29574, 0.11658],
]
T14 = [
    [1, 0.938448, 0.735759, 0.591833, 0.406006, 0.017351, 0.000499, "4.33e-8"],
    [0, 0.029024, 0.109012, 0.151509, 0.183614, 0.045564, 0.003096, "9.16e-7"],
    [0, 0.008061, 0.036744, 0.058105, 0.085016, 0.057740, 0.007781, "6.84e-6"],
    [0, 0.004065, 0.019192, 0.031352, 0.048728, 0.056886, 0.012810, 0.0000288],
    [0, 0.002546, 0.012179, 0.020153, 0.032137, 0.051174, 0.016812, 0.0000840],
    [0, 0.001784, 0.008590, 0.014309, 0.023133, 0.044676, 0.019397, 0.0001904],
]
T15 = [
    [0.00045, 0.00061, 0.00096, 0.00129, 0.00203, 0.00907, 0.04024, 0.17176, 0.59775],
    [0.00319, 0.00411, 0.00598, 0.00765, 0.01101, 0.03472, 0.09187, 0.15269, 0.14352],
    [0.99636, 0.99528, 0.99307, 0.99106, 0.98696, 0.95620, 0.86789, 0.67555, 0.25873],
]
T16 = [
    ["2.51e-7", "3.38e-7", "7.16e-7", "1.12e-6", "2.26e-5", 0.00045, 0.04024, 0.17176, 0.59775],
    ["3.80e-6", "5.01e-6", "1.00e-5", "1.52e-5", 0.00023, 0.00319, 0.09187, 0.15269, 0.14352],
    [0.999996, 0.99999, 0.99999, 0.99998, 0.99975, 0.99636, 0.86789, 0.67555, 0.25873],
]
T17 = [
    [0.00058, 0.00079, 0.00124, 0.00167, 0.00262, 0.01171, 0.05186, 0.21978, 0.59775],
    [0.00479, 0.00617, 0.00899, 0.01151, 0.01660, 0.05290, 0.14352, 0.26768, 0.17958],
    [0.99463, 0.99304, 0.98978, 0.98682, 0.98078, 0.93539, 0.80462, 0.51254, 0.22268],
]
T18 = [
    ["3.24e-7", "4.37e-7", "9.25e-7", "1.45e-6", "2.91e-5", 0.00058, 0.05186, 0.21978, 0.59775],
    ["5.64e-6", "7.46e-6", "1.49e-5", "2.26e-5", 0.00035, 0.00479, 0.14352, 0.26768, 0.17958],
    [0.99999, 0.99999, 0.99998, 0.99998, 0.99962, 0.99463, 0.80462, 0.51254, 0.22268],
]
C1 = [
    [0.62876, 0.49203, 1.32539, 0.65271],
    [0.81787, 0.64454, 3.53884, 0.85508],
    [0.88307, 0.69335, 5.92938, 0.93135],
    [0.90917, 0.71233, 7.84241, 0.96564],
    [0.92029, 0.72032, 9.03706, 0.98235],
    [0.92731, 0.72534, 9.97898, 0.99519],
    [0.92870, 0.72629, 10.18618, 0.99867],
    [0.92889, 0.72570, 10.20519, 0.99930],
]
C2 = [
    [0.32788, 0.45990, 3.82068, 1.75713, 2.08501, 0.47518],
    [0.13838, 0.23844, 13.60174, 3.24321, 3.38159, 0.36637],
    [0.48838, 0.68862, 12.70810, 8.75111, 9.23949, 0.83678],
    [0.49763, 0.70435, 13.60174, 9.58044, 10.07806, 0.95289],
]
C3 = [
    [0.171138, 0.325939, 0.366285, 0.375577, 0.377664],
    [0.310213, 0.590809, 0.663943, 0.680785, 0.684569],
    [0.384908, 0.733022, 0.823752, 0.844647, 0.849342],
    [0.425217, 0.808336, 0.908172, 0.931163, 0.936328],
    [0.473438, 0.854693, 0.953485, 0.976211, 0.981316],
]


def _cols(prefix: str, values) -> list[str]:
    return [f"{prefix}={_label(float(v))}" for v in values]


def _build_registry() -> dict[str, TableDef]:
    e075, e1, e21 = erlang_spec(0.75), erlang_spec(1.0), erlang_spec(2.1)
    x5 = [1, 2, 3, 4, 5]
    defs = [
        TableDef("1", "Barrier start, Erlang gains, c=0.75", e075, "b", B_ROWS, BARRIER_COLS, T1, _barrier_rows),
        TableDef("2", "Barrier start, Erlang gains, c=1", e1, "b", B_ROWS, BARRIER_COLS, T2, _barrier_rows),
        TableDef("3", "Barrier start, Erlang gains, c=2.1", e21, "b", B_ROWS, BARRIER_COLS, T3, _barrier_rows),
        TableDef("4", "Start below the barrier, Erlang gains, c=0.75", e075, "(u,b)", PAIR_ROWS, PAIR_COLS, T4, _pair_rows),
        TableDef("5", "Start below the barrier, Erlang gains, c=1", e1, "(u,b)", PAIR_ROWS, PAIR_COLS, T5, _pair_rows),
        TableDef("6", "Start below the barrier, Erlang gains, c=2.1", e21, "(u,b)", PAIR_ROWS, PAIR_COLS, T6, _pair_rows),
        TableDef("7", "G(u,5,x), Erlang gains, c=1", e1, "u", [1, 2, 3, 4, 5], _cols("x", x5), T7, _g_grid(5.0, x5)),
        TableDef("8", "G(u,10,x), Erlang gains, c=1", e1, "u", list(range(1, 11)), _cols("x", T8_XS), T8, _g_grid(10.0, T8_XS)),
        TableDef("9", "q(u,m), Erlang gains, c=1", e1, "m", list(range(6)), _cols("u", Q_US), T9, _q_grid(Q_US)),
        TableDef("10", "r(u,5,m), Erlang gains, c=1", e1, "m", R_ROWS, _cols("u", R5_US), T10, _r_grid(5.0, R5_US)),
        TableDef("11", "r(u,10,m), Erlang gains, c=1", e1, "m", R_ROWS, _cols("u", R10_US), T11, _r_grid(10.0, R10_US)),
        TableDef(
            "12", "r(u,5,m), Erlang gains, lambda=1, c=0.75", erlang_spec(0.75, lam=1.0), "m", R_ROWS,
            _cols("u", R5_US), T12, _r_grid(5.0, R5_US),
        ),
        TableDef(
            "13", "r(u,10,m), Erlang gains, lambda=1, c=0.75", erlang_spec(0.75, lam=1.0), "m", R_ROWS,
            _cols("u", R10_US_ALT), T13, _r_grid(10.0, R10_US_ALT),
        ),
        TableDef("14", "q(u,m), combined exponentials, c=1", combexp_spec(1.0), "m", list(range(6)), _cols("u", Q_US), T14, _q_grid(Q_US)),
        TableDef("15", "r(u,5,m), combined exponentials, c=0.75", combexp_spec(0.75), "m", R_ROWS, _cols("u", R5_US), T15, _r_grid(5.0, R5_US)),
        TableDef(
            "16", "r(u,10,m), combined exponentials, c=0.75", combexp_spec(0.75), "m", R_ROWS,
            _cols("u", R10_US_ALT), T16, _r_grid(10.0, R10_US_ALT),
        ),
        TableDef("17", "r(u,5,m), combined exponentials, c=0.5", combexp_spec(0.5), "m", R_ROWS, _cols("u", R5_US), T17, _r_grid(5.0, R5_US)),
        TableDef(
            "18", "r(u,10,m), combined exponentials, c=0.5", combexp_spec(0.5), "m", R_ROWS,
            _cols("u", R10_US_ALT), T18, _r_grid(10.0, R10_US_ALT),
        ),
        TableDef("C1", "Barrier start, combined exponentials, c=0.75", combexp_spec(0.75), "b", B_ROWS, BARRIER_COLS, C1, _barrier_rows),
        TableDef(
            "C2", "Start below the barrier, combined exponentials, c=0.75", combexp_spec(0.75), "(u,b)", PAIR_ROWS,
            PAIR_COLS, C2, _pair_rows,
        ),
        TableDef("C3", "G(u,5,x), combined exponentials, c=0.75", combexp_spec(0.75), "u", [1, 2, 3, 4, 5], _cols("x", x5), C3, _g_grid(5.0, x5)),
    ]
    return {d.table_id: d for d in defs}


TABLES = _build_registry()


def table_ids() -> list[str]:
    return list(TABLES)


def get(table_id) -> TableDef:
    key = str(table_id)
    if key not in TABLES:
        from .errors import ValidationError

        raise ValidationError(f"unknown table {table_id!r}; choose from {', '.join(TABLES)}")
    return TABLES[key]


def reproduce(table_id) -> TableResult:
    return get(table_id).compute()


def is_close(value: float, golden: float, sci: bool = False, tol: float = ABS_TOL) -> bool:
    return Cell(value, golden, sci).ok(tol)


def _fmt(x: float) -> str:
    if x != 0 and abs(x) < 1e-3:
        return f"{x:.6e}"
    return f"{x:.6f}" if abs(x) < 100 else f"{x:.5f}"


def format_float(x: float) -> str:
    return _fmt(x) if math.isfinite(x) else str(x)
