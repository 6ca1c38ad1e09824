"""Parameter sweeps of the steady-state magnetisation.

A sweep varies one of ``omega``, ``nu`` or ``beta`` over a grid and records
the period-averaged magnetisation at every point. Grid points are
independent and are farmed out to a process pool; rows always come back in
grid order, so the output does not depend on the worker count.
"""

from __future__ import annotations

import ast
import csv
import io
import math
import operator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .evolution import (
    DEFAULT_MAX_PERIODS,
    DEFAULT_TOLERANCE,
    NotConverged,
    PeriodicSolution,
    harmonic_balance_steady_state,
    steady_state,
)
from .operators import DriveWaveform, Harmonic, SystemKind, SystemSpec
from .spectrum import RangeTooNarrow, frozen_levels, min_gap_scan
from .thermal import TargetMode, ThermalParams

__all__ = [
    "ConfigError",
    "EmptySweep",
    "InsufficientPoints",
    "Grid",
    "SolverOptions",
    "SweepConfig",
    "SweepRow",
    "SweepResult",
    "default_omega_grid",
    "solve_point",
    "run_sweep",
    "refine_peaks",
    "inl_metric",
    "fit_scaling_exponent",
    "write_csv",
    "parse_value",
    "parse_config_text",
    "load_config",
    "config_from_mapping",
    "CSV_COLUMNS",
    "CONFIG_DEFAULTS",
]

AXES = ("omega", "nu", "beta")
CSV_COLUMNS = ("axis", "Sx_avg", "Sy_avg", "Sz_avg", "converged", "periods", "residual")
COMPONENTS = {"Sx": 0, "Sy": 1, "Sz": 2}


class ConfigError(ValueError):
    pass


class EmptySweep(ValueError):
    pass


class InsufficientPoints(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    points: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.points < 2:
            raise ConfigError("a grid needs at least 2 points")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"unknown spacing {self.spacing!r}")
        if self.spacing == "log" and not (self.start > 0 and self.stop > 0):
            raise ConfigError("log spacing needs positive start and stop")

    def values(self) -> np.ndarray:
        """Grid points in ascending order."""
        if self.spacing == "log":
            return np.sort(np.geomspace(self.start, self.stop, self.points))
        return np.sort(np.linspace(self.start, self.stop, self.points))


@dataclass(frozen=True)
class SolverOptions:
    method: str = "harmonic_balance"
    steps_per_period: int | None = None
    tolerance: float = DEFAULT_TOLERANCE
    max_periods: int = DEFAULT_MAX_PERIODS
    n_harmonics: int | None = None

    def __post_init__(self):
        if self.method not in ("timestep", "harmonic_balance"):
            raise ConfigError(f"unknown solver method {self.method!r}")


@dataclass(frozen=True)
class SweepConfig:
    """Everything needed to reproduce a sweep.

    ``grid=None`` on an omega sweep selects :func:`default_omega_grid`.
    """

    system: SystemSpec
    thermal: ThermalParams
    axis: str = "omega"
    grid: Grid | None = None
    solver: SolverOptions = SolverOptions()
    output: str | None = None
    columns: tuple[str, ...] = CSV_COLUMNS
    workers: int = 1
    refine_peaks: bool = True

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}")
        if self.grid is None and self.axis != "omega":
            raise ConfigError(f"a {self.axis} sweep needs an explicit grid")
        unknown = set(self.columns) - set(CSV_COLUMNS)
        if unknown:
            raise ConfigError(f"unknown output columns {sorted(unknown)}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def grid_values(self) -> np.ndarray:
        if self.grid is None:
            return default_omega_grid(self.system)
        return self.grid.values()

    def point(self, value: float) -> tuple[SystemSpec, ThermalParams]:
        if self.axis == "omega":
            return self.system.with_omega(value), self.thermal
        return self.system, replace(self.thermal, **{self.axis: value})


@dataclass(frozen=True)
class SweepRow:
    axis: float
    sx: float
    sy: float
    sz: float
    converged: bool
    periods: int
    residual: float
    trace_error: float = 0.0
    hermiticity_error: float = 0.0

    @property
    def averages(self) -> np.ndarray:
        return np.array([self.sx, self.sy, self.sz])

    def value(self, column: str):
        return {
            "axis": self.axis, "Sx_avg": self.sx, "Sy_avg": self.sy, "Sz_avg": self.sz,
            "converged": self.converged, "periods": self.periods, "residual": self.residual,
        }[column]


@dataclass
class SweepResult:
    axis: str
    rows: list[SweepRow]
    peaks: list[SweepRow] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([r.value(name) for r in self.rows])


def default_omega_grid(spec: SystemSpec, start: float = 0.05, stop: float = 8.0,
                       log_points: int = 200, window_points: int = 100,
                       window: float = 0.1) -> np.ndarray:
    """200 log-spaced frequencies plus dense windows around expected resonances.

    Windows of ``+-10 %`` are centred on ``h0`` and, for a spin pair, on the
    smallest triplet splitting and the outer triplet splitting at the frozen
    field where that smallest splitting occurs.
    """
    centres = [abs(spec.h0)]
    if spec.kind is SystemKind.PAIR:
        amp = max(spec.drive.total_amplitude, 1e-3)
        try:
            h_star, gap = min_gap_scan(spec, (0, 1), (-amp, amp), resolution=2001)
            levels = frozen_levels(spec, h_star, "triplet")
            centres += [gap, levels[2] - levels[0]]
        except RangeTooNarrow:
            pass
    parts = [np.geomspace(start, stop, log_points)]
    for c in centres:
        if c > 0:
            parts.append(np.linspace(c * (1 - window), c * (1 + window), window_points))
    grid = np.unique(np.concatenate(parts))
    return grid[(grid >= start) & (grid <= stop)]


def solve_point(spec: SystemSpec, params: ThermalParams, solver: SolverOptions) -> PeriodicSolution:
    """Steady state at one parameter point; non-convergence is not fatal."""
    if solver.method == "harmonic_balance":
        return harmonic_balance_steady_state(spec, params, solver.n_harmonics)
    try:
        return steady_state(spec, params, steps_per_period=solver.steps_per_period,
                            tol=solver.tolerance, max_periods=solver.max_periods)
    except NotConverged as exc:
        return exc.solution


def _row(value: float, sol: PeriodicSolution) -> SweepRow:
    sx, sy, sz = (float(v) for v in sol.averages)
    return SweepRow(float(value), sx, sy, sz, bool(sol.converged), int(sol.periods_used),
                    float(sol.residual), float(sol.trace_error), float(sol.hermiticity_error))


def _evaluate(args) -> SweepRow:
    config, value = args
    spec, params = config.point(value)
    return _row(value, solve_point(spec, params, config.solver))


def run_sweep(config: SweepConfig) -> SweepResult:
    """Evaluate every grid point; omega sweeps also get refined peaks and I_NL."""
    values = config.grid_values()
    tasks = [(config, float(v)) for v in values]
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_evaluate, tasks, chunksize=max(1, len(tasks) // (4 * config.workers))))
    else:
        rows = [_evaluate(t) for t in tasks]
    result = SweepResult(config.axis, rows)
    if config.axis == "omega":
        if config.refine_peaks:
            result.peaks = refine_peaks(result, config)
        result.metrics["i_nl"] = inl_metric(result)
        result.metrics["peak_positions"] = [(p.axis, abs(p.sy)) for p in result.peaks] or \
            [(r.axis, abs(r.sy)) for r in _local_maxima(result.rows)]
    return result


def _local_maxima(rows: list[SweepRow], component: int = 1) -> list[SweepRow]:
    y = np.abs([r.averages[component] for r in rows])
    idx = [i for i in range(len(y))
           if (i == 0 or y[i] >= y[i - 1]) and (i == len(y) - 1 or y[i] >= y[i + 1])]
    return [rows[i] for i in idx]


def refine_peaks(result: SweepResult, config: SweepConfig, n_peaks: int = 4,
                 scan_points: int = 41, xatol: float = 1e-7) -> list[SweepRow]:
    """Locate the largest ``|Sy|`` maxima between grid points.

    Narrow resonances (width of order ``nu``) can fall between grid points.
    Around each of the ``n_peaks`` largest local maxima of the grid the
    interval to the neighbouring points is rescanned, and the best sample is
    polished with a bounded scalar search. Results are sorted by frequency.
    """
    rows = result.rows
    if len(rows) < 3:
        return []
    axis = np.array([r.axis for r in rows])
    index = {r.axis: i for i, r in enumerate(rows)}
    candidates = sorted(_local_maxima(rows), key=lambda r: -abs(r.sy))[:n_peaks]

    def solve(w):
        spec, params = config.point(w)
        return solve_point(spec, params, config.solver)

    peaks = []
    for cand in candidates:
        i = index[cand.axis]
        lo, hi = axis[max(i - 1, 0)], axis[min(i + 1, len(axis) - 1)]
        ws = np.linspace(lo, hi, scan_points)
        vals = np.array([abs(solve(w).averages[1]) for w in ws])
        k = int(np.argmax(vals))
        a, b = ws[max(k - 1, 0)], ws[min(k + 1, scan_points - 1)]
        best_w, best = ws[k], vals[k]
        if b > a:
            res = minimize_scalar(lambda w: -abs(solve(w).averages[1]), bounds=(a, b),
                                  method="bounded", options={"xatol": xatol})
            if -res.fun > best:
                best_w = float(res.x)
        peaks.append(_row(best_w, solve(best_w)))
    peaks.sort(key=lambda r: r.axis)
    return peaks


def inl_metric(result: SweepResult) -> float:
    """``max |Sy| / max |Sz| * 100`` over the sweep (refined peaks included)."""
    if result.axis != "omega":
        raise EmptySweep("I_NL is defined for omega sweeps only")
    rows = list(result.rows) + list(result.peaks)
    if len(result.rows) < 2:
        raise EmptySweep("I_NL needs at least two sweep rows")
    sy = max(abs(r.sy) for r in rows)
    sz = max(abs(r.sz) for r in rows)
    return 100.0 * sy / sz


def fit_scaling_exponent(result: SweepResult, component: str = "Sy",
                         value_range: tuple[float, float] | None = None) -> float:
    """Least-squares slope of ``log |S_component|`` against ``log(axis)``."""
    axis = result.column("axis")
    values = np.abs(result.column(f"{component}_avg"))
    mask = np.ones_like(axis, dtype=bool)
    if value_range is not None:
        lo, hi = value_range
        mask = (axis >= lo * (1 - 1e-12)) & (axis <= hi * (1 + 1e-12))
    mask &= (axis > 0) & (values > 0)
    if mask.sum() < 4:
        raise InsufficientPoints(f"need at least 4 points in range, got {int(mask.sum())}")
    slope, _ = np.polyfit(np.log(axis[mask]), np.log(values[mask]), 1)
    return float(slope)


def _format(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(result: SweepResult, path=None, columns=CSV_COLUMNS) -> str:
    """Render the sweep rows as CSV; also written to ``path`` when given."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in result.rows:
        writer.writerow([_format(row.value(c)) for c in columns])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


# configuration files ------------------------------------------------------------

CONFIG_DEFAULTS = {
    "kind": "single",
    "h0": "3.0",
    "phi": "pi/4",
    "Jx": "0",
    "Jy": "0",
    "Jz": "0",
    "epsilon": "sqrt(2)",
    "harmonics": "",
    "omega": "1.5",
    "beta": "10",
    "nu": "0.1",
    "target": "static",
    "axis": "omega",
    "start": "",
    "stop": "",
    "points": "",
    "spacing": "linear",
    "method": "harmonic_balance",
    "steps_per_period": "",
    "tolerance": "1e-10",
    "max_periods": "20000",
    "n_harmonics": "",
    "refine_peaks": "true",
    "output": "",
    "columns": ",".join(CSV_COLUMNS),
    "workers": "1",
    # levels / symmetry-check only
    "h_start": "-2",
    "h_stop": "2",
    "h_points": "401",
    "sector": "full",
    "horizon_periods": "50",
}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_NAMES = {"pi": math.pi, "e": math.e, "inf": math.inf}
_FUNCS = {"sqrt": math.sqrt, "sin": math.sin, "cos": math.cos, "exp": math.exp, "log": math.log}


def parse_value(text: str) -> float:
    """Evaluate a numeric literal or simple expression such as ``pi/4``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ConfigError(f"cannot evaluate {text!r}")

    try:
        return ev(ast.parse(str(text).strip(), mode="eval"))
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse number {text!r}") from exc


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def load_config(path) -> dict[str, str]:
    with open(path) as fh:
        return parse_config_text(fh.read())


def _parse_harmonics(text: str) -> tuple[Harmonic, ...]:
    """``"n:amplitude[:phase], ..."`` e.g. ``"1:sqrt(2), 2:0.5:pi/2"``."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"bad harmonic {item!r}; expected n:amplitude[:phase]")
        n = parse_value(parts[0])
        if n != int(n) or n < 1:
            raise ConfigError(f"harmonic order must be a positive integer, got {parts[0]!r}")
        phase = parse_value(parts[2]) if len(parts) == 3 else 0.0
        out.append(Harmonic(int(n), parse_value(parts[1]), phase))
    return tuple(out)


def _flag(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _int(text: str) -> int:
    v = parse_value(text)
    if v != int(v):
        raise ConfigError(f"expected an integer, got {text!r}")
    return int(v)


def config_from_mapping(values: dict[str, str]) -> SweepConfig:
    """Build a validated :class:`SweepConfig` from string key/value pairs.

    Missing keys fall back to :data:`CONFIG_DEFAULTS` (the single-spin
    reference configuration).
    """
    v = {**CONFIG_DEFAULTS, **{k: str(x) for k, x in values.items() if x is not None}}
    unknown = set(values) - set(CONFIG_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    try:
        omega = parse_value(v["omega"])
        if v["harmonics"].strip():
            drive = DriveWaveform(omega, _parse_harmonics(v["harmonics"]))
        else:
            drive = DriveWaveform.cosine(parse_value(v["epsilon"]), omega)
        kind = SystemKind(v["kind"].strip().lower())
        h0, phi = parse_value(v["h0"]), parse_value(v["phi"])
        if kind is SystemKind.PAIR:
            system = SystemSpec.pair(h0, phi, drive, [parse_value(v[k]) for k in ("Jx", "Jy", "Jz")])
        else:
            system = SystemSpec.single(h0, phi, drive)
        thermal = ThermalParams(parse_value(v["beta"]), parse_value(v["nu"]),
                                TargetMode(v["target"].strip().lower()))
        grid_keys = [v[k].strip() for k in ("start", "stop", "points")]
        if all(grid_keys):
            grid = Grid(parse_value(v["start"]), parse_value(v["stop"]), _int(v["points"]),
                        v["spacing"].strip().lower())
        elif any(grid_keys):
            raise ConfigError("start, stop and points must be given together")
        else:
            grid = None
        solver = SolverOptions(
            method=v["method"].strip().lower(),
            steps_per_period=_int(v["steps_per_period"]) if v["steps_per_period"].strip() else None,
            tolerance=parse_value(v["tolerance"]),
            max_periods=_int(v["max_periods"]),
            n_harmonics=_int(v["n_harmonics"]) if v["n_harmonics"].strip() else None,
        )
        columns = tuple(c.strip() for c in v["columns"].split(",") if c.strip())
        return SweepConfig(
            system=system, thermal=thermal, axis=v["axis"].strip().lower(), grid=grid,
            solver=solver, output=v["output"].strip() or None, columns=columns,
            workers=_int(v["workers"]), refine_peaks=_flag(v["refine_peaks"]),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
