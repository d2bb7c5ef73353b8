"""Operating-point grids: power sweeps, conversion-ratio maps, redundancy scans.

Every cell is an independent solve, so grids may be evaluated in worker
processes; results are always assembled in row-major order.  Cells whose
solve fails carry ``converged = False`` and NaN payloads.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass
import io
import itertools

import numpy as np

from .circuit import QabConfig, assemble_matrices, conversion_ratio, voltage_for_ratio
from .errors import PowerFlowError
from .harmonic import full_admittance, port_admittance, solve_harmonic
from .powerflow import PowerFlowProblem, solve_phase_shifts
from .zvs import ZvsReport, switching_current

GRID_HEADER = (
    "m2", "m4", "p_total", "delta2", "delta3", "delta4",
    "p1", "p2", "p3", "p4", "q1", "q2", "q3", "q4",
    "isw1", "isw2", "isw3", "isw4", "zvs1", "zvs2", "zvs3", "zvs4", "converged",
)
PAYLOAD = ("delta2", "delta3", "delta4", "p1", "p2", "p3", "p4",
           "q1", "q2", "q3", "q4", "isw1", "isw2", "isw3", "isw4")


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"axis {self.name}: count must be >= 1")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True, eq=False)
class CellResult:
    m2: float
    m4: float
    p_total: float
    values: dict  # PAYLOAD name -> float
    zvs: np.ndarray
    converged: bool


def evaluate_point(cfg: QabConfig, p_total: float, split: float = 0.5) -> CellResult:
    """Solve the phase shifts for one demand and evaluate the ZVS payload."""
    m2, m4 = conversion_ratio(cfg, 2), conversion_ratio(cfg, 4)
    problem = PowerFlowProblem.from_total(cfg, p_total, split)
    try:
        y_f = full_admittance(assemble_matrices(cfg), cfg.f_sw)
        sol = solve_phase_shifts(problem, y=port_admittance(y_f))
    except PowerFlowError:
        sol = None
    if sol is None or not sol.converged:
        nan = {k: float("nan") for k in PAYLOAD}
        return CellResult(m2, m4, p_total, nan, np.zeros(4, dtype=bool), False)
    point = cfg.with_delta(sol.delta)
    hb = solve_harmonic(point, y_f=y_f)
    zr = ZvsReport.from_currents([switching_current(point, hb.y, i) for i in range(1, 5)],
                                 hb.report.q)
    vals = {"delta2": sol.delta[1], "delta3": sol.delta[2], "delta4": sol.delta[3]}
    for i in range(4):
        vals[f"p{i + 1}"] = float(hb.report.p[i])
        vals[f"q{i + 1}"] = float(hb.report.q[i])
        vals[f"isw{i + 1}"] = float(zr.i_sw[i])
    return CellResult(m2, m4, p_total, vals, zr.zvs, True)


def _run_cell(args):
    return evaluate_point(*args)


@dataclass(frozen=True, eq=False)
class GridResult:
    """Cells in row-major order over ``axes`` (first axis slowest)."""

    axes: tuple[Axis, ...]
    cells: tuple[CellResult, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.count for a in self.axes)

    def field(self, name: str) -> np.ndarray:
        """Payload column reshaped onto the grid."""
        if name in ("m2", "m4", "p_total"):
            data = [getattr(c, name) for c in self.cells]
        elif name == "converged":
            data = [c.converged for c in self.cells]
        elif name.startswith("zvs"):
            k = int(name[3:]) - 1
            data = [bool(c.zvs[k]) for c in self.cells]
        else:
            data = [c.values[name] for c in self.cells]
        return np.array(data).reshape(self.shape)

    @property
    def converged(self) -> np.ndarray:
        return self.field("converged")

    @property
    def zvs(self) -> np.ndarray:
        """(..., 4) boolean verdicts; meaningless where not converged."""
        return np.stack([self.field(f"zvs{i}") for i in range(1, 5)], axis=-1)

    @property
    def q(self) -> np.ndarray:
        return np.stack([self.field(f"q{i}") for i in range(1, 5)], axis=-1)

    def rows(self):
        for c in self.cells:
            row = [_num(c.m2), _num(c.m4), _num(c.p_total)]
            row += [_num(c.values[k]) for k in PAYLOAD]
            if c.converged:
                row += [str(int(z)) for z in c.zvs]
            else:
                row += ["nan"] * 4
            row.append(str(int(c.converged)))
            yield row

    def to_csv(self, fh=None) -> str | None:
        buf = fh if fh is not None else io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(GRID_HEADER)
        writer.writerows(self.rows())
        return None if fh is not None else buf.getvalue()


def _num(v: float) -> str:
    v = float(v)
    return "nan" if np.isnan(v) else repr(v)


def _evaluate(jobs, workers: int):
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return tuple(pool.map(_run_cell, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return tuple(_run_cell(j) for j in jobs)


def power_sweep(cfg: QabConfig, p_total_max: float, steps: int, split: float = 0.5,
                p_total_min: float = 0.0, workers: int = 1) -> GridResult:
    """Phase shifts and powers along a linear total-demand grid (``steps`` points)."""
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if not 0.0 <= split <= 1.0:
        raise ValueError("split must lie in [0, 1]")
    axis = Axis("p_total", p_total_min, p_total_max, steps)
    jobs = [(cfg, float(p), split) for p in axis.values]
    return GridResult((axis,), _evaluate(jobs, workers))


def ratio_map(cfg: QabConfig, m2_range, m4_range, grid=(21, 21), p_total: float = 50.0,
              split: float = 0.5, workers: int = 1) -> GridResult:
    """ZVS/reactive-power payload over load conversion ratios at a fixed demand.

    ``m2_range``/``m4_range`` are ``(min, max)``; ``grid`` the point counts.
    """
    ax2 = Axis("m2", *m2_range, grid[0])
    ax4 = Axis("m4", *m4_range, grid[1])
    if min(ax2.start, ax2.stop, ax4.start, ax4.stop) <= 0:
        raise ValueError("conversion-ratio ranges must be positive")
    jobs = []
    for m2, m4 in itertools.product(ax2.values, ax4.values):
        v = list(cfg.v_dc)
        v[1] = voltage_for_ratio(cfg, 2, m2)
        v[3] = voltage_for_ratio(cfg, 4, m4)
        jobs.append((cfg.with_voltages(v), p_total, split))
    return GridResult((ax2, ax4), _evaluate(jobs, workers))


def power_ratio_map(cfg: QabConfig, m4_range, p_range, grid=(21, 21), split: float = 0.5,
                    workers: int = 1) -> GridResult:
    """Same payload over (port-4 conversion ratio, total demand); port 2 stays as configured."""
    ax4 = Axis("m4", *m4_range, grid[0])
    axp = Axis("p_total", *p_range, grid[1])
    if min(ax4.start, ax4.stop) <= 0:
        raise ValueError("conversion-ratio range must be positive")
    jobs = []
    for m4, p in itertools.product(ax4.values, axp.values):
        v = list(cfg.v_dc)
        v[3] = voltage_for_ratio(cfg, 4, m4)
        jobs.append((cfg.with_voltages(v), float(p), split))
    return GridResult((ax4, axp), _evaluate(jobs, workers))


@dataclass(frozen=True, eq=False)
class RedundancyScan:
    offset: np.ndarray
    p1: np.ndarray
    i1_peak: np.ndarray
    base_delta: tuple[float, ...]
    converged: bool


def redundancy_scan(cfg: QabConfig, p_total: float, c_range=(-0.5, 0.5), steps: int = 11,
                    split: float = 0.5) -> RedundancyScan:
    """Port-1 power and current amplitude when every phase shift moves by a common offset."""
    sol = solve_phase_shifts(PowerFlowProblem.from_total(cfg, p_total, split))
    base = np.array(sol.delta)
    offsets = np.linspace(c_range[0], c_range[1], steps)
    p1 = np.empty(steps)
    i1 = np.empty(steps)
    y_f = full_admittance(assemble_matrices(cfg), cfg.f_sw)
    for k, c in enumerate(offsets):
        # shifted ratios may leave [-1, 1]; waveforms are 2-periodic in delta
        shifted = np.mod(base + c + 1.0, 2.0) - 1.0
        rep = solve_harmonic(cfg.with_delta(shifted), y_f=y_f).report
        p1[k] = rep.p[0]
        i1[k] = rep.i_peak[0]
    return RedundancyScan(offsets, p1, i1, tuple(sol.delta), sol.converged)
