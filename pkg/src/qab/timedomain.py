"""Exact piecewise-LTI simulation of the converter state equation.

Between switching events the input is constant, so each step is the
closed-form solution ``x(t+h) = Phi(h) x + Psi(h) B u`` obtained from one
matrix exponential of the augmented matrix ``[[A, B], [0, 0]] h``.  No
integration error is introduced; results depend only on ``expm`` accuracy.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
import io

import numpy as np
from scipy.linalg import expm

from .circuit import (
    LINK_ROW,
    N_STATES,
    PORT_ROWS,
    PORT_SIGN,
    CircuitMatrices,
    QabConfig,
    assemble_matrices,
    winding_currents,
)
from .errors import NoUniqueSteadyState, WrongWindowLength
from .modulation import switching_events

MIN_SAMPLES = 64
WAVEFORM_HEADER = ("t", "v1", "v2", "v3", "v4", "i1", "i2", "i3", "i4", "i5", "vac")


def _propagators(a: np.ndarray, b: np.ndarray, h: float):
    n, m = a.shape[0], b.shape[1]
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = a * h
    aug[:n, n:] = b * h
    e = expm(aug)
    return e[:n, :n], e[:n, n:]


def step_exact(mats: CircuitMatrices, x, u_const, h: float) -> np.ndarray:
    """Advance the state by ``h`` seconds under constant input ``u_const``."""
    phi, gam = _propagators(mats.a, mats.b, h)
    return phi @ np.asarray(x, dtype=float) + gam @ np.asarray(u_const, dtype=float)


class _Stepper:
    """Caches propagators by step length (a period only has a handful)."""

    def __init__(self, mats: CircuitMatrices, period: float):
        self.mats = mats
        self._scale = period
        self._cache = {}

    def __call__(self, h: float):
        key = round(h / self._scale, 13)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._cache[key] = _propagators(self.mats.a, self.mats.b, h)
        return hit


def cycle_map(cfg: QabConfig, mats: CircuitMatrices | None = None):
    """Monodromy ``Phi_T`` and forcing ``Gamma_T`` with ``x(T) = Phi_T x(0) + Gamma_T``."""
    mats = mats or assemble_matrices(cfg)
    stepper = _Stepper(mats, cfg.period)
    phi_t = np.eye(N_STATES)
    gam_t = np.zeros(N_STATES)
    for t0, t1, u in switching_events(cfg).segments(cfg):
        phi, gam = stepper(t1 - t0)
        phi_t = phi @ phi_t
        gam_t = phi @ gam_t + gam @ u
    return phi_t, gam_t


def periodic_steady_state(cfg: QabConfig, mats: CircuitMatrices | None = None) -> np.ndarray:
    """State at ``t = 0`` of the periodic steady state (fixed point of the cycle map)."""
    phi_t, gam_t = cycle_map(cfg, mats)
    lhs = np.eye(N_STATES) - phi_t
    cond = np.linalg.cond(lhs)
    if not np.isfinite(cond) or cond > 1e12:
        raise NoUniqueSteadyState(
            f"I - Phi_T is singular (cond = {cond:.3e}); the network has no dissipation"
        )
    return np.linalg.solve(lhs, gam_t)


def settle_by_integration(cfg: QabConfig, x0=None, rtol: float = 1e-9, max_cycles: int = 100_000,
                          mats: CircuitMatrices | None = None) -> np.ndarray:
    """Fallback: iterate the cycle map until successive cycles agree to ``rtol``.

    Converges only when every Floquet multiplier is strictly inside the unit
    circle; raises :class:`NoUniqueSteadyState` otherwise.
    """
    phi_t, gam_t = cycle_map(cfg, mats)
    x = np.zeros(N_STATES) if x0 is None else np.asarray(x0, dtype=float)
    for _ in range(max_cycles):
        nxt = phi_t @ x + gam_t
        if np.max(np.abs(nxt - x)) <= rtol * max(1.0, np.max(np.abs(nxt))):
            return nxt
        x = nxt
    raise NoUniqueSteadyState(f"no cycle-to-cycle convergence within {max_cycles} cycles")


def state_at(cfg: QabConfig, x0, t: float, mats: CircuitMatrices | None = None) -> np.ndarray:
    """Exact state at time ``t`` in ``[0, T]`` starting from ``x0`` at ``t = 0``."""
    mats = mats or assemble_matrices(cfg)
    x = np.asarray(x0, dtype=float)
    for t0, t1, u in switching_events(cfg).segments(cfg):
        if t <= t0:
            break
        x = step_exact(mats, x, u, min(t, t1) - t0)
    return x


@dataclass(frozen=True, eq=False)
class WaveformRecord:
    """Sampled simulation output.

    ``uniform`` flags the samples on the ``T / samples_per_cycle`` grid; the
    others sit exactly on switching events (post-transition input).  The
    final sample is at ``n_cycles * T``.
    """

    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    v_ac: np.ndarray
    uniform: np.ndarray
    period: float
    samples_per_cycle: int
    n_cycles: int

    @property
    def port_currents(self) -> np.ndarray:
        """(n, 4) port currents I11, I22, I31, I42 in the port reference."""
        return self.x[:, PORT_ROWS]

    @property
    def i5(self) -> np.ndarray:
        return self.x[:, LINK_ROW]

    @property
    def v(self) -> np.ndarray:
        return self.u[:, :4]

    def cycle(self, k: int = -1) -> np.ndarray:
        """Indices of the uniform samples of cycle ``k``."""
        if k < 0:
            k += self.n_cycles
        idx = np.flatnonzero(self.uniform)
        return idx[k * self.samples_per_cycle:(k + 1) * self.samples_per_cycle]

    def to_csv(self, fh=None) -> str | None:
        buf = fh if fh is not None else io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(WAVEFORM_HEADER)
        cols = np.column_stack([self.t, self.v, self.port_currents, self.i5, self.v_ac])
        for row in cols:
            writer.writerow([repr(float(v)) for v in row])
        return None if fh is not None else buf.getvalue()


def simulate_cycles(cfg: QabConfig, x0=None, n_cycles: int = 1, samples_per_cycle: int = 1024,
                    mats: CircuitMatrices | None = None) -> WaveformRecord:
    """Simulate ``n_cycles`` periods from ``x0`` (periodic steady state when ``None``)."""
    if samples_per_cycle < MIN_SAMPLES:
        raise ValueError(f"samples_per_cycle must be >= {MIN_SAMPLES}")
    if n_cycles < 1:
        raise ValueError("n_cycles must be >= 1")
    mats = mats or assemble_matrices(cfg)
    if x0 is None:
        x0 = periodic_steady_state(cfg, mats)
    T = cfg.period
    timeline = switching_events(cfg)
    segments = timeline.segments(cfg)

    # sample instants within one cycle, with merge of near-coincident ones
    grid = np.arange(samples_per_cycle) * (T / samples_per_cycle)
    tol = 1e-12 * T
    marks = [(float(t), True) for t in grid]
    for te in timeline.times:
        if np.min(np.abs(grid - te)) > tol and T - te > tol:
            marks.append((float(te), False))
    marks.sort()
    local_t = np.array([m[0] for m in marks])
    local_uniform = np.array([m[1] for m in marks])
    seg_starts = np.array([s[0] for s in segments])

    def input_after(t):
        k = np.searchsorted(seg_starts, t + tol, side="right") - 1
        return segments[k][2]

    local_u = np.array([input_after(t) for t in local_t])
    steps = np.diff(np.append(local_t, T))

    stepper = _Stepper(mats, T)
    n_local = len(local_t)
    total = n_cycles * n_local + 1
    ts = np.empty(total)
    xs = np.empty((total, N_STATES))
    us = np.empty((total, N_STATES))
    uni = np.zeros(total, dtype=bool)
    x = np.asarray(x0, dtype=float)
    k = 0
    for c in range(n_cycles):
        for j in range(n_local):
            ts[k] = c * T + local_t[j]
            xs[k] = x
            us[k] = local_u[j]
            uni[k] = local_uniform[j]
            phi, gam = stepper(steps[j])
            x = phi @ x + gam @ local_u[j]
            k += 1
    ts[k] = n_cycles * T
    xs[k] = x
    us[k] = local_u[0]
    v_ac = link_voltage(cfg, xs, us, mats)
    return WaveformRecord(ts, xs, us, v_ac, uni, T, samples_per_cycle, n_cycles)


def link_voltage(cfg: QabConfig, x, u, mats: CircuitMatrices | None = None, branch: int = 2):
    """AC-link voltage from KVL along the path of transformer ``branch``.

    Derivatives come from ``x' = A x + B u``.  All four paths give the same
    value for a consistent model; ``branch`` selects which one to evaluate.
    """
    mats = mats or assemble_matrices(cfg)
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    dx = x @ mats.a.T + u @ mats.b.T
    (L11, L12), (L21, L22), (L31, L32), (L41, L42) = cfg.l_leak
    (R11, R12), (R21, R22), (R31, R32), (R41, R42) = cfg.r_wind
    X = lambda j: x[..., j]  # noqa: E731
    D = lambda j: dx[..., j]  # noqa: E731
    if branch == 1:
        return (u[..., 0] - R11 * X(0) - L11 * D(0)
                - R12 * (X(1) + X(6)) - L12 * (D(1) + D(6)))
    if branch == 2:
        return u[..., 1] + R22 * X(2) + L22 * D(2) + R21 * X(1) + L21 * D(1)
    if branch == 3:
        return u[..., 2] - R31 * X(3) - L31 * D(3) - R32 * X(4) - L32 * D(4)
    if branch == 4:
        return (u[..., 3] + R42 * X(5) + L42 * D(5)
                + R41 * (X(4) + X(6)) + L41 * (D(4) + D(6)))
    raise ValueError(f"branch must be 1..4, got {branch}")


def fundamental_phasor(samples, f_sw: float, t=None) -> complex:
    """Complex amplitude (sine reference) of the first harmonic.

    ``samples`` must cover exactly one period on a uniform grid, endpoint
    excluded.  ``A sin(w t - phi)`` maps to ``A exp(-j phi)``.  When ``t`` is
    given the window is checked against ``1 / f_sw`` and the phase is
    referred to ``t = 0`` rather than to the first sample.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n < MIN_SAMPLES:
        raise WrongWindowLength(f"need at least {MIN_SAMPLES} samples, got {n}")
    if t is not None:
        t = np.asarray(t, dtype=float)
        if t.size != n:
            raise WrongWindowLength("time and sample arrays differ in length")
        dt = np.diff(t)
        span = n * dt.mean()
        if np.ptp(dt) > 1e-9 * dt.mean() or abs(span * f_sw - 1.0) > 1e-9:
            raise WrongWindowLength(f"window spans {span * f_sw:.12g} periods, expected exactly 1")
    ph = 2j * np.fft.rfft(samples)[1] / n
    if t is not None:
        ph *= np.exp(-2j * np.pi * f_sw * t[0])
    return complex(ph)


def record_fundamentals(rec: WaveformRecord, f_sw: float, k: int = -1) -> np.ndarray:
    """First-harmonic phasors of all seven states over cycle ``k``."""
    idx = rec.cycle(k)
    t = rec.t[idx]
    return np.array([fundamental_phasor(rec.x[idx, j], f_sw, t) for j in range(N_STATES)])


def _cycle_span(rec: WaveformRecord, k: int) -> slice:
    """All samples of cycle ``k`` including event samples and the closing one."""
    if k < 0:
        k += rec.n_cycles
    idx = np.flatnonzero(rec.uniform)
    start = idx[k * rec.samples_per_cycle]
    stop = idx[(k + 1) * rec.samples_per_cycle] if k + 1 < rec.n_cycles else len(rec.t) - 1
    return slice(start, stop + 1)


def _cycle_mean(rec: WaveformRecord, k: int, integrand) -> np.ndarray:
    # inputs are constant between samples, so the trapezoid on the state
    # factor with the left-hand input is second-order accurate across edges
    sl = _cycle_span(rec, k)
    t, x, u = rec.t[sl], rec.x[sl], rec.u[sl]
    dt = np.diff(t)
    left = integrand(x[:-1], u[:-1])
    right = integrand(x[1:], u[:-1])
    return (0.5 * (left + right) * dt[:, None]).sum(axis=0) / (t[-1] - t[0])


def cycle_average_powers(rec: WaveformRecord, k: int = -1) -> np.ndarray:
    """Mean injected power of each bridge over cycle ``k``."""
    return PORT_SIGN * _cycle_mean(rec, k, lambda x, u: u[:, :4] * x[:, PORT_ROWS])


def cycle_copper_loss(cfg: QabConfig, rec: WaveformRecord, k: int = -1) -> float:
    r = cfg.winding_resistances()
    loss = _cycle_mean(rec, k, lambda x, u: (winding_currents(x) ** 2 * r).sum(axis=1)[:, None])
    return float(loss[0])
