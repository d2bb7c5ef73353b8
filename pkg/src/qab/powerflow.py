"""Phase-shift solver for commanded load powers.

Bridge 1 is the phase reference.  The three unknowns ``delta2..delta4`` are
found by a damped Newton iteration on::

    r = [p2 + p2_load, p4 + p4_load, p13 - p13_target]

where ``p2``/``p4`` are injected powers (negative for a load) and ``p13``
is the power exchanged between the two source bridges, normally held at
zero so no power circulates between them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import PORT_SIGN, QabConfig, assemble_matrices
from .harmonic import (
    PowerReport,
    full_admittance,
    port_admittance,
    solve_harmonic,
)
from .errors import JacobianSingular

TOL_W = 1e-6
FD_STEP = 1e-6
MAX_ITER = 100
_SIN_CLAMP = 0.99


@dataclass(frozen=True)
class PowerFlowProblem:
    base: QabConfig
    p2_load: float
    p4_load: float
    p13_target: float = 0.0

    def __post_init__(self):
        for name in ("p2_load", "p4_load", "p13_target"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def from_total(cls, base: QabConfig, p_total: float, split: float = 0.5) -> "PowerFlowProblem":
        """Split a total load demand between ports 2 (``split``) and 4 (the rest)."""
        if not 0.0 <= split <= 1.0:
            raise ValueError(f"split {split} outside [0, 1]")
        return cls(base, split * p_total, (1.0 - split) * p_total)


@dataclass(frozen=True, eq=False)
class PowerFlowSolution:
    delta: tuple[float, float, float, float]
    report: PowerReport
    residual_norm: float
    iterations: int
    converged: bool


def wrap_delta(d):
    """Map phase-shift ratios onto ``[-1, 1)``; the waveforms are 2-periodic in delta."""
    return np.mod(np.asarray(d, dtype=float) + 1.0, 2.0) - 1.0


class _Residual:
    def __init__(self, problem: PowerFlowProblem, y):
        cfg = problem.base
        self.y = y.y
        self.amp = 4.0 * np.asarray(cfg.v_dc) / np.pi
        self.target = np.array([-problem.p2_load, -problem.p4_load, problem.p13_target])
        self.k13 = 8.0 / np.pi**2 * cfg.v_dc[0] * cfg.v_dc[2]
        self.g13 = y.g[0, 2]
        self.b13 = y.b[0, 2]

    def __call__(self, free):
        phi = np.pi * np.concatenate([[0.0], free])
        v = self.amp * np.exp(-1j * phi)
        i = self.y @ v
        p = PORT_SIGN * (0.5 * v * np.conj(i)).real
        d13 = phi[2] - phi[0]
        p13 = self.k13 * (self.g13 * np.cos(d13) + self.b13 * np.sin(d13))
        return np.array([p[1], p[3], p13]) - self.target

    def jacobian(self, free):
        jac = np.empty((3, 3))
        for k in range(3):
            e = np.zeros(3)
            e[k] = FD_STEP
            jac[:, k] = (self(free + e) - self(free - e)) / (2.0 * FD_STEP)
        return jac


def initial_guess(problem: PowerFlowProblem, y) -> np.ndarray:
    """Two-port estimate from the dominant sine term of each load equation."""
    v1, v2, v3, v4 = problem.base.v_dc
    b = y.b
    guess = np.zeros(3)
    for slot, (row, vi, load) in ((0, (1, v2, problem.p2_load)), (2, (3, v4, problem.p4_load))):
        k = 8.0 / np.pi**2 * vi * (v1 * b[row, 0] + v3 * b[row, 2])
        if k == 0.0 or load == 0.0:
            continue
        s = np.clip(-load / k, -_SIN_CLAMP, _SIN_CLAMP)
        guess[slot] = np.arcsin(s) / np.pi
    return guess


def solve_phase_shifts(problem: PowerFlowProblem, initial=None, tol: float = TOL_W,
                       max_iter: int = MAX_ITER, y=None) -> PowerFlowSolution:
    """Damped Newton solve for ``(delta2, delta3, delta4)`` with ``delta1 = 0``.

    ``initial`` overrides the two-port starting estimate.  Non-convergence
    is reported through ``converged=False`` with the best iterate; a
    rank-deficient Newton system raises :class:`JacobianSingular`.
    """
    cfg = problem.base
    if y is None:
        y_f = full_admittance(assemble_matrices(cfg), cfg.f_sw)
        y = port_admittance(y_f)
    else:
        y_f = None
    res = _Residual(problem, y)
    x = initial_guess(problem, y) if initial is None else np.asarray(initial, dtype=float).copy()
    r = res(x)
    best = (np.max(np.abs(r)), x.copy())
    it = 0
    while best[0] >= tol and it < max_iter:
        it += 1
        jac = res.jacobian(x)
        cond = np.linalg.cond(jac)
        if not np.isfinite(cond) or cond > 1e12:
            raise JacobianSingular(f"Newton system rank-deficient (cond = {cond:.3e}) at delta = {x}")
        dx = np.linalg.solve(jac, -r)
        norm0 = np.linalg.norm(r)
        t = 1.0
        while True:
            trial = x + t * dx
            r_trial = res(trial)
            if np.linalg.norm(r_trial) < norm0 or t < 1.0 / 1024:
                break
            t *= 0.5
        x, r = trial, r_trial
        rinf = np.max(np.abs(r))
        if rinf < best[0]:
            best = (rinf, x.copy())

    rnorm, x = best
    delta = tuple(float(d) for d in wrap_delta(np.concatenate([[0.0], x])))
    sol_cfg = cfg.with_delta(delta)
    report = solve_harmonic(sol_cfg, y_f=y_f).report
    return PowerFlowSolution(delta, report, float(rnorm), it, bool(rnorm < tol))


def power_dispatch(cfg: QabConfig) -> PowerReport:
    """Full fundamental-frequency power report at the configured phase shifts."""
    return solve_harmonic(cfg).report
