"""Zero-voltage-switching checks at the bridge switching instants.

A bridge switches softly when, at its rising edge ``t = delta_i T_h``, the
current flows through the anti-parallel diodes of the devices about to turn
on.  In the port reference that is ``I < 0`` for bridges 1, 3 and
``I > 0`` for bridges 2, 4.  Exact zero counts as hard switching.

At the fundamental the test is equivalent to every bridge delivering
reactive power (``q > 0`` in the injection reference of
:class:`~qab.harmonic.PowerReport`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import PORT_ROWS, QabConfig, assemble_matrices
from .harmonic import PortAdmittance, instantaneous_port_current, solve_harmonic
from .timedomain import periodic_steady_state, state_at

# sign that makes a port-reference switching current a positive ZVS margin
FAVORABLE_SIGN = np.array([-1.0, 1.0, -1.0, 1.0])


@dataclass(frozen=True, eq=False)
class ZvsReport:
    i_sw: np.ndarray
    zvs: np.ndarray
    margin: np.ndarray
    q: np.ndarray

    @classmethod
    def from_currents(cls, i_sw, q) -> "ZvsReport":
        i_sw = np.asarray(i_sw, dtype=float)
        margin = FAVORABLE_SIGN * i_sw
        return cls(i_sw, margin > 0.0, margin, np.asarray(q, dtype=float))

    def reactive_criterion(self) -> np.ndarray:
        return self.q > 0.0


def switching_current(cfg: QabConfig, y: PortAdmittance, i: int) -> float:
    """Fundamental port-``i`` current at its own switching instant."""
    return instantaneous_port_current(cfg, y, i, cfg.delta[i - 1] * cfg.half_period)


def zvs_check(cfg: QabConfig, mats=None) -> ZvsReport:
    hb = solve_harmonic(cfg, mats)
    i_sw = [switching_current(cfg, hb.y, i) for i in range(1, 5)]
    return ZvsReport.from_currents(i_sw, hb.report.q)


def zvs_check_timedomain(cfg: QabConfig, mats=None) -> ZvsReport:
    """Same verdicts from the full-harmonic periodic steady state."""
    mats = mats or assemble_matrices(cfg)
    x0 = periodic_steady_state(cfg, mats)
    T = cfg.period
    i_sw = np.empty(4)
    for k in range(4):
        t = np.mod(cfg.delta[k] * cfg.half_period, T)
        i_sw[k] = state_at(cfg, x0, t, mats)[PORT_ROWS[k]]
    q = solve_harmonic(cfg, mats).report.q
    return ZvsReport.from_currents(i_sw, q)
