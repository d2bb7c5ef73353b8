"""Fundamental-frequency (harmonic-balance) model of the converter network.

Phasors are complex amplitudes in the sine reference: ``X`` stands for
``|X| sin(w t + arg X)``.  Complex power is therefore ``S = V conj(I) / 2``.

Port currents keep the circuit's port reference (bridges 1, 3 out of the
bridge, bridges 2, 4 into it).  :class:`PowerReport` uses the uniform
injection reference instead: ``p[i] > 0`` and ``q[i] > 0`` mean bridge
``i`` delivers active/reactive power to the AC network.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import (
    N_STATES,
    PORT_ROWS,
    PORT_SIGN,
    CircuitMatrices,
    QabConfig,
    assemble_matrices,
    winding_currents,
)

_K8 = 8.0 / np.pi**2


def impedance_matrix(mats: CircuitMatrices, f_sw: float) -> np.ndarray:
    """``Z = j w A_L + A_R`` at the switching frequency."""
    return 1j * (2.0 * np.pi * f_sw) * mats.a_l + mats.a_r


def full_admittance(mats: CircuitMatrices, f_sw: float) -> np.ndarray:
    return np.linalg.inv(impedance_matrix(mats, f_sw))


@dataclass(frozen=True, eq=False)
class PortAdmittance:
    """4x4 block of the network admittance mapping bridge voltages to port currents."""

    y: np.ndarray

    @property
    def g(self) -> np.ndarray:
        return self.y.real

    @property
    def b(self) -> np.ndarray:
        return self.y.imag

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.y)

    @property
    def angle(self) -> np.ndarray:
        return np.angle(self.y)


def port_admittance(y_f: np.ndarray) -> PortAdmittance:
    """Rows of the port-current states, columns of the four bridge voltages."""
    y = np.array(y_f)[np.ix_(PORT_ROWS, range(4))]
    y.setflags(write=False)
    return PortAdmittance(y)


def port_voltage_phasors(cfg: QabConfig) -> np.ndarray:
    """``(4 V_i / pi) exp(-j delta_i pi)`` for each bridge."""
    v = np.asarray(cfg.v_dc)
    d = np.asarray(cfg.delta)
    return (4.0 * v / np.pi) * np.exp(-1j * np.pi * d)


@dataclass(frozen=True, eq=False)
class PortPhasors:
    v_hat: np.ndarray
    i_hat: np.ndarray
    x_hat: np.ndarray

    @property
    def i_injected(self) -> np.ndarray:
        """Port currents referred out of every bridge."""
        return PORT_SIGN * self.i_hat


def port_current_phasors(y: PortAdmittance, v_hat, y_f=None) -> PortPhasors:
    """``i_hat = Y v_hat``; with ``y_f`` also the seven branch phasors."""
    v_hat = np.asarray(v_hat, dtype=complex)
    i_hat = y.y @ v_hat
    if y_f is None:
        x_hat = np.full(N_STATES, np.nan + 0j)
        x_hat[list(PORT_ROWS)] = i_hat
    else:
        u_hat = np.concatenate([v_hat, np.zeros(N_STATES - 4)])
        x_hat = np.asarray(y_f) @ u_hat
    return PortPhasors(v_hat, i_hat, x_hat)


@dataclass(frozen=True, eq=False)
class PowerReport:
    """Fundamental-frequency powers, injection reference (W, var, A)."""

    p: np.ndarray
    q: np.ndarray
    p13: float
    p_copper: float
    i_peak: np.ndarray

    @property
    def imbalance(self) -> float:
        """``sum(p) - p_copper``; zero for a consistent network model."""
        return float(self.p.sum() - self.p_copper)

    def as_dict(self) -> dict:
        out = {}
        for i in range(4):
            out[f"p{i + 1}"] = float(self.p[i])
        for i in range(4):
            out[f"q{i + 1}"] = float(self.q[i])
        out["p13"] = float(self.p13)
        out["p_copper"] = float(self.p_copper)
        for i in range(4):
            out[f"i_peak{i + 1}"] = float(self.i_peak[i])
        return out


def source_transfer_power(cfg: QabConfig, y: PortAdmittance) -> float:
    """Power exchanged between the two source bridges (1 and 3)."""
    v1, v3 = cfg.v_dc[0], cfg.v_dc[2]
    dphi = np.pi * (cfg.delta[2] - cfg.delta[0])
    g13, b13 = y.g[0, 2], y.b[0, 2]
    return float(_K8 * v1 * v3 * (g13 * np.cos(dphi) + b13 * np.sin(dphi)))


def port_powers(ph: PortPhasors, cfg: QabConfig, y: PortAdmittance | None = None) -> PowerReport:
    """Active/reactive power per bridge, source transfer power and winding loss.

    ``y`` is only needed for the source transfer power; without it the
    admittance is rebuilt from ``cfg``.
    """
    s_port = 0.5 * ph.v_hat * np.conj(ph.i_hat)
    s = PORT_SIGN * s_port
    iw = winding_currents(ph.x_hat)
    p_cu = float(0.5 * np.sum(cfg.winding_resistances() * np.abs(iw) ** 2))
    if y is None:
        y = port_admittance(full_admittance(assemble_matrices(cfg), cfg.f_sw))
    return PowerReport(
        p=s.real.copy(),
        q=s.imag.copy(),
        p13=source_transfer_power(cfg, y),
        p_copper=p_cu,
        i_peak=np.abs(ph.i_hat),
    )


def closed_form_port_powers(cfg: QabConfig, y: PortAdmittance) -> np.ndarray:
    """Active powers from the expanded conductance/susceptance sums, port reference.

    ``P_i = 8 V_i^2 G_ii / pi^2 + sum_j 8 V_i V_j / pi^2
    (G_ij cos(phi_j - phi_i) + B_ij sin(phi_j - phi_i))``.  Bridges 1 and 3
    come out as delivered power, bridges 2 and 4 as absorbed power.
    """
    v = np.asarray(cfg.v_dc)
    phi = np.pi * np.asarray(cfg.delta)
    out = np.empty(4)
    for i in range(4):
        total = _K8 * v[i] ** 2 * y.g[i, i]
        for j in range(4):
            if j == i:
                continue
            d = phi[j] - phi[i]
            total += _K8 * v[i] * v[j] * (y.g[i, j] * np.cos(d) + y.b[i, j] * np.sin(d))
        out[i] = total
    return out


def instantaneous_port_current(cfg: QabConfig, y: PortAdmittance, i: int, t):
    """Fundamental current of port ``i`` (1-based, port reference) at time(s) ``t``.

    ``(4/pi) sum_j |Y_ij| V_j sin(w t + angle(Y_ij) - delta_j pi)``.
    """
    t = np.asarray(t, dtype=float)
    w = cfg.omega
    row = i - 1
    total = np.zeros_like(t)
    for j in range(4):
        total = total + y.magnitude[row, j] * cfg.v_dc[j] * np.sin(
            w * t + y.angle[row, j] - np.pi * cfg.delta[j]
        )
    out = (4.0 / np.pi) * total
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class HarmonicSolution:
    y_f: np.ndarray
    y: PortAdmittance
    phasors: PortPhasors
    report: PowerReport


def solve_harmonic(cfg: QabConfig, mats: CircuitMatrices | None = None,
                   y_f: np.ndarray | None = None) -> HarmonicSolution:
    """Whole fundamental-frequency pipeline for one operating point."""
    if y_f is None:
        y_f = full_admittance(mats or assemble_matrices(cfg), cfg.f_sw)
    y = port_admittance(y_f)
    ph = port_current_phasors(y, port_voltage_phasors(cfg), y_f)
    return HarmonicSolution(y_f, y, ph, port_powers(ph, cfg, y))
