"""Converter description and the 7-state inductance/resistance matrices.

State ordering is fixed package-wide::

    x = [I11, I21, I22, I31, I32, I42, I5]

``I11``, ``I22``, ``I31`` and ``I42`` are the bridge-side winding currents
of transformers 1-4 (the port currents).  ``I21`` and ``I32`` are the
link-side winding currents of transformers 2 and 3, and ``I5`` is the
current exchanged between the (1, 2) and (3, 4) transformer pairs on the
AC link.  The two remaining link-side winding currents are eliminated by
KCL::

    I12 = I21 + I5
    I41 = I32 + I5

Bridges 1 and 3 are referenced with current leaving the bridge, bridges 2
and 4 with current entering it.  ``PORT_SIGN`` converts a port current to
the uniform "out of the bridge" (injection) reference.

All inductances and resistances are taken as already referred to the
primary side; :func:`refer_to_primary` is available for raw secondary
values but is never applied implicitly.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field, replace
import math

import numpy as np

from .errors import (
    ConfigError,
    NegativeResistance,
    NegativeVoltage,
    NonPositiveFrequency,
    NonPositiveInductance,
    NonPositiveTurnsRatio,
    PhaseShiftOutOfRange,
    SingularInductanceMatrix,
    UnknownConfigKey,
)

N_STATES = 7
STATE_NAMES = ("I11", "I21", "I22", "I31", "I32", "I42", "I5")
# rows of the state vector that carry the four port currents
PORT_ROWS = (0, 2, 3, 5)
LINK_ROW = 6
# port current reference -> injection (out of the bridge) reference
PORT_SIGN = np.array([1.0, -1.0, 1.0, -1.0])

WINDINGS = ("11", "12", "21", "22", "31", "32", "41", "42")

DEFAULT_L_MAG = 10e-3
COND_LIMIT = 1e12

# winding currents as a linear map of the state
WINDING_MAP = np.array(
    [
        # I11 I21 I22 I31 I32 I42 I5
        [1, 0, 0, 0, 0, 0, 0],  # I11
        [0, 1, 0, 0, 0, 0, 1],  # I12 = I21 + I5
        [0, 1, 0, 0, 0, 0, 0],  # I21
        [0, 0, 1, 0, 0, 0, 0],  # I22
        [0, 0, 0, 1, 0, 0, 0],  # I31
        [0, 0, 0, 0, 1, 0, 0],  # I32
        [0, 0, 0, 0, 1, 0, 1],  # I41 = I32 + I5
        [0, 0, 0, 0, 0, 1, 0],  # I42
    ],
    dtype=float,
)

_PAIR = tuple[float, float]


@dataclass(frozen=True)
class QabConfig:
    """Physical and modulation parameters of the converter (SI units).

    ``l_leak[i]`` and ``r_wind[i]`` hold the (winding 1, winding 2) values of
    transformer ``i + 1``, i.e. ``l_leak[1] == (L21, L22)``.
    """

    v_dc: tuple[float, float, float, float]
    delta: tuple[float, float, float, float]
    l_leak: tuple[_PAIR, _PAIR, _PAIR, _PAIR]
    r_wind: tuple[_PAIR, _PAIR, _PAIR, _PAIR]
    turns: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    f_sw: float = 25e3
    l_mag: tuple[float, float, float, float] = field(
        default=(DEFAULT_L_MAG,) * 4
    )

    def __post_init__(self):
        object.__setattr__(self, "v_dc", _floats(self.v_dc, 4))
        object.__setattr__(self, "delta", _floats(self.delta, 4))
        object.__setattr__(self, "turns", _floats(self.turns, 4))
        object.__setattr__(self, "l_mag", _floats(self.l_mag, 4))
        object.__setattr__(self, "l_leak", tuple(_floats(p, 2) for p in _seq(self.l_leak, 4)))
        object.__setattr__(self, "r_wind", tuple(_floats(p, 2) for p in _seq(self.r_wind, 4)))
        object.__setattr__(self, "f_sw", float(self.f_sw))
        violations = _violations(self)
        if violations:
            cls, _ = violations[0]
            msgs = [m for _, m in violations]
            raise cls("; ".join(msgs), msgs)

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.f_sw

    @property
    def period(self) -> float:
        return 1.0 / self.f_sw

    @property
    def half_period(self) -> float:
        return 0.5 / self.f_sw

    def with_delta(self, delta) -> "QabConfig":
        return replace(self, delta=tuple(delta))

    def with_voltages(self, v_dc) -> "QabConfig":
        return replace(self, v_dc=tuple(v_dc))

    def with_l_mag(self, l_mag) -> "QabConfig":
        if np.isscalar(l_mag):
            l_mag = (l_mag,) * 4
        return replace(self, l_mag=tuple(l_mag))

    def scaled_inductances(self, k: float) -> "QabConfig":
        return replace(
            self,
            l_leak=tuple((k * a, k * b) for a, b in self.l_leak),
            l_mag=tuple(k * v for v in self.l_mag),
        )

    def lossless(self) -> "QabConfig":
        return replace(self, r_wind=((0.0, 0.0),) * 4)

    def winding_resistances(self) -> np.ndarray:
        """Resistances in ``WINDINGS`` order."""
        return np.array([r for pair in self.r_wind for r in pair])

    def to_raw(self) -> dict:
        """Flat parameter mapping accepted by :func:`validate_config`."""
        raw = {}
        for i in range(4):
            raw[f"v{i + 1}"] = self.v_dc[i]
            raw[f"delta{i + 1}"] = self.delta[i]
            raw[f"lm{i + 1}"] = self.l_mag[i]
            raw[f"n{i + 1}"] = self.turns[i]
            for w in range(2):
                raw[f"l{i + 1}{w + 1}"] = self.l_leak[i][w]
                raw[f"r{i + 1}{w + 1}"] = self.r_wind[i][w]
        raw["fs"] = self.f_sw
        return raw


def _seq(values, n):
    values = tuple(values)
    if len(values) != n:
        raise ConfigError(f"expected {n} entries, got {len(values)}")
    return values


def _floats(values, n):
    return tuple(float(v) for v in _seq(values, n))


def _violations(cfg: QabConfig):
    out = []
    for i, (la, lb) in enumerate(cfg.l_leak):
        for w, val in ((1, la), (2, lb)):
            if not val > 0:
                out.append((NonPositiveInductance, f"L{i + 1}{w} = {val!r} H must be > 0"))
    for i, val in enumerate(cfg.l_mag):
        if not val > 0:
            out.append((NonPositiveInductance, f"Lm{i + 1} = {val!r} H must be > 0"))
    for i, (ra, rb) in enumerate(cfg.r_wind):
        for w, val in ((1, ra), (2, rb)):
            if not val >= 0:
                out.append((NegativeResistance, f"R{i + 1}{w} = {val!r} ohm must be >= 0"))
    for i, val in enumerate(cfg.v_dc):
        if not val >= 0 or not math.isfinite(val):
            out.append((NegativeVoltage, f"V{i + 1} = {val!r} V must be finite and >= 0"))
    for i, val in enumerate(cfg.delta):
        if not abs(val) <= 1.0:
            out.append((PhaseShiftOutOfRange, f"delta{i + 1} = {val!r} outside [-1, 1]"))
    for i, val in enumerate(cfg.turns):
        if not val > 0:
            out.append((NonPositiveTurnsRatio, f"n{i + 1} = {val!r} must be > 0"))
    if not (cfg.f_sw > 0 and math.isfinite(cfg.f_sw)):
        out.append((NonPositiveFrequency, f"fs = {cfg.f_sw!r} Hz must be > 0"))
    return out


RAW_KEYS = frozenset(
    [f"v{i}" for i in range(1, 5)]
    + [f"delta{i}" for i in range(1, 5)]
    + [f"lm{i}" for i in range(1, 5)]
    + [f"n{i}" for i in range(1, 5)]
    + [f"l{i}{w}" for i in range(1, 5) for w in (1, 2)]
    + [f"r{i}{w}" for i in range(1, 5) for w in (1, 2)]
    + ["fs"]
)
_OPTIONAL = {f"delta{i}": 0.0 for i in range(1, 5)} | {f"lm{i}": DEFAULT_L_MAG for i in range(1, 5)}


def validate_config(raw: Mapping) -> QabConfig:
    """Build a :class:`QabConfig` from a flat parameter mapping.

    Keys are ``v1..v4``, ``delta1..delta4``, ``l11 l12 ... l42``,
    ``lm1..lm4``, ``r11 ... r42``, ``n1..n4`` and ``fs``.  Missing
    magnetizing inductances take ``DEFAULT_L_MAG`` and missing phase shifts
    default to zero; every other key is required.  Unknown keys are
    rejected.

    Raises the :class:`ConfigError` subclass of the first violation found;
    its ``violations`` attribute lists all of them.
    """
    unknown = sorted(set(raw) - RAW_KEYS)
    if unknown:
        raise UnknownConfigKey(f"unknown parameter(s): {', '.join(unknown)}")
    values = dict(_OPTIONAL)
    values.update(raw)
    missing = sorted(RAW_KEYS - set(values))
    if missing:
        raise ConfigError(f"missing parameter(s): {', '.join(missing)}")
    try:
        values = {k: float(v) for k, v in values.items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"non-numeric parameter: {exc}") from None
    return QabConfig(
        v_dc=[values[f"v{i}"] for i in range(1, 5)],
        delta=[values[f"delta{i}"] for i in range(1, 5)],
        l_leak=[(values[f"l{i}1"], values[f"l{i}2"]) for i in range(1, 5)],
        r_wind=[(values[f"r{i}1"], values[f"r{i}2"]) for i in range(1, 5)],
        turns=[values[f"n{i}"] for i in range(1, 5)],
        f_sw=values["fs"],
        l_mag=[values[f"lm{i}"] for i in range(1, 5)],
    )


def refer_to_primary(value: float, n: float) -> float:
    """Refer a secondary-side inductance or resistance through turns ratio ``n``."""
    return value * n * n


@dataclass(frozen=True, eq=False)
class CircuitMatrices:
    a_l: np.ndarray
    a_r: np.ndarray
    a: np.ndarray
    b: np.ndarray

    @classmethod
    def from_parts(cls, a_l, a_r) -> "CircuitMatrices":
        a_l = np.array(a_l, dtype=float)
        a_r = np.array(a_r, dtype=float)
        cond = np.linalg.cond(a_l)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise SingularInductanceMatrix(f"inductance matrix condition number {cond:.3e}")
        b = np.linalg.inv(a_l)
        a = -b @ a_r
        for arr in (a_l, a_r, a, b):
            arr.setflags(write=False)
        return cls(a_l, a_r, a, b)


def printed_matrices(cfg: QabConfig) -> CircuitMatrices:
    """Inductance/resistance matrices with every entry as originally typeset.

    Kept for reference and regression only: this transcription is not a
    passive network (``A`` has eigenvalues in the right half plane for the
    reference hardware) and it violates the fundamental-frequency energy
    balance.  Use :func:`assemble_matrices` for analysis.
    """
    (L11, L12), (L21, L22), (L31, L32), (L41, L42) = cfg.l_leak
    (R11, R12), (R21, R22), (R31, R32), (R41, R42) = cfg.r_wind
    Lm1, Lm2, Lm3, Lm4 = cfg.l_mag
    a_l = [
        [L11 + Lm1, -Lm1, 0, 0, 0, 0, -Lm1],
        [0, Lm2, -(Lm2 + L22), 0, 0, 0, 0],
        [0, 0, 0, L31 + Lm3, -Lm3, 0, 0],
        [0, 0, 0, 0, Lm4, L41 + Lm4, Lm4],
        [Lm1, -(L12 + Lm1 + Lm2 + L21), Lm2, 0, 0, 0, -(Lm1 + L12)],
        [0, 0, 0, Lm3, -(Lm3 + Lm4 + L32 + L41), Lm4, -(Lm4 + L41)],
        [0, -(L21 + Lm2), 0, 0, -(Lm4 + L42), -Lm4, L41 + Lm4],
    ]
    a_r = [
        [R11, 0, 0, 0, 0, 0, 0],
        [0, 0, R22, 0, 0, 0, 0],
        [0, 0, 0, R31, 0, 0, 0],
        [0, 0, 0, 0, 0, -R42, 0],
        [0, -(R12 + R21), 0, 0, 0, 0, -R12],
        [0, 0, 0, 0, -(R32 + R41), 0, -R41],
        [0, R21, 0, 0, R41, 0, R41],
    ]
    return CircuitMatrices.from_parts(a_l, a_r)


def assemble_matrices(cfg: QabConfig) -> CircuitMatrices:
    """Mesh equations ``A_L x' + A_R x = u`` of the equivalent circuit.

    Rows 1-4 are the bridge meshes (bridge, bridge-side leakage, magnetizing
    branch), rows 5 and 6 the link meshes of the (1, 2) and (3, 4) pairs,
    and row 7 the mesh joining the two pairs through the branches of
    transformers 2 and 4.

    Compared with the typeset matrices (:func:`printed_matrices`) five
    entries differ, each restoring sign/index consistency of one KVL row:
    ``A_R[2,3] = -R22``, ``A_L[4,6] = -(L42 + Lm4)``, ``A_L[7,3] = Lm2``,
    ``A_L[7,5] = L41 + Lm4`` and ``A_R[7,2] = -R21`` (1-based).
    """
    (L11, L12), (L21, L22), (L31, L32), (L41, L42) = cfg.l_leak
    (R11, R12), (R21, R22), (R31, R32), (R41, R42) = cfg.r_wind
    Lm1, Lm2, Lm3, Lm4 = cfg.l_mag
    a_l = [
        [L11 + Lm1, -Lm1, 0, 0, 0, 0, -Lm1],
        [0, Lm2, -(Lm2 + L22), 0, 0, 0, 0],
        [0, 0, 0, L31 + Lm3, -Lm3, 0, 0],
        [0, 0, 0, 0, Lm4, -(L42 + Lm4), Lm4],
        [Lm1, -(L12 + Lm1 + Lm2 + L21), Lm2, 0, 0, 0, -(Lm1 + L12)],
        [0, 0, 0, Lm3, -(Lm3 + Lm4 + L32 + L41), Lm4, -(Lm4 + L41)],
        [0, -(L21 + Lm2), Lm2, 0, L41 + Lm4, -Lm4, L41 + Lm4],
    ]
    a_r = [
        [R11, 0, 0, 0, 0, 0, 0],
        [0, 0, -R22, 0, 0, 0, 0],
        [0, 0, 0, R31, 0, 0, 0],
        [0, 0, 0, 0, 0, -R42, 0],
        [0, -(R12 + R21), 0, 0, 0, 0, -R12],
        [0, 0, 0, 0, -(R32 + R41), 0, -R41],
        [0, -R21, 0, 0, R41, 0, R41],
    ]
    return CircuitMatrices.from_parts(a_l, a_r)


def conversion_ratio(cfg: QabConfig, i: int) -> float:
    """DC conversion ratio of port ``i`` (1-based) against port 1.

    ``m_i = (n_1 V_i) / (n_i V_1)``; equal turns ratios reduce it to
    ``V_i / V_1``.
    """
    if not 1 <= i <= 4:
        raise IndexError(f"port index {i} outside 1..4")
    v1 = cfg.v_dc[0]
    if v1 == 0:
        raise ZeroDivisionError("conversion ratio undefined for V1 = 0")
    return (cfg.turns[0] * cfg.v_dc[i - 1]) / (cfg.turns[i - 1] * v1)


def voltage_for_ratio(cfg: QabConfig, i: int, m: float) -> float:
    """Inverse of :func:`conversion_ratio`: the port-``i`` voltage giving ratio ``m``."""
    return m * cfg.v_dc[0] * cfg.turns[i - 1] / cfg.turns[0]


def winding_currents(x: np.ndarray) -> np.ndarray:
    """All eight winding currents (``WINDINGS`` order) from states ``x[..., 7]``."""
    return np.asarray(x) @ WINDING_MAP.T
