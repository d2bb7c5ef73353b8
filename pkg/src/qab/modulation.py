"""Single-phase-shift square-wave bridge voltages and their switching timeline.

Bridge ``i`` outputs ``+V_i`` while ``(t - delta_i * T_h) mod T`` lies in
``[0, T_h)`` and ``-V_i`` otherwise, so its fundamental is
``(4 V_i / pi) sin(w t - delta_i pi)``.  Transition instants belong to the
new polarity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import N_STATES, QabConfig

# events closer than this fraction of a period are merged
MERGE_TOL = 1e-12


def bridge_voltage(cfg: QabConfig, i: int, t):
    """Instantaneous output voltage of bridge ``i`` (1-based) at time(s) ``t``."""
    v = cfg.v_dc[i - 1]
    phase = np.mod(np.asarray(t, dtype=float) - cfg.delta[i - 1] * cfg.half_period, cfg.period)
    out = np.where(phase < cfg.half_period, v, -v)
    return float(out) if out.ndim == 0 else out


def input_vector(cfg: QabConfig, t) -> np.ndarray:
    """The 7-entry input ``[v1, v2, v3, v4, 0, 0, 0]`` at time ``t``."""
    u = np.zeros(N_STATES)
    for i in range(4):
        u[i] = bridge_voltage(cfg, i + 1, t)
    return u


@dataclass(frozen=True)
class SwitchingEvent:
    time: float
    ports: tuple[int, ...]
    polarity: tuple[int, ...]  # +1 / -1 after the transition, per entry of ``ports``


@dataclass(frozen=True)
class SwitchingTimeline:
    period: float
    events: tuple[SwitchingEvent, ...]

    @property
    def times(self) -> np.ndarray:
        return np.array([e.time for e in self.events])

    def segments(self, cfg: QabConfig):
        """Constant-input intervals covering ``[0, T)``.

        Returns a list of ``(t_start, t_end, u)``; ``u`` is the input vector
        valid on the open interval.
        """
        bounds = sorted({0.0, *self.times.tolist(), self.period})
        out = []
        for a, b in zip(bounds[:-1], bounds[1:]):
            if b - a <= MERGE_TOL * self.period:
                continue
            out.append((a, b, input_vector(cfg, 0.5 * (a + b))))
        return out


def switching_events(cfg: QabConfig) -> SwitchingTimeline:
    """Both transitions of every bridge within one period, sorted, coincident ones merged."""
    T, Th = cfg.period, cfg.half_period
    raw = []
    for i in range(4):
        rise = np.mod(cfg.delta[i] * Th, T)
        fall = np.mod(cfg.delta[i] * Th + Th, T)
        raw.append((rise, i + 1, 1))
        raw.append((fall, i + 1, -1))
    snapped = []
    for t, port, pol in raw:
        if T - t <= MERGE_TOL * T:
            t = 0.0
        snapped.append((float(t), port, pol))
    snapped.sort()

    events = []
    for t, port, pol in snapped:
        if events and t - events[-1][0] <= MERGE_TOL * T:
            events[-1][1].append(port)
            events[-1][2].append(pol)
        else:
            events.append((t, [port], [pol]))
    return SwitchingTimeline(
        period=T,
        events=tuple(SwitchingEvent(t, tuple(p), tuple(q)) for t, p, q in events),
    )
