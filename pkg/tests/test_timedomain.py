import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from qab.circuit import CircuitMatrices, assemble_matrices
from qab.errors import NoUniqueSteadyState, WrongWindowLength
from qab.timedomain import (
    WAVEFORM_HEADER,
    cycle_average_powers,
    cycle_copper_loss,
    cycle_map,
    fundamental_phasor,
    link_voltage,
    periodic_steady_state,
    settle_by_integration,
    simulate_cycles,
    state_at,
    step_exact,
)


def test_zero_input_zero_state_stays_zero(table_cfg):
    m = assemble_matrices(table_cfg)
    assert not step_exact(m, np.zeros(7), np.zeros(7), 1e-5).any()


def test_integrator_limit():
    a_l = np.diag(np.arange(1.0, 8.0)) * 1e-3
    m = CircuitMatrices.from_parts(a_l, np.zeros((7, 7)))
    x0 = np.linspace(-1, 1, 7)
    u = np.arange(7.0)
    h = 3e-6
    np.testing.assert_allclose(step_exact(m, x0, u, h), x0 + h * m.b @ u, rtol=1e-13, atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-7, 4e-5), st.floats(1e-7, 4e-5))
def test_semigroup(h1, h2):
    from qab.config import table_i_config

    m = assemble_matrices(table_i_config())
    x0 = np.array([1.0, -0.5, 0.3, 2.0, -1.0, 0.1, 0.4])
    u = np.array([200.0, -180.0, 220.0, 250.0, 0, 0, 0])
    two = step_exact(m, step_exact(m, x0, u, h1), u, h2)
    one = step_exact(m, x0, u, h1 + h2)
    np.testing.assert_allclose(two, one, rtol=1e-9, atol=1e-9 * np.abs(one).max())


def test_step_matches_ode_solver(table_cfg):
    m = assemble_matrices(table_cfg)
    x0 = np.array([0.5, -0.2, 0.1, 0.7, -0.3, 0.2, 0.05])
    u = np.array([200.0, 180.0, -220.0, 250.0, 0, 0, 0])
    h = table_cfg.half_period
    sol = solve_ivp(lambda t, x: m.a @ x + m.b @ u, (0, h), x0, method="DOP853",
                    rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(step_exact(m, x0, u, h), sol.y[:, -1], rtol=1e-8, atol=1e-9)


def test_periodic_steady_state_is_fixed_point(table_cfg):
    phi, gam = cycle_map(table_cfg)
    x0 = periodic_steady_state(table_cfg)
    assert np.max(np.abs(phi @ x0 + gam - x0)) < 1e-9 * max(1.0, np.abs(x0).max())


def test_settling_reaches_same_state(table_cfg_1mh):
    x0 = periodic_steady_state(table_cfg_1mh)
    xs = settle_by_integration(table_cfg_1mh, rtol=1e-12)
    np.testing.assert_allclose(xs, x0, atol=1e-8)


def test_lossless_network_has_no_unique_steady_state(table_cfg):
    with pytest.raises(NoUniqueSteadyState):
        periodic_steady_state(table_cfg.lossless())


def test_record_is_periodic(table_cfg):
    rec = simulate_cycles(table_cfg, n_cycles=2, samples_per_cycle=256)
    np.testing.assert_allclose(rec.x[-1], rec.x[0], atol=1e-9 * np.abs(rec.x).max())
    assert rec.t[-1] == pytest.approx(2 * table_cfg.period)
    assert rec.uniform.sum() == 512


def test_event_samples_present(table_cfg):
    rec = simulate_cycles(table_cfg, samples_per_cycle=128)
    extra = rec.t[:-1][~rec.uniform[:-1]]
    # each off-grid switching instant gets its own sample; delta1 = 0 puts two of the eight events on the grid
    assert len(extra) == 6


def test_link_voltage_same_on_every_branch(table_cfg):
    rec = simulate_cycles(table_cfg, samples_per_cycle=128)
    ref = link_voltage(table_cfg, rec.x, rec.u, branch=2)
    scale = np.abs(ref).max()
    for b in (1, 3, 4):
        np.testing.assert_allclose(link_voltage(table_cfg, rec.x, rec.u, branch=b), ref,
                                   atol=1e-9 * scale)
    with pytest.raises(ValueError):
        link_voltage(table_cfg, rec.x, rec.u, branch=5)


def test_link_voltage_static_case(table_cfg):
    x = np.zeros(7)
    u = np.array([0, 100.0, 0, 0, 0, 0, 0])
    # zero state: only the bridge-2 voltage and inductive drops from x' remain
    m = assemble_matrices(table_cfg)
    dx = m.b @ u
    l21, l22 = table_cfg.l_leak[1]
    expect = 100.0 + l22 * dx[2] + l21 * dx[1]
    assert link_voltage(table_cfg, x, u) == pytest.approx(expect)


@pytest.mark.parametrize("n", [64, 1000, 4096])
def test_fundamental_of_sine(n):
    f = 25e3
    t = np.arange(n) / (n * f)
    x = 3.0 * np.sin(2 * np.pi * f * t + 0.7) + 1.5
    ph = fundamental_phasor(x, f, t)
    assert abs(ph) == pytest.approx(3.0, rel=1e-12)
    assert np.angle(ph) == pytest.approx(0.7, abs=1e-12)


def test_fundamental_of_square():
    n, f = 2048, 25e3
    t = (np.arange(n) + 0.5) / (n * f)
    x = np.where(t * f < 0.5, 1.0, -1.0)
    assert abs(fundamental_phasor(x, f, t)) == pytest.approx(4 / np.pi, rel=1e-5)


def test_fundamental_window_checks():
    f = 25e3
    with pytest.raises(WrongWindowLength):
        fundamental_phasor(np.ones(32), f)
    t = np.arange(100) / (110 * f)
    with pytest.raises(WrongWindowLength):
        fundamental_phasor(np.ones(100), f, t)


def test_average_power_equals_copper_loss(table_cfg):
    rec = simulate_cycles(table_cfg, samples_per_cycle=4096)
    p = cycle_average_powers(rec)
    loss = cycle_copper_loss(table_cfg, rec)
    assert loss > 0
    assert p.sum() == pytest.approx(loss, rel=1e-6)


def test_common_shift_delays_waveforms(table_cfg):
    n = 1024
    base = simulate_cycles(table_cfg, samples_per_cycle=n)
    c = 0.25  # shift of T/8, i.e. n/8 samples
    shifted_cfg = table_cfg.with_delta(tuple(d + c for d in table_cfg.delta))
    shifted = simulate_cycles(shifted_cfg, samples_per_cycle=n)
    a = base.x[base.cycle(0)]
    b = shifted.x[shifted.cycle(0)]
    np.testing.assert_allclose(np.roll(b, -n // 8, axis=0), a, atol=1e-9 * np.abs(a).max())


def test_finer_sampling_is_exact(table_cfg):
    coarse = simulate_cycles(table_cfg, samples_per_cycle=256)
    fine = simulate_cycles(table_cfg, samples_per_cycle=512)
    a = coarse.x[coarse.cycle(0)]
    b = fine.x[fine.cycle(0)][::2]
    np.testing.assert_allclose(a, b, atol=1e-10 * np.abs(a).max())


def test_state_at_matches_record(table_cfg):
    m = assemble_matrices(table_cfg)
    x0 = periodic_steady_state(table_cfg, m)
    rec = simulate_cycles(table_cfg, x0=x0, samples_per_cycle=64, mats=m)
    k = 37
    np.testing.assert_allclose(state_at(table_cfg, x0, rec.t[rec.cycle(0)][k], m),
                               rec.x[rec.cycle(0)][k], atol=1e-10)


def test_csv_output(table_cfg):
    rec = simulate_cycles(table_cfg, samples_per_cycle=64)
    text = rec.to_csv()
    lines = text.splitlines()
    assert lines[0] == ",".join(WAVEFORM_HEADER)
    assert len(lines) == len(rec.t) + 1
    assert text == simulate_cycles(table_cfg, samples_per_cycle=64).to_csv()
