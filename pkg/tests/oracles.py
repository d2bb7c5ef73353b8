"""Independent reference computations used by the tests.

Nothing here calls into the mesh matrices of ``qab.circuit``.
"""

import numpy as np
from hypothesis import strategies as st

from qab.circuit import QabConfig


def nodal_solution(cfg: QabConfig, v_hat):
    """Phasor node analysis of the T-model network.

    Nodes: magnetizing nodes m1..m4 and the common link node; bridge
    terminals are driven.  Returns the seven state phasors
    ``[I11, I21, I22, I31, I32, I42, I5]``.
    """
    w = cfg.omega
    z = {}
    for i in range(4):
        for k in range(2):
            z[(i, k)] = cfg.r_wind[i][k] + 1j * w * cfg.l_leak[i][k]
    zm = [1j * w * lm for lm in cfg.l_mag]
    # unknowns: Vm1..Vm4, Vlink
    n = 5
    G = np.zeros((n, n), dtype=complex)
    rhs = np.zeros(n, dtype=complex)

    def branch(a, b, zz, va=None, vb=None):
        # admittance between unknown/fixed nodes; None index means fixed voltage
        yv = 1.0 / zz
        if a is not None:
            G[a, a] += yv
            if b is not None:
                G[a, b] -= yv
            else:
                rhs[a] += yv * vb
        if b is not None:
            G[b, b] += yv
            if a is not None:
                G[b, a] -= yv
            else:
                rhs[b] += yv * va

    LINK = 4
    branch(None, 0, z[(0, 0)], va=v_hat[0])  # bridge 1 -> m1
    branch(0, LINK, z[(0, 1)])
    branch(LINK, 1, z[(1, 0)])               # link -> m2
    branch(1, None, z[(1, 1)], vb=v_hat[1])  # m2 -> bridge 2
    branch(None, 2, z[(2, 0)], va=v_hat[2])  # bridge 3 -> m3
    branch(2, LINK, z[(2, 1)])
    branch(LINK, 3, z[(3, 0)])               # link -> m4
    branch(3, None, z[(3, 1)], vb=v_hat[3])  # m4 -> bridge 4
    for i in range(4):
        G[i, i] += 1.0 / zm[i]
    vn = np.linalg.solve(G, rhs)
    vm, vl = vn[:4], vn[LINK]
    i11 = (v_hat[0] - vm[0]) / z[(0, 0)]
    i12 = (vm[0] - vl) / z[(0, 1)]
    i21 = (vl - vm[1]) / z[(1, 0)]
    i22 = (vm[1] - v_hat[1]) / z[(1, 1)]
    i31 = (v_hat[2] - vm[2]) / z[(2, 0)]
    i32 = (vm[2] - vl) / z[(2, 1)]
    i42 = (vm[3] - v_hat[3]) / z[(3, 1)]
    i5 = i12 - i21
    return np.array([i11, i21, i22, i31, i32, i42, i5]), vl


def nodal_port_admittance(cfg: QabConfig):
    cols = []
    for j in range(4):
        e = np.zeros(4, dtype=complex)
        e[j] = 1.0
        x, _ = nodal_solution(cfg, e)
        cols.append(x[[0, 2, 3, 5]])
    return np.array(cols).T


def log_uniform(lo, hi):
    return st.floats(np.log(lo), np.log(hi)).map(np.exp)


@st.composite
def configs(draw, lossless=False):
    """Random valid converters over the acceptance parameter ranges."""
    L = lambda: draw(log_uniform(10e-6, 5e-3))  # noqa: E731
    R = (lambda: 0.0) if lossless else (lambda: draw(st.floats(0.0, 2.0)))
    return QabConfig(
        v_dc=[draw(st.floats(0.0, 400.0)) for _ in range(4)],
        delta=[draw(st.floats(-1.0, 1.0)) for _ in range(4)],
        l_leak=[(L(), L()) for _ in range(4)],
        r_wind=[(R(), R()) for _ in range(4)],
        turns=[draw(st.floats(0.5, 4.0)) for _ in range(4)],
        f_sw=draw(st.floats(10e3, 100e3)),
        l_mag=[L() for _ in range(4)],
    )


def random_config(rng: np.random.Generator, lossless=False) -> QabConfig:
    lu = lambda: float(np.exp(rng.uniform(np.log(10e-6), np.log(5e-3))))  # noqa: E731
    r = (lambda: 0.0) if lossless else (lambda: float(rng.uniform(0.0, 2.0)))
    return QabConfig(
        v_dc=rng.uniform(0.0, 400.0, 4),
        delta=rng.uniform(-1.0, 1.0, 4),
        l_leak=[(lu(), lu()) for _ in range(4)],
        r_wind=[(r(), r()) for _ in range(4)],
        turns=rng.uniform(0.5, 4.0, 4),
        f_sw=float(rng.uniform(10e3, 100e3)),
        l_mag=[lu() for _ in range(4)],
    )
