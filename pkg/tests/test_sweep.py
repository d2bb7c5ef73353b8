import numpy as np
import pytest

from qab.circuit import conversion_ratio
from qab.sweep import (
    GRID_HEADER,
    Axis,
    evaluate_point,
    power_ratio_map,
    power_sweep,
    ratio_map,
    redundancy_scan,
)


def test_zero_demand_cell(table_cfg):
    cell = evaluate_point(table_cfg, 0.0)
    assert cell.converged
    assert abs(cell.values["p2"]) < 1e-6 and abs(cell.values["p4"]) < 1e-6


def test_small_ratio_map(table_cfg):
    g = ratio_map(table_cfg, (1.0, 1.2), (1.0, 1.2), grid=(2, 2))
    assert g.shape == (2, 2)
    assert len(g.cells) == 4
    first = g.cells[0]
    assert first.m2 == pytest.approx(1.0) and first.m4 == pytest.approx(1.0)
    # unit ratios with equal turns put V2 = V4 = V1
    v1 = table_cfg.v_dc[0]
    direct = evaluate_point(table_cfg.with_voltages((v1, v1, table_cfg.v_dc[2], v1)), 50.0)
    assert first.values == pytest.approx(direct.values)
    np.testing.assert_array_equal(first.zvs, direct.zvs)
    # row-major: second cell moves along m4
    assert g.cells[1].m2 == pytest.approx(1.0) and g.cells[1].m4 == pytest.approx(1.2)


def test_power_ratio_map_cell(table_cfg):
    g = power_ratio_map(table_cfg, (1.0, 1.25), (20.0, 380.0), grid=(3, 3))
    cell = g.cells[-1]
    assert cell.m4 == pytest.approx(1.25) and cell.p_total == pytest.approx(380.0)
    direct = evaluate_point(table_cfg, 380.0)  # table voltages already give m4 = 1.25
    assert conversion_ratio(table_cfg, 4) == pytest.approx(1.25)
    assert cell.values == pytest.approx(direct.values, rel=1e-9)


def test_power_sweep_monotone_and_continuous(table_cfg):
    g = power_sweep(table_cfg, 200.0, 11)
    assert g.converged.all()
    p2 = g.field("p2")
    np.testing.assert_allclose(p2, -np.linspace(0, 200, 11) / 2, atol=1e-5)
    assert np.abs(np.diff(g.field("delta2"))).max() < 0.1


def test_redundancy_scan_is_flat(table_cfg):
    scan = redundancy_scan(table_cfg, 300.0)
    assert scan.converged
    assert np.ptp(scan.p1) < 1e-9 * max(abs(scan.p1).max(), 1.0)
    assert np.ptp(scan.i1_peak) < 1e-9 * scan.i1_peak.max()
    assert len(scan.offset) == 11


def test_csv_and_determinism(table_cfg):
    a = power_sweep(table_cfg, 100.0, 4).to_csv()
    b = power_sweep(table_cfg, 100.0, 4).to_csv()
    assert a == b
    lines = a.splitlines()
    assert lines[0] == ",".join(GRID_HEADER)
    assert len(lines) == 5


def test_parallel_matches_serial(table_cfg):
    a = ratio_map(table_cfg, (0.9, 1.3), (0.9, 1.3), grid=(3, 2))
    b = ratio_map(table_cfg, (0.9, 1.3), (0.9, 1.3), grid=(3, 2), workers=2)
    assert a.to_csv() == b.to_csv()


def test_non_converged_cells_are_nan(table_cfg):
    g = power_sweep(table_cfg, 1e6, 2)
    assert g.converged.tolist() == [True, False]
    last = g.to_csv().splitlines()[-1].split(",")
    assert last[GRID_HEADER.index("delta2")] == "nan"
    assert last[GRID_HEADER.index("zvs1")] == "nan"
    assert last[-1] == "0"
    assert np.isnan(g.field("p1")[-1])


def test_argument_checks(table_cfg):
    with pytest.raises(ValueError):
        power_sweep(table_cfg, 100.0, 1)
    with pytest.raises(ValueError):
        ratio_map(table_cfg, (0.0, 1.0), (1.0, 1.2), grid=(2, 2))
    with pytest.raises(ValueError):
        Axis("m2", 0.0, 1.0, 0)
