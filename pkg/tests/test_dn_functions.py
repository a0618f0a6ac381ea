import math

import numpy as np
import pytest

import pytransmission.dn_functions as dn
import pytransmission.symbol_functions as sf
from pytransmission.utility_functions import ConfigError


def test_dn_mode_tail_asymptotics():
    m, lam = 50, 3 + 2j
    d = dn.dn_mode(m, lam)
    p = sf.p_mode(m ** 2, lam)
    assert d - p == pytest.approx(-lam ** 2 / (2 * m * (m + 1)), rel=2e-2)
    assert d + m == pytest.approx(lam ** 2 / (2 * (m + 1)), rel=2e-2)


def test_dn_modes_matches_single_modes():
    lam = 40 + 6j
    medium = dn.Medium(2.0, 3.0)
    table = dn.dn_modes(80, lam, medium)
    for m in (0, 10, 55, 80):
        assert table[m] == pytest.approx(dn.dn_mode(m, lam, medium), rel=1e-10)


def test_medium_validation():
    assert dn.Medium(1.0, 4.0).wavenumber(3.0) == pytest.approx(6.0)
    with pytest.raises(ValueError):
        dn.Medium(0.0, 1.0)


def test_mode_cap():
    assert dn.mode_cap(100) == 320
    assert dn.mode_cap(100, dn.Medium(1.0, 4.0)) == 620


def test_tail_model_holds_past_the_cap():
    assert dn.tail_excess(100 + 10j) < 1.0


def test_discrepancy_decreases_along_sqrt_rule():
    rows = dn.discrepancy_scan([100, 200, 400], "sqrt", progress=False)
    ratios = [row.sup_over_abs_lambda for row in rows]
    assert all(np.isfinite(ratios))
    assert ratios[0] > ratios[1] > ratios[2]
    assert [row.lam.imag for row in rows] == pytest.approx([10.0, math.sqrt(200), 20.0])
    assert all(0 <= row.argmax_mode <= row.mode_cap for row in rows)


def test_discrepancy_fixed_rule_and_weighted_column():
    rows = dn.discrepancy_scan([100], "fixed:5", progress=False)
    assert rows[0].lam == 100 + 5j
    frame = dn.rows_to_frame(rows, weighted=True)
    assert list(frame.columns) == dn.DISCREPANCY_COLUMNS + ["weighted_sup"]
    assert frame.loc[0, "weighted_sup"] >= frame.loc[0, "sup"]


def test_scan_flags_wedge_violations():
    rows = dn.discrepancy_scan([10], "fixed:9.5", progress=False)
    assert rows[0].flags == ("outside-wedge",)
    assert math.isnan(rows[0].sup_discrepancy)


def test_scan_is_independent_of_worker_count():
    serial = dn.rows_to_frame(dn.discrepancy_scan([100, 150], "sqrt", progress=False))
    parallel = dn.rows_to_frame(dn.discrepancy_scan([100, 150], "sqrt", n_jobs=2, progress=False))
    assert serial.equals(parallel)


@pytest.mark.parametrize("text, im_at_100", [("sqrt", 10.0), ("fixed:5", 5.0), ("power:0.5", 10.0)])
def test_im_rule_parse(text, im_at_100):
    assert dn.ImRule.parse(text)(100.0) == pytest.approx(im_at_100)


@pytest.mark.parametrize("text", ["bogus", "fixed:0", "power:1.5", "fixed:abc"])
def test_im_rule_rejects(text):
    with pytest.raises(ConfigError):
        dn.ImRule.parse(text)


def test_re_grid():
    assert dn.re_grid([100, 200]) == [100.0, 200.0]
    grid = dn.re_grid([100, 800], samples=4)
    assert grid == pytest.approx([100, 200, 400, 800])
    with pytest.raises(ConfigError):
        dn.re_grid([100, 200, 300], samples=4)


@pytest.mark.slow
def test_discrepancy_over_abs_lambda_tracks_inverse_imaginary_part():
    rows = dn.discrepancy_scan([100, 200, 400, 800], "sqrt", progress=False)
    assert not any(row.flags for row in rows)
    for row in rows:
        assert row.sup_over_abs_lambda * 4 * row.lam.imag == pytest.approx(1.0, rel=0.25)


def test_elliptic_modes_follow_the_tail_model():
    rng = np.random.default_rng(3)
    for _ in range(200):
        lam = complex(rng.uniform(0.1, 10.0) * np.exp(1j * rng.uniform(-1.5, 1.5)))
        m = int(rng.integers(max(60, math.ceil(10 * abs(lam))), 400))
        assert abs(dn.dn_mode(m, lam) - sf.p_mode(m ** 2, lam)) <= dn.tail_model(m, lam)


def test_mode_supremum_bounds_the_quadratic_form():
    lam = 100 + 10j
    cap = dn.mode_cap(lam)
    diff = dn.dn_modes(cap, lam) - sf.p_modes(np.arange(cap + 1), lam)
    sup = np.max(np.abs(diff))
    assert dn.discrepancy(lam).sup_discrepancy == pytest.approx(sup)

    rng = np.random.default_rng(4)
    for _ in range(50):
        u = rng.normal(size=cap + 1) + 1j * rng.normal(size=cap + 1)
        u[rng.random(cap + 1) < 0.7] = 0
        norm = np.vdot(u, u).real
        assert abs(np.vdot(u, diff * u)) <= sup * norm * (1 + 1e-10)
        assert np.linalg.norm(diff * u) <= sup * math.sqrt(norm) * (1 + 1e-10)


def test_dn_mode_conjugate_symmetry():
    medium = dn.Medium(1.0, 4.0)
    for m, lam in [(0, 3 + 2j), (7, 20 - 5j), (40, 15 + 1j), (120, 60 + 30j)]:
        expected = dn.dn_mode(m, lam, medium).conjugate()
        assert dn.dn_mode(m, lam.conjugate(), medium) == pytest.approx(expected, rel=1e-12)
    table = dn.dn_modes(60, 40 + 6j)
    assert np.allclose(dn.dn_modes(60, 40 - 6j), table.conjugate(), rtol=1e-12, atol=0)
