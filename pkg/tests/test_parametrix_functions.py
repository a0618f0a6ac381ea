import math
from dataclasses import replace

import numpy as np
import pytest

import pytransmission.parametrix_functions as pf
from pytransmission.parametrix_functions import BoundaryGeometry


def general_geometry(xi=1.0):
    return BoundaryGeometry(B0=1.5, B1=0.7, n0=2.0, n1=0.3, q1=0.4, q2=0.0,
                            dr0=0.1 * xi ** 2, dn0=0.2, psi0=1.0, dpsi0=0.3)


def test_phi2_disk_example():
    assert pf.phi2(2.0, pf.disk_geometry(), 0.0) == pytest.approx(2j / math.sqrt(3))


@pytest.mark.parametrize("xi, theta", [(2.0, 0.0), (5.0, 0.3), (0.4, 0.2), (30.0, -0.1)])
def test_eikonal_residual_vanishes(xi, theta):
    assert pf.eikonal_residual(xi, pf.disk_geometry(), theta) < 1e-14
    assert pf.eikonal_residual(xi, general_geometry(xi), theta) < 1e-12


@pytest.mark.parametrize("xi, theta", [(1.5, 0.0), (3.0, 0.4), (20.0, -0.2)])
def test_disk_a10_closed_form(xi, theta):
    assert pf.a10(xi, pf.disk_geometry(), theta) == pytest.approx(pf.disk_a10(xi, theta), rel=1e-12)


def test_disk_b0_cancels_exactly():
    for xi in (0.3, 1.0, 7.5, 123.0):
        assert pf.b0(xi, pf.disk_geometry()) == 0


def test_b0_undefined_at_zero_frequency():
    with pytest.raises(ValueError, match="symbol undefined at zero frequency"):
        pf.b0(0.0, pf.disk_geometry())


def test_a10_approaches_b0_for_large_xi():
    theta = 0.2

    def gap(xi):
        geom = general_geometry(xi)
        return abs(pf.a10(xi, geom, theta) - pf.b0(xi, geom))

    assert gap(200.0) / gap(100.0) == pytest.approx(0.25, abs=0.05)


def test_hyperbolic_trace():
    trace = pf.hyperbolic_trace(0.5, pf.disk_geometry(), 0.1)
    assert trace.satisfies_bound
    assert trace.trace.imag == pytest.approx(trace.first_order_im, abs=trace.remainder)
    assert trace.trace.real == pytest.approx(math.sqrt(0.75), abs=0.01)
    with pytest.raises(ValueError, match="not hyperbolic"):
        pf.hyperbolic_trace(2.0, pf.disk_geometry(), 0.1)


def test_geometry_validation():
    with pytest.raises(ValueError):
        BoundaryGeometry(B0=0.0, B1=1.0, n0=1.0, n1=0.0, q1=0.0, q2=0.0)
    with pytest.raises(ValueError):
        BoundaryGeometry(B0=1.0, B1=1.0, n0=1.0, n1=0.0, q1=0.0, q2=0.0, eta=2.0)


def test_hyperbolic_decay_table():
    table = pf.hyperbolic_decay_table(200.0, (4.0, 8.0, 16.0), hm_max=0.8)
    assert (table["hm"] <= 0.8).all()
    assert (table["raw"] <= table["bound"]).all()

    low = table[table["hm"] <= 0.5]
    by_im = {im: group.set_index("mode")["corrected"] for im, group in low.groupby("im_lambda")}
    modes = by_im[4.0].index.intersection(by_im[8.0].index).intersection(by_im[16.0].index)
    assert len(modes) > 0
    assert (by_im[8.0][modes] < by_im[4.0][modes]).all()
    assert (by_im[16.0][modes] <= by_im[4.0][modes]).all()


def test_elliptic_curve_requires_elliptic_mode():
    with pytest.raises(ValueError):
        pf.elliptic_residual_curve(hm_fixed=1.0)


def test_elliptic_residual_curve_columns():
    curve = pf.elliptic_residual_curve([100 + 5j, 200 + 5j])
    assert list(curve.columns) == pf.ELLIPTIC_COLUMNS
    assert (curve["resid_with_a10"] < curve["resid_without"]).all()


def test_fit_loglog_slope():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert pf.fit_loglog_slope(x, 3 * x ** 2) == pytest.approx(2.0)
    assert math.isnan(pf.fit_loglog_slope([1.0], [1.0]))


def test_parametrix_suite_meets_slope_windows():
    report = pf.parametrix_suite(samples=200)
    assert 0.8 <= report.slope_without <= 1.2
    assert 1.7 <= report.slope_with <= 2.3
    assert report.b0_disk == 0
    assert report.a10_closed_form_error < 1e-12
    assert report.passed
    assert report.summary()["passed"] is True


def test_larger_hm_gives_smaller_residuals():
    near = pf.elliptic_residual_curve([200 + 5j], hm_fixed=1.3)
    far = pf.elliptic_residual_curve([200 + 5j], hm_fixed=5.0)
    assert far.loc[0, "resid_without"] < near.loc[0, "resid_without"]


def test_a10_closed_form_error_is_relative_to_the_terms():
    geom = pf.disk_geometry()
    for xi, theta in [(1.21, 0.45), (49.9, -0.3), (7.0, 0.0)]:
        error = abs(pf.a10(xi, geom, theta) - pf.disk_a10(xi, theta))
        assert error <= 1e-13 * pf.a10_scale(xi, geom, theta)
    assert pf.a10_scale(50.0, geom, 0.0) == pytest.approx(1.0, rel=1e-3)


def test_b0_does_not_depend_on_the_index():
    geom = general_geometry(3.0)
    reference = pf.b0(3.0, geom)
    for n0, n1 in [(0.5, 0.0), (4.0, -2.0), (9.0, 7.0)]:
        assert pf.b0(3.0, replace(geom, n0=n0, n1=n1)) == reference


def test_phi2_vanishes_for_flat_boundary():
    flat = BoundaryGeometry(B0=1.0, B1=0.0, n0=1.0, n1=0.0, q1=0.0, q2=0.0)
    for xi, theta in [(2.0, 0.0), (0.3, 0.5), (40.0, -0.2)]:
        assert pf.phi2(xi, flat, theta) == 0


def test_hyperbolic_trace_lower_bound_on_random_points():
    rng = np.random.default_rng(9)
    for _ in range(1000):
        n0 = rng.uniform(0.5, 4.0)
        xi = rng.uniform(0.0, 0.99) * math.sqrt(n0)
        theta = rng.uniform(-1.0, 1.0)
        trace = pf.hyperbolic_trace(xi, pf.disk_geometry(n0), theta)
        assert trace.satisfies_bound
