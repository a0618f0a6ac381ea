"""
Boundary traces of the first-order parametrix for the DN map.

All formulas are pointwise in (x', xi') for the d = 2 scalar case: the
quadratic forms <B0 xi, xi> reduce to B0 * xi^2 and tangential gradients
to single derivatives. The unit disk in boundary normal coordinates
(x1 = 1 - r) gives B0 = 1, B1 = 2, q1 = -1.
"""

# %% Importing required libraries
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

import pytransmission.dn_functions as dn
import pytransmission.symbol_functions as sf
from pytransmission.utility_functions import NumericalFault

logger = logging.getLogger(__name__)

ELLIPTIC_COLUMNS = ["h", "re_lambda", "im_lambda", "mode", "resid_with_a10", "resid_without", "flags"]
SLOPE_WINDOW_WITHOUT = (0.8, 1.2)
SLOPE_WINDOW_WITH = (1.7, 2.3)
B0_DISK_TOLERANCE = 1e-14
DEFAULT_LAMBDAS = (100 + 5j, 200 + 5j, 400 + 5j, 800 + 5j)


# %% Geometry

@dataclass(frozen=True)
class BoundaryGeometry:
    """
    Boundary data at one point x' of the boundary.

    B(x) = B0 + x1 B1 + O(x1^2), n(x) = n0 + x1 n1 + O(x1^2) and
    Laplacian = d_x1^2 + <B0 grad', grad'> + q1 d_x1 + <q2, grad'> + O(x1).
    dr0, dn0, dpsi0 are tangential derivatives of r0, n0 and the cutoff
    amplitude psi0; eta is the value of the glancing cutoff at the point.
    """
    B0: float
    B1: float
    n0: float
    n1: float
    q1: float
    q2: float
    dr0: float = 0.0
    dn0: float = 0.0
    psi0: float = 1.0
    dpsi0: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        if not self.B0 > 0:
            raise ValueError(f"B0 must be positive, got {self.B0}")
        if not self.n0 > 0:
            raise ValueError(f"n0 must be positive, got {self.n0}")
        if not 0 <= self.eta <= 1:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")

    def r0(self, xi):
        return self.B0 * xi ** 2


def disk_geometry(n0=1.0):
    """Unit disk with constant index n0."""
    return BoundaryGeometry(B0=1.0, B1=2.0, n0=n0, n1=0.0, q1=-1.0, q2=0.0)


# %% Trace coefficients

def rho(xi, geom, theta):
    """-sqrt(B0 xi^2 - (1 + i theta) n0)."""
    return sf.rho_j(geom.r0(xi), geom.n0, theta)


def phi1(xi, geom, theta):
    """Normal derivative of the phase on the boundary, -i rho."""
    return -1j * rho(xi, geom, theta)


def grad_rho(xi, geom, theta):
    """Tangential derivative of rho from 2 rho grad(rho) = grad(r0) - (1 + i theta) grad(n0)."""
    return (geom.dr0 - (1 + 1j * theta) * geom.dn0) / (2 * rho(xi, geom, theta))


def phi2(xi, geom, theta):
    """
    Second normal coefficient of the phase.

    phi2 = (2 rho)^-1 B0 xi grad(rho) + (4 i rho)^-1 B1 xi^2 - (1 + i theta)(4 i rho)^-1 n1

    Example usage:
    phi2(2.0, disk_geometry(), 0.0)  # 2i/sqrt(3)
    """
    root = rho(xi, geom, theta)
    return (geom.B0 * xi * grad_rho(xi, geom, theta) / (2 * root)
            + geom.B1 * xi ** 2 / (4j * root)
            - (1 + 1j * theta) * geom.n1 / (4j * root))


def eikonal_residual(xi, geom, theta):
    """
    Relative residual of the x1-coefficient of the eikonal equation,

    4 phi1 phi2 + 2 i B0 xi grad(rho) + B1 xi^2 - (1 + i theta) n1 = 0,

    divided by the sum of the moduli of its terms.
    """
    terms = (
        4 * phi1(xi, geom, theta) * phi2(xi, geom, theta),
        2j * geom.B0 * xi * grad_rho(xi, geom, theta),
        geom.B1 * xi ** 2,
        -(1 + 1j * theta) * geom.n1,
    )
    scale = sum(abs(term) for term in terms)
    if scale == 0:
        return 0.0
    return abs(sum(terms)) / scale


def a10(xi, geom, theta):
    """
    First-order amplitude trace.

    a10 = -phi1^-1 B0 xi dpsi - (phi1^-1 phi2 + q1/2 - (2 phi1)^-1 q2 xi) psi
    """
    first = phi1(xi, geom, theta)
    return (-geom.B0 * xi * geom.dpsi0 / first
            - (phi2(xi, geom, theta) / first + geom.q1 / 2 - geom.q2 * xi / (2 * first)) * geom.psi0)


def disk_a10(xi, theta, n0=1.0):
    """Closed form of a10 on the disk, -(1 + i theta) n0 / (2 rho^2)."""
    root = sf.rho_j(xi ** 2, n0, theta)
    return -(1 + 1j * theta) * n0 / (2 * root ** 2)


def a10_scale(xi, geom, theta):
    """Sum of the moduli of the terms of a10; rounding errors in a10 are relative to it."""
    first = phi1(xi, geom, theta)
    return (abs(geom.B0 * xi * geom.dpsi0 / first)
            + (abs(phi2(xi, geom, theta) / first) + abs(geom.q1) / 2 + abs(geom.q2 * xi / (2 * first))) * abs(geom.psi0))


def b0(xi, geom):
    """
    Amplitude of the elliptic correction; independent of n0, n1 and theta.

    b0 = i (1 - eta) r0^-1/2 B0 xi dpsi0
         - (1 - eta) psi0 / 4 * (-i r0^-3/2 B0 xi dr0 + B1 xi^2 / r0 + 2 q1 + 2 r0^-1/2 q2 xi)

    Raises:
    - ValueError: "symbol undefined at zero frequency" for xi = 0.
    """
    if xi == 0:
        raise ValueError("symbol undefined at zero frequency")
    r0 = geom.r0(xi)
    root_r0 = math.sqrt(r0)
    weight = 1.0 - geom.eta
    bracket = (-1j * geom.B0 * xi * geom.dr0 / (r0 * root_r0)
               + geom.B1 * xi ** 2 / r0
               + 2 * geom.q1
               + 2 * geom.q2 * xi / root_r0)
    return 1j * weight * geom.B0 * xi * geom.dpsi0 / root_r0 - weight * geom.psi0 * bracket / 4


# %% Hyperbolic region

@dataclass(frozen=True)
class HyperbolicTrace:
    trace: complex
    first_order_im: float
    lower_bound: float
    remainder: float

    @property
    def satisfies_bound(self):
        return self.trace.imag >= self.lower_bound


def hyperbolic_trace(xi, geom, theta, M_half=2):
    """
    Normal derivative of the phase at a hyperbolic point, -i rho, with its
    first-order imaginary part (|theta|/2) n0 (n0 - r0)^-1/2, the lower bound
    sqrt(n0) |theta| / 3 and the size |theta|^M_half of the dropped terms.

    Raises:
    - ValueError: "not hyperbolic" when r0 >= n0.
    """
    r0 = geom.r0(xi)
    if r0 >= geom.n0:
        raise ValueError(f"not hyperbolic: r0 = {r0} >= n0 = {geom.n0}")
    if M_half < 1:
        raise ValueError(f"M_half must be a positive integer, got {M_half}")
    return HyperbolicTrace(
        trace=phi1(xi, geom, theta),
        first_order_im=abs(theta) / 2 * geom.n0 / math.sqrt(geom.n0 - r0),
        lower_bound=math.sqrt(geom.n0) * abs(theta) / 3,
        remainder=abs(theta) ** M_half,
    )


def hyperbolic_decay_table(re_lambda=200.0, im_values=(4.0, 8.0, 16.0), hm_max=0.8):
    """
    Per-mode discrepancy between h d_m and the boundary symbols in the
    hyperbolic region, for the medium (1, 1) at several Im(lambda).

    Only modes with h m <= hm_max at every Im value are included. Columns:
    im_lambda, h, theta, mode, hm, raw (|h d_m - rho|), corrected
    (|h d_m - rho - h a10|) and bound (2 h |a10| + exp(-Im/2)).
    """
    scalings = [sf.scale(complex(re_lambda, im)) for im in im_values]
    top_mode = int(math.floor(hm_max / max(params.h for params in scalings)))
    rows = []
    for params in scalings:
        d = dn.dn_modes(top_mode, params.lam)
        for m in range(top_mode + 1):
            hm = params.h * m
            root = sf.rho_j(hm ** 2, 1.0, params.theta)
            first = disk_a10(hm, params.theta)
            rows.append({
                "im_lambda": params.lam.imag,
                "h": params.h,
                "theta": params.theta,
                "mode": m,
                "hm": hm,
                "raw": abs(params.h * d[m] - root),
                "corrected": abs(params.h * d[m] - root - params.h * first),
                "bound": 2 * params.h * abs(first) + math.exp(-params.lam.imag / 2),
            })
    logger.info("Hyperbolic decay table: %d modes at %d Im values", top_mode + 1, len(scalings))
    return pd.DataFrame(rows)


# %% Elliptic region

def _elliptic_row(lam, hm_fixed, medium):
    params = sf.scale(lam)
    m = int(round(hm_fixed / params.h))
    hm = params.h * m
    n0 = medium.n / medium.c
    record = {"h": params.h, "re_lambda": params.lam.real, "im_lambda": params.lam.imag, "mode": m}
    try:
        d = dn.dn_mode(m, lam, medium)
    except NumericalFault as e:
        logger.debug("Elliptic residual at %s skipped: %s", lam, e)
        record.update(resid_with_a10=math.nan, resid_without=math.nan, flags="near-pole")
        return record
    root = sf.rho_j(hm ** 2, n0, params.theta)
    first = a10(hm, disk_geometry(n0), params.theta)
    record.update(
        resid_with_a10=abs(params.h * d - medium.c * (root + params.h * first)),
        resid_without=abs(params.h * d - medium.c * root),
        flags="",
    )
    return record


def elliptic_residual_curve(lambdas=DEFAULT_LAMBDAS, hm_fixed=1.3, medium=dn.Medium(), n_jobs=1, progress=False):
    """
    Residuals of the elliptic parametrix at a fixed semiclassical mode h m.

    For each lambda, m = round(hm_fixed / h) and

        resid_without  = |h d_m - c rho((hm)^2)|
        resid_with_a10 = |h d_m - c (rho((hm)^2) + h a10)|

    The first is O(h), the second O(h^2).

    Returns:
    - pd.DataFrame with columns h, re_lambda, im_lambda, mode, resid_with_a10,
      resid_without, flags; one row per lambda, in input order.
    """
    n0 = medium.n / medium.c
    if hm_fixed ** 2 < 1.44 * n0:
        raise ValueError(f"hm_fixed = {hm_fixed} is not safely elliptic (needs >= 1.2 sqrt(n/c))")
    lambdas = [complex(lam) for lam in lambdas]
    iterator = tqdm(lambdas, desc="elliptic residuals", disable=not progress)
    rows = Parallel(n_jobs=n_jobs)(delayed(_elliptic_row)(lam, hm_fixed, medium) for lam in iterator)
    return pd.DataFrame(rows, columns=ELLIPTIC_COLUMNS)


def fit_loglog_slope(x, y):
    """Least-squares slope of log y against log x, ignoring non-finite points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
    if keep.sum() < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)
    return float(slope)


# %% Suite

@dataclass(frozen=True)
class ParametrixReport:
    curve: pd.DataFrame
    slope_without: float
    slope_with: float
    b0_disk: float
    a10_closed_form_error: float

    @property
    def passed(self):
        return (SLOPE_WINDOW_WITHOUT[0] <= self.slope_without <= SLOPE_WINDOW_WITHOUT[1]
                and SLOPE_WINDOW_WITH[0] <= self.slope_with <= SLOPE_WINDOW_WITH[1]
                and self.b0_disk <= B0_DISK_TOLERANCE)

    def summary(self):
        return {
            "slope_without": self.slope_without,
            "slope_with": self.slope_with,
            "b0_disk": self.b0_disk,
            "a10_closed_form_error": self.a10_closed_form_error,
            "passed": self.passed,
        }


def parametrix_suite(lambdas=DEFAULT_LAMBDAS, hm_fixed=1.3, samples=1000, seed=0, n_jobs=1, progress=False):
    """
    Disk checks of the parametrix: b0 cancellation, the a10 closed form at
    random elliptic points, and the two residual slopes.
    """
    rng = np.random.default_rng(seed)
    geom = disk_geometry()
    xi_values = rng.uniform(1.2, 50.0, samples)
    theta_values = rng.uniform(-0.5, 0.5, samples)

    b0_disk = max(abs(b0(xi, geom)) for xi in xi_values)
    closed_form_error = max(
        abs(a10(xi, geom, theta) - disk_a10(xi, theta)) / a10_scale(xi, geom, theta)
        for xi, theta in zip(xi_values, theta_values)
    )

    curve = elliptic_residual_curve(lambdas, hm_fixed, n_jobs=n_jobs, progress=progress)
    report = ParametrixReport(
        curve=curve,
        slope_without=fit_loglog_slope(curve["h"], curve["resid_without"]),
        slope_with=fit_loglog_slope(curve["h"], curve["resid_with_a10"]),
        b0_disk=float(b0_disk),
        a10_closed_form_error=float(closed_form_error),
    )
    logger.info("Parametrix suite: slopes %.3f / %.3f, disk b0 %.2e",
                report.slope_without, report.slope_with, report.b0_disk)
    return report
