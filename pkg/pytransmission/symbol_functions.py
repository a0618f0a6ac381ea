"""
Semiclassical scalings and boundary symbols.

Square-root symbols use the branch with negative real part, realised as the
negated principal square root. Radicands are built component-wise so that a
zero imaginary part keeps its sign and theta = 0 reproduces the theta -> 0+
limit.
"""

# %% Importing required libraries
import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import pandas as pd

from pytransmission.utility_functions import BranchError

logger = logging.getLogger(__name__)

DEFAULT_THETA0 = 0.9
ISOTROPIC_TOLERANCE = 1e-12


# %% Spectral scaling

@dataclass(frozen=True)
class SpectralParams:
    """A frequency lambda with mu, h = 1/mu, z and theta = h z such that (h lambda)^2 = 1 + i theta."""
    lam: complex
    h: float
    mu: float
    z: float
    theta: float


def scale(lam, theta0=DEFAULT_THETA0):
    """
    Semiclassical scaling of a complex frequency.

    mu = Re(lambda) * sqrt(1 - (Im lambda / Re lambda)^2), h = 1/mu,
    z = 2 Im(lambda) Re(lambda) / mu, theta = h z.

    Parameters:
    - lam (complex): Frequency with Re > 0.
    - theta0 (float): Wedge constant in (0, 1); |Im lambda| < theta0 Re lambda. Default is 0.9.

    Returns:
    - SpectralParams

    Raises:
    - ValueError: "outside scaling wedge".

    Example usage:
    scale(5 + 3j)  # mu=4, h=0.25, z=7.5, theta=1.875
    """
    if not 0 < theta0 < 1:
        raise ValueError(f"theta0 must lie in (0, 1), got {theta0}")
    lam = complex(lam)
    re, im = lam.real, lam.imag
    if re <= 0 or abs(im) >= re:
        raise ValueError(f"outside scaling wedge: lambda = {lam}")
    if abs(im) >= theta0 * re:
        raise ValueError(f"outside scaling wedge: |Im lambda| >= {theta0} Re lambda for lambda = {lam}")

    mu = re * math.sqrt(1.0 - (im / re) ** 2)
    h = 1.0 / mu
    z = 2.0 * im * re / mu
    return SpectralParams(lam=lam, h=h, mu=mu, z=z, theta=h * z)


# %% Square-root symbols

def p_mode(sigma, lam):
    """
    -sqrt(sigma - lambda^2) with the principal root, so Re < 0.

    Raises:
    - BranchError: "branch ambiguity" when sigma - lambda^2 lies on the closed
      negative real axis.
    """
    radicand = complex(sigma) - complex(lam) ** 2
    if radicand.imag == 0 and radicand.real <= 0:
        raise BranchError(f"branch ambiguity: sigma - lambda^2 = {radicand}")
    return -cmath.sqrt(radicand)


def p_modes(modes, lam):
    """Vectorised p_mode(m^2, lambda) over an array of mode numbers."""
    modes = np.asarray(modes, dtype=float)
    radicand = modes ** 2 - complex(lam) ** 2
    bad = (radicand.imag == 0) & (radicand.real <= 0)
    if np.any(bad):
        raise BranchError(f"branch ambiguity at modes {modes[bad].astype(int).tolist()}")
    return -np.sqrt(radicand)


def _rho_radicand(r0, m_j, theta):
    radicand = np.empty(np.shape(r0), dtype=complex)
    radicand.real = np.asarray(r0, dtype=float) - m_j
    radicand.imag = -float(theta) * m_j
    return radicand


def rho_j(r0, m_j, theta):
    """
    -sqrt(r0 - (1 + i theta) m_j).

    At theta = 0 the radicand carries a signed zero imaginary part, so the
    hyperbolic side (r0 < m_j) returns the theta -> 0+ limit +i sqrt(m_j - r0).

    Parameters:
    - r0 (float or array): Tangential symbol value(s), nonnegative.
    - m_j (float): n_j / c_j on the boundary, positive.
    - theta (float): Non-reality parameter.

    Raises:
    - BranchError: "glancing singularity" when the radicand vanishes.
    """
    radicand = _rho_radicand(r0, m_j, theta)
    if np.any(radicand == 0):
        raise BranchError(f"glancing singularity: r0 = m_j = {m_j} with theta = 0")
    root = -np.sqrt(radicand)
    if root.ndim == 0:
        return complex(root)
    return root


# %% Cutoffs

def _smooth_step(s):
    """S(s) = exp(-1/s) for s > 0, 0 otherwise."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    positive = s > 0
    out[positive] = np.exp(-1.0 / s[positive])
    return out


@dataclass(frozen=True)
class CutoffSpec:
    """Width delta and the smooth partition chi1 + chi2 + chi3 = 1 of the real line."""
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    @staticmethod
    def chi3(t):
        """0 for t <= 1, 1 for t >= 2, smooth in between."""
        t = np.asarray(t, dtype=float)
        rise = _smooth_step(t - 1.0)
        fall = _smooth_step(2.0 - t)
        total = rise + fall
        with np.errstate(invalid='ignore', divide='ignore'):
            ramp = np.where(total > 0, rise / np.where(total > 0, total, 1.0), 0.0)
        out = np.where(t >= 2.0, 1.0, np.where(t <= 1.0, 0.0, ramp))
        return out if out.ndim else float(out)

    @classmethod
    def chi1(cls, t):
        """chi3 mirrored: 1 for t <= -2, 0 for t >= -1."""
        return cls.chi3(-np.asarray(t, dtype=float))

    @classmethod
    def chi2(cls, t):
        """1 on |t| <= 1, 0 on |t| >= 2."""
        return 1.0 - cls.chi1(t) - cls.chi3(t)

    def classify_point(self, r_sharp):
        return classify_point(r_sharp, self)


def classify_point(r_sharp, cutoffs):
    """
    Weights (w_minus, w_zero, w_plus) of the hyperbolic, glancing and elliptic
    cutoffs at r_sharp, evaluated at t = (r_sharp - 1) / delta^2.

    Example usage:
    classify_point(1.0, CutoffSpec(0.1))  # (0.0, 1.0, 0.0)
    """
    t = (r_sharp - 1.0) / cutoffs.delta ** 2
    w_minus = float(cutoffs.chi1(t))
    w_plus = float(cutoffs.chi3(t))
    return w_minus, 1.0 - w_minus - w_plus, w_plus


# %% Two media

class CaseLabel(str, Enum):
    ISOTROPIC = "isotropic"
    ANISO_NEGATIVE = "aniso_negative"
    ANISO_POSITIVE_DISTINCT = "aniso_positive_distinct"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class MediumPair:
    """Constant coefficients (c1, n1) and (c2, n2) of two media on the boundary."""
    c1: float
    n1: float
    c2: float
    n2: float

    def __post_init__(self):
        for name in ("c1", "n1", "c2", "n2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value}")

    @classmethod
    def from_string(cls, text):
        """Parse the command-line form 'c1,n1,c2,n2'."""
        parts = [part.strip() for part in str(text).split(',')]
        if len(parts) != 4:
            raise ValueError(f"a media pair needs four values c1,n1,c2,n2, got '{text}'")
        return cls(*(float(part) for part in parts))

    @property
    def m1(self):
        return self.n1 / self.c1

    @property
    def m2(self):
        return self.n2 / self.c2

    @property
    def c_tilde(self):
        return self.c1 * self.n1 - self.c2 * self.n2

    @property
    def c0(self):
        """(c1^2 - c2^2) / c_tilde; NaN when c_tilde = 0."""
        if self.c_tilde == 0:
            return math.nan
        return (self.c1 ** 2 - self.c2 ** 2) / self.c_tilde

    def as_dict(self):
        return {"c1": self.c1, "n1": self.n1, "c2": self.c2, "n2": self.n2}


def tau(r0, pair, theta):
    """
    tau = c1 rho_1 - c2 rho_2 for the media pair.

    Example usage:
    tau(9.0, MediumPair(1, 1, 1, 4), 0.0)  # -sqrt(8) + sqrt(5)
    """
    return pair.c1 * rho_j(r0, pair.m1, theta) - pair.c2 * rho_j(r0, pair.m2, theta)


def tau_quotient_rhs(r0, pair, theta):
    """
    c_tilde (c0 r0 - 1 - i theta), the value of tau (c1 rho_1 + c2 rho_2),
    written as (c1^2 - c2^2) r0 - (1 + i theta) c_tilde so it stays finite when c_tilde = 0.
    """
    return (pair.c1 ** 2 - pair.c2 ** 2) * np.asarray(r0) - (1 + 1j * theta) * pair.c_tilde


def classify_case(pair):
    """
    Case label of a media pair.

    - isotropic: c1 = c2 = 1 and n1 != n2.
    - aniso_negative: (c1 - c2)(c1 n1 - c2 n2) < 0.
    - aniso_positive_distinct: the product is > 0 and n1/c1 != n2/c2.
    - degenerate: everything else.
    """
    if (abs(pair.c1 - 1) <= ISOTROPIC_TOLERANCE and abs(pair.c2 - 1) <= ISOTROPIC_TOLERANCE
            and pair.n1 != pair.n2):
        return CaseLabel.ISOTROPIC
    product = (pair.c1 - pair.c2) * pair.c_tilde
    if product < 0:
        return CaseLabel.ANISO_NEGATIVE
    if product > 0 and pair.m1 != pair.m2:
        return CaseLabel.ANISO_POSITIVE_DISTINCT
    return CaseLabel.DEGENERATE


def symbol_table(pair, theta, xi_values):
    """
    Tabulate rho_1, rho_2 and tau over tangential frequencies xi (r0 = xi^2).

    Points where a root hits its branch point are kept with NaN values and
    a flag, so the table always has one row per xi.

    Returns:
    - pd.DataFrame: columns xi, r0, rho1_re, rho1_im, rho2_re, rho2_im,
      tau_re, tau_im, case, flags.
    """
    label = classify_case(pair)
    rows = []
    for xi in xi_values:
        r0 = float(xi) ** 2
        try:
            rho1 = rho_j(r0, pair.m1, theta)
            rho2 = rho_j(r0, pair.m2, theta)
            flags = ""
        except BranchError:
            logger.debug("Glancing point at xi=%s, theta=%s", xi, theta)
            rho1 = rho2 = complex(math.nan, math.nan)
            flags = "glancing"
        value = pair.c1 * rho1 - pair.c2 * rho2
        rows.append({
            "xi": float(xi),
            "r0": r0,
            "rho1_re": rho1.real,
            "rho1_im": rho1.imag,
            "rho2_re": rho2.real,
            "rho2_im": rho2.imag,
            "tau_re": value.real,
            "tau_im": value.imag,
            "case": label.value,
            "flags": flags,
        })
    return pd.DataFrame(rows, columns=["xi", "r0", "rho1_re", "rho1_im", "rho2_re", "rho2_im",
                                       "tau_re", "tau_im", "case", "flags"])
