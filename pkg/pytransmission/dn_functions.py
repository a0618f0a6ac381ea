"""
Exact interior Dirichlet-to-Neumann map of the unit disk and its comparison
with the square-root symbol p(m^2) = -sqrt(m^2 - lambda^2).

With the inner normal, the DN map of (div c grad + lambda^2 n) acts on the
Fourier mode e^{i m t} by

    d_m = -c k J_m'(k) / J_m(k),   k = lambda sqrt(n / c).

Both operators are diagonal in the Fourier basis, so the operator norm of
their difference is the supremum of the per-mode differences.
"""

# %% Importing required libraries
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

import pytransmission.bessel_functions as bf
import pytransmission.symbol_functions as sf
from pytransmission.utility_functions import ConfigError, NumericalFault

logger = logging.getLogger(__name__)

DISCREPANCY_COLUMNS = ["re_lambda", "im_lambda", "sup", "sup_over_abs_lambda", "argmax_mode",
                       "mode_cap", "tail_bound", "flags"]


# %% Types

@dataclass(frozen=True)
class Medium:
    """Constant coefficients (c, n) of one medium."""
    c: float = 1.0
    n: float = 1.0

    def __post_init__(self):
        if not (self.c > 0 and self.n > 0):
            raise ValueError(f"medium coefficients must be positive, got c={self.c}, n={self.n}")

    def wavenumber(self, lam):
        return complex(lam) * math.sqrt(self.n / self.c)


@dataclass(frozen=True)
class DiscrepancyConfig:
    """Knobs of the disk DN comparison."""
    margin: float = 3.0
    tail_constant: float = 1e-2
    report_threshold: float = 1e-3
    theta0: float = sf.DEFAULT_THETA0

    def __post_init__(self):
        for name in ("margin", "tail_constant", "report_threshold"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class DiscrepancyRow:
    lam: complex
    sup_discrepancy: float
    argmax_mode: int
    mode_cap: int
    tail_bound: float
    weighted_sup: float = math.nan
    flags: tuple = field(default_factory=tuple)

    @property
    def sup_over_abs_lambda(self):
        return self.sup_discrepancy / abs(self.lam)

    def as_record(self, weighted=False):
        record = {
            "re_lambda": self.lam.real,
            "im_lambda": self.lam.imag,
            "sup": self.sup_discrepancy,
            "sup_over_abs_lambda": self.sup_over_abs_lambda,
            "argmax_mode": self.argmax_mode,
            "mode_cap": self.mode_cap,
            "tail_bound": self.tail_bound,
            "flags": ";".join(self.flags),
        }
        if weighted:
            record["weighted_sup"] = self.weighted_sup
        return record


@dataclass(frozen=True)
class ImRule:
    """
    How Im(lambda) follows Re(lambda) along a scan: a fixed value, or the
    power rule Im = Re^(1 - epsilon).
    """
    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("fixed", "power"):
            raise ConfigError(f"unknown im rule kind '{self.kind}'")
        if self.kind == "fixed" and self.value == 0:
            raise ConfigError("a fixed im rule needs Im != 0")
        if self.kind == "power" and not 0 <= self.value < 1:
            raise ConfigError(f"power rule epsilon must lie in [0, 1), got {self.value}")

    @classmethod
    def parse(cls, text):
        """'sqrt', 'fixed:5' or 'power:0.3'."""
        text = str(text).strip().lower()
        if text == "sqrt":
            return cls("power", 0.5)
        kind, _, value = text.partition(":")
        if not value:
            raise ConfigError(f"cannot parse im rule '{text}'; use sqrt, fixed:<value> or power:<epsilon>")
        try:
            return cls(kind, float(value))
        except ValueError as e:
            raise ConfigError(f"cannot parse im rule '{text}': {e}") from e

    def __call__(self, re):
        if self.kind == "fixed":
            return self.value
        return re ** (1.0 - self.value)


# %% Mode values

def dn_mode(m, lam, medium=Medium()):
    """
    DN eigenvalue on the Fourier mode m, -c k J_m'(k)/J_m(k).

    Raises:
    - NearPoleError: lambda is within resolution of a Dirichlet eigenvalue
      of the disk for this medium.

    Example usage:
    dn_mode(50, 3 + 2j)  # close to -50
    """
    k = medium.wavenumber(lam)
    return -medium.c * k * bf.bessel_ratio(m, k)


def dn_modes(max_mode, lam, medium=Medium()):
    """dn_mode for every m = 0..max_mode; NaN where the mode is near a pole."""
    k = medium.wavenumber(lam)
    return -medium.c * k * bf.bessel_ratio_table(max_mode, k)


def mode_cap(lam, medium=Medium(), margin=3.0):
    """
    Truncation mode for the operator-norm supremum, ceil(margin |lambda| sqrt(n/c)) + 20.

    Example usage:
    mode_cap(100)  # 320
    """
    return int(math.ceil(margin * abs(lam) * math.sqrt(medium.n / medium.c))) + 20


def tail_model(m, lam, medium=Medium(), constant=1e-2):
    """Bound C c |k|^2 / m on |d_m - c p(m^2; k)| beyond the mode cap."""
    k = medium.wavenumber(lam)
    return constant * medium.c * abs(k) ** 2 / m


def tail_excess(lam, medium=Medium(), m_lo=None, m_hi=None, constant=1e-2, margin=3.0):
    """
    Largest ratio of per-mode discrepancy to the tail model over [m_lo, m_hi].

    Defaults to the window [M*, 2M*] past the mode cap; a value <= 1 means
    the tail model holds there.
    """
    cap = mode_cap(lam, medium, margin)
    m_lo = cap if m_lo is None else m_lo
    m_hi = 2 * cap if m_hi is None else m_hi
    if m_lo < 1 or m_hi < m_lo:
        raise ValueError(f"invalid mode window [{m_lo}, {m_hi}]")
    k = medium.wavenumber(lam)
    modes = np.arange(m_lo, m_hi + 1)
    d = dn_modes(m_hi, lam, medium)[m_lo:]
    p = medium.c * sf.p_modes(modes, k)
    return float(np.max(np.abs(d - p) / tail_model(modes, lam, medium, constant)))


# %% Discrepancy

def discrepancy(lam, config=DiscrepancyConfig()):
    """
    sup over 0 <= m <= mode_cap of |d_m - p(m^2)| for the medium (1, 1).

    Parameters:
    - lam (complex): Frequency in the scaling wedge.
    - config (DiscrepancyConfig): Mode-cap margin, tail constant, threshold.

    Returns:
    - DiscrepancyRow: near-pole rows carry NaN values and the flag
      'near-pole'; rows whose tail bound exceeds both the supremum and the
      reporting threshold are flagged 'tail-dominated'.
    """
    lam = complex(lam)
    params = sf.scale(lam, config.theta0)
    medium = Medium()
    cap = mode_cap(lam, medium, config.margin)
    tail_bound = tail_model(cap, lam, medium, config.tail_constant)

    d = dn_modes(cap, lam, medium)
    if np.any(~np.isfinite(d)):
        logger.info("Near-pole mode at lambda=%s", lam)
        return DiscrepancyRow(lam, math.nan, -1, cap, tail_bound, flags=("near-pole",))

    modes = np.arange(cap + 1)
    diff = np.abs(d - sf.p_modes(modes, lam))
    argmax = int(np.argmax(diff))
    sup = float(diff[argmax])
    weighted = float(np.max(diff * np.sqrt(1.0 + (params.h * modes) ** 2)))

    flags = ()
    if tail_bound > max(sup, config.report_threshold * abs(lam)):
        flags = ("tail-dominated",)
    return DiscrepancyRow(lam, sup, argmax, cap, tail_bound, weighted, flags)


def _safe_discrepancy(lam, config):
    """One scan row; numerical faults and wedge violations become flags."""
    try:
        return discrepancy(lam, config)
    except NumericalFault as e:
        logger.debug("Discrepancy at %s failed: %s", lam, e)
        flag = "near-pole" if "near pole" in str(e) else "numerical-fault"
    except ValueError as e:
        logger.debug("Discrepancy at %s skipped: %s", lam, e)
        flag = "outside-wedge"
    cap = mode_cap(lam, Medium(), config.margin)
    return DiscrepancyRow(complex(lam), math.nan, -1, cap, math.nan, flags=(flag,))


def re_grid(re_range, samples=None):
    """
    Real parts of a scan: an explicit list, or `samples` geometrically spaced
    values between the two entries of `re_range`.
    """
    values = [float(value) for value in re_range]
    if samples is None:
        return values
    if len(values) != 2 or samples < 1:
        raise ConfigError("a sampled re range needs two endpoints and samples >= 1")
    return list(np.geomspace(values[0], values[1], samples))


def discrepancy_scan(re_range, im_rule, samples=None, config=DiscrepancyConfig(), n_jobs=1, progress=True):
    """
    Discrepancy rows along a grid lambda = Re + i im_rule(Re).

    Rows are emitted in input order whatever the number of workers; per-row
    failures are recorded as flags and never abort the scan.

    Parameters:
    - re_range (iterable of float): Real parts, or two endpoints when `samples` is given.
    - im_rule (ImRule or str): Rule giving Im(lambda) from Re(lambda).
    - samples (int, optional): Number of geometric samples between the endpoints.
    - config (DiscrepancyConfig): Comparison knobs.
    - n_jobs (int): joblib worker count.
    - progress (bool): Show a tqdm progress bar.

    Returns:
    - list of DiscrepancyRow

    Example usage:
    rows = discrepancy_scan([100, 200, 400, 800], 'sqrt')
    """
    if isinstance(im_rule, str):
        im_rule = ImRule.parse(im_rule)
    lams = [complex(re, im_rule(re)) for re in re_grid(re_range, samples)]
    if not lams:
        return []
    logger.info("Discrepancy scan over %d frequencies with %d workers", len(lams), n_jobs)
    iterator = tqdm(lams, desc="dn-compare", disable=not progress)
    return Parallel(n_jobs=n_jobs)(delayed(_safe_discrepancy)(lam, config) for lam in iterator)


def rows_to_frame(rows, weighted=False):
    """DataFrame with the fixed discrepancy CSV columns, in row order."""
    columns = DISCREPANCY_COLUMNS + (["weighted_sup"] if weighted else [])
    return pd.DataFrame([row.as_record(weighted) for row in rows], columns=columns)
