"""
Transmission eigenvalues of the unit disk for a pair of constant media.

On the Fourier mode m the transmission problem reduces to the entire
determinant

    f_m(lambda) = c2 k2 J_m(k1) J_m'(k2) - c1 k1 J_m'(k1) J_m(k2),   k_j = lambda sqrt(n_j / c_j),

whose zeros are the mode-m eigenvalues. It is evaluated in log-split form
(mantissa times e^L, L real) so that contours far into the elliptic regime
neither overflow nor underflow. Winding numbers only use the phase of the
mantissa; Newton polishing uses the mantissa times e^{L - L0} with L0 frozen
per box, which is analytic.
"""

# %% Importing required libraries
import logging
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import integrate, special
from tqdm import tqdm

import pytransmission.bessel_functions as bf
import pytransmission.dn_functions as dn
import pytransmission.symbol_functions as sf
from pytransmission.symbol_functions import CaseLabel
from pytransmission.utility_functions import (
    CaseRefusal,
    ConfigError,
    NearPoleError,
    NumericalFault,
    ScaleFault,
    ZeroOnContourError,
)

logger = logging.getLogger(__name__)

SCALING_BUDGET = 700.0
# Split positions (fractions of the box side, around the middle) tried in turn
SPLIT_OFFSETS = (0.013, -0.021, 0.034, -0.055, 0.089, -0.144, 0.233, -0.377, 0.301)
ZERO_COLUMNS = ["mode", "re", "im", "multiplicity", "residual", "flags"]
REGION_CASES = {
    "strip": {CaseLabel.ISOTROPIC, CaseLabel.ANISO_NEGATIVE},
    "log": {CaseLabel.ANISO_POSITIVE_DISTINCT},
    "power": {CaseLabel.ISOTROPIC, CaseLabel.ANISO_NEGATIVE, CaseLabel.ANISO_POSITIVE_DISTINCT},
}


# %% Types

@dataclass(frozen=True)
class SearchBox:
    """Closed rectangle [re_min, re_max] x [im_min, im_max] of the lambda plane."""
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        values = (self.re_min, self.re_max, self.im_min, self.im_max)
        if not all(math.isfinite(value) for value in values):
            raise ValueError(f"box bounds must be finite, got {values}")
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError(f"empty box {values}")

    @classmethod
    def parse(cls, text):
        """Parse 're_min,re_max,im_min,im_max'."""
        parts = [part.strip() for part in str(text).split(',')]
        if len(parts) != 4:
            raise ValueError(f"a box needs four values re_min,re_max,im_min,im_max, got '{text}'")
        return cls(*(float(part) for part in parts))

    @property
    def width(self):
        return self.re_max - self.re_min

    @property
    def height(self):
        return self.im_max - self.im_min

    @property
    def scale(self):
        return max(self.width, self.height)

    @property
    def center(self):
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def corners(self):
        """Counterclockwise from the lower-left corner."""
        return (complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max), complex(self.re_min, self.im_max))

    def max_abs(self):
        return max(abs(corner) for corner in self.corners())

    def contains(self, lam, pad=0.0):
        return (self.re_min - pad <= lam.real <= self.re_max + pad
                and self.im_min - pad <= lam.imag <= self.im_max + pad)

    def split(self, fx=0.5, fy=0.5):
        """Four children in the order lower-left, lower-right, upper-left, upper-right."""
        x = self.re_min + fx * self.width
        y = self.im_min + fy * self.height
        return (SearchBox(self.re_min, x, self.im_min, y), SearchBox(x, self.re_max, self.im_min, y),
                SearchBox(self.re_min, x, y, self.im_max), SearchBox(x, self.re_max, y, self.im_max))

    def conjugate(self):
        return SearchBox(self.re_min, self.re_max, -self.im_max, -self.im_min)

    def as_dict(self):
        return {"re_min": self.re_min, "re_max": self.re_max, "im_min": self.im_min, "im_max": self.im_max}


@dataclass(frozen=True)
class ZeroRecord:
    mode: int
    lam: complex
    multiplicity: int
    residual: float
    box: SearchBox
    flags: tuple = ()

    @property
    def resolved(self):
        return "unresolved" not in self.flags

    def as_record(self):
        return {
            "mode": self.mode,
            "re": self.lam.real,
            "im": self.lam.imag,
            "multiplicity": self.multiplicity,
            "residual": self.residual,
            "flags": ";".join(self.flags),
        }


@dataclass(frozen=True)
class ZeroSet:
    pair: sf.MediumPair
    box: SearchBox
    zeros: tuple
    m_max: int
    samples: int
    flags: tuple = ()
    runtime_ms: Optional[float] = None

    def __len__(self):
        return len(self.zeros)

    def __iter__(self):
        return iter(self.zeros)

    @property
    def resolved(self):
        return not self.flags and all(record.resolved for record in self.zeros)

    def to_dict(self):
        return {
            "pair": self.pair.as_dict(),
            "box": self.box.as_dict(),
            "zeros": [record.as_record() for record in self.zeros],
            "meta": {
                "m_max": self.m_max,
                "samples": self.samples,
                "runtime_ms": self.runtime_ms,
                "flags": list(self.flags),
            },
        }

    def to_frame(self):
        return pd.DataFrame([record.as_record() for record in self.zeros], columns=ZERO_COLUMNS)


@dataclass(frozen=True)
class RegionSpec:
    """
    Region of the lambda plane claimed free of eigenvalues:

    - strip: |Im lambda| >= C
    - log:   |Im lambda| >= A + C log(Re lambda + 1)
    - power: |Im lambda| >= C (Re lambda)^(1 - epsilon)
    """
    kind: str
    C: float
    A: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in REGION_CASES:
            raise ValueError(f"unknown region kind '{self.kind}'")
        if not (math.isfinite(self.C) and self.C > 0 and math.isfinite(self.A)):
            raise ValueError(f"region parameters must be finite with C > 0, got C={self.C}, A={self.A}")
        if not 0 <= self.epsilon < 1:
            raise ValueError(f"epsilon must lie in [0, 1), got {self.epsilon}")

    def threshold(self, re):
        if self.kind == "strip":
            return self.C
        if self.kind == "log":
            return self.A + self.C * math.log(re + 1.0)
        return self.C * re ** (1.0 - self.epsilon)

    def contains(self, lam):
        return abs(lam.imag) >= self.threshold(lam.real)

    def meets(self, box):
        """True when the region intersects the box; thresholds grow with Re."""
        return max(abs(box.im_min), abs(box.im_max)) >= self.threshold(max(box.re_min, 0.0))

    def as_dict(self):
        return {"kind": self.kind, "C": self.C, "A": self.A, "epsilon": self.epsilon}


@dataclass(frozen=True)
class ZeroSearchConfig:
    """Tolerances of the argument-principle search."""
    phase_step: float = math.pi / 2
    phase_tolerance: float = 1e-6
    max_edge_samples: int = 2 ** 16
    sample_density: float = 2.0
    newton_tol: float = 1e-10
    newton_max_iter: int = 60
    diff_step: float = 1e-6
    min_box: float = 1e-8
    contour_floor: float = 1e-13
    im_floor: float = 1e-2

    def __post_init__(self):
        for name in ("phase_step", "phase_tolerance", "sample_density", "newton_tol", "diff_step", "min_box",
                     "im_floor"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.phase_step >= math.pi:
            raise ConfigError("phase_step must be below pi")


class DetSplit(NamedTuple):
    """Determinant = mantissa * exp(log_scale); scale is the size of its two terms."""
    mantissa: np.ndarray
    log_scale: np.ndarray
    scale: np.ndarray


class _Counter:
    def __init__(self):
        self.samples = 0


# %% Determinant

def det_log_split(m, lams, pair):
    """Log-split determinant f_m on an array of frequencies."""
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    k1 = lams * math.sqrt(pair.m1)
    k2 = lams * math.sqrt(pair.m2)
    split = bf.bessel_log_split(m, np.concatenate([k1, k2]))
    size = lams.size
    a1, b1, l1 = split.value[:size], split.next_value[:size], split.log_scale[:size]
    a2, b2, l2 = split.value[size:], split.next_value[size:], split.log_scale[size:]
    # k J_m' = m J_m - k J_{m+1}
    term1 = pair.c2 * a1 * (m * a2 - k2 * b2)
    term2 = pair.c1 * a2 * (m * a1 - k1 * b1)
    # same difference with the m J_m J_m parts collected, exact when c1 = c2
    mantissa = m * (pair.c2 - pair.c1) * a1 * a2 - pair.c2 * k2 * a1 * b2 + pair.c1 * k1 * a2 * b1
    return DetSplit(mantissa=mantissa, log_scale=l1 + l2, scale=np.abs(term1) + np.abs(term2))


def det_mode(m, lam, pair):
    """
    Scaled entire determinant f_m(lambda) e^{-|Im k1| - |Im k2|}.

    Raises:
    - ValueError: lambda = 0.
    - ScaleFault: the scaled value is not finite.

    Example usage:
    det_mode(0, 3.0, MediumPair(1, 1, 1, 4))
    """
    lam = complex(lam)
    if lam == 0:
        raise ValueError("det_mode is not defined at lambda = 0")
    split = det_log_split(m, [lam], pair)
    damping = abs(lam.imag) * (math.sqrt(pair.m1) + math.sqrt(pair.m2))
    value = complex(split.mantissa[0]) * math.exp(float(split.log_scale[0]) - damping)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ScaleFault(f"scale fault: f_{m}({lam}) is not finite")
    return value


def relative_residual(m, lam, pair):
    """|f_m| divided by the sum of the moduli of its two terms."""
    split = det_log_split(m, [lam], pair)
    return float(abs(split.mantissa[0]) / split.scale[0])


# %% Winding numbers

def _contour_points(box, t):
    """Counterclockwise boundary parametrised by t in [0, 4], one unit per edge."""
    corners = np.array(box.corners())
    edge = np.minimum(np.floor(t).astype(int), 3)
    s = t - edge
    return corners[edge] + s * (corners[(edge + 1) % 4] - corners[edge])


def _edge_samples(start, stop, m, speed, density, max_samples):
    """
    Seed positions in [0, 1) along the segment start -> stop.

    The phase of f_m turns at most about 2m/|lambda| + speed radians per unit
    length: 2m arg(lambda) below the turning point, the oscillation of the
    Hankel factors above it. Samples are spread evenly in that phase bound,
    `density` per radian, which packs them near the origin for large m.
    """
    length = abs(stop - start)
    direction = (stop - start) / length
    # lambda(s) = (w + s) * direction, so |lambda(s)| = |w + s|
    w = start * direction.conjugate()
    offset = w.real
    distance = max(abs(w.imag), 1e-12 * (abs(start) + length))
    asinh_lo = math.asinh(offset / distance)
    asinh_hi = math.asinh((offset + length) / distance)
    s = np.unique(np.concatenate([
        np.linspace(0.0, length, 513),
        np.clip(distance * np.sinh(np.linspace(asinh_lo, asinh_hi, 513)) - offset, 0.0, length),
    ]))
    phase = 2 * m * (np.arcsinh((s + offset) / distance) - asinh_lo) + speed * s
    n = min(int(phase[-1] * density) + 8, max_samples)
    targets = np.linspace(0.0, phase[-1], n, endpoint=False)
    return np.interp(targets, phase, s) / length


def _winding(m, pair, box, config, counter):
    speed = math.sqrt(pair.m1) + math.sqrt(pair.m2)
    corners = box.corners()
    t = np.concatenate([
        edge + _edge_samples(corners[edge], corners[(edge + 1) % 4], m, speed,
                             config.sample_density, config.max_edge_samples // 4)
        for edge in range(4)
    ] + [np.array([4.0])])
    split = det_log_split(m, _contour_points(box, t), pair)
    values, scales = split.mantissa, split.scale
    counter.samples += t.size
    # an interval is accepted once its midpoint reproduces its phase step
    checked = np.zeros(t.size - 1, dtype=bool)
    min_width = 1.0 / config.max_edge_samples

    while True:
        if not np.all(np.isfinite(values)) or np.any(np.abs(values) <= config.contour_floor * scales):
            raise ZeroOnContourError(f"zero on contour: f_{m} vanishes on the boundary of {box}")
        index = np.flatnonzero(~checked)
        if index.size == 0:
            break
        mids = 0.5 * (t[index] + t[index + 1])
        new = det_log_split(m, _contour_points(box, mids), pair)
        counter.samples += mids.size

        full = np.angle(values[index + 1] / values[index])
        left = np.angle(new.mantissa / values[index])
        right = np.angle(values[index + 1] / new.mantissa)
        accepted = ((np.abs(full) < config.phase_step)
                    & (np.abs(left) < config.phase_step)
                    & (np.abs(right) < config.phase_step)
                    & (np.abs(left + right - full) < config.phase_tolerance))
        rejected = index[~accepted]
        if np.any(t[rejected + 1] - t[rejected] < min_width):
            raise ZeroOnContourError(
                f"zero on contour: phase of f_{m} not resolved with {config.max_edge_samples} samples per edge of {box}"
            )

        t = np.insert(t, index + 1, mids)
        values = np.insert(values, index + 1, new.mantissa)
        scales = np.insert(scales, index + 1, new.scale)
        checked = np.insert(checked, index + 1, accepted)
        checked[index + np.arange(index.size)] = accepted

    increments = np.angle(values[1:] / values[:-1])
    return int(round(increments.sum() / (2 * math.pi)))


def winding_count(m, pair, box, config=ZeroSearchConfig()):
    """
    Number of zeros of f_m inside the box, with multiplicity, by the argument principle.

    The boundary is seeded from a bound on the phase velocity of f_m and
    bisected until every phase step is below pi/2 and agrees with the sum of
    its two half-steps; finer than 2^16 samples per edge raises ZeroOnContourError.
    """
    return _winding(m, pair, box, config, _Counter())


# %% Zero isolation

def det_referenced(m, lams, pair, log_ref):
    """
    f_m as mantissa times e^{L - log_ref}, analytic for a fixed log_ref.

    Entries whose scale overflows come back as inf (or nan) without a warning.
    """
    split = det_log_split(m, lams, pair)
    with np.errstate(over="ignore", invalid="ignore"):
        values = split.mantissa * np.exp(split.log_scale - log_ref)
    return values, split


def _polish(m, pair, box, config, counter):
    """Damped Newton from the box centre; None when it fails or leaves the box."""
    lam = box.center
    step = max(config.diff_step * box.scale, 1e-12 * max(1.0, abs(lam)))
    log_ref = float(det_log_split(m, [lam], pair).log_scale[0])

    def evaluate(points):
        values, split = det_referenced(m, points, pair, log_ref)
        counter.samples += len(points)
        return values, split.mantissa, split.scale

    for _ in range(config.newton_max_iter):
        values, mantissa, scale = evaluate([lam, lam + step, lam - step])
        residual = float(abs(mantissa[0]) / scale[0])
        if residual <= config.newton_tol:
            return (lam, residual) if box.contains(lam, pad=1e-9 * box.scale) else None
        with np.errstate(invalid="ignore"):
            derivative = (values[1] - values[2]) / (2 * step)
        if derivative == 0 or not np.isfinite(derivative):
            return None
        delta = -values[0] / derivative
        for _ in range(30):
            trial = lam + delta
            trial_value = evaluate([trial])[0][0]
            if np.isfinite(trial_value) and abs(trial_value) < abs(values[0]):
                break
            delta /= 2
        else:
            return None
        lam = complex(trial)
        if not box.contains(lam, pad=0.5 * box.scale):
            return None
    return None


def _search(m, pair, box, winding, config, counter):
    if winding == 0:
        return []
    if winding == 1:
        polished = _polish(m, pair, box, config, counter)
        if polished is not None:
            lam, residual = polished
            return [ZeroRecord(m, lam, 1, residual, box)]

    if box.scale < config.min_box * max(1.0, abs(box.center)):
        residual = relative_residual(m, box.center, pair)
        flags = () if winding > 1 else ("unpolished",)
        return [ZeroRecord(m, box.center, winding, residual, box, flags)]

    for offset in SPLIT_OFFSETS:
        children = box.split(0.5 + offset, 0.5 - offset)
        try:
            windings = [_winding(m, pair, child, config, counter) for child in children]
        except ZeroOnContourError as e:
            logger.debug("Mode %d: perturbing split of %s (%s)", m, box, e)
            continue
        if sum(windings) != winding:
            logger.debug("Mode %d: child windings %s do not add up to %d", m, windings, winding)
            continue
        records = []
        for child, child_winding in zip(children, windings):
            records.extend(_search(m, pair, child, child_winding, config, counter))
        return records

    logger.info("Mode %d: box %s left unresolved with winding %d", m, box, winding)
    return [ZeroRecord(m, box.center, winding, math.nan, box, ("unresolved",))]


def _find_zeros_mode(m, pair, box, config):
    counter = _Counter()
    winding = _winding(m, pair, box, config, counter)
    records = _search(m, pair, box, winding, config, counter)
    records.sort(key=lambda record: (record.lam.real, record.lam.imag))
    return records, counter.samples


def find_zeros_mode(m, pair, box, config=ZeroSearchConfig()):
    """
    Zeros of f_m in the box by recursive quadrisection.

    Sub-boxes of winding 0 are dropped; winding 1 is polished by damped
    Newton; larger windings are split further and emitted as one record
    with that multiplicity once the box is below the minimum size. A split
    that keeps hitting zeros on its edges is retried at other positions and
    finally emitted with the flag 'unresolved'. Multiplicities always add up
    to the winding number of the whole box.

    Raises:
    - ZeroOnContourError: the boundary of `box` itself passes through a zero.
    """
    return _find_zeros_mode(m, pair, box, config)[0]


# %% Scans

def default_mode_cap(pair, abs_lambda_max):
    """ceil(|lambda|max max sqrt(n/c)) + ceil(2 |lambda|max^(1/3)) + 10."""
    speed = max(math.sqrt(pair.m1), math.sqrt(pair.m2))
    return int(math.ceil(abs_lambda_max * speed) + math.ceil(2 * abs_lambda_max ** (1 / 3)) + 10)


def _check_budget(pair, box):
    speed = max(math.sqrt(pair.m1), math.sqrt(pair.m2))
    if box.max_abs() * speed > SCALING_BUDGET:
        raise ValueError(f"box {box.as_dict()} exceeds the scaling budget |lambda| <= {SCALING_BUDGET / speed:.6g}")
    if box.re_min <= 0 <= box.re_max and box.im_min <= 0 <= box.im_max:
        raise ValueError("the box must not contain lambda = 0")


def _scan_mode(m, pair, box, config):
    try:
        records, samples = _find_zeros_mode(m, pair, box, config)
        return records, samples, ()
    except NumericalFault as e:
        logger.info("Mode %d failed: %s", m, e)
        return [], 0, (f"mode {m}: {e}",)


def scan_zeros(pair, box, m_max=None, config=ZeroSearchConfig(), n_jobs=1, progress=True):
    """
    Transmission eigenvalues of every mode 0..m_max inside a box.

    Parameters:
    - pair (MediumPair): The two media.
    - box (SearchBox): Search window, not containing lambda = 0.
    - m_max (int, optional): Highest mode; defaults to `default_mode_cap`.
    - config (ZeroSearchConfig): Search tolerances.
    - n_jobs (int): joblib workers over modes.
    - progress (bool): Show a tqdm progress bar.

    Returns:
    - ZeroSet: records ordered by (mode, re, im), identical for any n_jobs.

    Example usage:
    zeros = scan_zeros(MediumPair(1, 1, 1, 4), SearchBox(1, 15, 0.01, 8))
    """
    _check_budget(pair, box)
    if m_max is None:
        m_max = default_mode_cap(pair, box.max_abs())
    if m_max < 0:
        raise ConfigError(f"m_max must be nonnegative, got {m_max}")
    logger.info("Scanning modes 0..%d over %s with %d workers", m_max, box.as_dict(), n_jobs)

    modes = tqdm(range(m_max + 1), desc="modes", disable=not progress)
    results = Parallel(n_jobs=n_jobs)(delayed(_scan_mode)(m, pair, box, config) for m in modes)

    zeros, samples, flags = [], 0, []
    for records, count, mode_flags in results:
        zeros.extend(records)
        samples += count
        flags.extend(mode_flags)
    zeros.sort(key=lambda record: (record.mode, record.lam.real, record.lam.imag))
    return ZeroSet(pair, box, tuple(zeros), m_max, samples, tuple(flags))


def min_modulus_grid(pair, box, m_max=None, nx=128, ny=96):
    """
    log10 of min over modes of |f_m| (scaled) on a regular grid of the box.

    Returns:
    - (re_values, im_values, grid) with grid shaped (ny, nx).
    """
    if m_max is None:
        m_max = default_mode_cap(pair, box.max_abs())
    re_values = np.linspace(box.re_min, box.re_max, nx)
    im_values = np.linspace(box.im_min, box.im_max, ny)
    lams = (re_values[None, :] + 1j * im_values[:, None]).ravel()
    damping = np.abs(lams.imag) * (math.sqrt(pair.m1) + math.sqrt(pair.m2))
    best = np.full(lams.shape, np.inf)
    for m in range(m_max + 1):
        split = det_log_split(m, lams, pair)
        with np.errstate(divide='ignore'):
            level = (np.log(np.abs(split.mantissa)) + split.log_scale - damping) / math.log(10)
        best = np.minimum(best, level)
    return re_values, im_values, best.reshape(ny, nx)


# %% Free regions

@dataclass(frozen=True)
class FreeRegionReport:
    region: RegionSpec
    case: CaseLabel
    violations: tuple
    certified: bool
    empirical_C: float
    fit_A: float
    fit_B: float
    zero_set: ZeroSet
    flags: tuple = ()

    def to_dict(self):
        return {
            "pair": self.zero_set.pair.as_dict(),
            "case": self.case.value,
            "region": self.region.as_dict(),
            "certified": self.certified,
            "empirical_C": self.empirical_C,
            "fit": {"A": self.fit_A, "B": self.fit_B},
            "violations": [record.as_record() for record in self.violations],
            "flags": list(self.flags),
            "zero_set": self.zero_set.to_dict(),
        }


def _log_envelope(zeros):
    """(A, B) with |Im| <= A + B log(Re + 1) for every zero; B from a least-squares fit."""
    if not zeros:
        return 0.0, 0.0
    x = np.array([math.log(record.lam.real + 1.0) for record in zeros])
    y = np.array([abs(record.lam.imag) for record in zeros])
    slope = 0.0
    if np.ptp(x) > 0:
        slope, _ = np.polyfit(x, y, 1)
    slope = max(float(slope), 0.0)
    return float(np.max(y - slope * x)), slope


def _empirical_constant(kind, zeros, epsilon=0.5):
    """Smallest C (plus 1e-9) with every zero below the region curve; log and power curves only use Re > 0."""
    if kind == "strip":
        ratios = [abs(record.lam.imag) for record in zeros]
    elif kind == "log":
        ratios = [abs(record.lam.imag) / math.log(record.lam.real + 1.0) for record in zeros if record.lam.real > 0]
    else:
        ratios = [abs(record.lam.imag) / record.lam.real ** (1.0 - epsilon) for record in zeros if record.lam.real > 0]
    if not ratios:
        return 0.0
    return max(ratios) + 1e-9


def certify(zero_set, region, case=None):
    """
    Check a scanned zero set against a region claimed eigenvalue-free.

    A region is certified when no resolved zero lies in it, no unresolved
    box meets it and no mode of the scan failed.
    """
    case = sf.classify_case(zero_set.pair) if case is None else case
    resolved = [record for record in zero_set.zeros if record.resolved]
    violations = tuple(record for record in resolved if region.contains(record.lam))
    flags = list(zero_set.flags)
    flags.extend(f"unresolved box {record.box.as_dict()}" for record in zero_set.zeros
                 if not record.resolved and region.meets(record.box))
    fit_A, fit_B = _log_envelope(resolved)
    report = FreeRegionReport(
        region=region,
        case=case,
        violations=violations,
        certified=not violations and not flags,
        empirical_C=_empirical_constant(region.kind, resolved, region.epsilon if region.kind == "power" else 0.5),
        fit_A=fit_A,
        fit_B=fit_B,
        zero_set=zero_set,
        flags=tuple(flags),
    )
    logger.info("Region %s: certified=%s with %d violations", region.as_dict(), report.certified, len(violations))
    return report


def auto_region(kind, zero_set, epsilon=0.5):
    """
    Region derived from the zeros of a scan: the strip one unit above the
    highest zero, the doubled fitted log envelope, or twice the empirical
    power-curve constant.
    """
    resolved = [record for record in zero_set.zeros if record.resolved]
    if kind == "strip":
        return RegionSpec("strip", _empirical_constant("strip", resolved) + 1.0)
    if kind == "log":
        fit_A, fit_B = _log_envelope(resolved)
        return RegionSpec("log", max(2 * fit_B, 1e-12), A=2 * fit_A)
    return RegionSpec("power", max(2 * _empirical_constant("power", resolved, epsilon), 1e-12), epsilon=epsilon)


def free_region_check(pair, region, window, m_max=None, config=ZeroSearchConfig(), n_jobs=1, progress=True):
    """
    Scan a window and certify a region claimed free of eigenvalues.

    Parameters:
    - pair (MediumPair): The two media.
    - region (RegionSpec or str): The region, or just its kind to derive the
      parameters from the scan with `auto_region`.
    - window (SearchBox): Upper half-plane window; an edge on the real axis
      is lifted to Im = config.im_floor.

    Returns:
    - FreeRegionReport

    Raises:
    - CaseRefusal: the case of the pair does not support the region kind.
    """
    kind = region if isinstance(region, str) else region.kind
    if kind not in REGION_CASES:
        raise ValueError(f"unknown region kind '{kind}'")
    case = sf.classify_case(pair)
    if case not in REGION_CASES[kind]:
        raise CaseRefusal(f"case {case.value} does not support a {kind} eigenvalue-free region")
    if window.im_min < 0:
        raise ValueError("free-region windows lie in the upper half-plane")
    if window.im_max <= config.im_floor:
        raise ValueError(f"window must reach above Im = {config.im_floor}")

    lifted = replace(window, im_min=max(window.im_min, config.im_floor))
    zero_set = scan_zeros(pair, lifted, m_max, config, n_jobs, progress)
    if isinstance(region, str):
        region = auto_region(kind, zero_set)
    return certify(zero_set, region, case)


# %% Inverse bounds

def _inverse_weight_exponent(case):
    """k in <m/|lambda|>^-k; None means the unit weight."""
    if case == CaseLabel.ISOTROPIC:
        return -1
    if case == CaseLabel.ANISO_NEGATIVE:
        return 1
    return None


def inverse_bound(lam, pair, margin=3.0):
    """
    inf over modes of |t_m(lambda)| <m/|lambda|>^-k, t_m = d_m^(1) - d_m^(2),
    with k = -1 (isotropic), k = +1 (aniso_negative) and the unit weight
    otherwise. Its reciprocal is the norm of the inverse of T(lambda) on the disk.

    Raises:
    - NearPoleError: a mode of either medium sits on a Dirichlet eigenvalue.

    Example usage:
    inverse_bound(20 + 8j, MediumPair(1, 1, 1, 4))
    """
    lam = complex(lam)
    media = (dn.Medium(pair.c1, pair.n1), dn.Medium(pair.c2, pair.n2))
    cap = max(dn.mode_cap(lam, medium, margin) for medium in media)
    t = dn.dn_modes(cap, lam, media[0]) - dn.dn_modes(cap, lam, media[1])
    if not np.all(np.isfinite(t)):
        raise NearPoleError(f"near pole: a DN mode is singular at lambda = {lam}")
    exponent = _inverse_weight_exponent(sf.classify_case(pair))
    weight = 1.0
    if exponent is not None:
        weight = np.sqrt(1.0 + (np.arange(cap + 1) / abs(lam)) ** 2) ** (-exponent)
    return float(np.min(np.abs(t) * weight))


def inverse_bound_sweep(pair, re_values, im_rule, margin=3.0):
    """
    inverse_bound along lambda = Re + i im_rule(Re), with the normalised
    value inverse_bound * |lambda|^((k - 1)/2) that stays bounded below.

    `im_rule` is an ImRule, a string accepted by ImRule.parse, or a callable.
    """
    if isinstance(im_rule, str):
        im_rule = dn.ImRule.parse(im_rule)
    exponent = _inverse_weight_exponent(sf.classify_case(pair))
    power = 0.0 if exponent is None else (exponent - 1) / 2
    rows = []
    for re in re_values:
        lam = complex(re, im_rule(re))
        try:
            value, flags = inverse_bound(lam, pair, margin), ""
        except NumericalFault as e:
            logger.debug("Inverse bound at %s failed: %s", lam, e)
            value, flags = math.nan, "near-pole"
        rows.append({
            "re_lambda": lam.real,
            "im_lambda": lam.imag,
            "abs_lambda": abs(lam),
            "inverse_bound": value,
            "normalized": value * abs(lam) ** power,
            "flags": flags,
        })
    return pd.DataFrame(rows, columns=["re_lambda", "im_lambda", "abs_lambda", "inverse_bound", "normalized", "flags"])


# %% Weyl counting

def weyl_tau(n_over_c, dim=2, area=math.pi):
    """omega_d / (2 pi)^d * area * (n/c)^(d/2) for constant coefficients."""
    omega = math.pi ** (dim / 2) / special.gamma(dim / 2 + 1)
    return omega / (2 * math.pi) ** dim * area * n_over_c ** (dim / 2)


def weyl_tau_quadrature(n_over_c):
    """
    The two-dimensional Weyl coefficient of the unit disk by numerical
    integration of (n/c)(x, y) over the disk; `n_over_c` is a number or a
    callable of (x, y).
    """
    density = n_over_c if callable(n_over_c) else (lambda x, y: n_over_c)
    integral, _ = integrate.dblquad(
        lambda y, x: density(x, y),
        -1.0, 1.0,
        lambda x: -math.sqrt(1.0 - x * x),
        lambda x: math.sqrt(1.0 - x * x),
    )
    return math.pi / (2 * math.pi) ** 2 * integral


@dataclass(frozen=True)
class WeylResult:
    r: float
    count: int
    count_max: int
    prediction: float
    strip: ZeroSet
    upper: ZeroSet
    flags: tuple = field(default_factory=tuple)

    @property
    def ratio(self):
        return self.count / self.prediction

    def as_record(self):
        return {
            "r": self.r,
            "count": self.count,
            "count_max": self.count_max,
            "prediction": self.prediction,
            "ratio": self.ratio,
            "flags": ";".join(self.flags),
        }


def weyl_count(pair, r, config=ZeroSearchConfig(), strip_half_width=0.05, re_start=0.25, m_max=None,
               n_jobs=1, progress=True):
    """
    Count eigenvalues with |lambda| <= r and compare with (tau1 + tau2) r^2.

    Real and near-real zeros come from [re_start, r] x [-w, w]; strictly
    complex ones from [re_start, r] x [w, r] and are counted twice for their
    conjugates. Modes m >= 1 count twice (cos and sin). Unresolved boxes make
    the count an interval [count, count_max].
    """
    if not r > re_start:
        raise ValueError(f"r must exceed {re_start}, got {r}")
    if m_max is None:
        m_max = default_mode_cap(pair, r)
    strip_box = SearchBox(re_start, r, -strip_half_width, strip_half_width)
    upper_box = SearchBox(re_start, r, strip_half_width, r)
    strip = scan_zeros(pair, strip_box, m_max, config, n_jobs, progress)
    upper = scan_zeros(pair, upper_box, m_max, config, n_jobs, progress)

    count = count_max = 0
    for zero_set, conjugates in ((strip, 1), (upper, 2)):
        for record in zero_set.zeros:
            if abs(record.lam) > r:
                continue
            weight = (1 if record.mode == 0 else 2) * record.multiplicity * conjugates
            count_max += weight
            if record.resolved:
                count += weight
    prediction = (weyl_tau(pair.m1) + weyl_tau(pair.m2)) * r ** 2
    flags = strip.flags + upper.flags
    logger.info("Weyl count at r=%g: %d (up to %d) against %.3f", r, count, count_max, prediction)
    return WeylResult(r, count, count_max, prediction, strip, upper, flags)
