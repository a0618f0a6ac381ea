"""
Bessel functions of integer order at complex arguments.

Three evaluation routes are provided:
- `bessel_series`: high-precision ascending series (mpmath), the reference oracle.
- `bessel_scaled` / `bessel_log_split`: Miller backward recurrence, vectorised
  over numpy arrays of arguments, returned either exponentially scaled by
  e^{-|Im z|} or as mantissa times e^{log_scale}.
- `bessel_ratio` / `bessel_ratio_table`: logarithmic derivative J_m'/J_m from
  the continued fraction for J_{m+1}/J_m, which never forms J_m itself.
"""

# %% Importing required libraries
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import mpmath
import numpy as np

from pytransmission.utility_functions import (
    BesselOverflowError,
    InsufficientTermsError,
    NearPoleError,
    NormalizationUnderflowError,
    OutOfRangeError,
)

logger = logging.getLogger(__name__)

# %% Constants
DEFAULT_MAX_ORDER = 4096
SERIES_MAX_ABS_Z = 40.0
SERIES_MIN_TERMS = 30
SERIES_TOLERANCE = 1e-14
MILLER_MARGIN = 20
MILLER_MIN_GROWTH = math.log(1e9)
MILLER_MAX_DOUBLINGS = 6
RESCALE_THRESHOLD = 1e250
UNDERFLOW_THRESHOLD = 1e-290
CF_MAX_ITERATIONS = 10_000
CF_TINY = 1e-300
CF_TOLERANCE = 1e-16
NEAR_POLE_RATIO = 1e12


# %% Types

@dataclass(frozen=True)
class ScaledBessel:
    """J_m and J_m' at one argument, both multiplied by e^{-|Im z|}."""
    order: int
    argument: complex
    value_scaled: complex
    derivative_scaled: complex
    log_scale: float


class LogSplitBessel(NamedTuple):
    """J_m = value * e^{log_scale} and J_{m+1} = next_value * e^{log_scale}, elementwise."""
    value: np.ndarray
    next_value: np.ndarray
    log_scale: np.ndarray


# %% Reference series

def bessel_series(order, z, terms=SERIES_MIN_TERMS):
    """
    Truncated ascending power series for J_m(z), summed in extended precision.

    J_m(z) = sum_{k<T} (-1)^k (z/2)^{m+2k} / (k! (m+k)!)

    Parameters:
    - order (int): Nonnegative integer order m.
    - z (complex): Argument with |z| <= 40.
    - terms (int): Number of series terms T (at least 30).

    Returns:
    - complex: The series value rounded to double precision.

    Raises:
    - OutOfRangeError: |z| > 40 ("out of oracle range").
    - InsufficientTermsError: the first omitted term bound
      (|z|/2)^{m+2T} / (T! (m+T)!) exceeds 1e-14 of the result.

    Example usage:
    bessel_series(0, 2.0, 30)  # 0.22389077914123567
    """
    if order < 0:
        raise ValueError(f"order must be nonnegative, got {order}")
    if terms < SERIES_MIN_TERMS:
        raise ValueError(f"terms must be at least {SERIES_MIN_TERMS}, got {terms}")
    z = complex(z)
    if abs(z) > SERIES_MAX_ABS_Z:
        raise OutOfRangeError(f"out of oracle range: |z| = {abs(z):.6g} > {SERIES_MAX_ABS_Z:g}")

    # Enough digits to survive the cancellation between terms of size e^{|z|}
    dps = 30 + int(math.ceil(abs(z) / math.log(10)))
    with mpmath.workdps(dps):
        half = mpmath.mpc(z.real, z.imag) / 2
        half_sq = half * half
        term = half ** order / mpmath.factorial(order)
        series_terms = [term]
        for k in range(1, terms):
            term = -term * half_sq / (k * (order + k))
            series_terms.append(term)
        total = mpmath.fsum(series_terms)

        abs_half = abs(half)
        bound = abs_half ** (order + 2 * terms) / (mpmath.factorial(terms) * mpmath.factorial(order + terms))
        if bound > SERIES_TOLERANCE * abs(total):
            raise InsufficientTermsError(
                f"insufficient terms: {terms} terms leave a truncation bound of "
                f"{float(bound):.3g} for J_{order}({z})"
            )
        return complex(total)


# %% Miller backward recurrence

def _normalization_weights(n, generating, sign):
    """Weights w_n of the normalization sum: even identity or generating function."""
    if n == 0:
        return np.ones_like(sign, dtype=complex)
    even = 2.0 if n % 2 == 0 else 0.0
    # (-is)^n = (-i)^n s^n, exact for s = +-1
    unit = (-1j) ** (n % 4) * (sign if n % 2 else 1.0)
    return np.where(generating, 2.0 * unit, even)


def _miller(order, z, start):
    """
    One backward sweep from `start` for a nonzero argument array.

    Returns mantissas of J_m and J_{m+1}, their separate natural-log scales and
    the log growth of the sequence, used by the caller for the start-order check.
    """
    imag = z.imag
    generating = np.abs(imag) > 1.0
    sign = np.where(imag < 0, -1.0, 1.0)

    f_next = np.zeros_like(z)
    f_cur = np.ones_like(z)
    norm_sum = _normalization_weights(start, generating, sign) * f_cur
    log_shift = np.zeros(z.shape)
    cap_m = cap_m1 = None
    shift_m = shift_m1 = None
    log_rescale = math.log(RESCALE_THRESHOLD)

    for k in range(start, 0, -1):
        if k == order + 1:
            cap_m1, shift_m1 = f_cur.copy(), log_shift.copy()
        if k == order:
            cap_m, shift_m = f_cur.copy(), log_shift.copy()
        f_prev = (2.0 * k / z) * f_cur - f_next
        f_next, f_cur = f_cur, f_prev
        norm_sum = norm_sum + _normalization_weights(k - 1, generating, sign) * f_cur

        big = np.abs(f_cur) > RESCALE_THRESHOLD
        if big.any():
            f_cur = np.where(big, f_cur / RESCALE_THRESHOLD, f_cur)
            f_next = np.where(big, f_next / RESCALE_THRESHOLD, f_next)
            norm_sum = np.where(big, norm_sum / RESCALE_THRESHOLD, norm_sum)
            log_shift = log_shift + np.where(big, log_rescale, 0.0)

    if order == 0:
        cap_m, shift_m = f_cur.copy(), log_shift.copy()

    if not (np.all(np.isfinite(norm_sum)) and np.all(np.isfinite(cap_m)) and np.all(np.isfinite(cap_m1))):
        raise BesselOverflowError(f"overflow: nonfinite value in the backward recurrence for order {order}")

    norm_abs = np.abs(norm_sum)
    if np.any(norm_abs < UNDERFLOW_THRESHOLD):
        raise NormalizationUnderflowError(
            f"normalization underflow for order {order}: split the argument path"
        )

    # e^{-isz} = J_0 + 2 sum (-is)^n J_n, scaled by e^{-|Im z|} has modulus one
    target_phase = np.where(generating, np.exp(-1j * sign * z.real), 1.0 + 0j)
    target_log = np.where(generating, np.abs(imag), 0.0)

    mant_m = cap_m / norm_sum * target_phase
    mant_m1 = cap_m1 / norm_sum * target_phase
    log_m = target_log - (log_shift - shift_m)
    log_m1 = target_log - (log_shift - shift_m1)
    # growth of the sequence relative to the size of the normalized values
    growth = log_shift + np.log(norm_abs) - target_log
    return mant_m, mant_m1, log_m, log_m1, growth


def bessel_log_split(order, z, max_order=DEFAULT_MAX_ORDER):
    """
    Evaluate J_m and J_{m+1} on an array of arguments in log-split form.

    J_m(z) = value * exp(log_scale), J_{m+1}(z) = next_value * exp(log_scale),
    with max(|value|, |next_value|) = 1 wherever the pair is nonzero. The
    split keeps determinants finite for orders far above |z|, where the
    exponentially scaled values underflow.

    Parameters:
    - order (int): Nonnegative order m, at most `max_order`.
    - z (array_like of complex): Arguments; zero is handled by its closed form.
    - max_order (int): Largest accepted order. Default is 4096.

    Returns:
    - LogSplitBessel: Arrays shaped like `z`.

    Raises:
    - BesselOverflowError: Nonfinite intermediates, or no acceptable start order
      after 6 doublings of the margin.
    - NormalizationUnderflowError: Normalization sum below 1e-290.
    """
    if order < 0:
        raise ValueError(f"order must be nonnegative, got {order}")
    if order > max_order:
        raise ValueError(f"order {order} exceeds the configured maximum {max_order}")

    z = np.atleast_1d(np.asarray(z, dtype=complex))
    value = np.zeros(z.shape, dtype=complex)
    next_value = np.zeros(z.shape, dtype=complex)
    log_scale = np.zeros(z.shape)

    at_zero = z == 0
    if order == 0:
        value[at_zero] = 1.0

    work = z[~at_zero]
    if work.size:
        margin = MILLER_MARGIN
        for attempt in range(MILLER_MAX_DOUBLINGS + 1):
            start = order + margin + int(math.ceil(np.abs(work).max()))
            with np.errstate(divide='ignore', invalid='ignore'):
                mant_m, mant_m1, log_m, log_m1, growth = _miller(order, work, start)
            if np.all(growth >= MILLER_MIN_GROWTH):
                break
            logger.debug("Miller start %d for order %d grew only e^%.2f; doubling margin",
                         start, order, float(growth.min()))
            margin *= 2
        else:
            raise BesselOverflowError(
                f"overflow: no acceptable Miller start order for J_{order} after "
                f"{MILLER_MAX_DOUBLINGS} doublings"
            )

        with np.errstate(divide='ignore'):
            lead_m = log_m + np.log(np.abs(mant_m))
            lead_m1 = log_m1 + np.log(np.abs(mant_m1))
        common = np.maximum(lead_m, lead_m1)
        common = np.where(np.isfinite(common), common, 0.0)
        value[~at_zero] = mant_m * np.exp(log_m - common)
        next_value[~at_zero] = mant_m1 * np.exp(log_m1 - common)
        log_scale[~at_zero] = common

    return LogSplitBessel(value=value, next_value=next_value, log_scale=log_scale)


def bessel_scaled(order, z, max_order=DEFAULT_MAX_ORDER):
    """
    J_m(z) and J_m'(z), each multiplied by e^{-|Im z|}.

    Parameters:
    - order (int): Nonnegative order.
    - z (complex): Argument.
    - max_order (int): Largest accepted order. Default is 4096.

    Returns:
    - ScaledBessel

    Example usage:
    bessel_scaled(0, 2.0).value_scaled  # 0.2238907791...
    """
    if order < 0:
        raise ValueError(f"order must be nonnegative, got {order}")
    z = complex(z)
    log_scale = abs(z.imag)
    if z == 0:
        value = 1.0 if order == 0 else 0.0
        derivative = 0.5 if order == 1 else 0.0
        return ScaledBessel(order, z, complex(value), complex(derivative), 0.0)

    split = bessel_log_split(order, [z], max_order=max_order)
    factor = math.exp(float(split.log_scale[0]) - log_scale)
    value_scaled = complex(split.value[0]) * factor
    next_scaled = complex(split.next_value[0]) * factor
    derivative_scaled = (order / z) * value_scaled - next_scaled
    return ScaledBessel(order, z, value_scaled, derivative_scaled, log_scale)


# %% Ratios

def _ratio_continued_fraction(order, z):
    """J_{m+1}(z)/J_m(z) by the modified Lentz method."""
    fraction = CF_TINY
    c_term = fraction
    d_term = 0j
    for j in range(1, CF_MAX_ITERATIONS + 1):
        a_j = 1.0 if j == 1 else -1.0
        b_j = 2.0 * (order + j) / z
        d_term = b_j + a_j * d_term
        if d_term == 0:
            d_term = CF_TINY
        c_term = b_j + a_j / c_term
        if c_term == 0:
            c_term = CF_TINY
        d_term = 1.0 / d_term
        delta = c_term * d_term
        fraction *= delta
        if abs(delta - 1.0) < CF_TOLERANCE:
            return fraction
    raise NearPoleError(
        f"near pole: continued fraction for J_{order + 1}/J_{order} at z={z} "
        f"did not converge in {CF_MAX_ITERATIONS} iterations"
    )


def bessel_ratio(order, z):
    """
    Logarithmic derivative J_m'(z)/J_m(z) = m/z - J_{m+1}(z)/J_m(z).

    Parameters:
    - order (int): Nonnegative order.
    - z (complex): Nonzero argument.

    Returns:
    - complex

    Raises:
    - NearPoleError: J_m is numerically zero at z (ratios to its neighbours
      exceed 1e12) or the continued fraction does not converge.

    Example usage:
    bessel_ratio(0, 2.0)  # -2.5759...
    """
    if order < 0:
        raise ValueError(f"order must be nonnegative, got {order}")
    z = complex(z)
    if z == 0:
        raise ValueError("bessel_ratio is undefined at z = 0")

    ratio = _ratio_continued_fraction(order, z)
    previous = 2.0 * order / z - ratio  # J_{m-1}/J_m
    if max(abs(ratio), abs(previous)) > NEAR_POLE_RATIO:
        raise NearPoleError(f"near pole: J_{order}({z}) is numerically zero")
    return order / z - ratio


def bessel_ratio_table(max_order, z):
    """
    J_m'(z)/J_m(z) for every m = 0..max_order from one downward ratio sweep.

    The top ratio comes from the continued fraction; lower ones follow from
    J_k/J_{k-1} = 1 / (2k/z - J_{k+1}/J_k), which is stable downwards.
    Orders where J_m is numerically zero are returned as NaN.

    Parameters:
    - max_order (int): Highest order in the table.
    - z (complex): Nonzero argument.

    Returns:
    - np.ndarray of complex, length max_order + 1.
    """
    if max_order < 0:
        raise ValueError(f"max_order must be nonnegative, got {max_order}")
    z = complex(z)
    if z == 0:
        raise ValueError("bessel_ratio_table is undefined at z = 0")

    ratios = np.empty(max_order + 1, dtype=complex)
    ratios[max_order] = _ratio_continued_fraction(max_order, z)
    for k in range(max_order, 0, -1):
        if not np.isfinite(ratios[k]):
            # J_k vanished, so J_k/J_{k-1} = 0
            ratios[k - 1] = 0.0
            continue
        denominator = 2.0 * k / z - ratios[k]
        ratios[k - 1] = 1.0 / denominator if denominator != 0 else complex(np.inf, 0.0)

    orders = np.arange(max_order + 1)
    previous = 2.0 * orders / z - ratios
    with np.errstate(invalid='ignore'):
        near_pole = ~np.isfinite(ratios) | (np.maximum(np.abs(ratios), np.abs(previous)) > NEAR_POLE_RATIO)
    table = orders / z - ratios
    table[near_pole] = complex(np.nan, np.nan)
    if near_pole.any():
        logger.debug("Ratio table at z=%s: %d near-pole orders", z, int(near_pole.sum()))
    return table
