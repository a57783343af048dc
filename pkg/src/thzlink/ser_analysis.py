"""Closed-form symbol error rates under energy-dependent noise.

PAM admits an exact SER through the per-pair ML thresholds. Square QAM gets
a nearest-neighbour union bound: per first-quadrant point, the probability of
leaving the axis-aligned cell bounded by the per-axis ML thresholds. Both are
conditional on a channel amplitude |h|; an averaged variant integrates the
conditional SER against the amplitude density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy.special import erfc

from .channel import amplitude_pdf
from .errors import InvalidParameterError, ThresholdDegeneracyError
from .modem import NoiseProfile, pam_threshold, qam_threshold
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig, adaptive_quad

_SQRT2 = math.sqrt(2.0)


def qfunc(z: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Gaussian tail probability Q(z)."""
    out = 0.5 * erfc(np.asarray(z, dtype=float) / _SQRT2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SerPoint:
    """SER at one operating point, optionally with the union-bound breakdown."""

    ser: float
    h_mag: float
    gamma_rx: Optional[float] = None
    components: Optional[Tuple[float, float, float]] = None  # (middle, side, corner)

    def __post_init__(self):
        if not (0.0 <= self.ser <= 1.0):
            raise InvalidParameterError(f"SER must be in [0, 1], got {self.ser}")


def ser_pam(M: int, h_mag: float, delta: float, profile: NoiseProfile) -> float:
    """Exact SER of M-PAM detected with unequal-variance ML thresholds.

    Conditional on channel amplitude h_mag; noise variances grow with symbol
    energy via the profile scale. Exploits constellation symmetry by summing
    boundary crossings over the positive half only.
    """
    if M < 2 or M % 2 != 0:
        raise InvalidParameterError(f"PAM order must be even and >= 2, got {M}")
    if not (h_mag > 0.0 and delta > 0.0):
        raise InvalidParameterError("h_mag and delta must be > 0")
    points = np.array([(2 * i - 1 - M) * delta for i in range(1, M + 1)])
    variances = profile.sigma_sq_thermal + points**2 * profile.scale
    hd = h_mag * delta

    # innermost positive symbol crossing the centre boundary (equal variances)
    mid = M // 2  # 0-based index of the first positive symbol
    total = qfunc(hd / math.sqrt(variances[mid] / 2.0))
    for i in range(mid, M - 1):
        t = pam_threshold(variances[i], variances[i + 1], h_mag, delta)
        total += qfunc((t + hd) / math.sqrt(variances[i] / 2.0))
        total += qfunc((hd - t) / math.sqrt(variances[i + 1] / 2.0))
    return min(1.0, 2.0 / M * float(total))


def ser_qam_union(M: int, h_mag: float, delta: float, profile: NoiseProfile) -> SerPoint:
    """Nearest-neighbour union bound on square M-QAM SER.

    Per first-quadrant point the bound counts the probability of leaving the
    rectangle formed by the per-axis ML thresholds, split into middle, side
    and corner contributions. The total is capped at 1.
    """
    side = int(round(math.sqrt(M)))
    if side * side != M or side % 2 != 0 or M < 4:
        raise InvalidParameterError(f"square QAM order expected, got {M}")
    if not (h_mag > 0.0 and delta > 0.0):
        raise InvalidParameterError("h_mag and delta must be > 0")
    n = side // 2  # first-quadrant side count

    def coord(i: int) -> float:
        # i = 0 is the mirrored first negative level
        return (2 * i - 1) * delta

    def variance(i: int, j: int) -> float:
        return profile.sigma_sq_thermal + (coord(i) ** 2 + coord(j) ** 2) * profile.scale

    def correct_axis(i: int, j: int) -> float:
        """P(axis coordinate stays in symbol (i, j)'s cell), along the i axis."""
        p = h_mag * coord(i)
        sd = math.sqrt(variance(i, j) / 2.0)
        # i = 1 borders the mirrored level at -delta, whose symbol is
        # energy-symmetric, hence shares the variance of (1, j)
        var_lower = variance(max(i - 1, 1), j)
        t_lo = qam_threshold(p, h_mag * coord(i - 1), variance(i, j), var_lower)
        if i == n:
            return float(qfunc((t_lo - p) / sd))
        t_hi = qam_threshold(p, h_mag * coord(i + 1), variance(i, j), variance(i + 1, j))
        return float(qfunc((t_lo - p) / sd) - qfunc((t_hi - p) / sd))

    middle = 0.0
    for i in range(1, n):
        for j in range(1, n):
            middle += 1.0 - correct_axis(i, j) * correct_axis(j, i)
    side_sum = 0.0
    for i in range(1, n):
        side_sum += 1.0 - correct_axis(i, n) * correct_axis(n, i)
    side_sum *= 2.0
    corner = 1.0 - correct_axis(n, n) ** 2

    ser = min(1.0, 4.0 / M * (middle + side_sum + corner))
    return SerPoint(ser=ser, h_mag=h_mag, components=(middle, side_sum, corner))


def average_ser_over_fading(
    conditional_ser: Callable[[float], float],
    k_factor: float,
    sigma_l: float,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> float:
    """Average a conditional SER over the channel amplitude distribution.

    For an infinite Rician factor the amplitude is the point mass sigma_l and
    the conditional value is returned directly. Otherwise the integral runs
    over a range wide enough to carry all but ~1e-12 of the amplitude mass.
    Amplitudes too weak for the ML thresholds to exist (collapsed decision
    regions deep in the fade) contribute SER 1, keeping the average an upper
    bound; their probability mass is negligible at the factors of interest.
    """
    if math.isinf(k_factor):
        return conditional_ser(sigma_l)
    mean_sq = sigma_l * sigma_l
    spread = math.sqrt(mean_sq / (k_factor + 1.0))
    r_hi = math.sqrt(mean_sq) + 9.0 * spread

    def safe_ser(r: float) -> float:
        if r <= 0.0:
            return 1.0
        try:
            return conditional_ser(r)
        except ThresholdDegeneracyError:
            return 1.0

    def integrand(r: np.ndarray) -> np.ndarray:
        dens = amplitude_pdf(r, k_factor, sigma_l)
        return np.array([safe_ser(float(ri)) for ri in r]) * dens

    val, _ = adaptive_quad(integrand, 0.0, r_hi, cfg)
    return min(1.0, max(0.0, val))
