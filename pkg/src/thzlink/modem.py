"""Constellations, energy-dependent noise variances and ML detection.

Because re-radiated noise grows with the transmitted symbol energy, each
constellation point sees its own noise variance. The ML decision boundary
between two Gaussians of unequal variance is the root of a quadratic in the
observation; detectors here either use those boundaries implicitly (full
likelihood argmax) or ignore the variance differences (minimum distance).

PAM symbols live on the real axis and are detected on the real part of the
derotated observation, against per-real-dimension densities; QAM detection
uses the full complex observation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .channel import ChannelModel
from .errors import InvalidParameterError, ThresholdDegeneracyError

_QAM_ORDERS = (4, 16, 64, 256)
_ENERGY_REL_TOL = 1e-12


@dataclass(frozen=True)
class Constellation:
    """PAM or square-QAM constellation scaled to mean symbol energy es_bar."""

    kind: str           # "pam" | "qam"
    order: int
    delta: float        # amplitude scale
    points: np.ndarray  # complex, in index order
    es_bar: float

    @classmethod
    def pam(cls, order: int, es_bar: float) -> "Constellation":
        if order < 2 or order % 2 != 0:
            raise InvalidParameterError(f"PAM order must be even and >= 2, got {order}")
        if not (es_bar > 0.0):
            raise InvalidParameterError(f"symbol energy must be > 0, got {es_bar}")
        delta = math.sqrt(3.0 * es_bar / (order * order - 1.0))
        levels = np.array([(2 * i - 1 - order) * delta for i in range(1, order + 1)])
        return cls._build("pam", order, delta, levels.astype(complex), es_bar)

    @classmethod
    def qam(cls, order: int, es_bar: float) -> "Constellation":
        if order not in _QAM_ORDERS:
            raise InvalidParameterError(f"QAM order must be one of {_QAM_ORDERS}, got {order}")
        if not (es_bar > 0.0):
            raise InvalidParameterError(f"symbol energy must be > 0, got {es_bar}")
        side = int(round(math.sqrt(order)))
        delta = math.sqrt(3.0 * es_bar / (2.0 * (order - 1.0)))
        levels = np.array([(2 * i - 1 - side) * delta for i in range(1, side + 1)])
        # index order: real level major, imaginary level minor
        points = (levels[:, None] + 1j * levels[None, :]).ravel()
        return cls._build("qam", order, delta, points, es_bar)

    @classmethod
    def _build(cls, kind, order, delta, points, es_bar) -> "Constellation":
        points = np.asarray(points, dtype=complex)
        points.setflags(write=False)
        mean_energy = float(np.mean(np.abs(points) ** 2))
        if abs(mean_energy - es_bar) > _ENERGY_REL_TOL * es_bar:
            raise InvalidParameterError(
                f"constellation mean energy {mean_energy!r} deviates from {es_bar!r}"
            )
        return cls(kind=kind, order=order, delta=delta, points=points, es_bar=es_bar)

    @property
    def energies(self) -> np.ndarray:
        return np.abs(self.points) ** 2


@dataclass(frozen=True)
class NoiseProfile:
    """Thermal noise power plus the per-unit-energy re-radiated noise scale."""

    sigma_sq_thermal: float  # W
    scale: float             # beta*(1-gamma)*(1-a), applied to symbol energy

    def __post_init__(self):
        if self.sigma_sq_thermal < 0.0 or self.scale < 0.0:
            raise InvalidParameterError("noise profile terms must be >= 0")

    @classmethod
    def from_channel(cls, model: ChannelModel) -> "NoiseProfile":
        return cls(sigma_sq_thermal=model.thermal_noise, scale=model.noise_scale)


def symbol_noise_variance(point: complex, profile: NoiseProfile) -> float:
    """Total complex noise variance seen when this symbol is transmitted."""
    return profile.sigma_sq_thermal + abs(point) ** 2 * profile.scale


def symbol_noise_variances(constellation: Constellation, profile: NoiseProfile) -> np.ndarray:
    return profile.sigma_sq_thermal + constellation.energies * profile.scale


def _likelihood_boundary(p0: float, p1: float, var0: float, var1: float) -> float:
    """Root of the unequal-variance Gaussian likelihood equality, strictly between p0 and p1.

    The densities are the per-real-dimension laws exp(-(x-p)^2/var)/sqrt(pi var)
    (total complex variance var, so var/2 per dimension). Equal variances give
    the exact midpoint.
    """
    if p0 == p1:
        raise InvalidParameterError("symbol coordinates must differ")
    if var0 <= 0.0 or var1 <= 0.0:
        raise InvalidParameterError("variances must be > 0")
    if var0 == var1:
        return 0.5 * (p0 + p1)
    a_coef = var0 - var1
    b_coef = 2.0 * (p0 * var1 - p1 * var0)
    c_coef = (p1 * p1 * var0 - p0 * p0 * var1) - 0.5 * math.log(var0 / var1) * var0 * var1
    disc = b_coef * b_coef - 4.0 * a_coef * c_coef
    lo, hi = (p0, p1) if p0 < p1 else (p1, p0)
    if disc < 0.0:
        raise ThresholdDegeneracyError(
            f"no likelihood crossing between symbols at {p0} and {p1} "
            f"(variances {var0}, {var1})"
        )
    sq = math.sqrt(disc)
    q = -0.5 * (b_coef + math.copysign(sq, b_coef))
    roots = (q / a_coef, c_coef / q) if q != 0.0 else (-b_coef / a_coef,)
    for root in roots:
        if lo < root < hi:
            return root
    raise ThresholdDegeneracyError(
        f"likelihood crossing falls outside ({lo}, {hi}): roots {roots}; "
        "the variance ratio collapses this decision region"
    )


def pam_threshold(
    sigma_lo_sq: float, sigma_hi_sq: float, h_mag: float, delta: float
) -> float:
    """ML boundary between adjacent PAM symbols, origin at the pair midpoint.

    The symbol with variance sigma_lo_sq sits at -|h| delta, the one with
    sigma_hi_sq at +|h| delta. Equal variances return exactly 0.
    """
    if not (h_mag > 0.0 and delta > 0.0):
        raise InvalidParameterError("h_mag and delta must be > 0")
    if sigma_lo_sq == sigma_hi_sq:
        return 0.0
    hd = h_mag * delta
    return _likelihood_boundary(-hd, hd, sigma_lo_sq, sigma_hi_sq)


def qam_threshold(p0: float, p1: float, sigma0_sq: float, sigma1_sq: float) -> float:
    """ML boundary on one axis between QAM symbols at coordinates p0 and p1.

    Coordinates are already scaled by |h|. Equal variances return exactly the
    midpoint.
    """
    if p0 == p1:
        raise InvalidParameterError("symbol coordinates must differ")
    if sigma0_sq == sigma1_sq:
        return 0.5 * (p0 + p1)
    return _likelihood_boundary(p0, p1, sigma0_sq, sigma1_sq)


@dataclass(frozen=True)
class ThresholdSet:
    """Ordered decision boundaries in the derotated frame at a given |h|."""

    kind: str
    h_mag: float
    values: np.ndarray

    def detect(self, x: Union[float, np.ndarray]) -> Union[int, np.ndarray]:
        """Interval lookup: index of the region containing x."""
        idx = np.searchsorted(self.values, np.asarray(x, dtype=float), side="left")
        return int(idx) if idx.ndim == 0 else idx


def pam_threshold_set(
    constellation: Constellation, h_mag: float, profile: NoiseProfile
) -> ThresholdSet:
    """Absolute boundaries between every adjacent PAM pair at this |h|."""
    if constellation.kind != "pam":
        raise InvalidParameterError("threshold sets are defined for PAM constellations")
    pts = constellation.points.real
    variances = symbol_noise_variances(constellation, profile)
    values = np.empty(constellation.order - 1)
    for i in range(constellation.order - 1):
        mid = 0.5 * h_mag * (pts[i] + pts[i + 1])
        values[i] = mid + pam_threshold(
            variances[i], variances[i + 1], h_mag, constellation.delta
        )
    if np.any(np.diff(values) <= 0.0):
        raise ThresholdDegeneracyError("PAM thresholds are not strictly increasing")
    return ThresholdSet(kind="pam", h_mag=h_mag, values=values)


def _log_likelihoods(
    y: np.ndarray,
    constellation: Constellation,
    h_mag: Union[float, np.ndarray],
    variances: np.ndarray,
    index: int,
) -> np.ndarray:
    """Per-trial log-likelihood of symbol `index` (additive constants dropped)."""
    var = variances[index]
    point = constellation.points[index]
    if constellation.kind == "pam":
        dev = y.real - h_mag * point.real
        return -(dev * dev) / var - 0.5 * math.log(var)
    dev_re = y.real - h_mag * point.real
    dev_im = y.imag - h_mag * point.imag
    return -(dev_re * dev_re + dev_im * dev_im) / var - math.log(var)


def detect_optimal_batch(
    y: np.ndarray,
    constellation: Constellation,
    h_mag: Union[float, np.ndarray],
    profile: NoiseProfile,
) -> np.ndarray:
    """Likelihood-argmax detection over the whole constellation; ties to the lower index."""
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    variances = symbol_noise_variances(constellation, profile)
    best = _log_likelihoods(y, constellation, h_mag, variances, 0)
    best = np.array(best, dtype=float)
    idx = np.zeros(y.shape, dtype=np.int64)
    for m in range(1, constellation.order):
        ll = _log_likelihoods(y, constellation, h_mag, variances, m)
        better = ll > best
        best[better] = ll[better]
        idx[better] = m
    return idx


def detect_suboptimal_batch(
    y: np.ndarray,
    constellation: Constellation,
    h_mag: Union[float, np.ndarray],
) -> np.ndarray:
    """Minimum-distance detection (equal variances assumed); ties to the lower index."""
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    pts = constellation.points
    # running minimum keeps memory flat for large batches
    best = None
    idx = np.zeros(y.shape, dtype=np.int64)
    for m in range(constellation.order):
        if constellation.kind == "pam":
            dev = y.real - h_mag * pts[m].real
            d2 = dev * dev
        else:
            dev_re = y.real - h_mag * pts[m].real
            dev_im = y.imag - h_mag * pts[m].imag
            d2 = dev_re * dev_re + dev_im * dev_im
        if best is None:
            best = np.array(d2, dtype=float)
        else:
            better = d2 < best
            best[better] = d2[better]
            idx[better] = m
    return idx


def detect_optimal(
    y: complex,
    constellation: Constellation,
    h_mag: float,
    profile: NoiseProfile,
) -> int:
    """Single-observation likelihood-argmax detection in the derotated frame."""
    return int(detect_optimal_batch(np.array([y]), constellation, h_mag, profile)[0])


def detect_suboptimal(y: complex, constellation: Constellation, h_mag: float) -> int:
    """Single-observation minimum-distance detection in the derotated frame."""
    return int(detect_suboptimal_batch(np.array([y]), constellation, h_mag)[0])
