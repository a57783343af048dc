"""Fraction of re-radiated power recovered at the receiver.

Molecules along the beam absorb part of the LoS signal and re-emit it
isotropically; only a fraction beta of the maximum recoverable re-radiated
power actually reaches the receive aperture. beta is the ratio of two power
integrals over the illuminated cone, evaluated here by nested adaptive
quadrature over the beam cross-section, with an independent Monte-Carlo
estimator as a cross-check.

Geometry: the transmitter sits at x = 0 radiating a circular cone of
half-opening angle theta toward the receiver at x = d. Near-field exclusion
radii eps1 (Tx side) and eps2 (Rx side) bound the axial integration range.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .errors import DegenerateMediumError, InvalidParameterError
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig, adaptive_quad_2d

logger = logging.getLogger(__name__)

_CLAMP_LOG_LIMIT = 1e-9  # relative excursion beyond [0, 1] treated as roundoff


@dataclass(frozen=True)
class LinkGeometry:
    """Tx-Rx separation, beam half-opening angle and near-field exclusions."""

    d: float      # m
    theta: float  # rad, cone half-opening angle
    eps1: float   # m, Tx-side near-field exclusion
    eps2: float   # m, Rx-side near-field exclusion

    def __post_init__(self):
        if not (self.d > 0.0 and math.isfinite(self.d)):
            raise InvalidParameterError(f"distance must be > 0, got {self.d}")
        if not (0.0 < self.theta < math.pi / 2):
            raise InvalidParameterError(f"beam half-angle must be in (0, pi/2), got {self.theta}")
        if self.eps1 < 0.0 or self.eps2 < 0.0:
            raise InvalidParameterError("near-field exclusions must be >= 0")
        if not (self.eps1 + self.eps2 < self.d):
            raise InvalidParameterError(
                f"near-field exclusions ({self.eps1} + {self.eps2}) must leave room "
                f"within the link distance {self.d}"
            )


@dataclass(frozen=True)
class LinkBudget:
    """Transmit power, antenna gain and effective receive aperture.

    These factors cancel in beta; they are carried only so the power-budget
    route can be checked against the dimensionless one.
    """

    p_tx: float  # W
    g_tx: float  # unitless
    a_rx: float  # m^2

    def __post_init__(self):
        for name in ("p_tx", "g_tx", "a_rx"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise InvalidParameterError(f"{name} must be > 0, got {v}")


def beta_integrand(
    x: Union[float, np.ndarray],
    r: Union[float, np.ndarray],
    d: float,
    k: float,
) -> Union[float, np.ndarray]:
    """Re-radiation density at axial offset x and radial offset r, in 1/m^3.

    Combines the spherical spreading to and from the scattering annulus, the
    projected receive aperture, and the absorption along the three legs
    (direct to x, slant to the annulus, slant to the receiver).
    """
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(x <= 0.0) or np.any(x >= d):
        raise InvalidParameterError("axial offset must satisfy 0 < x < d")
    if np.any(r < 0.0):
        raise InvalidParameterError("radial offset must be >= 0")
    rho_tx_sq = x * x + r * r
    rho_rx_sq = (d - x) ** 2 + r * r
    cos_proj = (d - x) / np.sqrt(rho_rx_sq)
    path = x + np.sqrt(rho_tx_sq) + np.sqrt(rho_rx_sq)
    out = r * cos_proj * np.exp(-k * path) / (rho_rx_sq * rho_tx_sq)
    if out.ndim == 0:
        return float(out)
    return out


def _recovered_fraction_prefactor(d: float, k: float) -> float:
    """k d^2 / (2 (1 - e^{-k d})), evaluated stably; 1/d limit folded in at k = 0."""
    if k == 0.0:
        return d / 2.0
    return k * d * d / (2.0 * -math.expm1(-k * d))


def _raw_cone_integral(geom: LinkGeometry, k: float, cfg: QuadratureConfig) -> Tuple[float, float]:
    tan_theta = math.tan(geom.theta)
    return adaptive_quad_2d(
        lambda x, r: beta_integrand(x, r, geom.d, k),
        geom.eps1,
        geom.d - geom.eps2,
        lambda x: x * tan_theta,
        cfg,
    )


def compute_beta(
    geom: LinkGeometry,
    k: float,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> float:
    """Fraction of the maximum re-radiated power arriving at the receiver.

    Raises DegenerateMediumError for k = 0 (the ratio is 0/0 in a lossless
    medium); small k is handled stably via expm1, so callers with weak
    absorption should simply pass their small k.
    """
    if not (k >= 0.0 and math.isfinite(k)):
        raise InvalidParameterError(f"absorption coefficient must be >= 0, got {k}")
    if k == 0.0:
        raise DegenerateMediumError(
            "beta is undefined for k = 0 (no power is absorbed, so no power is re-radiated)"
        )
    integral, err = _raw_cone_integral(geom, k, cfg)
    beta = _recovered_fraction_prefactor(geom.d, k) * integral
    if beta < 0.0 or beta > 1.0:
        excess = max(-beta, beta - 1.0)
        if excess <= _CLAMP_LOG_LIMIT * max(1.0, abs(beta)):
            clamped = min(1.0, max(0.0, beta))
            logger.info("clamping beta %r to %r (roundoff excursion)", beta, clamped)
            return clamped
        raise InvalidParameterError(
            f"computed beta {beta!r} is outside [0, 1] beyond roundoff; "
            "check geometry and absorption inputs"
        )
    return beta


def beta_mc_oracle(
    geom: LinkGeometry,
    k: float,
    n: int,
    seed: int,
) -> Tuple[float, float]:
    """Monte-Carlo estimate (beta_hat, stderr) of the same cone integral.

    Samples uniformly over the true integration region (x with density
    proportional to the local cone radius, r uniform within it), weights by
    the region area, and applies the same closed-form prefactor. Deliberately
    shares no code with the quadrature path.
    """
    if n < 10_000:
        raise InvalidParameterError(f"need at least 1e4 samples for a usable estimate, got {n}")
    if not (k >= 0.0 and math.isfinite(k)):
        raise InvalidParameterError(f"absorption coefficient must be >= 0, got {k}")
    tan_theta = math.tan(geom.theta)
    x_lo, x_hi = geom.eps1, geom.d - geom.eps2
    area = 0.5 * tan_theta * (x_hi * x_hi - x_lo * x_lo)

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    total = 0.0
    total_sq = 0.0
    remaining = n
    batch = 2_000_000
    while remaining > 0:
        m = min(batch, remaining)
        u = rng.random(m)
        x = np.sqrt(x_lo * x_lo + u * (x_hi * x_hi - x_lo * x_lo))
        r = rng.random(m) * (x * tan_theta)
        vals = beta_integrand(x, r, geom.d, k)
        total += float(np.sum(vals))
        total_sq += float(np.dot(vals, vals))
        remaining -= m

    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    pref = _recovered_fraction_prefactor(geom.d, k)
    beta_hat = pref * area * mean
    stderr = pref * area * math.sqrt(var / n)
    return beta_hat, stderr


def diffused_power(
    geom: LinkGeometry,
    k: float,
    budget: LinkBudget,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> float:
    """Total re-radiated power arriving at the receiver, in W."""
    if not (k > 0.0 and math.isfinite(k)):
        raise DegenerateMediumError(f"re-radiated power needs k > 0, got {k}")
    integral, _ = _raw_cone_integral(geom, k, cfg)
    return k * budget.p_tx * budget.g_tx * budget.a_rx / (8.0 * math.pi) * integral


def diffused_power_max(d: float, k: float, budget: LinkBudget) -> float:
    """Upper bound on re-radiated receive power: all absorbed power re-emitted at range d."""
    if not (d > 0.0 and math.isfinite(d)):
        raise InvalidParameterError(f"distance must be > 0, got {d}")
    if not (k >= 0.0 and math.isfinite(k)):
        raise InvalidParameterError(f"absorption coefficient must be >= 0, got {k}")
    absorbed = -math.expm1(-k * d)
    return budget.p_tx / (4.0 * math.pi * d * d) * budget.g_tx * budget.a_rx * absorbed
