"""Unified LoS channel with molecular re-radiation.

The deterministic LoS gain sqrt(a) is joined by the recovered re-radiated
power beta*(1-a), which splits under gamma into a coherent scattering part
(diffuse Rician component) and an incoherent part raising the noise floor.
The resulting channel is Rician with factor K = a / (gamma*beta*(1-a)) and
total power sigma_l^2 = a + gamma*beta*(1-a); the receive noise picks up the
signal-dependent term beta*(1-gamma)*(1-a) per unit received symbol energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.special import erfc, gammaincc, i0e

from .errors import DegenerateDistributionError, InvalidParameterError

# switch the Rician amplitude law to its normal approximation once
# sqrt(2K) exceeds this (keeps density sup-error below 1e-3)
NORMAL_APPROX_SQRT_2K = 10.0

_TWO_PI = 2.0 * math.pi


def _check_abg(a: float, beta: float, gamma: float) -> None:
    if not (0.0 < a <= 1.0):
        raise InvalidParameterError(f"transmittance must be in (0, 1], got {a}")
    if not (0.0 <= beta <= 1.0):
        raise InvalidParameterError(f"recovered fraction beta must be in [0, 1], got {beta}")
    if not (0.0 <= gamma < 1.0):
        raise InvalidParameterError(f"scattering fraction gamma must be in [0, 1), got {gamma}")


def rician_factor(a: float, beta: float, gamma: float) -> float:
    """LoS-to-diffuse power ratio; inf when there is no diffuse component."""
    _check_abg(a, beta, gamma)
    diffuse = gamma * beta * (1.0 - a)
    if diffuse == 0.0:
        return math.inf
    return a / diffuse


def total_channel_power(a: float, beta: float, gamma: float) -> float:
    """sigma_l^2 = a + gamma*beta*(1-a), the mean squared channel gain."""
    _check_abg(a, beta, gamma)
    return a + gamma * beta * (1.0 - a)


@dataclass(frozen=True)
class ChannelModel:
    """Channel and noise parameters for one operating point.

    Use :meth:`create` so the derived fields (sigma_l_sq, k_factor) stay
    consistent with a, beta, gamma.
    """

    a: float              # LoS transmittance
    beta: float           # recovered re-radiation fraction
    gamma: float          # coherent (scattering) share of recovered power
    sigma_l_sq: float     # total channel power
    k_factor: float       # Rician factor, inf if no diffuse power
    thermal_noise: float  # W
    es_bar: float         # W, received average symbol energy

    @classmethod
    def create(
        cls,
        a: float,
        beta: float,
        gamma: float,
        thermal_noise: float,
        es_bar: float,
    ) -> "ChannelModel":
        _check_abg(a, beta, gamma)
        if not (thermal_noise > 0.0 and math.isfinite(thermal_noise)):
            raise InvalidParameterError(f"thermal noise must be > 0, got {thermal_noise}")
        if not (es_bar > 0.0 and math.isfinite(es_bar)):
            raise InvalidParameterError(f"symbol energy must be > 0, got {es_bar}")
        return cls(
            a=a,
            beta=beta,
            gamma=gamma,
            sigma_l_sq=total_channel_power(a, beta, gamma),
            k_factor=rician_factor(a, beta, gamma),
            thermal_noise=thermal_noise,
            es_bar=es_bar,
        )

    @property
    def sigma_l(self) -> float:
        return math.sqrt(self.sigma_l_sq)

    @property
    def gamma_rx(self) -> float:
        """Receive SNR counting thermal noise only."""
        return self.es_bar / self.thermal_noise

    @property
    def noise_scale(self) -> float:
        """Noise-floor contribution per unit received symbol energy: beta*(1-gamma)*(1-a)."""
        return self.beta * (1.0 - self.gamma) * (1.0 - self.a)

    @property
    def diffuse_power(self) -> float:
        """Power of the coherent scattering component: gamma*beta*(1-a)."""
        return self.gamma * self.beta * (1.0 - self.a)


@dataclass(frozen=True)
class ChannelDraw:
    """One realization of the channel gain."""

    h: complex
    r: float      # |h|
    phase: float  # arg(h), rad


@dataclass(frozen=True)
class SnrSpec:
    """Receive SNR Es/sigma^2 over thermal noise alone."""

    gamma_rx: float

    def __post_init__(self):
        if not (self.gamma_rx > 0.0 and math.isfinite(self.gamma_rx)):
            raise InvalidParameterError(f"receive SNR must be > 0, got {self.gamma_rx}")

    @classmethod
    def from_db(cls, db: float) -> "SnrSpec":
        return cls(10.0 ** (db / 10.0))

    @property
    def db(self) -> float:
        return 10.0 * math.log10(self.gamma_rx)


def noise_variance(model: ChannelModel) -> float:
    """Total receive noise power: thermal plus the re-radiated noise floor."""
    return model.thermal_noise + model.es_bar * model.noise_scale


def sample_channel(model: ChannelModel, rng: np.random.Generator) -> ChannelDraw:
    """Draw one channel realization; LoS phase uniform on [0, 2pi)."""
    phase = rng.uniform(0.0, _TWO_PI)
    h = math.sqrt(model.a) * complex(math.cos(phase), math.sin(phase))
    diffuse = model.diffuse_power
    if diffuse > 0.0:
        sd = math.sqrt(diffuse / 2.0)
        h += complex(rng.normal(0.0, sd), rng.normal(0.0, sd))
    return ChannelDraw(h=h, r=abs(h), phase=math.atan2(h.imag, h.real))


def sample_amplitudes(model: ChannelModel, rng: np.random.Generator, n: int) -> np.ndarray:
    """Vectorized draw of n channel amplitudes |h|.

    The amplitude law is rotation invariant, so the LoS phase is fixed at
    zero here; use :func:`sample_channel` when the complex gain matters.
    """
    los = math.sqrt(model.a)
    diffuse = model.diffuse_power
    if diffuse == 0.0:
        return np.full(n, los)
    sd = math.sqrt(diffuse / 2.0)
    re = los + rng.normal(0.0, sd, n)
    im = rng.normal(0.0, sd, n)
    return np.hypot(re, im)


def marcum_q1(alpha: float, b: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """First-order Marcum Q function, series evaluation.

    Sums Poisson(alpha^2/2) weights against regularized upper incomplete
    gamma factors in b^2/2 until the neglected weight is below 1e-14, so the
    truncation error is well under 1e-12. Vectorized over b.
    """
    if not (alpha >= 0.0 and math.isfinite(alpha)):
        raise InvalidParameterError(f"alpha must be >= 0 and finite, got {alpha}")
    b_arr = np.asarray(b, dtype=float)
    if np.any(b_arr < 0.0):
        raise InvalidParameterError("b must be >= 0")
    scalar = b_arr.ndim == 0
    b_arr = np.atleast_1d(b_arr)

    if alpha == 0.0:
        out = np.exp(-0.5 * b_arr * b_arr)
    else:
        lam = 0.5 * alpha * alpha
        y = 0.5 * b_arr * b_arr
        out = np.zeros_like(b_arr)
        weight_sum = 0.0
        k = 0
        log_lam = math.log(lam)
        while weight_sum < 1.0 - 1e-14:
            w = math.exp(-lam + k * log_lam - math.lgamma(k + 1))
            if w > 0.0:
                out += w * gammaincc(k + 1, y)
            weight_sum += w
            k += 1
            if k > lam + 50.0 * math.sqrt(lam) + 200.0:
                break
    out = np.where(b_arr == 0.0, 1.0, out)
    return float(out[0]) if scalar else out


def _normal_amplitude_params(k_factor: float, sigma_l: float) -> Tuple[float, float]:
    mean = math.sqrt(k_factor / (k_factor + 1.0)) * sigma_l
    var = sigma_l * sigma_l / (2.0 * (k_factor + 1.0))
    return mean, var


def _check_amplitude_args(k_factor: float, sigma_l: float) -> None:
    if math.isinf(k_factor):
        raise DegenerateDistributionError(
            "amplitude is deterministic for an infinite Rician factor; branch on it directly"
        )
    if not (k_factor >= 0.0):
        raise InvalidParameterError(f"Rician factor must be >= 0, got {k_factor}")
    if not (sigma_l > 0.0 and math.isfinite(sigma_l)):
        raise InvalidParameterError(f"sigma_l must be > 0, got {sigma_l}")


def amplitude_pdf(
    r: Union[float, np.ndarray], k_factor: float, sigma_l: float
) -> Union[float, np.ndarray]:
    """Density of the channel amplitude |h| for a finite Rician factor.

    Uses the exact Rician law; beyond sqrt(2K) > NORMAL_APPROX_SQRT_2K it
    switches to the matching normal approximation, whose moments follow from
    the LoS amplitude and per-component diffuse variance.
    """
    _check_amplitude_args(k_factor, sigma_l)
    r_arr = np.asarray(r, dtype=float)
    scalar = r_arr.ndim == 0
    r_arr = np.atleast_1d(r_arr)
    if np.any(r_arr < 0.0):
        raise InvalidParameterError("amplitude must be >= 0")

    if math.sqrt(2.0 * k_factor) > NORMAL_APPROX_SQRT_2K:
        mean, var = _normal_amplitude_params(k_factor, sigma_l)
        out = np.exp(-0.5 * (r_arr - mean) ** 2 / var) / math.sqrt(_TWO_PI * var)
    else:
        kp1 = k_factor + 1.0
        z = 2.0 * r_arr * math.sqrt(k_factor * kp1) / sigma_l
        # exponent rewritten as -(r sqrt(K+1)/sigma_l - sqrt(K))^2 with the
        # Bessel argument folded in via i0e, which keeps large-K stable
        expo = -((r_arr * math.sqrt(kp1) / sigma_l - math.sqrt(k_factor)) ** 2)
        out = 2.0 * kp1 * r_arr / (sigma_l * sigma_l) * np.exp(expo) * i0e(z)
    return float(out[0]) if scalar else out


def amplitude_cdf(
    r: Union[float, np.ndarray], k_factor: float, sigma_l: float
) -> Union[float, np.ndarray]:
    """Distribution function of |h|; same normal-approximation switch as the pdf."""
    _check_amplitude_args(k_factor, sigma_l)
    r_arr = np.asarray(r, dtype=float)
    scalar = r_arr.ndim == 0
    r_arr = np.atleast_1d(r_arr)
    if np.any(r_arr < 0.0):
        raise InvalidParameterError("amplitude must be >= 0")

    if math.sqrt(2.0 * k_factor) > NORMAL_APPROX_SQRT_2K:
        mean, var = _normal_amplitude_params(k_factor, sigma_l)
        out = 0.5 * erfc((mean - r_arr) / math.sqrt(2.0 * var))
    else:
        out = 1.0 - marcum_q1(
            math.sqrt(2.0 * k_factor),
            r_arr * math.sqrt(2.0 * (k_factor + 1.0)) / sigma_l,
        )
        out = np.asarray(out)
    return float(out[0]) if scalar else out


def instantaneous_snr(model: ChannelModel, r: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """SNR at channel amplitude r, with the re-radiated noise floor included."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0.0):
        raise InvalidParameterError("amplitude must be >= 0")
    g = model.gamma_rx
    out = g * r_arr * r_arr / (g * model.noise_scale + 1.0)
    return float(out) if out.ndim == 0 else out


def limiting_avg_snr(a: float, beta: float, gamma: float) -> float:
    """Average SNR in the infinite-transmit-power limit; inf when noise-free.

    Equals sigma_l^2 / (beta*(1-gamma)*(1-a)). The denominator vanishes when
    no re-radiated power lands in the noise floor (beta = 0, a = 1, or the
    gamma -> 1 boundary), in which case the limit is unbounded.
    """
    _check_abg(a, beta, gamma)
    den = beta * (1.0 - gamma) * (1.0 - a)
    if den == 0.0:
        return math.inf
    return total_channel_power(a, beta, gamma) / den
