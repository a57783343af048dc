"""Monte-Carlo link simulation with deterministic parallel streams.

Trials are processed in fixed-size batches. Each (grid point, batch) pair
owns a counter-based random stream keyed on (master seed, grid index, batch
index), so results are bit-identical no matter how many workers execute the
batches. Error counts are integers and order-free; floating accumulators are
reduced in batch order.

Both detectors consume the same channel and noise realizations (paired
streams), so detector comparisons are free of sampling noise in the draws.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .channel import ChannelModel
from .errors import InvalidParameterError
from .modem import (
    Constellation,
    NoiseProfile,
    detect_optimal_batch,
    detect_suboptimal_batch,
    symbol_noise_variances,
)

DETECTORS = ("optimal", "suboptimal")
FADING_MODES = ("per-trial", "fixed-amplitude")

_TWO_PI = 2.0 * math.pi
_BATCH_SIZE = 1_000_000
_MIN_RELIABLE_ERRORS = 20


@dataclass(frozen=True)
class SimConfig:
    """One simulation campaign: a constellation swept over receive SNR."""

    a: float
    beta: float
    gamma: float
    rx_snr_db: Tuple[float, ...]
    trials: int
    seed: int
    constellation_kind: Optional[str] = None  # "pam" | "qam"; None for SNR-only runs
    order: Optional[int] = None
    detectors: Tuple[str, ...] = DETECTORS
    fading: str = "per-trial"

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidParameterError("trials must be >= 1")
        grid = tuple(float(g) for g in self.rx_snr_db)
        if not grid:
            raise InvalidParameterError("rx_snr_db grid must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidParameterError("rx_snr_db grid must be strictly increasing")
        object.__setattr__(self, "rx_snr_db", grid)
        object.__setattr__(self, "detectors", tuple(self.detectors))
        for det in self.detectors:
            if det not in DETECTORS:
                raise InvalidParameterError(f"unknown detector {det!r}")
        if self.fading not in FADING_MODES:
            raise InvalidParameterError(f"unknown fading mode {self.fading!r}")
        if self.constellation_kind is not None and self.constellation_kind not in ("pam", "qam"):
            raise InvalidParameterError(f"unknown constellation {self.constellation_kind!r}")

    def model_at(self, rx_snr_db: float) -> ChannelModel:
        """Channel model at one grid point, in the unit-symbol-energy frame."""
        thermal = 10.0 ** (-rx_snr_db / 10.0)
        return ChannelModel.create(self.a, self.beta, self.gamma, thermal, es_bar=1.0)

    def constellation(self) -> Constellation:
        if self.constellation_kind is None or self.order is None:
            raise InvalidParameterError("configuration has no constellation")
        if self.constellation_kind == "pam":
            return Constellation.pam(self.order, es_bar=1.0)
        return Constellation.qam(self.order, es_bar=1.0)


@dataclass(frozen=True)
class DetectorEstimate:
    errors: int
    trials: int
    ser_hat: float
    stderr: float
    reliable: bool


@dataclass(frozen=True)
class SerEstimate:
    """Per-grid-point simulation outcome, one entry per detector."""

    rx_snr_db: float
    trials: int
    detectors: Dict[str, DetectorEstimate] = field(default_factory=dict)


@dataclass(frozen=True)
class SnrEstimate:
    rx_snr_db: float
    draws: int
    mean_snr: float
    stderr: float


def _stream_rng(seed: int, stream: int, batch: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream, batch))
    return np.random.Generator(np.random.Philox(ss))


def _batch_sizes(trials: int) -> List[int]:
    full, rem = divmod(trials, _BATCH_SIZE)
    return [_BATCH_SIZE] * full + ([rem] if rem else [])


def _draw_channel(
    model: ChannelModel, fading: str, rng: np.random.Generator, n: int
) -> np.ndarray:
    """Complex channel gains for one batch, honoring the fading mode."""
    phase = rng.uniform(0.0, _TWO_PI, n)
    h = np.exp(1j * phase)
    if fading == "fixed-amplitude":
        return model.sigma_l * h
    h *= math.sqrt(model.a)
    diffuse = model.diffuse_power
    if diffuse > 0.0:
        sd = math.sqrt(diffuse / 2.0)
        h = h + rng.normal(0.0, sd, n) + 1j * rng.normal(0.0, sd, n)
    return h


def _transmit_batch(
    cfg: SimConfig,
    model: ChannelModel,
    constellation: Constellation,
    rng: np.random.Generator,
    n: int,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw one batch of (sent symbol indices, channel gains, received samples)."""
    profile = NoiseProfile.from_channel(model)
    variances = symbol_noise_variances(constellation, profile)
    sent = rng.integers(0, constellation.order, n)
    h = _draw_channel(model, cfg.fading, rng, n)
    sd = np.sqrt(variances[sent] / 2.0)
    noise = rng.normal(0.0, 1.0, n) * sd + 1j * (rng.normal(0.0, 1.0, n) * sd)
    y = h * constellation.points[sent] + noise
    return sent, h, y


def _ser_batch(
    cfg: SimConfig,
    model: ChannelModel,
    constellation: Constellation,
    grid_index: int,
    batch_index: int,
    n: int,
) -> Dict[str, int]:
    rng = _stream_rng(cfg.seed, grid_index, batch_index)
    profile = NoiseProfile.from_channel(model)
    sent, h, y = _transmit_batch(cfg, model, constellation, rng, n)

    # derotate by the channel phase; noise statistics are rotation invariant
    h_mag = np.abs(h)
    y_rot = y * np.conj(h) / h_mag

    counts: Dict[str, int] = {}
    for det in cfg.detectors:
        if det == "optimal":
            decided = detect_optimal_batch(y_rot, constellation, h_mag, profile)
        else:
            decided = detect_suboptimal_batch(y_rot, constellation, h_mag)
        counts[det] = int(np.count_nonzero(decided != sent))
    return counts


def run_ser_sim(cfg: SimConfig, workers: int = 1) -> List[SerEstimate]:
    """Simulate SER at every grid point; deterministic for a given seed."""
    constellation = cfg.constellation()
    sizes = _batch_sizes(cfg.trials)
    tasks = [
        (g, b, size)
        for g in range(len(cfg.rx_snr_db))
        for b, size in enumerate(sizes)
    ]
    models = [cfg.model_at(snr) for snr in cfg.rx_snr_db]
    totals: List[Dict[str, int]] = [{det: 0 for det in cfg.detectors} for _ in cfg.rx_snr_db]

    def work(task):
        g, b, size = task
        return g, _ser_batch(cfg, models[g], constellation, g, b, size)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = pool.map(work, tasks)
    else:
        results = map(work, tasks)
    for g, counts in results:
        for det, c in counts.items():
            totals[g][det] += c

    out = []
    for g, snr in enumerate(cfg.rx_snr_db):
        per_det = {}
        for det in cfg.detectors:
            errors = totals[g][det]
            ser_hat = errors / cfg.trials
            stderr = math.sqrt(ser_hat * (1.0 - ser_hat) / cfg.trials)
            per_det[det] = DetectorEstimate(
                errors=errors,
                trials=cfg.trials,
                ser_hat=ser_hat,
                stderr=stderr,
                reliable=errors >= _MIN_RELIABLE_ERRORS,
            )
        out.append(SerEstimate(rx_snr_db=snr, trials=cfg.trials, detectors=per_det))
    return out


def _snr_batch(
    cfg: SimConfig, model: ChannelModel, grid_index: int, batch_index: int, n: int
) -> Tuple[float, float]:
    rng = _stream_rng(cfg.seed, grid_index, batch_index)
    h = _draw_channel(model, cfg.fading, rng, n)
    r_sq = np.abs(h) ** 2
    g = model.gamma_rx
    snr = g * r_sq / (g * model.noise_scale + 1.0)
    return float(np.sum(snr)), float(np.dot(snr, snr))


def run_snr_sim(cfg: SimConfig, workers: int = 1) -> List[SnrEstimate]:
    """Average instantaneous SNR over channel draws at every grid point."""
    sizes = _batch_sizes(cfg.trials)
    tasks = [(g, b, size) for g in range(len(cfg.rx_snr_db)) for b, size in enumerate(sizes)]
    models = [cfg.model_at(snr) for snr in cfg.rx_snr_db]
    partials: Dict[Tuple[int, int], Tuple[float, float]] = {}

    def work(task):
        g, b, size = task
        return g, b, _snr_batch(cfg, models[g], g, b, size)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = pool.map(work, tasks)
    else:
        results = map(work, tasks)
    for g, b, sums in results:
        partials[(g, b)] = sums

    out = []
    for g, snr_db in enumerate(cfg.rx_snr_db):
        total = 0.0
        total_sq = 0.0
        # reduce in batch order so float rounding is worker-count independent
        for b in range(len(sizes)):
            s, s2 = partials[(g, b)]
            total += s
            total_sq += s2
        mean = total / cfg.trials
        var = max(total_sq / cfg.trials - mean * mean, 0.0)
        out.append(
            SnrEstimate(
                rx_snr_db=snr_db,
                draws=cfg.trials,
                mean_snr=mean,
                stderr=math.sqrt(var / cfg.trials),
            )
        )
    return out
