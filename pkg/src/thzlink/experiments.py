"""Declarative experiment runner emitting plot-ready CSV plus a run manifest.

Three experiment kinds cover the standard link studies: the recovered
re-radiation fraction against distance, the limiting average SNR against
distance for a family of scattering fractions, and analytical-plus-simulated
SER against receive SNR. Configs are YAML documents validated by pydantic
models; outputs are returned in memory so callers (CLI, service) decide where
they land. Reruns of an unchanged config are bit-identical.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import __version__
from .absorption import load_absorption_table, absorption_at
from .channel import limiting_avg_snr, rician_factor, total_channel_power
from .errors import ConfigError
from .modem import NoiseProfile
from .quadrature import QuadratureConfig
from .reradiation import LinkGeometry, compute_beta
from .ser_analysis import average_ser_over_fading, ser_pam, ser_qam_union
from .simulator import SimConfig, run_ser_sim


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MediumBlock(_Block):
    k_per_m: Optional[float] = Field(default=None, ge=0.0)
    table_csv: Optional[str] = None
    frequency_hz: Optional[float] = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def _one_source(self):
        if self.k_per_m is None and self.table_csv is None:
            raise ValueError("medium needs k_per_m or table_csv")
        if self.k_per_m is not None and self.table_csv is not None:
            raise ValueError("medium takes k_per_m or table_csv, not both")
        if self.table_csv is not None and self.frequency_hz is None:
            raise ValueError("table_csv requires frequency_hz")
        return self

    def resolve_k(self, base_dir: Path) -> float:
        if self.k_per_m is not None:
            return self.k_per_m
        table = load_absorption_table(base_dir / self.table_csv)
        return absorption_at(table, self.frequency_hz)


class LinkBlock(_Block):
    distance_m: Optional[float] = Field(default=None, gt=0.0)
    beamwidth_rad: float = Field(gt=0.0, lt=math.pi / 2)
    tx_rayleigh_m: float = Field(default=0.0, ge=0.0)
    rx_rayleigh_m: float = Field(default=0.0, ge=0.0)


class ChannelBlock(_Block):
    gamma: Optional[float] = Field(default=None, ge=0.0, lt=1.0)
    gammas: Optional[List[float]] = None
    beta_mode: Literal["fixed", "computed"] = "fixed"
    beta_modes: Optional[List[Literal["fixed", "computed"]]] = None
    beta: float = Field(default=1.0, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _gamma_ranges(self):
        if self.gammas is not None:
            for g in self.gammas:
                if not (0.0 <= g < 1.0):
                    raise ValueError(f"gamma {g} outside [0, 1)")
        return self


class ConstellationBlock(_Block):
    kind: Literal["pam", "qam"]
    order: int = Field(ge=2)


class DistanceSweep(_Block):
    start: float = Field(gt=0.0)
    stop: float = Field(gt=0.0)
    points: int = Field(ge=2)
    spacing: Literal["log", "linear"] = "log"

    @model_validator(mode="after")
    def _ordered(self):
        if not self.stop > self.start:
            raise ValueError("sweep stop must exceed start")
        return self

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


class SnrSweep(_Block):
    values: Optional[List[float]] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    points: Optional[int] = Field(default=None, ge=2)

    @model_validator(mode="after")
    def _shape(self):
        if self.values is not None:
            if any(b <= a for a, b in zip(self.values, self.values[1:])):
                raise ValueError("rx_snr_db values must be strictly increasing")
            return self
        if None in (self.start, self.stop, self.points):
            raise ValueError("sweep needs values or start/stop/points")
        if not self.stop > self.start:
            raise ValueError("sweep stop must exceed start")
        return self

    def grid(self) -> Tuple[float, ...]:
        if self.values is not None:
            return tuple(float(v) for v in self.values)
        return tuple(float(v) for v in np.linspace(self.start, self.stop, self.points))


class SweepBlock(_Block):
    distance_m: Optional[DistanceSweep] = None
    rx_snr_db: Optional[SnrSweep] = None


class SimulationBlock(_Block):
    trials: int = Field(ge=1)
    fading: Literal["per-trial", "fixed-amplitude"] = "per-trial"
    detectors: List[Literal["optimal", "suboptimal"]] = Field(
        default_factory=lambda: ["optimal", "suboptimal"]
    )


class AnalyticBlock(_Block):
    amplitude_mode: Literal["fading-average", "mean-amplitude"] = "fading-average"


class QuadratureBlock(_Block):
    rel_tol: float = Field(default=1e-6, gt=0.0)
    abs_tol: float = Field(default=1e-12, gt=0.0)
    max_subdivisions: int = Field(default=2000, ge=1)

    def to_config(self) -> QuadratureConfig:
        return QuadratureConfig(self.rel_tol, self.abs_tol, self.max_subdivisions)


class ExperimentConfig(_Block):
    experiment: Literal["beta_vs_distance", "limiting_snr_vs_distance", "ser_vs_rxsnr"]
    output: str
    seed: int = 0
    medium: MediumBlock
    link: LinkBlock
    channel: Optional[ChannelBlock] = None
    constellation: Optional[ConstellationBlock] = None
    sweep: SweepBlock
    simulation: Optional[SimulationBlock] = None
    analytic: AnalyticBlock = Field(default_factory=AnalyticBlock)
    quadrature: QuadratureBlock = Field(default_factory=QuadratureBlock)

    @model_validator(mode="after")
    def _per_kind(self):
        kind = self.experiment
        if kind == "beta_vs_distance":
            if self.sweep.distance_m is None:
                raise ValueError("beta_vs_distance needs sweep.distance_m")
        elif kind == "limiting_snr_vs_distance":
            if self.sweep.distance_m is None:
                raise ValueError("limiting_snr_vs_distance needs sweep.distance_m")
            if self.channel is None or (self.channel.gamma is None and self.channel.gammas is None):
                raise ValueError("limiting_snr_vs_distance needs channel.gamma or channel.gammas")
        else:
            if self.sweep.rx_snr_db is None:
                raise ValueError("ser_vs_rxsnr needs sweep.rx_snr_db")
            if self.link.distance_m is None:
                raise ValueError("ser_vs_rxsnr needs link.distance_m")
            if self.channel is None or self.channel.gamma is None:
                raise ValueError("ser_vs_rxsnr needs channel.gamma")
            if self.constellation is None:
                raise ValueError("ser_vs_rxsnr needs a constellation block")
            if self.simulation is None:
                raise ValueError("ser_vs_rxsnr needs a simulation block")
        return self


def load_experiment_config(text: str, name: str = "<config>") -> ExperimentConfig:
    """Parse and validate a YAML experiment config; diagnostics carry locations."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{name}: YAML parse error: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: top level must be a mapping")
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        lines = []
        for err in exc.errors():
            loc = ".".join(str(p) for p in err["loc"]) or "<root>"
            lines.append(f"  {loc}: {err['msg']}")
        raise ConfigError(f"{name}: invalid configuration:\n" + "\n".join(lines)) from None


def load_experiment_config_file(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return load_experiment_config(text, name=str(path))


@dataclass(frozen=True)
class ExperimentResult:
    outputs: Tuple[Tuple[str, str], ...]  # (filename, text)
    manifest: Dict

    def write(self, out_dir) -> List[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for filename, text in self.outputs:
            p = out_dir / filename
            p.write_text(text)
            written.append(p)
        mpath = out_dir / "manifest.json"
        mpath.write_text(json.dumps(self.manifest, indent=2, sort_keys=True) + "\n")
        written.append(mpath)
        return written


def _csv_text(header: List[str], rows: List[List]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


@lru_cache(maxsize=4096)
def _cached_beta(
    d: float, theta: float, eps1: float, eps2: float, k: float,
    rel_tol: float, abs_tol: float, max_subdivisions: int,
) -> float:
    geom = LinkGeometry(d=d, theta=theta, eps1=eps1, eps2=eps2)
    return compute_beta(geom, k, QuadratureConfig(rel_tol, abs_tol, max_subdivisions))


def _beta_for(cfg: ExperimentConfig, d: float, k: float) -> float:
    q = cfg.quadrature
    return _cached_beta(
        d, cfg.link.beamwidth_rad, cfg.link.tx_rayleigh_m, cfg.link.rx_rayleigh_m,
        k, q.rel_tol, q.abs_tol, q.max_subdivisions,
    )


def _run_beta_vs_distance(cfg: ExperimentConfig, k: float) -> Tuple[List[List], List[str], int]:
    rows: List[List] = []
    skipped = 0
    eps_total = cfg.link.tx_rayleigh_m + cfg.link.rx_rayleigh_m
    for d in cfg.sweep.distance_m.grid():
        d = float(d)
        if d <= eps_total:
            skipped += 1  # near-field exclusions leave no integration region
            continue
        rows.append([d, _beta_for(cfg, d, k)])
    return rows, ["distance_m", "beta"], skipped


def _run_limiting_snr(cfg: ExperimentConfig, k: float) -> Tuple[List[List], List[str], int]:
    channel = cfg.channel
    gammas = channel.gammas if channel.gammas is not None else [channel.gamma]
    modes = channel.beta_modes if channel.beta_modes is not None else [channel.beta_mode]
    eps_total = cfg.link.tx_rayleigh_m + cfg.link.rx_rayleigh_m
    rows: List[List] = []
    skipped = 0
    for d in cfg.sweep.distance_m.grid():
        d = float(d)
        a = math.exp(-k * d)
        for gamma in gammas:
            for mode in modes:
                if mode == "computed":
                    if d <= eps_total:
                        skipped += 1
                        continue
                    beta = _beta_for(cfg, d, k)
                else:
                    beta = channel.beta
                limit = limiting_avg_snr(a, beta, gamma)
                limit_db = math.inf if math.isinf(limit) else 10.0 * math.log10(limit)
                rows.append([d, float(gamma), mode, beta, limit_db])
    header = ["distance_m", "gamma", "beta_mode", "beta", "limiting_snr_db"]
    return rows, header, skipped


def _analytic_ser(
    cfg: ExperimentConfig, a: float, beta: float, gamma: float, rx_snr_db: float
) -> float:
    thermal = 10.0 ** (-rx_snr_db / 10.0)
    profile = NoiseProfile(sigma_sq_thermal=thermal, scale=beta * (1.0 - gamma) * (1.0 - a))
    kind, order = cfg.constellation.kind, cfg.constellation.order
    if kind == "pam":
        delta = math.sqrt(3.0 / (order * order - 1.0))
        conditional = lambda r: ser_pam(order, r, delta, profile)
    else:
        delta = math.sqrt(3.0 / (2.0 * (order - 1.0)))
        conditional = lambda r: ser_qam_union(order, r, delta, profile).ser
    sigma_l = math.sqrt(total_channel_power(a, beta, gamma))
    if cfg.analytic.amplitude_mode == "mean-amplitude":
        return conditional(sigma_l)
    return average_ser_over_fading(
        conditional, rician_factor(a, beta, gamma), sigma_l, cfg.quadrature.to_config()
    )


def _run_ser_vs_rxsnr(
    cfg: ExperimentConfig, k: float, seed: int, workers: int
) -> Tuple[List[List], List[str], int]:
    d = cfg.link.distance_m
    a = math.exp(-k * d)
    gamma = cfg.channel.gamma
    if cfg.channel.beta_mode == "computed":
        beta = _beta_for(cfg, d, k)
    else:
        beta = cfg.channel.beta
    grid = cfg.sweep.rx_snr_db.grid()
    sim_cfg = SimConfig(
        a=a,
        beta=beta,
        gamma=gamma,
        rx_snr_db=grid,
        trials=cfg.simulation.trials,
        seed=seed,
        constellation_kind=cfg.constellation.kind,
        order=cfg.constellation.order,
        detectors=tuple(cfg.simulation.detectors),
        fading=cfg.simulation.fading,
    )
    estimates = run_ser_sim(sim_cfg, workers=workers)

    header = ["rx_snr_db", "beta", "trials", "ser_analytic"]
    for det in cfg.simulation.detectors:
        header += [f"ser_{det}", f"ser_{det}_stderr", f"errors_{det}", f"reliable_{det}"]
    rows: List[List] = []
    for est in estimates:
        row: List = [est.rx_snr_db, beta, est.trials]
        row.append(_analytic_ser(cfg, a, beta, gamma, est.rx_snr_db))
        for det in cfg.simulation.detectors:
            de = est.detectors[det]
            row += [de.ser_hat, de.stderr, de.errors, int(de.reliable)]
        rows.append(row)
    return rows, header, 0


def run_experiment(
    cfg: ExperimentConfig,
    seed: Optional[int] = None,
    workers: int = 1,
    base_dir: Optional[Path] = None,
) -> ExperimentResult:
    """Execute one experiment; outputs come back in memory, rows in grid order."""
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    effective_seed = cfg.seed if seed is None else seed
    k = cfg.medium.resolve_k(base_dir)

    if cfg.experiment == "beta_vs_distance":
        rows, header, skipped = _run_beta_vs_distance(cfg, k)
    elif cfg.experiment == "limiting_snr_vs_distance":
        rows, header, skipped = _run_limiting_snr(cfg, k)
    else:
        rows, header, skipped = _run_ser_vs_rxsnr(cfg, k, effective_seed, workers)

    text = _csv_text(header, rows)
    digest = hashlib.sha256(text.encode()).hexdigest()
    manifest = {
        "version": __version__,
        "experiment": json.loads(cfg.model_dump_json()),
        "resolved": {"seed": effective_seed, "k_per_m": k},
        "outputs": [
            {"filename": cfg.output, "rows": len(rows), "sha256": digest}
        ],
        "skipped_grid_points": skipped,
    }
    return ExperimentResult(outputs=((cfg.output, text),), manifest=manifest)
