"""Request and response models for the link-modeling service."""

from __future__ import annotations

import math
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class _Schema(BaseModel):
    model_config = ConfigDict(extra="forbid")


class HealthResponse(_Schema):
    status: str
    version: str


class GeometryIn(_Schema):
    distance_m: float = Field(gt=0.0)
    beamwidth_rad: float = Field(gt=0.0, lt=math.pi / 2)
    tx_rayleigh_m: float = Field(default=0.0, ge=0.0)
    rx_rayleigh_m: float = Field(default=0.0, ge=0.0)


class QuadratureIn(_Schema):
    rel_tol: float = Field(default=1e-6, gt=0.0)
    abs_tol: float = Field(default=1e-12, gt=0.0)
    max_subdivisions: int = Field(default=2000, ge=1)


class BetaRequest(_Schema):
    geometry: GeometryIn
    k_per_m: float = Field(gt=0.0)
    quadrature: QuadratureIn = Field(default_factory=QuadratureIn)
    mc_samples: Optional[int] = Field(default=None, ge=10_000)
    mc_seed: int = 0


class BetaResponse(_Schema):
    beta: float
    mc_beta: Optional[float] = None
    mc_stderr: Optional[float] = None


class ChannelSummaryRequest(_Schema):
    k_per_m: float = Field(ge=0.0)
    distance_m: float = Field(gt=0.0)
    beta: float = Field(ge=0.0, le=1.0)
    gamma: float = Field(ge=0.0, lt=1.0)
    rx_snr_db: Optional[float] = None


class ChannelSummaryResponse(_Schema):
    transmittance: float
    total_channel_power: float
    rician_k: Optional[float] = None  # omitted when infinite
    rician_k_infinite: bool
    noise_floor_scale: float
    limiting_snr: Optional[float] = None  # omitted when unbounded
    limiting_snr_db: Optional[float] = None
    noise_variance: Optional[float] = None  # present when rx_snr_db given, es_bar = 1


class ConstellationIn(_Schema):
    kind: Literal["pam", "qam"]
    order: int = Field(ge=2)


class SerCurveRequest(_Schema):
    constellation: ConstellationIn
    k_per_m: float = Field(ge=0.0)
    distance_m: float = Field(gt=0.0)
    beta: float = Field(ge=0.0, le=1.0)
    gamma: float = Field(ge=0.0, lt=1.0)
    rx_snr_db: List[float]
    amplitude_mode: Literal["fading-average", "mean-amplitude"] = "mean-amplitude"


class SerCurvePoint(_Schema):
    rx_snr_db: float
    ser: float


class SerCurveResponse(_Schema):
    points: List[SerCurvePoint]


class ValidateRequest(_Schema):
    config_text: str
    name: str = "<config>"


class ValidateResponse(_Schema):
    valid: bool
    errors: List[str] = Field(default_factory=list)


class ExperimentRunRequest(_Schema):
    config_text: str
    name: str = "<config>"
    seed: Optional[int] = None
    workers: int = Field(default=1, ge=1, le=64)


class OutputFile(_Schema):
    filename: str
    content: str


class ExperimentRunResponse(_Schema):
    outputs: List[OutputFile]
    manifest: Dict


class ErrorBody(_Schema):
    kind: Literal["config", "numerical"]
    detail: str
