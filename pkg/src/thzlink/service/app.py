"""FastAPI service exposing the link model over HTTP.

Quick analytic lookups (beta, channel summaries, SER curves) are plain
request/response; full experiments accept the same YAML config text the CLI
uses and return the produced files in the response body, so the service
stays stateless and the caller owns persistence.
"""

from __future__ import annotations

import math

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..channel import (
    limiting_avg_snr,
    noise_variance,
    rician_factor,
    total_channel_power,
    ChannelModel,
)
from ..errors import ConfigError, ThzLinkError
from ..experiments import load_experiment_config, run_experiment
from ..modem import NoiseProfile
from ..quadrature import QuadratureConfig
from ..reradiation import LinkGeometry, beta_mc_oracle, compute_beta
from ..ser_analysis import average_ser_over_fading, ser_pam, ser_qam_union
from . import schemas


def create_app() -> FastAPI:
    app = FastAPI(
        title="thzlink",
        version=__version__,
        description="LoS THz link modeling with molecular re-radiation",
    )

    @app.exception_handler(ConfigError)
    async def config_error(request, exc: ConfigError):
        return JSONResponse(status_code=422, content={"kind": "config", "detail": str(exc)})

    @app.exception_handler(ThzLinkError)
    async def numerical_error(request, exc: ThzLinkError):
        return JSONResponse(status_code=500, content={"kind": "numerical", "detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/v1/beta", response_model=schemas.BetaResponse, response_model_exclude_none=True)
    def beta(req: schemas.BetaRequest):
        geom = LinkGeometry(
            d=req.geometry.distance_m,
            theta=req.geometry.beamwidth_rad,
            eps1=req.geometry.tx_rayleigh_m,
            eps2=req.geometry.rx_rayleigh_m,
        )
        cfg = QuadratureConfig(
            req.quadrature.rel_tol, req.quadrature.abs_tol, req.quadrature.max_subdivisions
        )
        value = compute_beta(geom, req.k_per_m, cfg)
        out = schemas.BetaResponse(beta=value)
        if req.mc_samples:
            mc, stderr = beta_mc_oracle(geom, req.k_per_m, req.mc_samples, req.mc_seed)
            out = schemas.BetaResponse(beta=value, mc_beta=mc, mc_stderr=stderr)
        return out

    @app.post(
        "/v1/channel/summary",
        response_model=schemas.ChannelSummaryResponse,
        response_model_exclude_none=True,
    )
    def channel_summary(req: schemas.ChannelSummaryRequest):
        a = math.exp(-req.k_per_m * req.distance_m)
        k_factor = rician_factor(a, req.beta, req.gamma)
        limit = limiting_avg_snr(a, req.beta, req.gamma)
        nv = None
        if req.rx_snr_db is not None:
            model = ChannelModel.create(
                a, req.beta, req.gamma, thermal_noise=10.0 ** (-req.rx_snr_db / 10.0), es_bar=1.0
            )
            nv = noise_variance(model)
        return schemas.ChannelSummaryResponse(
            transmittance=a,
            total_channel_power=total_channel_power(a, req.beta, req.gamma),
            rician_k=None if math.isinf(k_factor) else k_factor,
            rician_k_infinite=math.isinf(k_factor),
            noise_floor_scale=req.beta * (1.0 - req.gamma) * (1.0 - a),
            limiting_snr=None if math.isinf(limit) else limit,
            limiting_snr_db=None if math.isinf(limit) else 10.0 * math.log10(limit),
            noise_variance=nv,
        )

    @app.post("/v1/ser/analytic", response_model=schemas.SerCurveResponse)
    def ser_curve(req: schemas.SerCurveRequest):
        a = math.exp(-req.k_per_m * req.distance_m)
        scale = req.beta * (1.0 - req.gamma) * (1.0 - a)
        sigma_l = math.sqrt(total_channel_power(a, req.beta, req.gamma))
        order = req.constellation.order
        if req.constellation.kind == "pam":
            delta = math.sqrt(3.0 / (order * order - 1.0))
            conditional = lambda profile: (lambda r: ser_pam(order, r, delta, profile))
        else:
            delta = math.sqrt(3.0 / (2.0 * (order - 1.0)))
            conditional = lambda profile: (lambda r: ser_qam_union(order, r, delta, profile).ser)
        points = []
        for snr_db in req.rx_snr_db:
            profile = NoiseProfile(sigma_sq_thermal=10.0 ** (-snr_db / 10.0), scale=scale)
            fn = conditional(profile)
            if req.amplitude_mode == "mean-amplitude":
                value = fn(sigma_l)
            else:
                value = average_ser_over_fading(
                    fn, rician_factor(a, req.beta, req.gamma), sigma_l
                )
            points.append(schemas.SerCurvePoint(rx_snr_db=snr_db, ser=value))
        return schemas.SerCurveResponse(points=points)

    @app.post("/v1/experiments/validate", response_model=schemas.ValidateResponse)
    def validate(req: schemas.ValidateRequest):
        try:
            load_experiment_config(req.config_text, name=req.name)
        except ConfigError as exc:
            return schemas.ValidateResponse(valid=False, errors=str(exc).splitlines())
        return schemas.ValidateResponse(valid=True)

    @app.post("/v1/experiments/run", response_model=schemas.ExperimentRunResponse)
    def run(req: schemas.ExperimentRunRequest):
        cfg = load_experiment_config(req.config_text, name=req.name)
        result = run_experiment(cfg, seed=req.seed, workers=req.workers)
        return schemas.ExperimentRunResponse(
            outputs=[
                schemas.OutputFile(filename=name, content=content)
                for name, content in result.outputs
            ],
            manifest=result.manifest,
        )

    return app


app = create_app()
