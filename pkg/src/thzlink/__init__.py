"""LoS terahertz link modeling with molecular re-radiation.

Core pieces: absorption providers and transmittance, the recovered
re-radiation fraction beta (adaptive quadrature plus a Monte-Carlo oracle),
the unified Rician channel whose diffuse power and noise floor are set by
beta and gamma, unequal-variance ML detection for PAM/QAM with closed-form
SER, and a deterministic Monte-Carlo link simulator. A FastAPI service wraps
the library; the ``thzlink`` CLI is a thin client of that service.
"""

__version__ = "0.1.0"

from .absorption import (
    AbsorptionProvider,
    ConstantAbsorption,
    MediumSpec,
    TabulatedAbsorption,
    absorption_at,
    load_absorption_table,
    transmittance,
)
from .channel import (
    ChannelDraw,
    ChannelModel,
    SnrSpec,
    amplitude_cdf,
    amplitude_pdf,
    instantaneous_snr,
    limiting_avg_snr,
    marcum_q1,
    noise_variance,
    rician_factor,
    sample_amplitudes,
    sample_channel,
    total_channel_power,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateDistributionError,
    DegenerateMediumError,
    InvalidParameterError,
    OutOfDomainError,
    ThresholdDegeneracyError,
    ThzLinkError,
)
from .modem import (
    Constellation,
    NoiseProfile,
    ThresholdSet,
    detect_optimal,
    detect_optimal_batch,
    detect_suboptimal,
    detect_suboptimal_batch,
    pam_threshold,
    pam_threshold_set,
    qam_threshold,
    symbol_noise_variance,
    symbol_noise_variances,
)
from .quadrature import QuadratureConfig, adaptive_quad, adaptive_quad_2d
from .reradiation import (
    LinkBudget,
    LinkGeometry,
    beta_integrand,
    beta_mc_oracle,
    compute_beta,
    diffused_power,
    diffused_power_max,
)
from .ser_analysis import SerPoint, average_ser_over_fading, qfunc, ser_pam, ser_qam_union
from .simulator import (
    DetectorEstimate,
    SerEstimate,
    SimConfig,
    SnrEstimate,
    run_ser_sim,
    run_snr_sim,
)
