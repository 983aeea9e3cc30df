"""Inference for the stochastic SIR epidemic model.

Exact Gillespie simulation, van Kampen moment approximations, the
moment-matched Generic Discrete likelihood, t-walk posterior sampling and
posterior-predictive forecasting.
"""

from .gdd import GdParams, gd_from_moments
from .inference import (
    Chain,
    InitialCondition,
    ParameterPoint,
    ParamPrior,
    Posterior,
    PriorSpec,
    hpd_interval,
    log_likelihood,
    log_posterior,
    log_prior,
    map_estimate,
    r0_samples,
    summarize_chain,
    twalk_sample,
)
from .moments import MomentState, ObservationMoments, integrate_moments
from .predict import PredictiveDraws, QuantileBand, predictive_samples, quantile_bands
from .reaction_network import (
    ObservationSeries,
    SIRParameters,
    SystemState,
    Trajectory,
    build_sir,
    sample_at,
    simulate_trajectory,
)

__version__ = "0.1.0"
