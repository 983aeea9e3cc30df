from .likelihood import InitialCondition, Posterior, log_likelihood, log_posterior, predicted_moments
from .priors import PARAM_NAMES, ParameterPoint, ParamPrior, PriorSpec, log_prior
from .summary import PosteriorSummary, hpd_interval, map_estimate, r0_samples, summarize_chain
from .twalk import Chain, twalk, twalk_sample

__all__ = [
    "PARAM_NAMES",
    "Chain",
    "InitialCondition",
    "ParamPrior",
    "ParameterPoint",
    "Posterior",
    "PosteriorSummary",
    "PriorSpec",
    "hpd_interval",
    "log_likelihood",
    "log_posterior",
    "log_prior",
    "map_estimate",
    "predicted_moments",
    "r0_samples",
    "summarize_chain",
    "twalk",
    "twalk_sample",
]
