"""Estimators and influence operators on manifolds."""
from .frechet import (
    FrechetResult,
    InfluenceSample,
    frechet_estimate,
    frechet_mean,
    hodges,
    influence_frechet,
    influence_matrix,
    karcher_solve,
)
from .aipw import (
    AipwResult,
    MarData,
    MarObservation,
    aipw_frechet,
    fit_logistic,
)
from .sim import (
    SimData,
    estimate_zeta_nw,
    sim_efficiency_bound,
    sim_efficient_score,
    sim_efficient_score_matrix,
    sim_exp,
    sim_score,
    sim_tangent_basis,
    simulate_sim,
    uniform_box_zeta,
)

__all__ = [
    "FrechetResult", "InfluenceSample", "frechet_estimate", "frechet_mean",
    "hodges", "influence_frechet", "influence_matrix", "karcher_solve",
    "AipwResult", "MarData", "MarObservation", "aipw_frechet", "fit_logistic",
    "SimData", "estimate_zeta_nw", "sim_efficiency_bound",
    "sim_efficient_score",
    "sim_efficient_score_matrix", "sim_exp", "sim_score", "sim_tangent_basis",
    "simulate_sim", "uniform_box_zeta",
]
