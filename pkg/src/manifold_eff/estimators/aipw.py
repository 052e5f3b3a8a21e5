"""AIPW estimation of the Frechet mean under missing-at-random data.

Observation = (Z, R, X) with X observed iff R = 1 and P(R=1 | Z, X) = pi(Z).
The estimator solves the empirical augmented moment equation

    mean_i [ (R_i / pi_i) Log_mu X_i - (R_i / pi_i - 1) m(Z_i) ] = 0,

where m(Z) estimates E[Log_mu X | Z, R=1]. Nuisances are either supplied
(oracles for tests) or fitted: logistic regression for pi, a coordinatewise
linear smoother on Z for m, the latter refit at each outer iteration since
the log map moves with mu.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize

from ..errors import PositivityViolation, SingularMean
from ..geometry.manifold import ManifoldDescriptor
from ..geometry.maps import log_c
from .frechet import InfluenceSample, influence_matrix, karcher_solve


@dataclass
class MarObservation:
    R: int
    X: Optional[np.ndarray]  # present iff R == 1
    Z: np.ndarray

    def __post_init__(self):
        if bool(self.R) != (self.X is not None):
            raise ValueError("X must be present exactly when R == 1")


@dataclass
class MarData:
    """Columnar MAR dataset; X rows for missing observations are NaN."""

    R: np.ndarray
    X: np.ndarray
    Z: np.ndarray

    @classmethod
    def from_observations(cls, obs: Sequence[MarObservation],
                          chart_dim: int) -> "MarData":
        n = len(obs)
        R = np.array([int(o.R) for o in obs])
        Z = np.atleast_2d(np.array([np.atleast_1d(o.Z) for o in obs], dtype=float))
        X = np.full((n, chart_dim), np.nan)
        for i, o in enumerate(obs):
            if o.R:
                X[i] = o.X
        return cls(R=R, X=X, Z=Z)


def fit_logistic(Z: np.ndarray, R: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Maximum-likelihood logistic regression of R on [1, Z]."""
    Zd = np.column_stack([np.ones(len(Z)), Z])
    y = np.asarray(R, dtype=float)

    def nll(beta):
        eta = Zd @ beta
        return float(np.sum(np.logaddexp(0.0, eta) - y * eta))

    def grad(beta):
        p = 1.0 / (1.0 + np.exp(-(Zd @ beta)))
        return Zd.T @ (p - y)

    res = minimize(nll, np.zeros(Zd.shape[1]), jac=grad, method="BFGS")
    beta = res.x

    def predict(Znew):
        Zn = np.column_stack([np.ones(len(Znew)), np.atleast_2d(Znew)])
        return 1.0 / (1.0 + np.exp(-(Zn @ beta)))

    return predict


def _linear_smoother(Z: np.ndarray, V: np.ndarray, Z_all: np.ndarray) -> np.ndarray:
    """Coordinatewise least-squares fit of V on [1, Z]; predictions at Z_all."""
    D = np.column_stack([np.ones(len(Z)), Z])
    coef, *_ = np.linalg.lstsq(D, V, rcond=None)
    D_all = np.column_stack([np.ones(len(Z_all)), Z_all])
    return D_all @ coef


@dataclass
class AipwResult:
    estimate: np.ndarray
    iterations: int
    final_grad_norm: float
    if_sample: InfluenceSample
    pi_values: np.ndarray


def aipw_frechet(
    obs: Union[Sequence[MarObservation], MarData],
    M: ManifoldDescriptor,
    pi_model: Union[str, Callable, np.ndarray] = "logistic",
    m_model: Union[str, Callable] = "linear",
    *,
    pi_floor: float = 1e-3,
    step: float = 1.0,
    tol: float = 1e-9,
    max_iter: int = 500,
    init: np.ndarray | None = None,
    influence_mode: str = "jacobian",
) -> AipwResult:
    """Solve the augmented moment equation and return per-observation IF values.

    ``pi_model``: "logistic" (fit), a callable Z -> probabilities, or an array.
    ``m_model``: "linear" (refit each iteration), "zero", or a callable
    (Z, mu, M) -> (n, chart_dim) tangent components at mu.
    """
    data = obs if isinstance(obs, MarData) else MarData.from_observations(
        obs, chart_dim=M.chart_dim
    )
    R = np.asarray(data.R, dtype=float)
    Z = np.atleast_2d(np.asarray(data.Z, dtype=float))
    if Z.shape[0] != len(R):
        Z = Z.T
    X = np.asarray(data.X, dtype=float)
    observed = R > 0.5
    X_obs = X[observed]

    if callable(pi_model):
        pi = np.asarray(pi_model(Z), dtype=float)
    elif isinstance(pi_model, str) and pi_model == "logistic":
        pi = fit_logistic(Z, R)(Z)
    else:
        pi = np.asarray(pi_model, dtype=float)
    if np.any(pi < pi_floor):
        raise PositivityViolation(
            f"propensity below positivity floor {pi_floor}: min={pi.min():.3g}"
        )
    w = R / pi

    def moment_terms(mu):
        psi = np.zeros((len(R), M.chart_dim))
        logs = log_c(M, mu, X_obs)
        psi[observed] = w[observed, None] * logs
        if m_model == "zero":
            m_vals = np.zeros_like(psi)
        elif callable(m_model):
            m_vals = np.asarray(m_model(Z, mu, M), dtype=float)
        elif m_model == "linear":
            m_vals = _linear_smoother(Z[observed], logs, Z)
        else:
            raise ValueError(f"unknown m_model '{m_model}'")
        psi -= (w - 1.0)[:, None] * m_vals
        return psi

    mu, iters, grad = karcher_solve(
        M, X_obs, step=step, tol=tol, max_iter=max_iter, init=init,
        tangent_term=moment_terms,
    )
    # weights normalized so the average runs over all N observations
    A = influence_matrix(
        M, mu, X_obs, mode=influence_mode,
        weights=w[observed] * (observed.sum() / len(R)),
    )
    if abs(np.linalg.det(A)) < 1e-12:
        raise SingularMean("weighted influence Jacobian is singular")
    psi_on = moment_terms(mu) @ (M.metric(mu) @ M.frame(mu))
    rows = np.linalg.solve(A, psi_on.T).T
    return AipwResult(
        estimate=mu,
        iterations=iters,
        final_grad_norm=grad,
        if_sample=InfluenceSample(base=mu, rows=rows),
        pi_values=pi,
    )
