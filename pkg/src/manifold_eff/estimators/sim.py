"""Single-index model on the unit hemisphere: scores and efficiency bound.

Model: Y = g(beta' X) + eps with E[eps | X] = 0, homoscedastic Gaussian
noise by default, and the index beta constrained to the hemisphere
{|beta| = 1, beta_1 >= 0}. Tangent directions h satisfy h' beta = 0; the
constraint-respecting perturbation is the great-circle exponential map.

Raw score along h:        S(h)   = (eps / s^2) g'(u) X' h
Efficient score along h:  Seff(h) = (eps / s^2) g'(u) (X - zeta(u))' h
with u = beta' X and zeta(u) = E[X | beta' X = u]. The efficiency bound is
the inverse of E[Seff Seff'] expressed in an orthonormal tangent basis.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import NotTangent, SingularEfficientInformation
from ..geometry.builtin import householder_basis
from ..models.gaussian import make_rng

_TANGENT_TOL = 1e-10


def sim_tangent_basis(beta: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of {h: h' beta = 0}, shape (d, d-1)."""
    beta = np.asarray(beta, dtype=float)
    if abs(np.linalg.norm(beta) - 1.0) > 1e-8:
        raise NotTangent("beta must be a unit vector")
    return householder_basis(beta)


def sim_exp(beta: np.ndarray, h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """Great-circle perturbation cos(t|h|) beta + sin(t|h|) h/|h|."""
    beta = np.asarray(beta, dtype=float)
    h = np.asarray(h, dtype=float)
    if abs(float(h @ beta)) > _TANGENT_TOL * max(1.0, np.linalg.norm(h)):
        raise NotTangent(f"h' beta = {h @ beta:.2e} is not tangent")
    nh = np.linalg.norm(h)
    if t * nh == 0.0:
        return beta.copy()
    return np.cos(t * nh) * beta + np.sin(t * nh) * h / nh


@dataclass
class SimData:
    """Covariates, responses, and the data-generating ingredients."""

    X: np.ndarray
    Y: np.ndarray
    beta: np.ndarray
    link: Callable[[np.ndarray], np.ndarray]
    dlink: Callable[[np.ndarray], np.ndarray]
    sigma2: float
    zeta: Optional[Callable[[np.ndarray], np.ndarray]] = None  # u -> (n, d)

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.Y = np.asarray(self.Y, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        if abs(np.linalg.norm(self.beta) - 1.0) > 1e-12:
            raise NotTangent("beta must have unit norm")
        if self.beta[0] < 0:
            raise NotTangent("beta must lie in the hemisphere (beta_1 >= 0)")

    @property
    def index(self) -> np.ndarray:
        return self.X @ self.beta

    @property
    def residuals(self) -> np.ndarray:
        return self.Y - self.link(self.index)


def simulate_sim(n: int, beta: np.ndarray, link, dlink, sigma: float, seed,
                 x_low=-1.0, x_high=1.0,
                 zeta: Optional[Callable] = None) -> SimData:
    """Draws with X uniform on a box (bounded covariates) and Gaussian noise."""
    beta = np.asarray(beta, dtype=float)
    d = len(beta)
    rng = make_rng(seed)
    X = rng.uniform(x_low, x_high, size=(n, d))
    eps = rng.normal(scale=sigma, size=n)
    Y = link(X @ beta) + eps
    if zeta is None:
        zeta = uniform_box_zeta(beta, x_low, x_high)
    return SimData(X=X, Y=Y, beta=beta, link=link, dlink=dlink,
                   sigma2=sigma**2, zeta=zeta)


def uniform_box_zeta(beta: np.ndarray, low: float = -1.0,
                     high: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """Exact zeta(u) = E[X | beta'X = u] for X uniform on a box (d = 2).

    Conditional on the index, X is uniform on the chord of the box cut by
    the hyperplane beta'x = u, so zeta is the chord midpoint.
    """
    beta = np.asarray(beta, dtype=float)
    d = len(beta)
    if d != 2:
        raise ValueError("closed-form box zeta implemented for d = 2")
    perp = sim_tangent_basis(beta)[:, 0]

    def zeta(u: np.ndarray) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        # X = u beta + s perp with box constraints low <= X_k <= high
        s_lo = np.full_like(u, -np.inf)
        s_hi = np.full_like(u, np.inf)
        for k in range(2):
            b, p = beta[k], perp[k]
            if abs(p) < 1e-14:
                continue
            lo = (low - u * b) / p
            hi = (high - u * b) / p
            s_lo = np.maximum(s_lo, np.minimum(lo, hi))
            s_hi = np.minimum(s_hi, np.maximum(lo, hi))
        mid = 0.5 * (s_lo + s_hi)
        return u[:, None] * beta[None, :] + mid[:, None] * perp[None, :]

    return zeta


def estimate_zeta_nw(X: np.ndarray, beta: np.ndarray,
                     bandwidth: float | None = None):
    """Nadaraya-Watson estimate of zeta(u) = E[X | beta'X = u].

    Gaussian kernel on the index with a Silverman plug-in bandwidth by
    default; the realistic alternative to supplying the oracle zeta.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    beta = np.asarray(beta, dtype=float)
    u_train = X @ beta
    if bandwidth is None:
        bandwidth = 1.06 * np.std(u_train) * len(u_train) ** (-1 / 5)

    def zeta(u: np.ndarray) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty((len(u), X.shape[1]))
        block = 2048
        for lo in range(0, len(u), block):
            du = (u[lo : lo + block, None] - u_train[None, :]) / bandwidth
            w = np.exp(-0.5 * du * du)
            w /= w.sum(axis=1, keepdims=True)
            out[lo : lo + block] = w @ X
        return out

    return zeta


def sim_score(data: SimData, h: np.ndarray) -> np.ndarray:
    """Raw per-observation score along tangent direction h (Gaussian noise)."""
    h = np.asarray(h, dtype=float)
    if abs(float(h @ data.beta)) > _TANGENT_TOL * max(1.0, np.linalg.norm(h)):
        raise NotTangent("h is not tangent to the hemisphere at beta")
    u = data.index
    return data.residuals / data.sigma2 * data.dlink(u) * (data.X @ h)


def sim_efficient_score(data: SimData, h: np.ndarray) -> np.ndarray:
    """Efficient per-observation score: centered covariates X - zeta(u)."""
    h = np.asarray(h, dtype=float)
    if abs(float(h @ data.beta)) > _TANGENT_TOL * max(1.0, np.linalg.norm(h)):
        raise NotTangent("h is not tangent to the hemisphere at beta")
    if data.zeta is None:
        raise ValueError("efficient score needs zeta (supply or estimate)")
    u = data.index
    centered = data.X - data.zeta(u)
    return data.residuals / data.sigma2 * data.dlink(u) * (centered @ h)


def sim_efficient_score_matrix(data: SimData) -> np.ndarray:
    """Per-observation efficient-score vectors in tangent-basis coordinates."""
    basis = sim_tangent_basis(data.beta)
    u = data.index
    centered = data.X - data.zeta(u)
    core = (data.residuals / data.sigma2 * data.dlink(u))[:, None]
    return core * (centered @ basis)


def sim_efficiency_bound(data: SimData) -> np.ndarray:
    """Inverse of E[Seff (x) Seff] in sim_tangent_basis coordinates.

    With oracle nuisances the conditional noise variance is sigma2 exactly,
    so the population information reduces to
    (1/sigma2) E[g'(u)^2 B'(X - zeta)(X - zeta)' B].
    """
    basis = sim_tangent_basis(data.beta)
    u = data.index
    centered = (data.X - data.zeta(u)) @ basis
    gp2 = data.dlink(u) ** 2
    info = np.einsum("n,ni,nj->ij", gp2, centered, centered) / (
        len(u) * data.sigma2
    )
    info = 0.5 * (info + info.T)
    if np.min(np.linalg.eigvalsh(info)) < 1e-10:
        raise SingularEfficientInformation(
            "efficient-score information is numerically singular"
        )
    return np.linalg.inv(info)
