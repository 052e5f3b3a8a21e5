"""Curvature-corrected Cramer-Rao bounds and convolution/LAM references.

All matrices live in the orthonormal frame at the base point. The
curvature correction contracts the covariance-curvature operator R(.)
against the inverse information:

    one observation: dpsi (G^-1 - (1/3){R(G^-1) G^-1 + G^-1 R(G^-1)}) dpsi*
    n observations:  replace R(G^-1) by R(n^-1 G^-1) = n^-1 R(G^-1)
    asymptotic:      dpsi G^-1 dpsi*,

the last also being the convolution-theorem Gaussian covariance and the
local-asymptotic-minimax reference E[Z (x) Z].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, SingularInformation
from ..geometry.curvature import CurvatureOperator, curvature_operator
from ..geometry.manifold import ManifoldDescriptor
from ..models.gaussian import FisherInfo


@dataclass
class BoundReport:
    label: str
    bound_matrix: np.ndarray
    empirical_cov: np.ndarray
    gap_min_eig: float
    n: int
    slack: float = 0.0

    @property
    def satisfied(self) -> bool:
        return bool(self.gap_min_eig >= -self.slack)

    def to_dict(self) -> dict:
        def row_major(mat):
            mat = np.asarray(mat)
            return {"rows": mat.shape[0], "cols": mat.shape[1],
                    "data": mat.ravel().tolist()}

        return {
            "label": self.label,
            "n": self.n,
            "bound_matrix": row_major(self.bound_matrix),
            "empirical_cov": row_major(self.empirical_cov),
            "gap_min_eig": self.gap_min_eig,
            "slack": self.slack,
            "satisfied": self.satisfied,
        }


def _ginv(G) -> np.ndarray:
    mat = G.matrix if isinstance(G, FisherInfo) else np.asarray(G, dtype=float)
    if isinstance(G, FisherInfo) and G.singular:
        raise SingularInformation("Fisher information flagged singular")
    if np.min(np.linalg.eigvalsh(0.5 * (mat + mat.T))) < 1e-12:
        raise SingularInformation("Fisher information not invertible")
    return np.linalg.inv(mat)


def crlb_curved(G, M: ManifoldDescriptor, x, dpsi: np.ndarray | None = None,
                op: CurvatureOperator | None = None) -> np.ndarray:
    """Single-observation curvature-corrected lower bound."""
    Ginv = _ginv(G)
    if op is None:
        op = curvature_operator(M, x)
    RG = op.apply(Ginv)
    core = Ginv - (RG @ Ginv + Ginv @ RG) / 3.0
    if dpsi is None:
        dpsi = np.eye(core.shape[0])
    out = dpsi @ core @ dpsi.T
    return 0.5 * (out + out.T)


def crlb_n(G, M: ManifoldDescriptor, x, n: int,
           dpsi: np.ndarray | None = None,
           op: CurvatureOperator | None = None) -> np.ndarray:
    """Bound for the covariance of sqrt(n)-scaled error; linearity of R in C."""
    if n < 1:
        raise ValueError("n must be >= 1")
    Ginv = _ginv(G)
    if op is None:
        op = curvature_operator(M, x)
    RG = op.apply(Ginv) / n  # R(n^-1 G^-1) = n^-1 R(G^-1)
    core = Ginv - (RG @ Ginv + Ginv @ RG) / 3.0
    if dpsi is None:
        dpsi = np.eye(core.shape[0])
    out = dpsi @ core @ dpsi.T
    return 0.5 * (out + out.T)


def crlb_asymptotic(G, dpsi: np.ndarray | None = None) -> np.ndarray:
    Ginv = _ginv(G)
    if dpsi is None:
        dpsi = np.eye(Ginv.shape[0])
    out = dpsi @ Ginv @ dpsi.T
    return 0.5 * (out + out.T)


def convolution_reference(G, dpsi: np.ndarray | None = None) -> np.ndarray:
    """Optimal limiting covariance for regular estimators (= crlb_asymptotic)."""
    return crlb_asymptotic(G, dpsi)


def lam_reference(G, dpsi: np.ndarray | None = None) -> np.ndarray:
    """E[Z (x) Z] for Z ~ N(0, dpsi G^-1 dpsi*): the LAM right-hand side."""
    return convolution_reference(G, dpsi)


def psd_gap(empirical: np.ndarray, bound: np.ndarray) -> float:
    """Minimum eigenvalue of (empirical - bound) after symmetrization."""
    empirical = np.asarray(empirical, dtype=float)
    bound = np.asarray(bound, dtype=float)
    if empirical.shape != bound.shape or empirical.ndim != 2:
        raise DimensionMismatch(
            f"shape mismatch: {empirical.shape} vs {bound.shape}"
        )
    diff = empirical - bound
    diff = 0.5 * (diff + diff.T)
    return float(np.min(np.linalg.eigvalsh(diff)))


def bootstrap_gap_se(residuals: np.ndarray, bound: np.ndarray, n_boot: int,
                     seed) -> float:
    """Bootstrap SE of psd_gap over replicate residual vectors (rows)."""
    from ..models.gaussian import make_rng

    rng = make_rng(seed)
    residuals = np.atleast_2d(residuals)
    reps = len(residuals)
    gaps = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(0, reps, size=reps)
        sub = residuals[idx]
        cov = sub.T @ sub / reps
        gaps[b] = psd_gap(cov, bound)
    return float(np.std(gaps, ddof=1))
