"""Sample Frechet mean, Hodges thresholded estimator, influence operators.

The Frechet mean is computed by the Karcher fixed-point iteration
mu <- Exp_mu(step * mean_i Log_mu X_i) (step 1.0 is the exact fixed-point
map). Influence values follow the asymptotically-linear representation:
IF_i = A^-1 Log_mu X_i where A is the expected Hessian of the halved
squared distance, estimated either

* 'jacobian' mode: by averaging per-observation base-point Jacobians of
  the log map (fourth-order covariant differences), or
* 'curvature' mode: by the curvature expansion A = I - (1/3) R(Sigma).

Both are expressed in the orthonormal frame at the base point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonConvexRegion, NotConverged, SingularMean
from ..geometry.curvature import curvature_operator
from ..geometry.manifold import ManifoldDescriptor
from ..geometry.maps import (
    _D1_OFFSETS,
    _D1_WEIGHTS,
    distance_c,
    exp_c,
    log_c,
    parallel_transport_c,
)

_JAC_STEP = 2e-3


@dataclass
class InfluenceSample:
    """Per-observation influence values, orthonormal frame at ``base``."""

    base: np.ndarray
    rows: np.ndarray  # (n, dim)

    def covariance(self) -> np.ndarray:
        return self.rows.T @ self.rows / len(self.rows)


@dataclass
class FrechetResult:
    estimate: np.ndarray
    iterations: int
    final_grad_norm: float
    influence_matrix: np.ndarray
    per_obs_if: InfluenceSample


def _initial_guess(M: ManifoldDescriptor, sample: np.ndarray) -> np.ndarray:
    guess = sample.mean(axis=0)
    if M.name.startswith("sphere") and M.is_ambient:
        nrm = np.linalg.norm(guess)
        if nrm > 1e-8:
            return guess / nrm
        return sample[0].copy()
    if np.all(np.asarray(M.chart_domain(guess))):
        return guess
    return sample[0].copy()


def _check_convex_ball(M: ManifoldDescriptor, sample: np.ndarray) -> None:
    """Positively curved manifolds only: sample must sit in a convex ball."""
    if not np.isfinite(M.injectivity_radius):
        return
    limit = 0.5 * M.injectivity_radius  # pairwise diameter bound (sphere: pi/2)
    n = len(sample)
    if n <= 4096:
        dmax = 0.0
        block = 512
        for i in range(0, n, block):
            d = distance_c(M, sample[i : i + block, None, :], sample[None, :, :])
            dmax = max(dmax, float(np.max(d)))
    else:
        center = _initial_guess(M, sample)
        dmax = 2.0 * float(np.max(distance_c(M, center, sample)))
    if dmax >= limit:
        raise NonConvexRegion(
            f"sample diameter {dmax:.3f} exceeds convex-ball bound {limit:.3f}"
        )


def karcher_solve(M: ManifoldDescriptor, sample: np.ndarray, *, step: float = 1.0,
                  tol: float = 1e-9, max_iter: int = 500,
                  init: np.ndarray | None = None,
                  tangent_term=None) -> tuple[np.ndarray, int, float]:
    """Iterate mu <- Exp_mu(step * mean term) until the mean term is small.

    ``tangent_term(mu) -> (n, chart_dim)`` defaults to the log map of the
    sample; AIPW reuses this solver with its augmented moment term.
    """
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    if tangent_term is None:
        def tangent_term(mu):
            return log_c(M, mu, sample)

    mu = np.asarray(init, dtype=float) if init is not None \
        else _initial_guess(M, sample)
    for it in range(1, max_iter + 1):
        mean_v = tangent_term(mu).mean(axis=0)
        grad_norm = float(M.norm(mu, mean_v))
        if grad_norm < tol:
            return mu, it, grad_norm
        mu = exp_c(M, mu, step * mean_v)
    raise NotConverged(
        f"Karcher iteration: gradient norm {grad_norm:.3e} > tol after "
        f"{max_iter} iterations"
    )


def influence_matrix(M: ManifoldDescriptor, x: np.ndarray, sample: np.ndarray,
                     mode: str = "curvature",
                     weights: np.ndarray | None = None) -> np.ndarray:
    """Estimate A = E[Hess (1/2) d^2(., X)](x), orthonormal frame at x."""
    x = np.asarray(x, dtype=float)
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    n = len(sample)
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights) / n
    if mode == "curvature":
        v_on = log_c(M, x, sample) @ (M.metric(x) @ M.frame(x))
        sigma = np.einsum("n,ni,nj->ij", w, v_on, v_on)
        op = curvature_operator(M, x)
        return np.eye(M.dim) - op.apply(sigma) / 3.0
    if mode == "jacobian":
        B = M.frame(x)
        delta = _JAC_STEP * (1.0 + float(np.mean(distance_c(M, x, sample))))
        cols = []
        for j in range(M.dim):
            acc = np.zeros(M.chart_dim)
            for wt, s in zip(_D1_WEIGHTS, _D1_OFFSETS):
                base = exp_c(M, x, s * delta * B[:, j])
                logs = log_c(M, base, sample)
                mean_log = np.einsum("n,nc->c", w, logs)
                acc = acc + wt * parallel_transport_c(M, base, x, mean_log)
            cols.append(M.to_frame(x, -acc / delta))  # Hessian = -grad of field
        return np.column_stack(cols)
    raise ValueError(f"unknown influence mode '{mode}'")


def influence_frechet(sample, M: ManifoldDescriptor, mu0,
                      mode: str = "jacobian") -> InfluenceSample:
    """Per-observation influence values A^-1 Log_mu0 X_i at a fixed base point."""
    mu0 = np.asarray(mu0, dtype=float)
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    A = influence_matrix(M, mu0, sample, mode=mode)
    if abs(np.linalg.det(A)) < 1e-12:
        raise SingularMean("averaged influence Jacobian is singular")
    v_on = log_c(M, mu0, sample) @ (M.metric(mu0) @ M.frame(mu0))
    rows = np.linalg.solve(A, v_on.T).T
    return InfluenceSample(base=mu0, rows=rows)


def frechet_mean(sample, M: ManifoldDescriptor, *, step: float = 1.0,
                 tol: float = 1e-9, max_iter: int = 500,
                 init: np.ndarray | None = None,
                 influence_mode: str = "curvature",
                 check_convexity: bool = True) -> FrechetResult:
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    if check_convexity:
        _check_convex_ball(M, sample)
    mu, iters, grad = karcher_solve(
        M, sample, step=step, tol=tol, max_iter=max_iter, init=init
    )
    A = influence_matrix(M, mu, sample, mode=influence_mode)
    if abs(np.linalg.det(A)) < 1e-12:
        raise SingularMean("averaged influence Jacobian is singular")
    v_on = log_c(M, mu, sample) @ (M.metric(mu) @ M.frame(mu))
    rows = np.linalg.solve(A, v_on.T).T
    return FrechetResult(
        estimate=mu,
        iterations=iters,
        final_grad_norm=grad,
        influence_matrix=A,
        per_obs_if=InfluenceSample(base=mu, rows=rows),
    )


def frechet_estimate(sample, M: ManifoldDescriptor, **opts) -> np.ndarray:
    """Karcher mean only (no influence diagnostics): the harness hot path."""
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    mu, _, _ = karcher_solve(M, sample, **opts)
    return mu


def hodges(sample, M: ManifoldDescriptor, reference, *,
           threshold_exponent: float = 0.25, **opts) -> np.ndarray:
    """Frechet mean thresholded back to ``reference`` inside radius n^-1/4."""
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    reference = np.asarray(reference, dtype=float)
    mu = frechet_estimate(sample, M, **opts)
    n = len(sample)
    if distance_c(M, mu, reference) > n ** (-threshold_exponent):
        return mu
    return reference.copy()
