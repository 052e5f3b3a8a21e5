"""Local alternatives and transported estimator residuals."""
from __future__ import annotations

import numpy as np

from ..geometry.manifold import ManifoldDescriptor
from ..geometry.maps import exp_c, log_c, parallel_transport_c


def local_alternative(M: ManifoldDescriptor, theta, h, n: int) -> np.ndarray:
    """theta_{n,h} = Exp_theta(h / sqrt(n))."""
    theta = np.asarray(theta, dtype=float)
    h = np.asarray(h, dtype=float)
    if not np.any(h):
        return theta.copy()
    return exp_c(M, theta, h / np.sqrt(n))


def transported_residual(M: ManifoldDescriptor, psi_true_perturbed, psi_true,
                         psi_hat, n: int) -> np.ndarray:
    """Transport of sqrt(n) Log_{psi(theta_nh)} psi_hat back to psi(theta).

    Returned as chart tangent components at psi_true.
    """
    p = np.asarray(psi_true_perturbed, dtype=float)
    t = np.asarray(psi_true, dtype=float)
    e = np.asarray(psi_hat, dtype=float)
    resid = np.sqrt(n) * log_c(M, p, e)
    if np.array_equal(p, t):
        return resid
    return parallel_transport_c(M, p, t, resid)
