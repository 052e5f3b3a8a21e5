"""Fisher information for Riemannian Gaussian models.

Two independent routes:

* outer-product form  G = E[S (x) S]  via Monte Carlo or tangent-space
  quadrature;
* Hessian form  G = -E[Hess_theta log p(X; theta)]  with the covariant
  Hessian taken in normal coordinates at the center.

All matrices are expressed in the orthonormal frame at the model center.
"""
from __future__ import annotations

import numpy as np

from ..geometry.maps import distance_c, exp_c
from .gaussian import FisherInfo, RiemannianGaussian

_SINGULAR_EIG = 1e-8
_HESS_STEP = 3e-4


def fisher_information(model: RiemannianGaussian, mode: str = "quadrature",
                       n: int | None = None, seed=None) -> FisherInfo:
    """E[S (x) S] by quadrature (default) or Monte Carlo (mode='mc')."""
    if mode == "quadrature":
        V = model.nodes
        sec = np.einsum("n,ni,nj->ij", model.node_mass, V, V)
    elif mode == "mc":
        if n is None or seed is None:
            raise ValueError("mc mode requires n and seed")
        V = model.sample_on(n, seed)
        sec = V.T @ V / len(V)
    else:
        raise ValueError(f"unknown mode '{mode}'")
    G = sec / model.sigma**4
    G = 0.5 * (G + G.T)
    singular = bool(np.min(np.linalg.eigvalsh(G)) < _SINGULAR_EIG)
    return FisherInfo(base=model.center.copy(), matrix=G, singular=singular)


def fisher_information_hessian(model: RiemannianGaussian) -> FisherInfo:
    """-E[Hess log p] with the Hessian over the center in normal coordinates.

    The expectation over X uses the model's quadrature nodes; the Hessian is
    a plain second-difference stencil in the normal chart at the center.
    """
    M = model.manifold
    p = M.dim
    B = model.frame
    pts = model.node_points
    h = _HESS_STEP * (1.0 + np.linalg.norm(model.center))

    def neg_ll(n_vec):
        c = exp_c(M, model.center, B @ n_vec)
        d = distance_c(M, c, pts)
        return d * d / (2.0 * model.sigma**2)

    f0 = neg_ll(np.zeros(p))
    eye = np.eye(p)
    hess = np.empty((p, p, len(pts)))
    for i in range(p):
        fp = neg_ll(h * eye[i])
        fm = neg_ll(-h * eye[i])
        hess[i, i] = (fp - 2.0 * f0 + fm) / (h * h)
    for i in range(p):
        for j in range(i + 1, p):
            fpp = neg_ll(h * (eye[i] + eye[j]))
            fpm = neg_ll(h * (eye[i] - eye[j]))
            fmp = neg_ll(h * (-eye[i] + eye[j]))
            fmm = neg_ll(-h * (eye[i] + eye[j]))
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h * h)
    G = np.einsum("n,ijn->ij", model.node_mass, hess)
    G = 0.5 * (G + G.T)
    singular = bool(np.min(np.linalg.eigvalsh(G)) < _SINGULAR_EIG)
    return FisherInfo(base=model.center.copy(), matrix=G, singular=singular)
