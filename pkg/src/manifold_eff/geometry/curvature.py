"""Christoffel symbols, curvature tensor, and the covariance-curvature operator.

The 4-index coefficients a[i,j,k,l] are half the second derivatives of the
pulled-back metric in a normal chart centered at the base point; contracting
them against a covariance matrix C gives the operator

    R(C)_ij = -3 * sum_kl a[i,j,k,l] C[k,l],

which is linear in C and reproduces E[<R(delta, v) v, delta>] for delta with
covariance C. Normal coordinates are built numerically: orthonormal frame B
at x, pullback of the metric through n -> exp(x, B n), then fourth-order
finite differences (plain second-order stencils are too noisy for the
1e-5 symmetry checks downstream of the numeric exp).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegeneratePlane, DimensionMismatch, NotPSD
from .manifold import ManifoldDescriptor, Point, Tangent
from .ode import christoffel_batch
from .maps import exp_c, _D1_OFFSETS, _D1_WEIGHTS

# outer step for normal-coordinate second derivatives: eps^(1/4) * scale,
# scale tuned so FD rounding from the inner exp Jacobian stays below 1e-6
_EPS4 = float(np.finfo(float).eps) ** 0.25
_NORMAL_STEP = 40.0 * _EPS4
_JAC_INNER_STEP = 1e-4


def christoffel(M: ManifoldDescriptor, x) -> np.ndarray:
    """Gamma^i_{jk} at a single point (chart coordinates)."""
    M.require_full_chart("Christoffel symbols")
    coords = x.coords if isinstance(x, Point) else np.asarray(x, dtype=float)
    M.check_in_chart(coords)
    return christoffel_batch(M, coords[None])[0]


def _christoffel_derivatives(M: ManifoldDescriptor, x: np.ndarray) -> np.ndarray:
    """dGamma[m, i, j, k] = d Gamma^i_{jk} / d x^m by central differences."""
    d = M.dim
    h = 5e-4 * (1.0 + np.linalg.norm(x))
    eye = np.eye(d)
    pts = np.concatenate([x + h * eye, x - h * eye], axis=0)
    gam = christoffel_batch(M, pts)
    return (gam[:d] - gam[d:]) / (2.0 * h)


def curvature_components(M: ManifoldDescriptor, x: np.ndarray) -> np.ndarray:
    """R[l, i, j, k] with R(u, v) w = u^i v^j w^k R^l_{ijk} in chart coords."""
    M.require_full_chart("curvature tensor")
    x = np.asarray(x, dtype=float)
    gam = christoffel_batch(M, x[None])[0]
    dgam = _christoffel_derivatives(M, x)
    R = (
        np.einsum("iljk->lijk", dgam)
        - np.einsum("jlik->lijk", dgam)
        + np.einsum("lim,mjk->lijk", gam, gam)
        - np.einsum("ljm,mik->lijk", gam, gam)
    )
    return R


def curvature_tensor(M: ManifoldDescriptor, x, u, v, w) -> np.ndarray:
    """R(u, v) w as chart tangent components at x."""
    coords = x.coords if isinstance(x, Point) else np.asarray(x, dtype=float)
    uu = u.comps if isinstance(u, Tangent) else np.asarray(u, dtype=float)
    vv = v.comps if isinstance(v, Tangent) else np.asarray(v, dtype=float)
    ww = w.comps if isinstance(w, Tangent) else np.asarray(w, dtype=float)
    R = curvature_components(M, coords)
    return np.einsum("lijk,i,j,k->l", R, uu, vv, ww)


def sectional_curvature(M: ManifoldDescriptor, x, u, v,
                        degeneracy_tol: float = 1e-10) -> float:
    """<R(v, u) u, v> / (|u|^2 |v|^2 - <u, v>^2)."""
    coords = x.coords if isinstance(x, Point) else np.asarray(x, dtype=float)
    uu = u.comps if isinstance(u, Tangent) else np.asarray(u, dtype=float)
    vv = v.comps if isinstance(v, Tangent) else np.asarray(v, dtype=float)
    nu2 = float(M.inner(coords, uu, uu))
    nv2 = float(M.inner(coords, vv, vv))
    uv = float(M.inner(coords, uu, vv))
    denom = nu2 * nv2 - uv * uv
    if denom <= degeneracy_tol * max(nu2 * nv2, 1e-300):
        raise DegeneratePlane("u and v are (nearly) linearly dependent")
    Rvuu = curvature_tensor(M, coords, vv, uu, uu)
    num = float(M.inner(coords, Rvuu, vv))
    return num / denom


# ---------------------------------------------------------------------------
# normal coordinates and a_{ij,kl}
# ---------------------------------------------------------------------------

def normal_metric_fn(M: ManifoldDescriptor, x: np.ndarray):
    """Pullback metric in the normal chart at x: n (dim,) -> (dim, dim)."""
    x = np.asarray(x, dtype=float)
    B = M.frame(x)  # (chart_dim, dim)
    d = M.dim

    def g_hat(n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        delta = _JAC_INNER_STEP * (1.0 + np.linalg.norm(n))
        # J columns: 4th-order FD of n -> chart(exp(x, B n))
        offs = (_D1_OFFSETS[:, None, None] * delta) * np.eye(d)[None, :, :]
        vs = (n[None, None, :] + offs) @ B.T  # (4, d, chart_dim) tangent comps
        pts = exp_c(M, x, vs.reshape(-1, M.chart_dim)).reshape(4, d, M.chart_dim)
        J = np.einsum("s,sjc->cj", _D1_WEIGHTS, pts) / delta  # (chart_dim, d)
        y = exp_c(M, x, n @ B.T)
        G = M.metric(y)
        return J.T @ G @ J

    return g_hat


@dataclass(frozen=True)
class CurvatureOperator:
    """4-index normal-coordinate coefficients a[i,j,k,l] at a base point."""

    base: np.ndarray
    coeffs: np.ndarray

    def apply(self, C: np.ndarray) -> np.ndarray:
        C = np.asarray(C, dtype=float)
        d = self.coeffs.shape[0]
        if C.shape != (d, d):
            raise DimensionMismatch(f"C must be {d}x{d}, got {C.shape}")
        if np.max(np.abs(C - C.T)) > 1e-10 * max(1.0, np.max(np.abs(C))):
            raise NotPSD("C must be symmetric")
        if np.min(np.linalg.eigvalsh(0.5 * (C + C.T))) < -1e-10 * max(
            1.0, float(np.max(np.abs(C)))
        ):
            raise NotPSD("C must be positive semi-definite")
        out = -3.0 * np.einsum("ijkl,kl->ij", self.coeffs, C)
        return 0.5 * (out + out.T)

    def bianchi_residual(self) -> float:
        a = self.coeffs
        s = a + np.einsum("ikjl->ijkl", a) + np.einsum("iljk->ijkl", a)
        return float(np.max(np.abs(s)))


def curvature_operator(M: ManifoldDescriptor, x,
                       step: float = _NORMAL_STEP) -> CurvatureOperator:
    """a[i,j,k,l] = 0.5 * d^2 ghat_ij / dn_k dn_l at the origin of the normal chart."""
    coords = x.coords if isinstance(x, Point) else np.asarray(x, dtype=float)
    d = M.dim
    if M.closed_forms is not None and M.closed_forms.sectional_curvature == 0.0:
        return CurvatureOperator(base=np.array(coords), coeffs=np.zeros((d,) * 4))
    g_hat = normal_metric_fn(M, coords)
    h = step * (1.0 + np.linalg.norm(coords))
    hess = np.zeros((d, d, d, d))  # [i, j, k, l]
    g0 = g_hat(np.zeros(d))
    eye = np.eye(d)
    # diagonal: 4th-order five-point second derivative
    for k in range(d):
        gm2 = g_hat(-2 * h * eye[k])
        gm1 = g_hat(-h * eye[k])
        gp1 = g_hat(h * eye[k])
        gp2 = g_hat(2 * h * eye[k])
        hess[:, :, k, k] = (-gm2 + 16 * gm1 - 30 * g0 + 16 * gp1 - gp2) / (12 * h * h)
    # mixed: nested 4th-order first derivatives
    for k in range(d):
        for l in range(k + 1, d):
            acc = np.zeros((d, d))
            for wa, sa in zip(_D1_WEIGHTS, _D1_OFFSETS):
                for wb, sb in zip(_D1_WEIGHTS, _D1_OFFSETS):
                    acc += wa * wb * g_hat(h * (sa * eye[k] + sb * eye[l]))
            hess[:, :, k, l] = acc / (h * h)
            hess[:, :, l, k] = hess[:, :, k, l]
    a = 0.5 * hess
    # enforce the exact symmetries a_{ij,kl} = a_{ji,kl} = a_{ij,lk} = a_{kl,ij}
    a = 0.5 * (a + np.einsum("jikl->ijkl", a))
    a = 0.5 * (a + np.einsum("ijlk->ijkl", a))
    a = 0.5 * (a + np.einsum("klij->ijkl", a))
    return CurvatureOperator(base=np.array(coords), coeffs=a)


def curvature_of_covariance(M: ManifoldDescriptor, x, C: np.ndarray,
                            op: CurvatureOperator | None = None) -> np.ndarray:
    """R(C) at x in the orthonormal normal frame; linear and symmetric in C."""
    if op is None:
        op = curvature_operator(M, x)
    return op.apply(C)


def curvature_of_covariance_intrinsic(M: ManifoldDescriptor, x,
                                      C: np.ndarray) -> np.ndarray:
    """R(C) from the curvature tensor directly: R(C)_bc = R_abcd C_ad.

    Independent route used to reconcile the coordinate form of R(C) with its
    intrinsic definition; orthonormal frame at x.
    """
    coords = x.coords if isinstance(x, Point) else np.asarray(x, dtype=float)
    d = M.dim
    B = M.frame(coords)
    G = M.metric(coords)
    R = curvature_components(M, coords)  # chart indices
    # R_on[a,b,c,e] = < R(B_a, B_b) B_c , B_e >
    Rup = np.einsum("lijk,ia,jb,kc->labc", R, B, B, B)
    R_on = np.einsum("labc,lm,me->abce", Rup, G, B)
    out = np.einsum("abce,ae->bc", R_on, np.asarray(C, dtype=float))
    return 0.5 * (out + out.T)
