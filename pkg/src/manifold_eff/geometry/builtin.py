"""Built-in manifolds, each with one canonical chart and closed-form maps.

* ``euclidean(dim)``  -- flat R^dim.
* ``hyperbolic_plane()`` -- Poincare half-plane chart; closed forms routed
  through the hyperboloid model (curvature -1).
* ``sphere()`` -- unit S^2 in embedded coordinates (tangent-plane constraint).
* ``sphere_polar()`` -- S^2 in a polar chart; used to exercise the generic
  ODE pipeline on positive curvature since the embedded chart is ambient.
* ``spd2()`` -- 2x2 symmetric positive-definite matrices, affine-invariant
  metric, lower-triangular Cholesky chart.

All closed-form callables are batched over leading axes.
"""
from __future__ import annotations

import numpy as np

from .manifold import ClosedForms, ManifoldDescriptor

_SPHERE_CUT_MARGIN = 1e-6


def _sinhc(r):
    r = np.asarray(r, dtype=float)
    return np.where(np.abs(r) < 1e-8, 1.0 + r * r / 6.0,
                    np.sinh(r) / np.where(r == 0.0, 1.0, r))


def _sinc_pi(r):
    r = np.asarray(r, dtype=float)
    return np.where(np.abs(r) < 1e-8, 1.0 - r * r / 6.0,
                    np.sin(r) / np.where(r == 0.0, 1.0, r))


def householder_basis(b: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the hyperplane orthogonal to unit vector ``b``.

    Columns of the returned (d, d-1) matrix are the trailing columns of the
    Householder reflection mapping e1 -> b; deterministic in ``b``.
    """
    b = np.asarray(b, dtype=float)
    d = b.shape[0]
    if b[0] > 1.0 - 1e-12:
        return np.eye(d)[:, 1:]
    w = b.copy()
    w[0] -= 1.0
    H = np.eye(d) - 2.0 * np.outer(w, w) / (w @ w)
    return H[:, 1:]


# ---------------------------------------------------------------------------
# Euclidean
# ---------------------------------------------------------------------------

def euclidean(dim: int) -> ManifoldDescriptor:
    eye = np.eye(dim)

    def metric_at(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(eye, x.shape[:-1] + (dim, dim)).copy()

    forms = ClosedForms(
        exp=lambda x, v: np.asarray(x, float) + np.asarray(v, float),
        log=lambda x, y: np.asarray(y, float) - np.asarray(x, float),
        transport=lambda x, y, v: np.asarray(v, float).copy(),
        distance=lambda x, y: np.linalg.norm(
            np.asarray(y, float) - np.asarray(x, float), axis=-1
        ),
        sectional_curvature=0.0,
        volume_density=lambda r: np.ones_like(np.asarray(r, float)),
    )
    return ManifoldDescriptor(
        name=f"euclidean{dim}",
        dim=dim,
        metric_at=metric_at,
        chart_domain=lambda x: np.ones(np.asarray(x).shape[:-1], dtype=bool),
        cut_locus_test=lambda x, y: np.zeros(
            np.broadcast(np.asarray(x), np.asarray(y)).shape[:-1], dtype=bool
        ),
        closed_forms=forms,
    )


# ---------------------------------------------------------------------------
# Hyperbolic plane (half-plane chart, hyperboloid closed forms)
# ---------------------------------------------------------------------------

def _mdot(u, v):
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] - u[..., 2] * v[..., 2]


def _halfplane_to_hyperboloid(c):
    c = np.asarray(c, dtype=float)
    x, y = c[..., 0], c[..., 1]
    w = np.empty(c.shape[:-1] + (3,))
    w[..., 0] = (x * x + y * y - 1.0) / (2.0 * y)
    w[..., 1] = x / y
    w[..., 2] = (x * x + y * y + 1.0) / (2.0 * y)
    return w


def _hyperboloid_to_halfplane(w):
    w = np.asarray(w, dtype=float)
    denom = w[..., 2] - w[..., 0]
    y = 1.0 / denom
    x = w[..., 1] * y
    return np.stack([x, y], axis=-1)


def _halfplane_jac(c):
    """d(hyperboloid)/d(halfplane): shape (..., 3, 2)."""
    c = np.asarray(c, dtype=float)
    x, y = c[..., 0], c[..., 1]
    J = np.empty(c.shape[:-1] + (3, 2))
    J[..., 0, 0] = x / y
    J[..., 0, 1] = (y * y - x * x + 1.0) / (2.0 * y * y)
    J[..., 1, 0] = 1.0 / y
    J[..., 1, 1] = -x / (y * y)
    J[..., 2, 0] = x / y
    J[..., 2, 1] = (y * y - x * x - 1.0) / (2.0 * y * y)
    return J


def _push_tangent_to_hyperboloid(c, v):
    J = _halfplane_jac(c)
    return np.einsum("...ij,...j->...i", J, np.asarray(v, dtype=float))


def _pull_tangent_to_halfplane(w, u):
    """Tangent at hyperboloid point w (Minkowski-tangential) -> halfplane comps."""
    w = np.asarray(w, dtype=float)
    u = np.asarray(u, dtype=float)
    denom = w[..., 2] - w[..., 0]
    y = 1.0 / denom
    x = w[..., 1] * y
    dy = -(y * y) * (u[..., 2] - u[..., 0])
    dx = y * u[..., 1] - x * y * (u[..., 2] - u[..., 0])
    return np.stack([dx, dy], axis=-1)


def _hyp_exp(z, v):
    theta = np.sqrt(np.maximum(_mdot(v, v), 0.0))[..., None]
    small = theta < 1e-14
    unit = np.where(small, 0.0, v / np.where(small, 1.0, theta))
    return np.cosh(theta) * z + np.sinh(theta) * unit


def _hyp_dist(z, w):
    # 2 asinh(|w - z|_L / 2) is exact near the diagonal where acosh(-<z,w>) is not
    u = w - z
    return 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(_mdot(u, u), 0.0)))


def _hyp_log(z, w):
    c = np.clip(-_mdot(z, w), 1.0, None)
    d = _hyp_dist(z, w)
    q = w - c[..., None] * z
    s = np.sinh(d)
    fac = np.where(d < 1e-12, 1.0, d / np.where(s == 0.0, 1.0, s))
    return fac[..., None] * q


def _hyp_transport(z, w, v):
    u = _hyp_log(z, w)
    d = np.sqrt(np.maximum(_mdot(u, u), 0.0))
    small = d < 1e-14
    e = np.where(small[..., None], 0.0, u / np.where(small, 1.0, d)[..., None])
    a = _mdot(e, v)
    shift = (np.cosh(d) - 1.0)[..., None] * e + np.sinh(d)[..., None] * z
    return v + a[..., None] * shift


def hyperbolic_plane() -> ManifoldDescriptor:
    def metric_at(c):
        c = np.asarray(c, dtype=float)
        y = c[..., 1]
        g = np.zeros(c.shape[:-1] + (2, 2))
        g[..., 0, 0] = 1.0 / (y * y)
        g[..., 1, 1] = 1.0 / (y * y)
        return g

    def exp(xc, vc):
        z = _halfplane_to_hyperboloid(xc)
        v = _push_tangent_to_hyperboloid(xc, vc)
        return _hyperboloid_to_halfplane(_hyp_exp(z, v))

    def log(xc, yc):
        z = _halfplane_to_hyperboloid(xc)
        w = _halfplane_to_hyperboloid(yc)
        u = _hyp_log(z, w)
        return _pull_tangent_to_halfplane(z, u)

    def transport(xc, yc, vc):
        z = _halfplane_to_hyperboloid(xc)
        w = _halfplane_to_hyperboloid(yc)
        v = _push_tangent_to_hyperboloid(xc, vc)
        return _pull_tangent_to_halfplane(w, _hyp_transport(z, w, v))

    def distance(xc, yc):
        xc = np.asarray(xc, float)
        yc = np.asarray(yc, float)
        dx = yc[..., 0] - xc[..., 0]
        dy = yc[..., 1] - xc[..., 1]
        s = (dx * dx + dy * dy) / (4.0 * xc[..., 1] * yc[..., 1])
        return 2.0 * np.arcsinh(np.sqrt(np.maximum(s, 0.0)))

    forms = ClosedForms(
        exp=exp, log=log, transport=transport, distance=distance,
        sectional_curvature=-1.0,
        volume_density=_sinhc,
    )
    return ManifoldDescriptor(
        name="hyperbolic",
        dim=2,
        metric_at=metric_at,
        chart_domain=lambda c: np.asarray(c)[..., 1] > 0.0,
        cut_locus_test=lambda x, y: np.zeros(
            np.broadcast(np.asarray(x), np.asarray(y)).shape[:-1], dtype=bool
        ),
        closed_forms=forms,
    )


# ---------------------------------------------------------------------------
# Sphere (embedded chart)
# ---------------------------------------------------------------------------

def _sphere_exp(x, v):
    x = np.asarray(x, float)
    v = np.asarray(v, float)
    theta = np.linalg.norm(v, axis=-1, keepdims=True)
    small = theta < 1e-14
    unit = np.where(small, 0.0, v / np.where(small, 1.0, theta))
    w = np.cos(theta) * x + np.sin(theta) * unit
    return w / np.linalg.norm(w, axis=-1, keepdims=True)


def _sphere_dist(x, y):
    # 2 asin(chord / 2): accurate near the diagonal, exact up to the antipode
    chord = np.linalg.norm(y - x, axis=-1)
    return 2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0))


def _sphere_log(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    c = np.clip(np.sum(x * y, axis=-1), -1.0, 1.0)
    theta = _sphere_dist(x, y)
    q = y - c[..., None] * x
    nq = np.linalg.norm(q, axis=-1)
    fac = np.where(theta < 1e-12, 1.0, theta / np.where(nq == 0.0, 1.0, nq))
    return fac[..., None] * q


def _sphere_transport(x, y, v):
    x = np.asarray(x, float)
    v = np.asarray(v, float)
    u = _sphere_log(x, y)
    theta = np.linalg.norm(u, axis=-1)
    small = theta < 1e-14
    e = np.where(small[..., None], 0.0, u / np.where(small, 1.0, theta)[..., None])
    a = np.sum(e * v, axis=-1)
    shift = (np.cos(theta) - 1.0)[..., None] * e - np.sin(theta)[..., None] * x
    return v + a[..., None] * shift


def sphere() -> ManifoldDescriptor:
    def metric_at(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(3), x.shape[:-1] + (3, 3)).copy()

    def cut_locus(x, y):
        c = np.clip(np.sum(np.asarray(x, float) * np.asarray(y, float), axis=-1),
                    -1.0, 1.0)
        return np.arccos(c) >= np.pi - _SPHERE_CUT_MARGIN

    forms = ClosedForms(
        exp=_sphere_exp, log=_sphere_log, transport=_sphere_transport,
        distance=lambda x, y: _sphere_dist(
            np.asarray(x, float), np.asarray(y, float)
        ),
        sectional_curvature=1.0,
        volume_density=_sinc_pi,
    )
    return ManifoldDescriptor(
        name="sphere",
        dim=2,
        chart_dim=3,
        metric_at=metric_at,
        chart_domain=lambda x: np.abs(
            np.linalg.norm(np.asarray(x, float), axis=-1) - 1.0
        ) < 1e-8,
        cut_locus_test=cut_locus,
        closed_forms=forms,
        frame_fn=householder_basis,
        injectivity_radius=np.pi - _SPHERE_CUT_MARGIN,
    )


# ---------------------------------------------------------------------------
# Sphere (polar chart) -- full-dimensional chart for the ODE pipeline
# ---------------------------------------------------------------------------

def _polar_to_embedded(c):
    c = np.asarray(c, dtype=float)
    th, ph = c[..., 0], c[..., 1]
    return np.stack(
        [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1
    )


def _polar_jac(c):
    """d(embedded)/d(theta, phi): shape (..., 3, 2)."""
    c = np.asarray(c, dtype=float)
    th, ph = c[..., 0], c[..., 1]
    J = np.empty(c.shape[:-1] + (3, 2))
    J[..., 0, 0] = np.cos(th) * np.cos(ph)
    J[..., 0, 1] = -np.sin(th) * np.sin(ph)
    J[..., 1, 0] = np.cos(th) * np.sin(ph)
    J[..., 1, 1] = np.sin(th) * np.cos(ph)
    J[..., 2, 0] = -np.sin(th)
    J[..., 2, 1] = 0.0
    return J


def _embedded_to_polar(x):
    x = np.asarray(x, dtype=float)
    th = np.arccos(np.clip(x[..., 2], -1.0, 1.0))
    ph = np.arctan2(x[..., 1], x[..., 0])
    return np.stack([th, ph], axis=-1)


def sphere_polar(margin: float = 0.15) -> ManifoldDescriptor:
    def metric_at(c):
        c = np.asarray(c, dtype=float)
        th = c[..., 0]
        g = np.zeros(c.shape[:-1] + (2, 2))
        g[..., 0, 0] = 1.0
        g[..., 1, 1] = np.sin(th) ** 2
        return g

    def exp(xc, vc):
        x = _polar_to_embedded(xc)
        v = np.einsum("...ij,...j->...i", _polar_jac(xc), np.asarray(vc, float))
        return _embedded_to_polar(_sphere_exp(x, v))

    def log(xc, yc):
        x = _polar_to_embedded(xc)
        y = _polar_to_embedded(yc)
        u = _sphere_log(x, y)
        J = _polar_jac(xc)
        # pull back: solve J comps = u in least squares (u is tangential)
        JtJ = np.einsum("...ki,...kj->...ij", J, J)
        Jtu = np.einsum("...ki,...k->...i", J, u)
        return np.linalg.solve(JtJ, Jtu[..., None])[..., 0]

    def transport(xc, yc, vc):
        x = _polar_to_embedded(xc)
        y = _polar_to_embedded(yc)
        v = np.einsum("...ij,...j->...i", _polar_jac(xc), np.asarray(vc, float))
        u = _sphere_transport(x, y, v)
        J = _polar_jac(yc)
        JtJ = np.einsum("...ki,...kj->...ij", J, J)
        Jtu = np.einsum("...ki,...k->...i", J, u)
        return np.linalg.solve(JtJ, Jtu[..., None])[..., 0]

    def distance(xc, yc):
        return _sphere_dist(_polar_to_embedded(xc), _polar_to_embedded(yc))

    def domain(c):
        c = np.asarray(c, dtype=float)
        th = c[..., 0]
        return (th > margin) & (th < np.pi - margin) & (np.abs(c[..., 1]) < 4 * np.pi)

    def cut_locus(xc, yc):
        return distance(xc, yc) >= np.pi - _SPHERE_CUT_MARGIN

    forms = ClosedForms(
        exp=exp, log=log, transport=transport, distance=distance,
        sectional_curvature=1.0, volume_density=_sinc_pi,
    )
    return ManifoldDescriptor(
        name="sphere_polar",
        dim=2,
        metric_at=metric_at,
        chart_domain=domain,
        cut_locus_test=cut_locus,
        closed_forms=forms,
        injectivity_radius=np.pi - _SPHERE_CUT_MARGIN,
    )


# ---------------------------------------------------------------------------
# SPD(2), affine-invariant metric, Cholesky chart (l11, l21, l22)
# ---------------------------------------------------------------------------

def spd2_from_chart(c):
    c = np.asarray(c, dtype=float)
    l11, l21, l22 = c[..., 0], c[..., 1], c[..., 2]
    P = np.empty(c.shape[:-1] + (2, 2))
    P[..., 0, 0] = l11 * l11
    P[..., 0, 1] = l11 * l21
    P[..., 1, 0] = l11 * l21
    P[..., 1, 1] = l21 * l21 + l22 * l22
    return P


def chart_from_spd2(P):
    P = np.asarray(P, dtype=float)
    l11 = np.sqrt(P[..., 0, 0])
    l21 = P[..., 0, 1] / l11
    l22 = np.sqrt(np.maximum(P[..., 1, 1] - l21 * l21, 0.0))
    return np.stack([l11, l21, l22], axis=-1)


def spd2_tangent_to_sym(c, u):
    """Chart tangent comps -> symmetric matrix dP."""
    c = np.asarray(c, dtype=float)
    u = np.asarray(u, dtype=float)
    l11, l21, l22 = c[..., 0], c[..., 1], c[..., 2]
    u1, u2, u3 = u[..., 0], u[..., 1], u[..., 2]
    V = np.empty(np.broadcast(l11, u1).shape + (2, 2))
    V[..., 0, 0] = 2.0 * l11 * u1
    V[..., 0, 1] = l21 * u1 + l11 * u2
    V[..., 1, 0] = V[..., 0, 1]
    V[..., 1, 1] = 2.0 * l21 * u2 + 2.0 * l22 * u3
    return V


def spd2_sym_to_tangent(c, V):
    """Symmetric matrix dP -> chart tangent comps."""
    c = np.asarray(c, dtype=float)
    V = np.asarray(V, dtype=float)
    l11, l21, l22 = c[..., 0], c[..., 1], c[..., 2]
    a, b, d = V[..., 0, 0], V[..., 0, 1], V[..., 1, 1]
    u1 = a / (2.0 * l11)
    u2 = (b - l21 * u1) / l11
    u3 = (d - 2.0 * l21 * u2) / (2.0 * l22)
    return np.stack([u1, u2, u3], axis=-1)


def _sym_apply(P, fn):
    """fn applied to eigenvalues of batched symmetric matrices."""
    w, Q = np.linalg.eigh(P)
    fw = fn(w)
    return np.einsum("...ik,...k,...jk->...ij", Q, fw, Q)


def _sym_sqrt_and_inv_sqrt(P):
    w, Q = np.linalg.eigh(P)
    s = np.sqrt(w)
    root = np.einsum("...ik,...k,...jk->...ij", Q, s, Q)
    inv_root = np.einsum("...ik,...k,...jk->...ij", Q, 1.0 / s, Q)
    return root, inv_root


def spd2() -> ManifoldDescriptor:
    def metric_at(c):
        c = np.asarray(c, dtype=float)
        P = spd2_from_chart(c)
        Pinv = np.linalg.inv(P)
        # basis of coordinate tangents as symmetric matrices
        eye3 = np.eye(3)
        Vs = [spd2_tangent_to_sym(c, np.broadcast_to(eye3[k], c.shape))
              for k in range(3)]
        g = np.empty(c.shape[:-1] + (3, 3))
        for i in range(3):
            Ai = np.einsum("...ij,...jk->...ik", Pinv, Vs[i])
            for j in range(i, 3):
                Aj = np.einsum("...ij,...jk->...ik", Pinv, Vs[j])
                tr = np.einsum("...ij,...ji->...", Ai, Aj)
                g[..., i, j] = tr
                g[..., j, i] = tr
        return g

    def exp(xc, vc):
        P = spd2_from_chart(xc)
        V = spd2_tangent_to_sym(xc, vc)
        root, inv_root = _sym_sqrt_and_inv_sqrt(P)
        M = np.einsum("...ij,...jk,...kl->...il", inv_root, V, inv_root)
        M = 0.5 * (M + np.swapaxes(M, -1, -2))
        E = _sym_apply(M, np.exp)
        Q = np.einsum("...ij,...jk,...kl->...il", root, E, root)
        return chart_from_spd2(0.5 * (Q + np.swapaxes(Q, -1, -2)))

    def log(xc, yc):
        P = spd2_from_chart(xc)
        Q = spd2_from_chart(yc)
        root, inv_root = _sym_sqrt_and_inv_sqrt(P)
        M = np.einsum("...ij,...jk,...kl->...il", inv_root, Q, inv_root)
        M = 0.5 * (M + np.swapaxes(M, -1, -2))
        L = _sym_apply(M, np.log)
        V = np.einsum("...ij,...jk,...kl->...il", root, L, root)
        return spd2_sym_to_tangent(xc, 0.5 * (V + np.swapaxes(V, -1, -2)))

    def transport(xc, yc, vc):
        P = spd2_from_chart(xc)
        Q = spd2_from_chart(yc)
        V = spd2_tangent_to_sym(xc, vc)
        root, inv_root = _sym_sqrt_and_inv_sqrt(P)
        M = np.einsum("...ij,...jk,...kl->...il", inv_root, Q, inv_root)
        M = 0.5 * (M + np.swapaxes(M, -1, -2))
        Mroot = _sym_apply(M, np.sqrt)
        E = np.einsum("...ij,...jk,...kl->...il", root, Mroot, inv_root)
        W = np.einsum("...ij,...jk,...lk->...il", E, V, E)
        return spd2_sym_to_tangent(yc, 0.5 * (W + np.swapaxes(W, -1, -2)))

    def distance(xc, yc):
        P = spd2_from_chart(xc)
        Q = spd2_from_chart(yc)
        _, inv_root = _sym_sqrt_and_inv_sqrt(P)
        M = np.einsum("...ij,...jk,...kl->...il", inv_root, Q, inv_root)
        M = 0.5 * (M + np.swapaxes(M, -1, -2))
        w = np.linalg.eigvalsh(M)
        return np.sqrt(np.sum(np.log(w) ** 2, axis=-1))

    forms = ClosedForms(exp=exp, log=log, transport=transport, distance=distance)
    return ManifoldDescriptor(
        name="spd2",
        dim=3,
        metric_at=metric_at,
        chart_domain=lambda c: (np.asarray(c)[..., 0] > 0.0)
        & (np.asarray(c)[..., 2] > 0.0),
        cut_locus_test=lambda x, y: np.zeros(
            np.broadcast(np.asarray(x), np.asarray(y)).shape[:-1], dtype=bool
        ),
        closed_forms=forms,
    )


_BUILTINS = {
    "euclidean1": lambda: euclidean(1),
    "euclidean2": lambda: euclidean(2),
    "euclidean3": lambda: euclidean(3),
    "hyperbolic": hyperbolic_plane,
    "sphere": sphere,
    "sphere_polar": sphere_polar,
    "spd2": spd2,
}


def get_manifold(name: str) -> ManifoldDescriptor:
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise KeyError(
            f"unknown manifold '{name}'; available: {sorted(_BUILTINS)}"
        ) from None


def builtin_names():
    return sorted(_BUILTINS)
