"""Geodesic and parallel-transport ODE integration.

A batched adaptive Dormand-Prince 4(5) stepper drives both the geodesic
equation and the first-order transport equation. Batching matters: the
shooting log map integrates one geodesic per Newton column and the test
suite runs hundreds of cases, so Christoffel symbols are evaluated for all
batch members in single vectorized metric calls.

Error control is per batch member (worst case governs the step), so each
trajectory individually meets the requested tolerance.
"""
from __future__ import annotations

import numpy as np

from ..errors import ChartExit, SingularMetric, ToleranceNotMet
from .manifold import ManifoldDescriptor

DEFAULT_TOL = 1e-10

# Dormand-Prince coefficients
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


def fd_step(x: np.ndarray, scale: float = 1e-5) -> np.ndarray:
    """Central-difference step for metric derivatives: scale * (1 + |x|)."""
    return scale * (1.0 + np.linalg.norm(np.asarray(x, dtype=float), axis=-1))


def metric_derivatives(M: ManifoldDescriptor, xs: np.ndarray) -> np.ndarray:
    """dg[..., k, i, j] = d g_ij / d x^k by central differences, batched."""
    xs = np.asarray(xs, dtype=float)
    d = M.dim
    h = fd_step(xs)[..., None]  # (...,1)
    eye = np.eye(d)
    plus = xs[..., None, :] + h[..., None] * eye  # (..., d, d)
    minus = xs[..., None, :] - h[..., None] * eye
    stacked = np.concatenate([plus, minus], axis=-2)  # (..., 2d, d)
    g = M.metric(stacked)  # (..., 2d, d, d)
    gp, gm = g[..., :d, :, :], g[..., d:, :, :]
    return (gp - gm) / (2.0 * h[..., None, None])


def christoffel_batch(M: ManifoldDescriptor, xs: np.ndarray) -> np.ndarray:
    """Gamma^i_{jk} for a batch of points, shape (..., d, d, d)."""
    xs = np.asarray(xs, dtype=float)
    g = M.metric(xs)
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise SingularMetric("metric not invertible along trajectory") from exc
    dg = metric_derivatives(M, xs)
    # term[l, j, k] = g_{jl,k} + g_{kl,j} - g_{jk,l}
    term = (
        np.einsum("...kjl->...ljk", dg)
        + np.einsum("...jkl->...ljk", dg)
        - np.einsum("...ljk->...ljk", dg)
    )
    return 0.5 * np.einsum("...il,...ljk->...ijk", ginv, term)


def _geodesic_rhs(M: ManifoldDescriptor, state: np.ndarray, n_extra: int) -> np.ndarray:
    """state: (B, (2 + n_extra) * d) = [x, v, w_1..w_extra] per batch member."""
    d = M.dim
    x = state[:, :d]
    v = state[:, d : 2 * d]
    gamma = christoffel_batch(M, x)
    acc = -np.einsum("bijk,bj,bk->bi", gamma, v, v)
    out = np.empty_like(state)
    out[:, :d] = v
    out[:, d : 2 * d] = acc
    for m in range(n_extra):
        w = state[:, (2 + m) * d : (3 + m) * d]
        out[:, (2 + m) * d : (3 + m) * d] = -np.einsum("bijk,bj,bk->bi", gamma, v, w)
    return out


def _integrate(M, state0, t_final, rtol, atol, n_extra, check_chart=True,
               max_steps=20000):
    """Batched DP45 from t=0 to t=t_final (t_final may be negative)."""
    state = np.array(state0, dtype=float)
    if t_final == 0.0:
        return state
    sign = 1.0 if t_final > 0 else -1.0
    span = abs(t_final)
    t = 0.0
    h = min(0.1 * span, span) * sign
    k1 = _geodesic_rhs(M, state, n_extra)
    d = M.dim
    for _ in range(max_steps):
        if abs(h) < 1e-14 * span:
            raise ToleranceNotMet("step size underflow in geodesic integrator")
        if (t + h - t_final) * sign > 0:
            h = t_final - t
        ks = [k1]
        for i in range(1, 7):
            y = state + h * sum(a * k for a, k in zip(_A[i], ks))
            ks.append(_geodesic_rhs(M, y, n_extra))
        y5 = state + h * sum(b * k for b, k in zip(_B5, ks) if b != 0.0)
        err_vec = h * sum((b5 - b4) * k for b5, b4, k in zip(_B5, _B4, ks))
        scale = atol + rtol * np.maximum(np.abs(state), np.abs(y5))
        ratio = np.minimum(np.abs(err_vec) / scale, 1e30)
        err = np.sqrt(np.mean(ratio**2, axis=1))  # per batch member
        worst = float(np.max(err)) if err.size else 0.0
        if worst <= 1.0:
            t += h
            state = y5
            k1 = ks[6]  # FSAL
            if check_chart:
                ok = np.asarray(M.chart_domain(state[:, :d]))
                if not np.all(ok):
                    raise ChartExit(
                        f"geodesic left chart of '{M.name}' at t={t:.6g}"
                    )
            if t == t_final:
                return state
        factor = 0.9 * (worst + 1e-16) ** -0.2
        h = h * min(5.0, max(0.2, factor))
    raise ToleranceNotMet("geodesic integrator exceeded max step count")


def integrate_geodesics(
    M: ManifoldDescriptor,
    xs: np.ndarray,
    vs: np.ndarray,
    t: float = 1.0,
    rtol: float = DEFAULT_TOL,
    atol: float = DEFAULT_TOL,
    return_velocity: bool = False,
):
    """Integrate a batch of geodesics: xs, vs of shape (B, d)."""
    M.require_full_chart("geodesic integration")
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    vs = np.atleast_2d(np.asarray(vs, dtype=float))
    state0 = np.concatenate([xs, vs], axis=1)
    out = _integrate(M, state0, t, rtol, atol, n_extra=0)
    d = M.dim
    if return_velocity:
        return out[:, :d], out[:, d:]
    return out[:, :d]


def integrate_transport(
    M: ManifoldDescriptor,
    x: np.ndarray,
    v_geo: np.ndarray,
    ws: np.ndarray,
    rtol: float = DEFAULT_TOL,
    atol: float = DEFAULT_TOL,
):
    """Transport rows of ws along the geodesic t -> exp(x, t v_geo), t in [0,1].

    Returns (endpoint, transported ws) with ws of shape (K, d).
    """
    M.require_full_chart("parallel transport integration")
    x = np.asarray(x, dtype=float)
    v_geo = np.asarray(v_geo, dtype=float)
    ws = np.atleast_2d(np.asarray(ws, dtype=float))
    d = M.dim
    state0 = np.concatenate([x, v_geo, ws.ravel()])[None, :]
    out = _integrate(M, state0, 1.0, rtol, atol, n_extra=ws.shape[0])[0]
    return out[:d], out[2 * d :].reshape(ws.shape)


def integrate_transport_batch(
    M: ManifoldDescriptor,
    xs: np.ndarray,
    v_geos: np.ndarray,
    ws: np.ndarray,
    rtol: float = DEFAULT_TOL,
    atol: float = DEFAULT_TOL,
):
    """Transport one vector per batch member along its own geodesic.

    xs, v_geos, ws all (B, d); returns (endpoints, transported), each (B, d).
    """
    M.require_full_chart("parallel transport integration")
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    v_geos = np.atleast_2d(np.asarray(v_geos, dtype=float))
    ws = np.atleast_2d(np.asarray(ws, dtype=float))
    d = M.dim
    state0 = np.concatenate([xs, v_geos, ws], axis=1)
    out = _integrate(M, state0, 1.0, rtol, atol, n_extra=1)
    return out[:, :d], out[:, 2 * d :]


def geodesic_checkpoints(
    M: ManifoldDescriptor,
    x: np.ndarray,
    v: np.ndarray,
    ts: np.ndarray,
    rtol: float = DEFAULT_TOL,
    atol: float = DEFAULT_TOL,
):
    """Positions and velocities at increasing checkpoint times ts >= 0."""
    xs, vs = [], []
    cur_x = np.asarray(x, dtype=float)
    cur_v = np.asarray(v, dtype=float)
    t_prev = 0.0
    for t in ts:
        seg = t - t_prev
        if seg != 0.0:
            p, w = integrate_geodesics(
                M, cur_x[None], cur_v[None], seg, rtol, atol, return_velocity=True
            )
            cur_x, cur_v = p[0], w[0]
        xs.append(cur_x.copy())
        vs.append(cur_v.copy())
        t_prev = t
    return np.array(xs), np.array(vs)
