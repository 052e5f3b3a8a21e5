"""Exponential/logarithmic maps, parallel transport, and their differentials.

Closed forms are used when the manifold ships them; otherwise the geodesic
ODE pipeline takes over (``geodesic_solve`` for exp, a damped shooting
Newton for log, the transport ODE for parallel transport).

Array-level functions (suffix ``_c``) operate on raw chart coordinates and
broadcast over leading axes; thin wrappers expose the Point/Tangent API.

Differentials are returned as dim x dim matrices in orthonormal frames with
both frames anchored at the *first* argument point (the far frame is the
parallel transport of the near one), so they can be compared directly with
the identity and with curvature-series expansions:

* ``dexp(M, x, h)``     : differential of v -> exp(x, v) at h.
* ``dlog(M, x, y)``     : differential of y -> log(x, y).
* ``dlog_base(M, x, y)``: covariant derivative of the field mu -> log(mu, y)
  at mu = x (equals -I in flat space).
* ``frechet_hessian``   : Hessian of mu -> d(mu, y)^2 / 2, i.e. -dlog_base.
"""
from __future__ import annotations

import numpy as np

from ..errors import CutLocus, NoConvergence
from .manifold import ManifoldDescriptor, Point, Tangent
from .ode import DEFAULT_TOL, integrate_geodesics, integrate_transport

_JAC_STEP = 1e-3
# 4th-order central difference stencil for f'(0)
_D1_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_D1_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


# ---------------------------------------------------------------------------
# core maps, coordinate level
# ---------------------------------------------------------------------------

def geodesic_solve_c(M, x, v, t=1.0, rtol=DEFAULT_TOL, atol=DEFAULT_TOL):
    """Endpoint of the geodesic ODE from x with initial velocity v at time t."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    out = integrate_geodesics(M, x[None], v[None], t, rtol, atol)
    return out[0]


def exp_c(M: ManifoldDescriptor, x, v, rtol=DEFAULT_TOL, atol=DEFAULT_TOL):
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if M.closed_forms is not None and M.closed_forms.exp is not None:
        return M.closed_forms.exp(x, v)
    if x.ndim == 1 and v.ndim == 1:
        if not np.any(v):
            return x.copy()
        return geodesic_solve_c(M, x, v, 1.0, rtol, atol)
    xs, vs = np.broadcast_arrays(x, v)
    flat_x = xs.reshape(-1, M.dim)
    flat_v = vs.reshape(-1, M.dim)
    out = integrate_geodesics(M, flat_x, flat_v, 1.0, rtol, atol)
    return out.reshape(xs.shape)


def shooting_log_c(M, x, ys, rtol=DEFAULT_TOL, atol=DEFAULT_TOL,
                   max_iter=100, tol=1e-10):
    """Log map by damped Newton shooting on v -> exp(x, v) - y, batched over ys.

    Initial guess is the chart difference; Armijo backtracking on the chart
    residual norm, lockstep over the batch.
    """
    M.require_full_chart("shooting log map")
    x = np.asarray(x, dtype=float)
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    B, d = ys.shape
    xs = np.broadcast_to(x, (B, d)) if x.ndim == 1 else x
    vs = ys - xs

    def residual(vmat):
        return integrate_geodesics(M, xs, vmat, 1.0, rtol, atol) - ys

    res = residual(vs)
    res_norm = np.linalg.norm(res, axis=1)
    scale = tol * (1.0 + np.linalg.norm(ys - x, axis=1))
    for _ in range(max_iter):
        active = res_norm > scale
        if not np.any(active):
            return vs
        # finite-difference Jacobian columns for active cases, one batch solve
        idx = np.where(active)[0]
        na = idx.size
        delta = 1e-7 * (1.0 + np.linalg.norm(vs[idx], axis=1))
        pert = (vs[idx][:, None, :] + delta[:, None, None] * np.eye(d)).reshape(
            na * d, d
        )
        base_x = np.repeat(xs[idx], d, axis=0)
        ends = integrate_geodesics(M, base_x, pert, 1.0, rtol, atol)
        ends = ends.reshape(na, d, d)  # [case, column, coord]
        J = (ends - (res[idx] + ys[idx])[:, None, :]) / delta[:, None, None]
        J = np.swapaxes(J, 1, 2)  # J[case, coord, column]
        try:
            step = -np.linalg.solve(J, res[idx][..., :, None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise NoConvergence("singular shooting Jacobian") from exc
        # Armijo backtracking, lockstep over active cases
        alpha = np.ones(na)
        remaining = np.arange(na)
        new_vs = vs[idx].copy()
        new_res = res[idx].copy()
        new_norm = res_norm[idx].copy()
        for _bt in range(10):
            cand = vs[idx][remaining] + alpha[remaining, None] * step[remaining]
            r = integrate_geodesics(M, xs[idx][remaining], cand, 1.0, rtol, atol) \
                - ys[idx][remaining]
            rn = np.linalg.norm(r, axis=1)
            improved = rn <= (1.0 - 1e-4 * alpha[remaining]) * res_norm[idx][remaining]
            took = remaining[improved]
            new_vs[took] = cand[improved]
            new_res[took] = r[improved]
            new_norm[took] = rn[improved]
            remaining = remaining[~improved]
            if remaining.size == 0:
                break
            alpha[remaining] *= 0.5
        if remaining.size:
            raise NoConvergence("shooting backtracking stalled")
        vs[idx] = new_vs
        res[idx] = new_res
        res_norm[idx] = new_norm
    raise NoConvergence(
        f"shooting log did not converge within {max_iter} iterations"
    )


def log_c(M: ManifoldDescriptor, x, y, rtol=DEFAULT_TOL, atol=DEFAULT_TOL):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    cut = np.asarray(M.cut_locus_test(x, y))
    if np.any(cut):
        raise CutLocus(f"log map across cut locus on '{M.name}'")
    if M.closed_forms is not None and M.closed_forms.log is not None:
        return M.closed_forms.log(x, y)
    if x.ndim == 1 and y.ndim == 1:
        return shooting_log_c(M, x, y[None], rtol, atol)[0]
    xs, ys = np.broadcast_arrays(x, y)
    shape = xs.shape
    out = shooting_log_c(
        M, xs.reshape(-1, M.dim), ys.reshape(-1, M.dim), rtol, atol
    )
    return out.reshape(shape)


def parallel_transport_c(M: ManifoldDescriptor, x, y, v,
                         rtol=DEFAULT_TOL, atol=DEFAULT_TOL):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    cut = np.asarray(M.cut_locus_test(x, y))
    if np.any(cut):
        raise CutLocus(f"no unique minimizing geodesic on '{M.name}'")
    if M.closed_forms is not None and M.closed_forms.transport is not None:
        return M.closed_forms.transport(x, y, v)
    if x.ndim == 1 and y.ndim == 1:
        u = log_c(M, x, y, rtol, atol)
        ws = np.atleast_2d(v)
        _, out = integrate_transport(M, x, u, ws, rtol, atol)
        return out[0] if v.ndim == 1 else out
    raise NotImplementedError("batched ODE transport with varying endpoints")


def ode_transport_c(M, x, y, v, rtol=DEFAULT_TOL, atol=DEFAULT_TOL):
    """Transport via the ODE pipeline regardless of closed forms (for tests)."""
    u = (
        M.closed_forms.log(x, y)
        if M.closed_forms is not None and M.closed_forms.log is not None
        else shooting_log_c(M, x, np.asarray(y)[None], rtol, atol)[0]
    )
    ws = np.atleast_2d(np.asarray(v, dtype=float))
    _, out = integrate_transport(M, np.asarray(x, float), u, ws, rtol, atol)
    return out[0] if np.asarray(v).ndim == 1 else out


def distance_c(M: ManifoldDescriptor, x, y):
    if M.closed_forms is not None and M.closed_forms.distance is not None:
        return M.closed_forms.distance(np.asarray(x, float), np.asarray(y, float))
    v = log_c(M, x, y)
    return M.norm(np.asarray(x, float), v)


# ---------------------------------------------------------------------------
# differentials
# ---------------------------------------------------------------------------

def dexp(M: ManifoldDescriptor, x, h, step: float = _JAC_STEP) -> np.ndarray:
    """Differential of v -> exp(x, v) at h, orthonormal frames, pulled back to x."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    B = M.frame(x)
    d = M.dim
    delta = step * (1.0 + M.norm(x, h))
    y = exp_c(M, x, h)
    # batched evaluation of exp at the 4-point stencil per direction
    offsets = (_D1_OFFSETS[:, None, None] * delta) * B.T[None, :, :]  # (4, d, cd)
    vs = h[None, None, :] + offsets
    pts = exp_c(M, x, vs.reshape(-1, M.chart_dim))
    pts = pts.reshape(4, d, M.chart_dim)
    cols_chart = np.einsum("s,sjc->jc", _D1_WEIGHTS, pts) / delta  # tangents at y
    cols_at_x = parallel_transport_c(M, y, x, cols_chart)
    return np.column_stack([M.to_frame(x, c) for c in cols_at_x])


def dlog(M: ManifoldDescriptor, x, y, step: float = _JAC_STEP) -> np.ndarray:
    """Differential of y -> log(x, y); input frame at y is the transport of x's."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    B = M.frame(x)
    d = M.dim
    delta = step * (1.0 + float(distance_c(M, x, y)))
    frame_y = parallel_transport_c(M, x, y, B.T)  # rows are transported basis
    cols = []
    for j in range(d):
        pts = exp_c(M, y, np.outer(_D1_OFFSETS * delta, frame_y[j]))
        logs = log_c(M, x, pts)
        cols.append(M.to_frame(x, _D1_WEIGHTS @ logs / delta))
    return np.column_stack(cols)


def dlog_base(M: ManifoldDescriptor, x, y, step: float = _JAC_STEP) -> np.ndarray:
    """Covariant derivative of the field mu -> log(mu, y) at mu = x.

    Orthonormal frame at x; equals -I on flat manifolds.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    B = M.frame(x)
    d = M.dim
    delta = step * (1.0 + float(distance_c(M, x, y)))
    cols = []
    for j in range(d):
        bases = exp_c(M, x, np.outer(_D1_OFFSETS * delta, B[:, j]))
        acc = np.zeros(M.chart_dim)
        for w, b in zip(_D1_WEIGHTS, bases):
            u = log_c(M, b, y)
            acc = acc + w * parallel_transport_c(M, b, x, u)
        cols.append(M.to_frame(x, acc / delta))
    return np.column_stack(cols)


def frechet_hessian(M: ManifoldDescriptor, x, y, step: float = _JAC_STEP):
    """Hessian of mu -> d(mu, y)^2 / 2 at mu = x (identity on flat space)."""
    return -dlog_base(M, x, y, step)


# ---------------------------------------------------------------------------
# Point / Tangent wrappers
# ---------------------------------------------------------------------------

def geodesic_solve(M: ManifoldDescriptor, x: Point, v: Tangent, t: float,
                   rtol=DEFAULT_TOL, atol=DEFAULT_TOL) -> Point:
    return Point(M, geodesic_solve_c(M, x.coords, v.comps, t, rtol, atol))


def exp(M: ManifoldDescriptor, x: Point, v: Tangent) -> Point:
    if not np.any(v.comps):
        return Point(M, x.coords.copy())
    return Point(M, exp_c(M, x.coords, v.comps))


def log(M: ManifoldDescriptor, x: Point, y: Point) -> Tangent:
    return Tangent(x, log_c(M, x.coords, y.coords))


def parallel_transport(M: ManifoldDescriptor, x: Point, y: Point,
                       v: Tangent) -> Tangent:
    return Tangent(y, parallel_transport_c(M, x.coords, y.coords, v.comps))


def distance(M: ManifoldDescriptor, x: Point, y: Point) -> float:
    return float(distance_c(M, x.coords, y.coords))
