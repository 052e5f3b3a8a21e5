"""Runnable invariant suite for a manifold: the `geometry check` CLI path."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ManifoldEffError
from .builtin import get_manifold
from .curvature import curvature_operator
from .manifold import ManifoldDescriptor
from .maps import (
    exp_c,
    geodesic_solve_c,
    log_c,
    ode_transport_c,
    parallel_transport_c,
    shooting_log_c,
)

_SAFE_RADIUS = {
    "euclidean": 3.0, "hyperbolic": 2.0, "sphere": 1.5,
    "sphere_polar": 0.45, "spd2": 1.5,
}


@dataclass
class CheckRow:
    name: str
    value: float
    tolerance: float
    passed: bool


def _safe_radius(M: ManifoldDescriptor) -> float:
    for key, val in _SAFE_RADIUS.items():
        if M.name.startswith(key):
            return val
    return min(1.0, 0.5 * M.injectivity_radius)


def _random_point(M: ManifoldDescriptor, rng) -> np.ndarray:
    name = M.name
    if name.startswith("euclidean"):
        return rng.uniform(-2.0, 2.0, size=M.dim)
    if name == "hyperbolic":
        return np.array([rng.uniform(-1.5, 1.5), rng.uniform(0.4, 2.5)])
    if name == "sphere":
        v = rng.normal(size=3)
        return v / np.linalg.norm(v)
    if name == "sphere_polar":
        return np.array([rng.uniform(0.6, np.pi - 0.6), rng.uniform(-1.2, 1.2)])
    if name == "spd2":
        return np.array([rng.uniform(0.7, 1.6), rng.uniform(-0.5, 0.5),
                         rng.uniform(0.7, 1.6)])
    raise ManifoldEffError(f"no random-point rule for manifold '{name}'")


def _random_tangent(M, x, rng, scale=1.0):
    on = rng.normal(size=M.dim)
    on *= scale * rng.uniform(0.2, 1.0) / np.linalg.norm(on)
    return M.from_frame(np.asarray(x, float), on)


def run_geometry_checks(name: str, cases: int = 100, seed: int = 0) -> list[CheckRow]:
    M = get_manifold(name)
    rng = np.random.default_rng(seed)
    radius = _safe_radius(M)
    rows: list[CheckRow] = []

    worst_spd = np.inf
    worst_round = 0.0
    worst_iso = 0.0
    for _ in range(cases):
        x = _random_point(M, rng)
        worst_spd = min(worst_spd, float(np.min(np.linalg.eigvalsh(M.metric(x)))))
        v = _random_tangent(M, x, rng, scale=radius)
        y = exp_c(M, x, v)
        back = log_c(M, x, y)
        worst_round = max(
            worst_round,
            float(np.max(np.abs(back - v)) / max(np.max(np.abs(v)), 1e-12)),
        )
        u = _random_tangent(M, x, rng)
        w = _random_tangent(M, x, rng)
        ut = parallel_transport_c(M, x, y, u)
        wt = parallel_transport_c(M, x, y, w)
        before = float(M.inner(x, u, w))
        after = float(M.inner(y, ut, wt))
        worst_iso = max(worst_iso, abs(after - before) / max(abs(before), 1e-9))
    rows.append(CheckRow("metric_min_eigenvalue", worst_spd, 0.0, worst_spd > 0))
    rows.append(CheckRow("exp_log_round_trip_rel", worst_round, 1e-7,
                         worst_round < 1e-7))
    rows.append(CheckRow("transport_isometry_rel", worst_iso, 1e-7,
                         worst_iso < 1e-7))

    if not M.is_ambient:
        worst_ode = 0.0
        n_ode = min(cases, 20)
        for _ in range(n_ode):
            x = _random_point(M, rng)
            v = _random_tangent(M, x, rng, scale=radius)
            y_cf = exp_c(M, x, v)
            y_ode = geodesic_solve_c(M, x, v, 1.0)
            worst_ode = max(worst_ode, float(np.max(np.abs(y_ode - y_cf))))
            v_sh = shooting_log_c(M, x, y_cf[None])[0]
            worst_ode = max(worst_ode, float(np.max(np.abs(v_sh - v))))
            w = _random_tangent(M, x, rng)
            wt_cf = parallel_transport_c(M, x, y_cf, w)
            wt_ode = ode_transport_c(M, x, y_cf, w)
            worst_ode = max(worst_ode, float(np.max(np.abs(wt_ode - wt_cf))))
        rows.append(CheckRow("closed_form_vs_ode_max_err", worst_ode, 1e-8,
                             worst_ode < 1e-8))
        op = curvature_operator(M, _random_point(M, rng))
        bia = op.bianchi_residual()
        rows.append(CheckRow("bianchi_residual", bia, 1e-5, bia < 1e-5))
        rng2 = np.random.default_rng(seed + 1)
        A1 = rng2.normal(size=(M.dim, M.dim))
        A2 = rng2.normal(size=(M.dim, M.dim))
        C1, C2 = A1 @ A1.T, A2 @ A2.T
        lin = float(np.max(np.abs(
            op.apply(2 * C1 + 3 * C2) - 2 * op.apply(C1) - 3 * op.apply(C2)
        )))
        rows.append(CheckRow("r_of_c_linearity", lin, 1e-9, lin < 1e-9))
    return rows


def format_check_table(rows: list[CheckRow]) -> str:
    width = max(len(r.name) for r in rows) + 2
    lines = [f"{'check':<{width}}{'value':>14}{'tolerance':>14}  status"]
    for r in rows:
        status = "pass" if r.passed else "FAIL"
        lines.append(
            f"{r.name:<{width}}{r.value:>14.3e}{r.tolerance:>14.3e}  {status}"
        )
    return "\n".join(lines)
