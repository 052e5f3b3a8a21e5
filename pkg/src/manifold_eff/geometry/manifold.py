"""Chart-based manifold descriptors and tangent-space containers.

A manifold is described by one canonical chart. ``metric_at`` maps chart
coordinates to the symmetric positive-definite metric matrix in that chart
and must accept batched input of shape (..., chart_dim). Closed-form maps,
when present, take precedence over the generic ODE pipeline and must agree
with it (this is tested, not assumed).

The sphere is the one built-in whose canonical chart is an ambient
embedding (unit vectors in R^3 with the tangent-plane constraint), so its
``chart_dim`` exceeds its intrinsic ``dim``; the generic finite-difference
machinery refuses such descriptors and the closed forms are used instead.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import DimensionMismatch, OutOfChart, SingularMetric


@dataclass(frozen=True)
class ClosedForms:
    """Optional exact maps for a manifold, all batched over leading axes.

    exp(x, v) -> point; log(x, y) -> tangent comps at x;
    transport(x, y, v) -> comps at y; distance(x, y) -> reals;
    sectional_curvature: constant K, or None when not constant.
    """

    exp: Optional[Callable] = None
    log: Optional[Callable] = None
    transport: Optional[Callable] = None
    distance: Optional[Callable] = None
    sectional_curvature: Optional[float] = None
    # per-transverse-direction factor f(r) of the normal-chart volume
    # density theta(v) = f(|v|)^(dim-1), for isotropic manifolds
    volume_density: Optional[Callable] = None


@dataclass(frozen=True, eq=False)
class ManifoldDescriptor:
    name: str
    dim: int
    metric_at: Callable[[np.ndarray], np.ndarray]
    chart_domain: Callable[[np.ndarray], np.ndarray]
    cut_locus_test: Callable[[np.ndarray, np.ndarray], np.ndarray]
    closed_forms: Optional[ClosedForms] = None
    chart_dim: Optional[int] = None
    # orthonormal tangent frame (chart_dim, dim); default built from Cholesky
    frame_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    # radius within which exp/log round trips are numerically safe (tests)
    injectivity_radius: float = np.inf

    def __post_init__(self):
        if self.chart_dim is None:
            object.__setattr__(self, "chart_dim", self.dim)

    @property
    def is_ambient(self) -> bool:
        return self.chart_dim != self.dim

    def require_full_chart(self, what: str) -> None:
        if self.is_ambient:
            raise DimensionMismatch(
                f"{what} needs a full-dimensional chart; manifold "
                f"'{self.name}' uses an ambient representation "
                f"(chart_dim={self.chart_dim} > dim={self.dim})"
            )

    def metric(self, coords: np.ndarray) -> np.ndarray:
        g = np.asarray(self.metric_at(np.asarray(coords, dtype=float)))
        return g

    def check_in_chart(self, coords: np.ndarray) -> None:
        ok = np.asarray(self.chart_domain(np.asarray(coords, dtype=float)))
        if not np.all(ok):
            raise OutOfChart(f"point outside chart of '{self.name}': {coords}")

    def frame(self, coords: np.ndarray) -> np.ndarray:
        """Orthonormal tangent frame B at ``coords``: chart comps = B @ on-comps.

        Columns satisfy B^T G B = I. Deterministic: Cholesky of the metric
        for full charts, manifold-specific construction otherwise.
        """
        coords = np.asarray(coords, dtype=float)
        if self.frame_fn is not None:
            return self.frame_fn(coords)
        g = self.metric(coords)
        try:
            L = np.linalg.cholesky(g)
        except np.linalg.LinAlgError as exc:
            raise SingularMetric(f"metric not SPD at {coords}") from exc
        return np.linalg.solve(L, np.eye(self.dim)).T

    def to_frame(self, coords: np.ndarray, comps: np.ndarray) -> np.ndarray:
        """Chart tangent components -> orthonormal-frame components."""
        B = self.frame(coords)
        g = self.metric(coords)
        return np.asarray(comps) @ (g @ B)

    def from_frame(self, coords: np.ndarray, on_comps: np.ndarray) -> np.ndarray:
        """Orthonormal-frame components -> chart tangent components."""
        B = self.frame(coords)
        return np.asarray(on_comps) @ B.T

    def inner(self, coords: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        g = self.metric(coords)
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return np.einsum("...i,...ij,...j->...", u, g, v)

    def norm(self, coords: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.sqrt(np.maximum(self.inner(coords, v, v), 0.0))


@dataclass(frozen=True, eq=False)
class Point:
    manifold: ManifoldDescriptor
    coords: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coords, dtype=float))
        if c.shape != (self.manifold.chart_dim,):
            raise DimensionMismatch(
                f"point coords shape {c.shape} != ({self.manifold.chart_dim},)"
            )
        object.__setattr__(self, "coords", c)
        self.manifold.check_in_chart(c)


@dataclass(frozen=True, eq=False)
class Tangent:
    base: Point
    comps: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.comps, dtype=float))
        if c.shape != (self.base.manifold.chart_dim,):
            raise DimensionMismatch(
                f"tangent comps shape {c.shape} != ({self.base.manifold.chart_dim},)"
            )
        object.__setattr__(self, "comps", c)

    @property
    def manifold(self) -> ManifoldDescriptor:
        return self.base.manifold

    def norm(self) -> float:
        return float(self.manifold.norm(self.base.coords, self.comps))


def point(M: ManifoldDescriptor, coords) -> Point:
    return Point(M, np.asarray(coords, dtype=float))


def tangent(M: ManifoldDescriptor, coords, comps) -> Tangent:
    return Tangent(point(M, coords), np.asarray(comps, dtype=float))
