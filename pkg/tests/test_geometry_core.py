"""Christoffel symbols, metric invariants, chart/domain errors."""
import numpy as np
import pytest

from manifold_eff.errors import DimensionMismatch, OutOfChart, SingularMetric
from manifold_eff.geometry import (
    ManifoldDescriptor,
    christoffel,
    euclidean,
    hyperbolic_plane,
    sphere_polar,
)

from conftest import random_point


def test_christoffel_euclidean_zero():
    M = euclidean(2)
    gam = christoffel(M, np.array([0.7, -1.3]))
    assert np.max(np.abs(gam)) < 1e-9


@pytest.mark.parametrize("x0,y0", [(0.0, 1.0), (0.4, 0.8), (-1.2, 2.5)])
def test_christoffel_halfplane_closed_form(x0, y0):
    # hand-computed half-plane symbols: Gx_xy = Gx_yx = -1/y, Gy_xx = 1/y,
    # Gy_yy = -1/y, all others zero
    M = hyperbolic_plane()
    gam = christoffel(M, np.array([x0, y0]))
    expect = np.zeros((2, 2, 2))
    expect[0, 0, 1] = expect[0, 1, 0] = -1.0 / y0
    expect[1, 0, 0] = 1.0 / y0
    expect[1, 1, 1] = -1.0 / y0
    assert np.max(np.abs(gam - expect)) < 1e-7


def test_christoffel_sphere_polar_closed_form():
    # textbook polar-chart symbols at the equator and off it:
    # Gth_phph = -sin th cos th, Gph_thph = Gph_phth = cot th
    M = sphere_polar()
    for th in (np.pi / 2, 1.1, 2.0):
        gam = christoffel(M, np.array([th, 0.3]))
        expect = np.zeros((2, 2, 2))
        expect[0, 1, 1] = -np.sin(th) * np.cos(th)
        expect[1, 0, 1] = expect[1, 1, 0] = 1.0 / np.tan(th)
        assert np.max(np.abs(gam - expect)) < 1e-7


def test_christoffel_symmetric_in_lower_indices(manifolds):
    rng = np.random.default_rng(7)
    for name, M in manifolds.items():
        if M.is_ambient:
            continue
        for _ in range(5):
            gam = christoffel(M, random_point(M, rng))
            assert np.max(np.abs(gam - np.swapaxes(gam, 1, 2))) < 1e-12, name


def test_metric_spd_on_random_points(manifolds):
    rng = np.random.default_rng(11)
    for name, M in manifolds.items():
        pts = np.array([random_point(M, rng) for _ in range(50)])
        g = M.metric(pts)
        assert np.max(np.abs(g - np.swapaxes(g, -1, -2))) < 1e-12, name
        assert np.min(np.linalg.eigvalsh(g)) > 0.0, name


def test_out_of_chart_raises():
    M = hyperbolic_plane()
    with pytest.raises(OutOfChart):
        christoffel(M, np.array([0.0, -1.0]))


def test_singular_metric_raises():
    def degenerate(x):
        x = np.asarray(x, float)
        g = np.zeros(x.shape[:-1] + (2, 2))
        g[..., 0, 0] = 1.0
        g[..., 1, 1] = 0.0  # rank deficient
        return g

    M = ManifoldDescriptor(
        name="degenerate",
        dim=2,
        metric_at=degenerate,
        chart_domain=lambda x: np.ones(np.asarray(x).shape[:-1], dtype=bool),
        cut_locus_test=lambda x, y: np.zeros(
            np.broadcast(np.asarray(x), np.asarray(y)).shape[:-1], dtype=bool
        ),
    )
    with pytest.raises(SingularMetric):
        christoffel(M, np.array([0.0, 0.0]))


def test_ambient_chart_refuses_fd_machinery():
    from manifold_eff.geometry import sphere

    with pytest.raises(DimensionMismatch):
        christoffel(sphere(), np.array([1.0, 0.0, 0.0]))


def test_frame_is_metric_orthonormal(manifolds):
    rng = np.random.default_rng(3)
    for name, M in manifolds.items():
        for _ in range(5):
            x = random_point(M, rng)
            B = M.frame(x)
            G = M.metric(x)
            assert np.max(np.abs(B.T @ G @ B - np.eye(M.dim))) < 1e-10, name
            # round trip chart <-> frame components
            on = rng.normal(size=M.dim)
            v = M.from_frame(x, on)
            assert np.max(np.abs(M.to_frame(x, v) - on)) < 1e-10, name
