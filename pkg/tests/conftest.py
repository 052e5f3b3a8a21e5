import numpy as np
import pytest

from manifold_eff.geometry import (
    euclidean,
    hyperbolic_plane,
    spd2,
    sphere,
    sphere_polar,
)


def random_point(M, rng):
    """A random chart point comfortably inside the chart domain."""
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
        return np.array(
            [rng.uniform(0.7, 1.6), rng.uniform(-0.5, 0.5), rng.uniform(0.7, 1.6)]
        )
    raise ValueError(name)


def random_tangent(M, x, rng, scale=1.0):
    """Random tangent at x with metric norm <= scale (uniform direction)."""
    on = rng.normal(size=M.dim)
    on *= scale * rng.uniform(0.2, 1.0) / np.linalg.norm(on)
    return M.from_frame(np.asarray(x, float), on)


# safe radius keeping exp/log round trips and ODE runs well-conditioned
SAFE_RADIUS = {
    "euclidean1": 3.0,
    "euclidean2": 3.0,
    "euclidean3": 3.0,
    "hyperbolic": 2.0,
    "sphere": 1.5,
    "sphere_polar": 0.45,
    "spd2": 1.5,
}


@pytest.fixture(scope="session")
def manifolds():
    return {
        "euclidean2": euclidean(2),
        "hyperbolic": hyperbolic_plane(),
        "sphere": sphere(),
        "sphere_polar": sphere_polar(),
        "spd2": spd2(),
    }
