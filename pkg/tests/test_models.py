"""Riemannian Gaussian models: density, score, sampler, Fisher, DQM, LAN."""
import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from manifold_eff.errors import ProposalUnbounded, SingularInformation
from manifold_eff.geometry import euclidean, hyperbolic_plane, spd2
from manifold_eff.models import (
    FisherInfo,
    RiemannianGaussian,
    dqm_residual,
    fisher_information,
    fisher_information_hessian,
    lan_replicates,
    make_rng,
)

MU_H = np.array([0.0, 1.0])


@pytest.fixture(scope="module")
def hyp_model():
    return RiemannianGaussian(hyperbolic_plane(), MU_H, 0.5)


# -- density ------------------------------------------------------------------

def test_log_density_at_center_is_minus_log_partition(hyp_model):
    assert np.isclose(
        hyp_model.log_density(MU_H), -hyp_model.log_partition, atol=1e-14
    )


def test_euclidean_log_density_classical():
    m = RiemannianGaussian(euclidean(2), np.array([0.5, -1.0]), 0.7)
    x = np.array([1.2, 0.3])
    d2 = np.sum((x - m.center) ** 2)
    expect = -np.log(2 * np.pi * 0.49) - d2 / (2 * 0.49)
    assert np.isclose(float(m.log_density(x)), expect, atol=1e-12)


def test_partition_matches_radial_quadrature(hyp_model):
    # closed-form oracle on H2: Z = 2 pi int sinh(r) exp(-r^2/2s^2) dr
    val, _ = quad(lambda r: np.sinh(r) * np.exp(-r * r / 0.5), 0, 40)
    assert np.isclose(hyp_model.log_partition, np.log(2 * np.pi * val),
                      atol=1e-9)


def test_density_integrates_to_one_on_chart(hyp_model):
    # independent oracle: adaptive 2-D quadrature over the half-plane chart
    f = lambda y, x: np.exp(hyp_model.log_density(np.array([x, y]))) / y**2
    val, _ = dblquad(f, -5, 5, 0.01, 10, epsabs=1e-6, epsrel=1e-6)
    assert abs(val - 1.0) < 1e-3


def test_partition_independent_of_center():
    M = hyperbolic_plane()
    m1 = RiemannianGaussian(M, np.array([0.0, 1.0]), 0.5)
    m2 = RiemannianGaussian(M, np.array([0.8, 2.3]), 0.5)
    assert abs(m1.log_partition - m2.log_partition) < 1e-9


# -- score --------------------------------------------------------------------

def test_score_zero_at_center(hyp_model):
    assert np.allclose(hyp_model.score(MU_H).comps, 0.0)


def test_score_euclidean_classical():
    m = RiemannianGaussian(euclidean(2), np.zeros(2), 1.0)
    x = np.array([0.7, -0.2])
    assert np.allclose(m.score(x).comps, x)


def test_score_mean_zero_monte_carlo(hyp_model):
    v = hyp_model.score_on(hyp_model.sample(100000, seed=21))
    se = v.std(axis=0) / np.sqrt(len(v))
    assert np.all(np.abs(v.mean(axis=0)) < 4 * se)


# -- sampler ------------------------------------------------------------------

def test_sampler_deterministic(hyp_model):
    a = hyp_model.sample(3, seed=42)
    b = hyp_model.sample(3, seed=42)
    assert np.array_equal(a, b)


def test_sampler_flat_accepts_every_proposal():
    # ratio is identically 1 on flat manifolds: output = exp of the first n
    # proposals from the stream
    m = RiemannianGaussian(euclidean(2), np.zeros(2), 0.8)
    n = 50
    out = m.sample(n, seed=7)
    rng = make_rng(7)
    batch = int(np.ceil(n * 1.3)) + 16
    v = rng.normal(size=(batch, 2)) * 0.8
    assert np.array_equal(out, v[:n])


def test_sampler_radial_law_ks(hyp_model):
    X = hyp_model.sample(100000, seed=77)
    d = hyp_model.manifold.closed_forms.distance(MU_H, X)
    d = np.sort(d)
    cdf = hyp_model.radial_cdf(d)
    emp_hi = np.arange(1, len(d) + 1) / len(d)
    emp_lo = np.arange(0, len(d)) / len(d)
    ks = max(np.max(np.abs(emp_hi - cdf)), np.max(np.abs(cdf - emp_lo)))
    assert ks < 0.01


def test_sampler_unbounded_proposal_raises():
    M = hyperbolic_plane()
    m = RiemannianGaussian(M, MU_H, 0.5, proposal_inflation=1.0)
    with pytest.raises(ProposalUnbounded):
        m.sample(10, seed=1)


def test_spd2_sampler_runs():
    m = RiemannianGaussian(spd2(), np.array([1.0, 0.0, 1.0]), 0.3)
    X = m.sample(4000, seed=5)
    v = m.log_on(X)
    se = v.std(axis=0) / np.sqrt(len(v))
    assert np.all(np.abs(v.mean(axis=0)) < 4 * se)


# -- Fisher information ---------------------------------------------------------

def test_fisher_euclidean_classical():
    for sigma in (0.5, 1.0, 2.0):
        m = RiemannianGaussian(euclidean(2), np.zeros(2), sigma)
        G = fisher_information(m, "quadrature").matrix
        assert np.max(np.abs(G - np.eye(2) / sigma**2)) < 1e-12


def test_fisher_symmetric_and_modes_agree(hyp_model):
    Gq = fisher_information(hyp_model, "quadrature").matrix
    assert np.max(np.abs(Gq - Gq.T)) == 0.0
    Gh = fisher_information_hessian(hyp_model).matrix
    assert np.linalg.norm(Gh - Gq) / np.linalg.norm(Gq) < 0.02
    Gm = fisher_information(hyp_model, "mc", n=200000, seed=4).matrix
    assert np.linalg.norm(Gm - Gq) / np.linalg.norm(Gq) < 0.02


@pytest.mark.parametrize("sigma", [0.3, 0.5, 1.0])
@pytest.mark.parametrize("manifold_name", ["euclidean", "hyperbolic", "spd2"])
def test_fisher_form_consistency(manifold_name, sigma):
    # outer-product and Hessian forms agree on every built-in Hadamard manifold
    if manifold_name == "euclidean":
        M, center = euclidean(2), np.zeros(2)
    elif manifold_name == "hyperbolic":
        M, center = hyperbolic_plane(), MU_H
    else:
        M, center = spd2(), np.array([1.0, 0.0, 1.0])
    m = RiemannianGaussian(M, center, sigma)
    Gq = fisher_information(m, "quadrature").matrix
    Gh = fisher_information_hessian(m).matrix
    assert np.linalg.norm(Gh - Gq) / np.linalg.norm(Gq) < 0.02


def test_fisher_singular_flag_raises_on_inverse():
    info = FisherInfo(base=np.zeros(2), matrix=np.eye(2) * 1e-12, singular=True)
    with pytest.raises(SingularInformation):
        info.inverse()


# -- DQM ----------------------------------------------------------------------

def test_dqm_zero_direction(hyp_model):
    res, _ = dqm_residual(hyp_model, np.zeros(2), [0.4, 0.2, 0.1])
    assert np.all(res == 0.0)


def test_dqm_slopes():
    me = RiemannianGaussian(euclidean(2), np.zeros(2), 1.0)
    _, slope_e = dqm_residual(me, np.array([0.6, 0.8]), [0.4, 0.2, 0.1, 0.05])
    assert slope_e >= 3.8

    mh = RiemannianGaussian(hyperbolic_plane(), MU_H, 0.5)
    h = mh.manifold.from_frame(MU_H, np.array([0.6, 0.8]))
    _, slope_h = dqm_residual(mh, h, [0.4, 0.2, 0.1, 0.05])
    assert slope_h > 2.0


def test_dqm_slope_all_builtin_families():
    # DQM requires o(t^2); every built-in family comes out markedly faster
    for M, center in ((euclidean(2), np.zeros(2)),
                      (hyperbolic_plane(), MU_H),
                      (spd2(), np.array([1.0, 0.0, 1.0]))):
        m = RiemannianGaussian(M, center, 0.5)
        h = M.from_frame(center, 0.8 * np.ones(M.dim) / np.sqrt(M.dim))
        _, slope = dqm_residual(m, h, [0.4, 0.2, 0.1])
        assert slope > 2.0, M.name


# -- LAN ----------------------------------------------------------------------

def test_lan_zero_direction(hyp_model):
    r = lan_replicates(hyp_model, np.zeros(2), n=50, reps=5, seed=1)
    assert np.all(r.log_lr == 0.0)
    assert np.all(r.linear_term == 0.0)


def test_lan_euclidean_exact_relationship():
    # for a flat Gaussian the LAN expansion is exact: logLR = linear - ghh/2
    m = RiemannianGaussian(euclidean(2), np.zeros(2), 1.0)
    r = lan_replicates(m, np.array([0.6, 0.8]), n=400, reps=300, seed=3)
    assert abs(r.ghh - 1.0) < 1e-10
    assert np.max(np.abs(r.log_lr - (r.linear_term - 0.5 * r.ghh))) < 1e-9
    se = np.std(r.log_lr, ddof=1) / np.sqrt(r.reps)
    assert abs(r.mean_log_lr + 0.5) < 4 * se
    assert abs(r.var_log_lr - 1.0) < 0.2
