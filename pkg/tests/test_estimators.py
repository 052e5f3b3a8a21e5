"""Frechet mean, Hodges, influence operators, AIPW, single-index model."""
import numpy as np
import pytest

from manifold_eff.errors import NonConvexRegion, NotTangent, PositivityViolation
from manifold_eff.geometry import (
    euclidean,
    exp_c,
    hyperbolic_plane,
    log_c,
    sphere,
)
from manifold_eff.models import RiemannianGaussian, fisher_information
from manifold_eff.estimators import (
    MarData,
    MarObservation,
    aipw_frechet,
    frechet_estimate,
    frechet_mean,
    hodges,
    influence_frechet,
    influence_matrix,
    sim_efficient_score,
    sim_exp,
    sim_score,
    sim_tangent_basis,
    simulate_sim,
    uniform_box_zeta,
)

MU_H = np.array([0.0, 1.0])


# -- Frechet mean ---------------------------------------------------------------

def test_frechet_single_point():
    res = frechet_mean(np.array([[0.3, -2.0]]), euclidean(2))
    assert np.array_equal(res.estimate, [0.3, -2.0])
    assert res.iterations == 1


def test_frechet_euclidean_is_arithmetic_mean():
    X = np.random.default_rng(2).normal(size=(400, 2))
    res = frechet_mean(X, euclidean(2), tol=1e-13)
    assert np.max(np.abs(res.estimate - X.mean(axis=0))) < 1e-12


def test_frechet_midpoint_of_symmetric_pair():
    M = hyperbolic_plane()
    v = M.from_frame(MU_H, np.array([0.4, 0.3]))
    pts = np.array([exp_c(M, MU_H, v), exp_c(M, MU_H, -v)])
    res = frechet_mean(pts, M, tol=1e-12)
    assert np.max(np.abs(res.estimate - MU_H)) < 1e-9


def test_frechet_first_order_condition():
    M = hyperbolic_plane()
    model = RiemannianGaussian(M, MU_H, 0.5)
    X = model.sample(500, seed=11)
    res = frechet_mean(X, M, tol=1e-9)
    assert res.final_grad_norm < 1e-9
    mean_log = log_c(M, res.estimate, X).mean(axis=0)
    assert float(M.norm(res.estimate, mean_log)) < 1e-9


def test_frechet_nonconvex_sphere_raises():
    M = sphere()
    pts = np.array([
        [1.0, 0.0, 0.0], [-0.99, 0.1, 0.0], [0.0, 1.0, 0.0],
    ])
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    with pytest.raises(NonConvexRegion):
        frechet_mean(pts, M)


def test_frechet_sphere_concentrated_sample():
    M = sphere()
    rng = np.random.default_rng(5)
    base = np.array([0.0, 0.0, 1.0])
    vs = 0.2 * rng.normal(size=(200, 2))
    pts = exp_c(M, base, vs @ M.frame(base).T)
    res = frechet_mean(pts, M, tol=1e-10)
    assert float(M.closed_forms.distance(res.estimate, base)) < 0.1


# -- Hodges --------------------------------------------------------------------

def test_hodges_branches():
    M = hyperbolic_plane()
    pts = np.tile(MU_H, (4, 1))
    assert np.array_equal(hodges(pts, M, reference=MU_H), MU_H)
    far_ref = np.array([3.0, 0.2])
    est = hodges(pts, M, reference=far_ref)
    assert np.max(np.abs(est - frechet_estimate(pts, M))) == 0.0


def test_hodges_thresholds_to_reference_when_centered():
    # d(mu_hat, mu0) = O(n^-1/2) << n^-1/4: the reference branch fires
    E = euclidean(2)
    m = RiemannianGaussian(E, np.zeros(2), 1.0)
    hits = 0
    for r in range(50):
        X = m.sample(10000, seed=(13, r))
        if np.array_equal(hodges(X, E, reference=np.zeros(2)), np.zeros(2)):
            hits += 1
    assert hits >= 50 * 0.99


# -- influence -----------------------------------------------------------------

def test_influence_euclidean_exact():
    E = euclidean(2)
    X = np.random.default_rng(3).normal(size=(50, 2))
    mu0 = np.array([0.1, -0.2])
    for mode in ("jacobian", "curvature"):
        out = influence_frechet(X, E, mu0, mode=mode)
        assert np.max(np.abs(out.rows - (X - mu0))) < 1e-10, mode
    assert np.max(np.abs(influence_matrix(E, mu0, X, "curvature") - np.eye(2))) == 0.0


def test_influence_modes_agree():
    M = hyperbolic_plane()
    model = RiemannianGaussian(M, MU_H, 0.5)
    X = model.sample(10000, seed=17)
    A1 = influence_matrix(M, MU_H, X, "jacobian")
    A2 = influence_matrix(M, MU_H, X, "curvature")
    assert np.linalg.norm(A1 - A2) / np.linalg.norm(A1) < 0.03


def test_influence_covariance_matches_asymptotic_variance():
    # E[IF IF'] ~ V = G^-1 for the Riemannian Gaussian (MLEattainment)
    M = hyperbolic_plane()
    model = RiemannianGaussian(M, MU_H, 0.5)
    X = model.sample(100000, seed=19)
    out = influence_frechet(X, M, MU_H, mode="jacobian")
    V = np.linalg.inv(fisher_information(model, "quadrature").matrix)
    emp = out.covariance()
    assert np.linalg.norm(emp - V) / np.linalg.norm(V) < 0.03


def test_functional_equation():
    # E[IF . S(e_i)] = e_i (identity functional)
    M = hyperbolic_plane()
    model = RiemannianGaussian(M, MU_H, 0.5)
    X = model.sample(100000, seed=23)
    IF = influence_frechet(X, M, MU_H, mode="jacobian")
    S = model.score_on(X)
    Ehat = IF.rows.T @ S / len(X)
    assert np.max(np.abs(Ehat - np.eye(2))) < 0.03


def test_differentiable_functional_mixture_path():
    # t^-1 log(chi(P), chi(P_t)) -> E_Q[IF_P] along the mixture path
    # P_t = (1 - t) P + t Q
    M = hyperbolic_plane()
    P = RiemannianGaussian(M, MU_H, 0.5)
    Q = RiemannianGaussian(M, exp_c(M, MU_H, M.from_frame(MU_H, [0.5, 0.2])),
                           0.5)
    n = 200000
    XQ = Q.sample(n, seed=31)
    A = influence_matrix(M, MU_H, P.sample(n, seed=32), "jacobian")
    target = np.linalg.solve(A, P.log_on(XQ).mean(axis=0))
    rng_pick = np.random.default_rng(33)
    XP = P.sample(n, seed=34)
    ratios = []
    for t in (0.2, 0.1, 0.05):
        pick = rng_pick.random(n) < t
        Xt = np.where(pick[:, None], XQ, XP)
        chi_t = frechet_estimate(Xt, M, init=MU_H)
        ratios.append(P.log_on(chi_t)[0] / t)
    err = np.linalg.norm(ratios[-1] - target) / np.linalg.norm(target)
    assert err < 0.05


# -- AIPW ----------------------------------------------------------------------

def _mar_dataset(n, seed, all_observed=False):
    M = hyperbolic_plane()
    model = RiemannianGaussian(M, MU_H, 0.5)
    from manifold_eff.models import make_rng

    rng = make_rng(seed)
    Z = rng.uniform(-1, 1, size=n)
    pi = 1.0 / (1.0 + np.exp(-(0.4 + Z)))
    if all_observed:
        R = np.ones(n, dtype=int)
    else:
        R = (rng.uniform(size=n) < pi).astype(int)
    X = model.sample(n, seed=(seed, 1))
    return M, Z, pi, R, X


def test_aipw_complete_data_reduction_exact():
    M, Z, pi, R, X = _mar_dataset(800, seed=41, all_observed=True)
    res = aipw_frechet(MarData(R=R, X=X, Z=Z[:, None]), M,
                       pi_model=np.ones(len(R)), m_model="linear")
    plain = frechet_estimate(X, M)
    assert np.array_equal(res.estimate, plain)


def test_aipw_euclidean_classical_form():
    # flat reduction: IF = Ahat^-1 {R/pi (X - mu) - (R/pi - 1) m(Z)}
    E = euclidean(2)
    rng = np.random.default_rng(43)
    n = 600
    Z = rng.uniform(-1, 1, size=n)
    pi = 1.0 / (1.0 + np.exp(-(0.3 + Z)))
    R = (rng.uniform(size=n) < pi).astype(int)
    X = rng.normal(size=(n, 2)) + 0.3 * Z[:, None]
    X[R == 0] = np.nan

    def m_model(Zmat, mu, M):
        return np.tile(np.array([0.05, -0.02]), (len(Zmat), 1))

    res = aipw_frechet(MarData(R=R, X=X, Z=Z[:, None]), E, pi_model=pi,
                       m_model=m_model, influence_mode="jacobian")
    mu = res.estimate
    w = R / pi
    psi = np.zeros((n, 2))
    psi[R == 1] = w[R == 1, None] * (X[R == 1] - mu)
    psi -= (w - 1.0)[:, None] * np.array([0.05, -0.02])
    # flat weighted Hessian is the identity scaled by mean weight over all obs
    Ahat = np.eye(2) * (w[R == 1].sum() / n)
    expect = psi @ np.linalg.inv(Ahat).T
    assert np.max(np.abs(res.if_sample.rows - expect)) < 1e-8
    assert abs(np.linalg.norm(res.if_sample.rows.mean(axis=0))) < 1e-7


def test_aipw_wrong_m_moment_unbiased():
    M, Z, pi, R, X = _mar_dataset(100000, seed=47)
    mu0 = MU_H
    w = R / pi
    logs = np.zeros((len(R), 2))
    logs[R == 1] = log_c(M, mu0, X[R == 1])
    psi = w[:, None] * logs  # wrong m = 0
    mean = psi.mean(axis=0)
    se = psi.std(axis=0, ddof=1) / np.sqrt(len(R))
    assert np.all(np.abs(mean) < 4 * se)


def test_aipw_positivity_violation():
    M, Z, pi, R, X = _mar_dataset(100, seed=53)
    Xc = np.asarray(X, dtype=float).copy()
    Xc[R == 0] = np.nan
    with pytest.raises(PositivityViolation):
        aipw_frechet(MarData(R=R, X=Xc, Z=Z[:, None]), M,
                     pi_model=np.full(len(R), 1e-6), m_model="zero")


def test_mar_observation_record_api():
    with pytest.raises(ValueError):
        MarObservation(R=1, X=None, Z=np.array([0.0]))
    obs = [
        MarObservation(R=1, X=np.array([0.0, 1.0]), Z=np.array([0.2])),
        MarObservation(R=0, X=None, Z=np.array([-0.4])),
    ]
    data = MarData.from_observations(obs, chart_dim=2)
    assert data.R.tolist() == [1, 0]
    assert np.isnan(data.X[1]).all()


# -- single-index model -----------------------------------------------------------

BETA = np.array([2.0, 1.0]) / np.sqrt(5.0)


def test_sim_tangent_basis_properties():
    B = sim_tangent_basis(BETA)
    assert np.max(np.abs(B.T @ BETA)) < 1e-14
    assert np.max(np.abs(B.T @ B - np.eye(1))) < 1e-14
    B3 = sim_tangent_basis(np.array([1.0, 0.0, 0.0]))
    assert np.allclose(B3, np.eye(3)[:, 1:])


def test_sim_exp_cases():
    assert np.array_equal(sim_exp(BETA, np.zeros(2), 0.0), BETA)
    e1, e2 = np.eye(2)
    out = sim_exp(e1, (np.pi / 2) * e2, 1.0)
    assert np.max(np.abs(out - e2)) < 1e-12
    # derivative at t = 0 equals h
    h = sim_tangent_basis(BETA)[:, 0] * 0.7
    d = (sim_exp(BETA, h, 1e-6) - sim_exp(BETA, h, -1e-6)) / 2e-6
    assert np.max(np.abs(d - h)) < 1e-6
    rng = np.random.default_rng(3)
    for _ in range(50):
        hh = sim_tangent_basis(BETA)[:, 0] * rng.uniform(0.1, 3.0)
        out = sim_exp(BETA, hh, rng.uniform(-1, 1))
        assert abs(np.linalg.norm(out) - 1.0) < 1e-14


def test_sim_exp_not_tangent_raises():
    with pytest.raises(NotTangent):
        sim_exp(BETA, BETA, 0.5)


def test_sim_score_trivial_cases():
    data = simulate_sim(500, BETA, lambda u: u, lambda u: np.ones_like(u),
                        sigma=1.0, seed=5)
    assert np.all(sim_score(data, np.zeros(2)) == 0.0)
    noiseless = simulate_sim(500, BETA, lambda u: u,
                             lambda u: np.ones_like(u), sigma=1.0, seed=6)
    noiseless.Y = noiseless.link(noiseless.index)  # strip the noise
    h = sim_tangent_basis(BETA)[:, 0]
    assert np.all(sim_score(noiseless, h) == 0.0)


def test_sim_score_mean_zero():
    data = simulate_sim(200000, BETA, lambda u: u + u**3 / 3,
                        lambda u: 1 + u**2, sigma=0.8, seed=7)
    h = sim_tangent_basis(BETA)[:, 0]
    s = sim_score(data, h)
    assert abs(s.mean()) < 4 * s.std(ddof=1) / np.sqrt(len(s))


def test_sim_efficient_equals_raw_for_centered_index_covariates():
    # when E[X | beta'X = u] = beta u (spherical X), the centering term is
    # orthogonal to every tangent direction, so Seff == S on tangent vectors
    from manifold_eff.estimators import SimData

    rng = np.random.default_rng(11)
    n = 5000
    X = rng.normal(size=(n, 2))
    u = X @ BETA
    Y = u + rng.normal(size=n)
    data = SimData(X=X, Y=Y, beta=BETA, link=lambda v: v,
                   dlink=lambda v: np.ones_like(v), sigma2=1.0,
                   zeta=lambda v: np.atleast_1d(v)[:, None] * BETA[None, :])
    h = sim_tangent_basis(BETA)[:, 0] * 0.8
    assert np.max(np.abs(sim_efficient_score(data, h) - sim_score(data, h))) \
        < 1e-12


def test_influence_column_means_near_zero_at_truth():
    M = hyperbolic_plane()
    model = RiemannianGaussian(M, MU_H, 0.5)
    X = model.sample(20000, seed=61)
    out = influence_frechet(X, M, MU_H, mode="curvature")
    se = out.rows.std(axis=0, ddof=1) / np.sqrt(len(out.rows))
    assert np.all(np.abs(out.rows.mean(axis=0)) < 4 * se)


def test_sim_nadaraya_watson_zeta_close_to_oracle():
    data = simulate_sim(8000, BETA, lambda u: u,
                        lambda u: np.ones_like(u), sigma=1.0, seed=67)
    from manifold_eff.estimators import estimate_zeta_nw

    zeta_hat = estimate_zeta_nw(data.X, BETA)
    oracle = uniform_box_zeta(BETA)
    grid = np.linspace(-0.6, 0.6, 25)
    gap = np.max(np.abs(zeta_hat(grid) - oracle(grid)))
    assert gap < 0.08
    # plugging the estimated zeta into the bound stays near the oracle bound
    from manifold_eff.estimators import SimData, sim_efficiency_bound

    est_data = SimData(X=data.X, Y=data.Y, beta=BETA, link=data.link,
                       dlink=data.dlink, sigma2=data.sigma2, zeta=zeta_hat)
    b1 = sim_efficiency_bound(est_data)[0, 0]
    b2 = sim_efficiency_bound(data)[0, 0]
    assert abs(b1 - b2) / b2 < 0.05
