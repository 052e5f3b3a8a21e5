"""Acceptance suite: one test per shipped claim, at full scale.

Run with `pytest tests/test_acceptance.py -v -s` to see one pass/fail line
per criterion with its runtime. Tolerances are pinned here, not computed.
"""
import time

import numpy as np

from manifold_eff.geometry import (
    dexp,
    dlog,
    dlog_base,
    exp_c,
    hyperbolic_plane,
    log_c,
    parallel_transport_c,
    shooting_log_c,
    spd2,
    sphere,
    sphere_polar,
)
from manifold_eff.geometry.ode import integrate_geodesics, integrate_transport_batch
from manifold_eff.models import (
    RiemannianGaussian,
    anderson_darling_pvalue,
    fisher_information,
    lan_replicates,
)
from manifold_eff.estimators import influence_frechet, influence_matrix
from manifold_eff.harness.runner import run_experiment
from manifold_eff.harness.spec import preset_spec

from conftest import SAFE_RADIUS, random_point, random_tangent

MU_H = np.array([0.0, 1.0])
MASTER_SEED = 723001


def _report(criterion: str, passed: bool, elapsed: float, budget: float,
            detail: str = ""):
    status = "PASS" if passed else "FAIL"
    print(f"[{status}] {criterion}: {detail} ({elapsed:.1f}s / budget "
          f"{budget:.0f}s)")
    assert passed, f"{criterion}: {detail}"
    assert elapsed < budget, f"{criterion} exceeded runtime budget"


def test_criterion_01_geometry_oracle_equivalence():
    t0 = time.perf_counter()
    worst_coord = 0.0
    worst_iso = 0.0
    cases = 100
    for M in (sphere_polar(), hyperbolic_plane(), spd2()):
        rng = np.random.default_rng((MASTER_SEED, 1, M.dim))
        xs = np.array([random_point(M, rng) for _ in range(cases)])
        vs = np.array([
            random_tangent(M, x, rng, scale=SAFE_RADIUS[M.name]) for x in xs
        ])
        ys = exp_c(M, xs, vs)
        # geodesics: one batched ODE solve vs the closed form
        ends = integrate_geodesics(M, xs, vs, 1.0)
        worst_coord = max(worst_coord, float(np.max(np.abs(ends - ys))))
        # logs: damped-Newton shooting vs the closed form
        v_sh = shooting_log_c(M, xs, ys)
        worst_coord = max(worst_coord, float(np.max(np.abs(v_sh - vs))))
        # transports: first-order ODE along each geodesic vs the closed form
        ws = np.array([random_tangent(M, x, rng) for x in xs])
        wt_cf = parallel_transport_c(M, xs, ys, ws)
        _, wt_ode = integrate_transport_batch(M, xs, vs, ws)
        worst_coord = max(worst_coord, float(np.max(np.abs(wt_ode - wt_cf))))
        # transport isometry
        before = np.asarray(M.inner(xs, ws, ws))
        after = np.asarray(M.inner(ys, wt_cf, wt_cf))
        worst_iso = max(
            worst_iso, float(np.max(np.abs(after - before) / np.abs(before)))
        )
    elapsed = time.perf_counter() - t0
    passed = worst_coord < 1e-8 and worst_iso < 1e-7
    _report("01-geometry-oracles", passed, elapsed, 30.0,
            f"max coord err {worst_coord:.2e}, isometry err {worst_iso:.2e}")


def test_criterion_02_series_order_checks():
    t0 = time.perf_counter()
    # Jacobi expansions of dexp/dlog on the sphere
    S = sphere()
    x = np.array([1.0, 0.0, 0.0])
    hdir = np.array([0.0, 0.6, 0.8])
    hs = np.array([0.1, 0.03, 0.01])
    res_exp, res_log = [], []
    for hn in hs:
        h = hn * hdir
        h_on = S.to_frame(x, h)
        Rj = (h_on @ h_on) * np.eye(2) - np.outer(h_on, h_on)  # R(., h)h, K=1
        res_exp.append(np.linalg.norm(dexp(S, x, h) - (np.eye(2) - Rj / 6)))
        res_log.append(
            np.linalg.norm(dlog(S, x, exp_c(S, x, h)) - (np.eye(2) + Rj / 6))
        )
    slope_exp = float(np.polyfit(np.log(hs), np.log(res_exp), 1)[0])
    slope_log = float(np.polyfit(np.log(hs), np.log(res_log), 1)[0])

    # log-map expansion (first-order in the transported increment)
    M = hyperbolic_plane()
    mu = np.array([0.2, 1.0])
    mu2 = exp_c(M, mu, M.from_frame(mu, [0.5, 0.3]))
    D = dlog(M, mu, mu2)
    base = log_c(M, mu, mu2)
    eps = np.array([0.2, 0.1, 0.05, 0.025])
    dir_on = np.array([0.8, -0.6])
    res_a1 = []
    for e in eps:
        w = M.from_frame(mu2, e * dir_on)
        y = exp_c(M, mu2, w)
        pred = base + M.from_frame(
            mu, D @ M.to_frame(mu, parallel_transport_c(M, mu2, mu, w))
        )
        res_a1.append(float(M.norm(mu, log_c(M, mu, y) - pred)))
    slope_a1 = float(np.polyfit(np.log(eps), np.log(res_a1), 1)[0])

    # parallel-transport expansion (covariant derivative of the log field)
    target = exp_c(M, mu, M.from_frame(mu, [0.7, 0.4]))
    Dbase = dlog_base(M, mu, target)
    base_t = log_c(M, mu, target)
    res_a3 = []
    for e in eps:
        w = M.from_frame(mu, e * dir_on)
        mu_p = exp_c(M, mu, w)
        lhs = parallel_transport_c(M, mu_p, mu, log_c(M, mu_p, target))
        pred = base_t + M.from_frame(mu, Dbase @ (e * dir_on))
        res_a3.append(float(M.norm(mu, lhs - pred)))
    slope_a3 = float(np.polyfit(np.log(eps), np.log(res_a3), 1)[0])

    elapsed = time.perf_counter() - t0
    passed = (slope_exp >= 2.7 and slope_log >= 2.7 and slope_a1 >= 1.8
              and slope_a3 > 1.0)
    _report("02-series-orders", passed, elapsed, 30.0,
            f"jacobi {slope_exp:.2f}/{slope_log:.2f}, log-exp {slope_a1:.2f}, "
            f"transport-exp {slope_a3:.2f}")


def test_criterion_03_lan():
    t0 = time.perf_counter()
    M = hyperbolic_plane()
    model = RiemannianGaussian(M, MU_H, 0.5)
    G = fisher_information(model, "quadrature").matrix
    h = M.from_frame(MU_H, np.array([0.6, 0.8]))  # unit metric norm
    r = lan_replicates(model, h, n=2000, reps=2000, seed=(MASTER_SEED, 3))
    se = float(np.std(r.log_lr, ddof=1) / np.sqrt(r.reps))
    mean_ok = abs(r.mean_log_lr + 0.5 * r.ghh) <= 3.0 * se
    var_ok = abs(r.var_log_lr / r.ghh - 1.0) <= 0.10
    ad_p = anderson_darling_pvalue(r.log_lr)
    elapsed = time.perf_counter() - t0
    passed = mean_ok and var_ok and ad_p > 0.01
    _report("03-lan", passed, elapsed, 120.0,
            f"mean {r.mean_log_lr:.4f} vs {-0.5 * r.ghh:.4f} (3SE={3 * se:.4f}), "
            f"var/G(h,h)={r.var_log_lr / r.ghh:.3f}, AD p={ad_p:.3f}")


def test_criterion_04_convolution_crlb_attainment():
    t0 = time.perf_counter()
    spec = preset_spec("convolution")
    spec["seed"] = MASTER_SEED + 4
    rep_conv = run_experiment(spec)
    conv_ok = rep_conv.all_passed
    frob = rep_conv.results[0]["frob_rel_gap"]
    spec = preset_spec("crlb")
    spec["seed"] = MASTER_SEED + 4
    rep_crlb = run_experiment(spec)
    crlb_ok = rep_crlb.all_passed
    gap = rep_crlb.results[0]["psd_gap"]
    slack = rep_crlb.results[0]["slack"]
    elapsed = time.perf_counter() - t0
    _report("04-convolution-crlb", conv_ok and crlb_ok, elapsed, 180.0,
            f"frobenius gap {frob:.3f} (<=0.10), psd gap {gap:.4f} >= "
            f"-{slack:.4f}")


def test_criterion_05_influence_calculus():
    t0 = time.perf_counter()
    M = hyperbolic_plane()
    model = RiemannianGaussian(M, MU_H, 0.5)
    X = model.sample(100000, seed=(MASTER_SEED, 5))
    IF = influence_frechet(X, M, MU_H, mode="jacobian")
    S = model.score_on(X)
    Ehat = IF.rows.T @ S / len(X)
    func_err = float(np.max(np.abs(Ehat - np.eye(2))))
    A1 = influence_matrix(M, MU_H, X, "jacobian")
    A2 = influence_matrix(M, MU_H, X, "curvature")
    mode_gap = float(np.linalg.norm(A1 - A2) / np.linalg.norm(A1))
    elapsed = time.perf_counter() - t0
    passed = func_err < 0.03 and mode_gap < 0.03
    _report("05-influence-calculus", passed, elapsed, 60.0,
            f"functional-equation err {func_err:.4f}, mode gap {mode_gap:.4f}")


def test_criterion_06_regularity():
    t0 = time.perf_counter()
    spec = preset_spec("regularity")
    rep_f = run_experiment(spec)
    frechet_ok = rep_f.all_passed
    ratio_f = [f.measured for f in rep_f.flags if f.name == "reg.invariant_law"][0]
    spec_h = preset_spec("regularity-hodges")
    rep_h = run_experiment(spec_h)
    hodges_ok = rep_h.all_passed
    ratio_h = [f.measured for f in rep_h.flags if f.name == "reg.hodges_detected"][0]
    elapsed = time.perf_counter() - t0
    _report("06-regularity", frechet_ok and hodges_ok, elapsed, 300.0,
            f"frechet max stat/threshold {ratio_f:.2f} (<=1), hodges "
            f"{ratio_h:.1f} (>=5)")


def test_criterion_07_superefficiency():
    t0 = time.perf_counter()
    spec = preset_spec("superefficiency")
    rep = run_experiment(spec)
    vals = {f.name: f.measured for f in rep.flags}
    elapsed = time.perf_counter() - t0
    _report("07-superefficiency", rep.all_passed, elapsed, 180.0,
            f"origin ratio {vals['sup.hodges_superefficient_at_origin']:.3f} "
            f"(<0.2), divergence {vals['sup.hodges_risk_diverges']:.2f} (>=3), "
            f"frechet drift {vals['sup.frechet_risk_stable']:.3f} (<0.15)")


def test_criterion_08_aipw():
    t0 = time.perf_counter()
    spec = preset_spec("aipw")
    rep = run_experiment(spec)
    vals = {f.name: f.measured for f in rep.flags}
    elapsed = time.perf_counter() - t0
    _report("08-aipw", rep.all_passed, elapsed, 120.0,
            f"reduction gap {vals['aipw.complete_data_reduction']:.1e} (=0), "
            f"moment |t| {vals['aipw.wrong_m_unbiased']:.2f} (<=4), cov gap "
            f"{vals['aipw.cov_matches_if[n=5000]']:.3f} (<=0.15)")


def test_criterion_09_sim():
    t0 = time.perf_counter()
    spec = preset_spec("sim")
    rep = run_experiment(spec)
    vals = {f.name: f.measured for f in rep.flags}
    elapsed = time.perf_counter() - t0
    _report("09-sim", rep.all_passed, elapsed, 60.0,
            f"norm defect {vals['sim.exp_unit_norm']:.1e} (<=1e-14), orth |t| "
            f"{vals['sim.eff_score_orthogonal']:.2f} (<=4), bound gap "
            f"{vals['sim.bound_matches_oracle']:.4f} (<=0.03)")


def test_criterion_10_van_trees():
    t0 = time.perf_counter()
    spec = preset_spec("van_trees")
    rep = run_experiment(spec)
    elapsed = time.perf_counter() - t0
    risk_flags = [f for f in rep.flags if f.name.startswith("vt.risk")]
    mono_flags = [f for f in rep.flags if f.name.startswith("vt.monotone")]
    _report("10-van-trees", rep.all_passed, elapsed, 60.0,
            f"{sum(f.passed for f in risk_flags)}/{len(risk_flags)} risk>=bound, "
            f"{sum(f.passed for f in mono_flags)}/{len(mono_flags)} monotone->CRLB")


def test_criterion_11_determinism():
    t0 = time.perf_counter()
    spec = preset_spec("lan")
    r1 = run_experiment(spec, workers=1)
    r2 = run_experiment(spec, workers=3)
    same = r1.to_json(include_runtime=False) == r2.to_json(include_runtime=False)
    elapsed = time.perf_counter() - t0
    _report("11-determinism", same, elapsed, 240.0,
            "byte-identical report.json across worker counts")
