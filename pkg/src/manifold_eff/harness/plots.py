"""Figure rendering for experiment reports.

Each experiment kind gets a small set of matplotlib figures written next to
report.json / summary.csv. Figures are derived from the report payload only,
so re-rendering never changes the numbers.
"""
from __future__ import annotations

import os

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _unpack(mat_payload):
    data = np.array(mat_payload["data"], dtype=float)
    return data.reshape(mat_payload["rows"], mat_payload["cols"])


def render_figures(report, out_dir: str) -> list[str]:
    fig_dir = os.path.join(out_dir, "figures")
    os.makedirs(fig_dir, exist_ok=True)
    kind = report.spec["kind"]
    fn = _RENDERERS.get(kind)
    if fn is None:
        return []
    paths = fn(report, fig_dir)
    return paths


def _save(fig, fig_dir, name) -> str:
    path = os.path.join(fig_dir, name)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def _plot_lan(report, fig_dir):
    paths = []
    for res in report.results:
        if "mean_logLR" not in res:
            continue
        fig, ax = plt.subplots(figsize=(5.5, 4))
        ghh = res["ghh"]
        ax.errorbar([0], [res["mean_logLR"]], yerr=[3 * res["mc_se_mean"]],
                    fmt="o", capsize=4, label="mean log-LR (3 SE)")
        ax.axhline(-0.5 * ghh, color="k", ls="--", label="-G(h,h)/2")
        ax.bar([1], [res["var_logLR"]], width=0.3, alpha=0.6,
               label="var log-LR")
        ax.axhline(ghh, color="r", ls=":", label="G(h,h)")
        ax.set_xticks([0, 1], ["mean", "variance"])
        ax.set_title(f"LAN moments, n={res['n']} (AD p={res['ad_p']:.3f})")
        ax.legend(fontsize=8)
        paths.append(_save(fig, fig_dir, f"lan_n{res['n']}.png"))
    return paths


def _plot_cov_vs_ref(report, fig_dir, ref_key, title, stem):
    paths = []
    for res in report.results:
        if "empirical_cov" not in res:
            continue
        emp = res["empirical_cov"]
        ref = res[ref_key]
        if isinstance(emp, dict):
            emp, ref = _unpack(emp), _unpack(ref)
        d = emp.shape[0]
        idx = np.arange(d * d)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.bar(idx - 0.17, emp.ravel(), width=0.34, label="empirical")
        ax.bar(idx + 0.17, ref.ravel(), width=0.34, label="reference")
        ax.set_xticks(idx, [f"({i},{j})" for i in range(d) for j in range(d)])
        ax.set_title(f"{title}, n={res['n']}")
        ax.legend()
        paths.append(_save(fig, fig_dir, f"{stem}_n{res['n']}.png"))
    return paths


def _plot_convolution(report, fig_dir):
    return _plot_cov_vs_ref(
        report, fig_dir, "reference",
        "covariance of sqrt(n) residual vs inverse information", "convolution"
    )


def _plot_crlb(report, fig_dir):
    return _plot_cov_vs_ref(
        report, fig_dir, "bound",
        "covariance vs curvature-corrected bound", "crlb"
    )


def _plot_regularity(report, fig_dir):
    pairs = [r for r in report.results if "stat_over_threshold" in r]
    if not pairs:
        return []
    fig, ax = plt.subplots(figsize=(6.5, 4))
    labels = [r["pair"] for r in pairs]
    ratios = [r["stat_over_threshold"] for r in pairs]
    ax.bar(range(len(pairs)), ratios)
    ax.axhline(1.0, color="k", ls="--", label="calibrated threshold")
    ax.set_xticks(range(len(pairs)), labels, rotation=45, fontsize=7)
    ax.set_ylabel("energy statistic / threshold")
    est = report.spec["estimator"]["name"]
    ax.set_title(f"pairwise residual-law comparison ({est})")
    ax.set_yscale("log")
    ax.legend()
    return [_save(fig, fig_dir, "regularity_pairs.png")]


def _plot_superefficiency(report, fig_dir):
    rows = [r for r in report.results if "risk_frechet" in r]
    if not rows:
        return []
    fig, ax = plt.subplots(figsize=(6, 4))
    for center in ("origin", "perturbed"):
        ns = [r["n"] for r in rows if r["center"] == center]
        for key, style in (("risk_frechet", "-o"), ("risk_hodges", "--s")):
            vals = [r[key] for r in rows if r["center"] == center]
            ax.plot(ns, vals, style,
                    label=f"{key.split('_')[1]} @ {center}")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("scaled risk E|sqrt(n) residual|^2")
    ax.set_title("superefficiency: risk at and near the reference point")
    ax.legend(fontsize=8)
    return [_save(fig, fig_dir, "superefficiency_risk.png")]


def _plot_aipw(report, fig_dir):
    rows = [r for r in report.results if r.get("check") == "covariance"]
    paths = []
    for res in rows:
        emp = res["empirical_cov"]
        ref = res["mean_if_cov"]
        if isinstance(emp, dict):
            emp, ref = _unpack(emp), _unpack(ref)
        d = emp.shape[0]
        idx = np.arange(d * d)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.bar(idx - 0.17, emp.ravel(), width=0.34, label="estimator cov")
        ax.bar(idx + 0.17, ref.ravel(), width=0.34, label="mean E[IF IF']")
        ax.set_xticks(idx, [f"({i},{j})" for i in range(d) for j in range(d)])
        ax.set_title(f"AIPW sandwich check, n={res['n']}")
        ax.legend()
        paths.append(_save(fig, fig_dir, f"aipw_cov_n{res['n']}.png"))
    return paths


def _plot_sim(report, fig_dir):
    rows = [r for r in report.results if r.get("check") == "efficiency_bound"]
    if not rows:
        return []
    res = rows[0]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar([0, 1], [res["bound"], res["oracle"]],
           tick_label=["sample bound", "quadrature oracle"])
    ax.set_title(f"single-index efficiency bound (rel gap "
                 f"{res['rel_gap']:.3%})")
    return [_save(fig, fig_dir, "sim_bound.png")]


def _plot_van_trees(report, fig_dir):
    rows = [r for r in report.results if "prior_width" in r]
    if not rows:
        return []
    fig, ax = plt.subplots(figsize=(6, 4))
    for n in sorted({r["n"] for r in rows}):
        sub = [r for r in rows if r["n"] == n]
        widths = [r["prior_width"] for r in sub]
        ax.plot(widths, [r["bound"] for r in sub], "-o",
                label=f"bound, n={n}")
        ax.plot(widths, [r["bayes_risk"] for r in sub], "--s",
                label=f"Bayes risk, n={n}")
        ax.axhline(sub[0]["crlb"], color="gray", lw=0.8, ls=":")
    ax.set_xlabel("prior width (information decreasing)")
    ax.set_ylabel("trace")
    ax.set_xscale("log")
    ax.set_title("van Trees bound vs Bayes risk; dotted = CRLB")
    ax.legend(fontsize=8)
    return [_save(fig, fig_dir, "van_trees.png")]


_RENDERERS = {
    "lan": _plot_lan,
    "convolution": _plot_convolution,
    "crlb": _plot_crlb,
    "regularity": _plot_regularity,
    "superefficiency": _plot_superefficiency,
    "aipw": _plot_aipw,
    "sim": _plot_sim,
    "van_trees": _plot_van_trees,
}
