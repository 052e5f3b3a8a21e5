"""Experiment specifications: validation, defaults, shipped presets."""
from __future__ import annotations

import copy
import json
from importlib import resources

import jsonschema

from ..errors import ConfigError

_DEFAULTS = {
    "manifold": "hyperbolic",
    "model": {"center": [0.0, 1.0], "sigma": 0.5},
    "n_list": [2000],
    "reps": 2000,
    "h_list": [],
    "estimator": {
        "name": "frechet",
        "step": 1.0,
        "tol": 1e-9,
        "max_iter": 500,
        "hodges_exponent": 0.25,
        "influence_mode": "curvature",
        "pi_floor": 1e-3,
    },
    "tolerances": {},
    "regularity": {"permutations": 1000, "level": 0.01},
    "superefficiency": {"c": 1.0, "h_direction": [1.0, 0.0]},
    "van_trees": {
        "prior_center": [0.0],
        "widths": [1.0, 1.5, 2.5, 4.0, 8.0],
        "draws": 3000,
    },
    "sim": {
        "beta": [0.894427190999916, 0.447213595499958],
        "sigma": 1.0,
        "link": "identity",
        "n": 100000,
    },
    "aipw": {
        "n_check": 200000,
        "missing_intercept": 0.4,
        "missing_slope": 1.0,
        "drift": 0.35,
    },
}

# named pass/fail tolerances; every flag in a report carries one of these keys
DEFAULT_TOLERANCES = {
    "lan.mean_se_mult": 3.0,
    "lan.var_rel": 0.10,
    "lan.ad_p_min": 0.01,
    "conv.frob_rel": 0.10,
    "crlb.slack_se_mult": 3.0,
    "reg.level": 0.01,
    "reg.hodges_ratio_min": 5.0,
    "sup.ratio_max": 0.2,
    "sup.divergence_min": 3.0,
    "sup.frechet_drift_max": 0.15,
    "aipw.moment_se_mult": 4.0,
    "aipw.cov_rel": 0.15,
    "sim.norm_tol": 1e-14,
    "sim.orth_se_mult": 4.0,
    "sim.bound_rel": 0.03,
    "vt.risk_slack_se_mult": 2.0,
    "vt.crlb_rel": 0.02,
}


def load_schema() -> dict:
    with resources.files("manifold_eff.harness").joinpath(
        "experiment_schema.json"
    ).open() as fh:
        return json.load(fh)


def _merge(defaults, given):
    if isinstance(defaults, dict) and isinstance(given, dict):
        out = copy.deepcopy(defaults)
        for k, v in given.items():
            out[k] = _merge(defaults.get(k), v) if k in defaults else v
        return out
    return copy.deepcopy(given)


def validate_spec(raw: dict) -> dict:
    """Schema-validate a raw spec and fill in defaults."""
    try:
        jsonschema.validate(raw, load_schema())
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid experiment spec: {exc.message}") from exc
    spec = _merge(_DEFAULTS, raw)
    spec["tolerances"] = _merge(DEFAULT_TOLERANCES, spec.get("tolerances", {}))
    ns = spec["n_list"]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError("n_list must be strictly increasing")
    if spec["kind"] in ("lan", "regularity", "superefficiency", "crlb",
                        "convolution") and spec["reps"] < 100:
        raise ConfigError("reps must be >= 100 for distributional claims")
    return spec


def load_spec(path: str) -> dict:
    with open(path) as fh:
        raw = json.load(fh)
    return validate_spec(raw)


PRESETS = {
    "lan": {
        "name": "lan",
        "kind": "lan",
        "n_list": [2000],
        "reps": 2000,
        "h_list": [[0.6, 0.8]],
        "seed": 20250801,
    },
    "convolution": {
        "name": "convolution",
        "kind": "convolution",
        "n_list": [5000],
        "reps": 2000,
        "seed": 20250802,
    },
    "crlb": {
        "name": "crlb",
        "kind": "crlb",
        "n_list": [5000],
        "reps": 2000,
        "seed": 20250803,
    },
    "regularity": {
        "name": "regularity",
        "kind": "regularity",
        "n_list": [4096],
        "reps": 2000,
        "h_list": [[0.5, 0.0], [0.0, 1.0]],
        "seed": 20250804,
    },
    "regularity-hodges": {
        "name": "regularity-hodges",
        "kind": "regularity",
        "estimator": {"name": "hodges"},
        "n_list": [4096],
        "reps": 2000,
        "h_list": [[1.0, 0.0]],
        "seed": 20250805,
    },
    "superefficiency": {
        "name": "superefficiency",
        "kind": "superefficiency",
        "n_list": [256, 1024, 4096],
        "reps": 600,
        "seed": 20250806,
    },
    "aipw": {
        "name": "aipw",
        "kind": "aipw",
        "n_list": [5000],
        "reps": 800,
        "seed": 20250807,
    },
    "sim": {
        "name": "sim",
        "kind": "sim",
        "manifold": "euclidean2",
        "sim": {"beta": [0.894427190999916, 0.447213595499958]},
        "seed": 20250808,
    },
    "van_trees": {
        "name": "van_trees",
        "kind": "van_trees",
        "manifold": "euclidean1",
        "model": {"center": [0.0], "sigma": 1.0},
        "n_list": [50, 200],
        "reps": 3000,
        "seed": 20250809,
    },
}


def preset_spec(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset '{name}'; available: {sorted(PRESETS)}")
    return validate_spec(copy.deepcopy(PRESETS[name]))
