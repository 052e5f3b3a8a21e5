"""Experiment reports: flags, JSON and CSV serialization.

Reports are deterministic for a fixed (spec, seed): the runtime field is
kept top-level and excluded when comparing runs byte for byte. Matrices are
serialized as row-major nested lists with explicit dimensions; floats go
through Python's shortest round-trip repr (the json module default).
"""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np


def matrix_payload(mat: np.ndarray) -> dict:
    mat = np.asarray(mat)
    return {"rows": mat.shape[0], "cols": mat.shape[-1] if mat.ndim > 1 else 1,
            "data": mat.ravel().tolist()}


@dataclass
class Flag:
    name: str
    tolerance_key: str
    tolerance: float
    measured: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "tolerance_key": self.tolerance_key,
            "tolerance": self.tolerance,
            "measured": self.measured,
            "pass": self.passed,
        }


def make_flag(name: str, tolerances: dict, key: str, measured: float,
              passed: bool) -> Flag:
    return Flag(name=name, tolerance_key=key, tolerance=float(tolerances[key]),
                measured=float(measured), passed=bool(passed))


@dataclass
class ExperimentReport:
    spec: dict
    results: list = field(default_factory=list)  # one dict per (n, h) group
    flags: list = field(default_factory=list)
    runtime_seconds: float = 0.0

    @property
    def all_passed(self) -> bool:
        return all(f.passed for f in self.flags)

    def payload(self, include_runtime: bool = True) -> dict:
        out = {
            "experiment": self.spec.get("kind"),
            "name": self.spec.get("name", self.spec.get("kind")),
            "seed": self.spec.get("seed"),
            "spec": self.spec,
            "results": _jsonable(self.results),
            "flags": [f.to_dict() for f in self.flags],
            "all_passed": self.all_passed,
        }
        if include_runtime:
            out["runtime_seconds"] = self.runtime_seconds
        return out

    def to_json(self, include_runtime: bool = True) -> str:
        return json.dumps(self.payload(include_runtime), indent=2,
                          sort_keys=True)

    def write(self, out_dir: str, fmt: str = "json") -> dict:
        os.makedirs(out_dir, exist_ok=True)
        paths = {}
        if fmt in ("json", "both"):
            path = os.path.join(out_dir, "report.json")
            with open(path, "w") as fh:
                fh.write(self.to_json())
                fh.write("\n")
            paths["json"] = path
        if fmt in ("csv", "both"):
            path = os.path.join(out_dir, "summary.csv")
            self.write_summary_csv(path)
            paths["csv"] = path
        return paths

    def summary_rows(self) -> list[dict]:
        rows = []
        for res in self.results:
            row = {
                "experiment": self.spec.get("kind"),
                "name": self.spec.get("name", ""),
                "n": res.get("n", ""),
                "h": _fmt_h(res.get("h")),
            }
            for key, val in res.items():
                if key in ("n", "h"):
                    continue
                if isinstance(val, (int, float, str, bool, np.floating,
                                    np.integer)):
                    row[key] = val
            rows.append(row)
        flag_row = {
            "experiment": self.spec.get("kind"),
            "name": "flags",
            "n": "",
            "h": "",
        }
        for f in self.flags:
            flag_row[f.name] = "pass" if f.passed else "FAIL"
        rows.append(flag_row)
        return rows

    def write_summary_csv(self, path: str) -> None:
        rows = self.summary_rows()
        fields: list[str] = []
        for row in rows:
            for key in row:
                if key not in fields:
                    fields.append(key)
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields, restval="")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _csv_cell(v) for k, v in row.items()})


def _fmt_h(h) -> str:
    if h is None:
        return ""
    arr = np.atleast_1d(np.asarray(h, dtype=float))
    return "(" + ",".join(repr(float(v)) for v in arr) + ")"


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _jsonable(obj: Any):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return matrix_payload(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj
