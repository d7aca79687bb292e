"""Verification campaigns: degrees, orbits, canonical heights and verdicts."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .canonical import ample_canonical_height, eigen_structure
from .degrees import (arithmetic_degree, density_heuristic, dynamical_degree,
                      eigenvalue_match)
from .errors import ArithDynError, MissingDecomposition
from .maps import iterate_orbit
from .systems import Budgets, SystemSpec, load_spec, spec_from_json

log = logging.getLogger(__name__)

if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

DENSE_TAGS = ("dense-verified", "dense-heuristic")


def ksc_verdict(alpha, report, tolerance: float) -> str:
    """consistent iff converged and |alpha - delta_mid| <= tolerance + half-width."""
    if not alpha.converged:
        return "inconclusive"
    half = (report.delta_upper - report.delta_lower) / 2
    return "consistent" if abs(alpha.point_value - report.midpoint) <= tolerance + half \
        else "inconsistent"


def analyze_point(f, x, density: str | None, budgets: Budgets, report, spectrum) -> dict:
    trace = iterate_orbit(f, x, budgets.max_iters, budgets.bit_budget)
    alpha = arithmetic_degree(trace, budgets.tolerance, budgets.window)
    out = {"point": f.point_json(x), "density": density,
           "density_heuristic": density_heuristic(f, x),
           "orbit": {"iterates": trace.iterates, "truncated": trace.truncated,
                     "final_bits": trace.bit_sizes[-1]},
           "alpha": alpha.to_json(), "eigen_match": None, "hhat": None, "ksc_verdict": None}
    if alpha.converged:
        m = eigenvalue_match(alpha, spectrum)
        out["eigen_match"] = {"value": repr(m.value), "gap": repr(m.gap), "violation": m.violation}
        out["bound_ok"] = alpha.point_value <= report.delta_upper + budgets.tolerance
    try:
        s = eigen_structure(f)
    except MissingDecomposition:
        s = None
    if s is not None:
        ah = ample_canonical_height(f, x, budgets.hhat_target, structure=s,
                                    max_iters=64, bit_budget=budgets.bit_budget)
        out["hhat"] = {"value": repr(ah.value), "error_bar": repr(ah.error_bar),
                       "budget_exceeded": ah.budget_exceeded,
                       "parts": {k: v.to_json() for k, v in sorted(ah.parts.items())}}
    if density in DENSE_TAGS:
        verdict = ksc_verdict(alpha, report, budgets.tolerance)
        if out["density_heuristic"] == "Not-Dense":
            # a finite orbit contradicts the tag; never count it either way
            verdict = "inconclusive"
        out["ksc_verdict"] = verdict
    return out


def _point_task(args):
    spec_json, base_dir, idx = args
    spec = spec_from_json(spec_json, base_dir=base_dir)
    report = dynamical_degree(spec.system, spec.budgets.precision)
    p = spec.points[idx]
    return analyze_point(spec.system, p.state, p.density, spec.budgets, report,
                         spec.system.pullback_spectrum())


def config_hash(spec: SystemSpec) -> str:
    blob = json.dumps(spec.to_json(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def run_system(spec: SystemSpec, jobs: int = 1) -> dict:
    f = spec.system
    report = dynamical_degree(f, spec.budgets.precision)
    spectrum = f.pullback_spectrum()
    if jobs > 1 and len(spec.points) > 1:
        base = str(Path(spec.path).parent) if spec.path else None
        payload = spec.to_json()
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_point_task, [(payload, base, i) for i in range(len(spec.points))]))
    else:
        points = [analyze_point(f, p.state, p.density, spec.budgets, report, spectrum)
                  for p in spec.points]
    return {"system": spec.name, "descriptor": spec.descriptor, "budgets": spec.budgets.to_json(),
            "delta": report.to_json(), "pullback_spectrum": [repr(v) for v in spectrum],
            "points": points,
            "provenance": {"config_hash": config_hash(spec), "tool_version": __version__}}


def collect_specs(path: str | Path) -> list[Path]:
    path = Path(path)
    if path.is_dir():
        return sorted(p for p in path.glob("*.json") if not p.name.endswith(".oracle.json"))
    return [path]


def summary_rows(systems: list[dict]) -> list[list[str]]:
    rows = [["system", "point", "density", "alpha", "converged", "delta_lower",
             "delta_upper", "ksc_verdict", "hhat"]]
    for s in systems:
        for p in s["points"]:
            rows.append([s["system"], json.dumps(p["point"]), p["density"] or "",
                         p["alpha"]["point_value"] or "", str(p["alpha"]["converged"]),
                         s["delta"]["delta_lower"], s["delta"]["delta_upper"],
                         p["ksc_verdict"] or "", (p["hhat"] or {}).get("value", "")])
    return rows


def write_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        csv.writer(fh, lineterminator="\r\n").writerows(rows)


def run_campaign(spec_path, out_path=None, csv_path=None, overrides: dict | None = None,
                 jobs: int = 1, stream=None) -> int:
    """Run every spec under ``spec_path``; 0 = no inconsistent verdict,
    1 = some inconsistent verdict, 2 = configuration or runtime error."""
    stream = stream or sys.stdout
    try:
        systems = []
        for p in collect_specs(spec_path):
            spec = load_spec(p)
            spec.budgets = spec.budgets.with_env().updated(overrides or {})
            log.info("running %s", p)
            systems.append(run_system(spec, jobs))
    except (ArithDynError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    verdicts = [pt["ksc_verdict"] for s in systems for pt in s["points"]]
    report = {"tool": "arithdyn", "tool_version": __version__, "systems": systems,
              "summary": {v: verdicts.count(v) for v in ("consistent", "inconsistent", "inconclusive")},
              "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
    text = json.dumps(report, indent=2, sort_keys=True)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text, file=stream)
    if csv_path:
        write_csv(summary_rows(systems), csv_path)
    return 1 if "inconsistent" in verdicts else 0


def strip_timestamp(report_text: str) -> dict:
    data = json.loads(report_text)
    data.pop("timestamp", None)
    return data
