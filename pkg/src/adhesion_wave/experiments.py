"""Run validated experiment specs and write their artifacts.

Every kind writes a JSON summary. Verify kinds also carry a ``checks``
table and the exit status is 0 iff every check passed.
"""

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import asymptotics
from .energy import balance_residual_E, balance_residual_J, h1_norm, l2_sq
from .errors import ArtifactError
from .ode import DEFAULT_BATTERY, OdeParams, solve_exact, verify_uniform_decay
from .pde import Grid1D, simulate, write_snapshot
from .potential import PotentialParams, table

__all__ = ["THRESHOLDS", "run_experiment", "refine", "energy_study", "write_json", "write_csv"]

log = logging.getLogger(__name__)

THRESHOLDS = {
    "energy_residual_max": 1e-4,
    "energy_ratio_min": 2.0,
    "kappa_range": (0.4, 0.6),
    "r_squared_min": 0.999,
    "linear_G_gap": 0.01,
    "linear_contraction_slack": 0.02,
    "ode_ratio_max": 5.0,
    "ode_middle_visits_max": 2,
    "ode_band_crossings_max": 1,
}

DEFAULT_OUTPUTS = {
    "summary": "summary.json",
    "ledger": "ledger.csv",
    "csv": "trajectory.csv",
    "table": "potential.csv",
    "report": "report.json",
}


def _path(spec, key):
    name = spec.outputs.get(key, DEFAULT_OUTPUTS[key])
    return name if os.path.isabs(name) else os.path.join(spec.out_dir, name)


def _ensure_dir(path):
    d = os.path.dirname(path)
    if d:
        try:
            os.makedirs(d, exist_ok=True)
        except OSError as exc:
            raise ArtifactError(f"cannot create directory {d}: {exc}") from exc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path, payload):
    _ensure_dir(path)
    try:
        with open(path, "w") as fh:
            json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise ArtifactError(f"cannot write {path}: {exc}") from exc
    return path


def write_csv(path, header, rows):
    _ensure_dir(path)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(c)) if isinstance(c, (float, np.floating)) else c for c in row])
    except OSError as exc:
        raise ArtifactError(f"cannot write {path}: {exc}") from exc
    return path


def _check(name, value, passed, threshold):
    return {"name": name, "value": value, "threshold": threshold, "pass": bool(passed)}


def refine(cfg, level):
    """Config with ``dx`` and ``dt`` halved ``level`` times (samples at the same times)."""
    k = 2**level
    grid = Grid1D(cfg.grid.length, cfg.grid.cells * k)
    return replace(cfg, grid=grid, dt=cfg.dt / k, sample_every=cfg.sample_every * k)


def _residuals(cfg):
    traj = simulate(cfg, keep_states=False)
    return {
        "cells": cfg.grid.cells,
        "dt": cfg.dt,
        "residual_E_max": balance_residual_E(traj.ledger).max,
        "residual_J_max": balance_residual_J(traj.ledger).max,
    }


def energy_study(cfg, levels=2, jobs=1):
    """Balance residual maxima at ``levels`` successive refinements."""
    cfgs = [refine(cfg, k) for k in range(levels)]
    if jobs > 1 and levels > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, levels)) as pool:
            rows = list(pool.map(_residuals, cfgs))
    else:
        rows = [_residuals(c) for c in cfgs]
    ratios = []
    for a, b in zip(rows, rows[1:]):
        ratios.append({
            "E": a["residual_E_max"] / b["residual_E_max"] if b["residual_E_max"] > 0 else math.inf,
            "J": a["residual_J_max"] / b["residual_J_max"] if b["residual_J_max"] > 0 else math.inf,
        })
    return rows, ratios


def _write_run(spec, traj):
    paths = {"ledger": _path(spec, "ledger")}
    _ensure_dir(paths["ledger"])
    try:
        traj.ledger.to_csv(paths["ledger"])
    except OSError as exc:
        raise ArtifactError(f"cannot write {paths['ledger']}: {exc}") from exc
    snaps = []
    for ts, state in sorted(traj.snapshots.items()):
        path = os.path.join(spec.out_dir, f"snapshot_t{ts:g}.csv")
        try:
            write_snapshot(state, path)
        except OSError as exc:
            raise ArtifactError(f"cannot write {path}: {exc}") from exc
        snaps.append(path)
    paths["snapshots"] = snaps
    return paths


def _pde_run(spec):
    traj = simulate(spec.run)
    out = {"summary": asymptotics.summarize(traj), "artifacts": _write_run(spec, traj)}
    return out, []


def _pde_decay(spec):
    traj = simulate(spec.run)
    summary = asymptotics.summarize(traj)
    lo, hi = THRESHOLDS["kappa_range"]
    kappa = summary["kappa"]
    r2 = summary["r_squared"]
    checks = [
        _check("classified", summary["classification"],
               summary["classification"] in ("zero", "detached_plus", "detached_minus"),
               "zero|detached_plus|detached_minus"),
        _check("kappa", kappa, kappa is not None and lo <= kappa <= hi, [lo, hi]),
        _check("r_squared", r2, r2 is not None and r2 >= THRESHOLDS["r_squared_min"],
               THRESHOLDS["r_squared_min"]),
    ]
    return {"summary": summary, "artifacts": _write_run(spec, traj)}, checks


def _pde_linear_decay(spec):
    traj = simulate(spec.run)
    t = np.asarray(traj.t)
    G = np.asarray(traj.ledger.G)
    gap = float(np.max(np.abs(G / G[0] - np.exp(-t))))
    hsq = np.array([h1_norm(s.u, s.grid.dx) ** 2 + l2_sq(s.v, s.grid.dx) for s in traj.states])
    slack = THRESHOLDS["linear_contraction_slack"]
    bound = 3.0 * hsq[0] * np.exp(-t) * (1.0 + slack)
    worst = float(np.max(hsq / bound))
    checks = [
        _check("G_ratio_gap", gap, gap <= THRESHOLDS["linear_G_gap"], THRESHOLDS["linear_G_gap"]),
        _check("contraction_ratio", worst, worst <= 1.0, 1.0),
    ]
    summary = {"G_ratio_gap": gap, "contraction_ratio_max": worst,
               "residual_E_max": balance_residual_E(traj.ledger).max}
    return {"summary": summary, "artifacts": _write_run(spec, traj)}, checks


def _pde_verify_energy(spec, jobs=1):
    rows, ratios = energy_study(spec.run, spec.levels, jobs)
    tol = THRESHOLDS["energy_residual_max"]
    need = THRESHOLDS["energy_ratio_min"]
    checks = [
        _check("residual_E_level0", rows[0]["residual_E_max"], rows[0]["residual_E_max"] <= tol, tol),
        _check("residual_J_level0", rows[0]["residual_J_max"], rows[0]["residual_J_max"] <= tol, tol),
    ]
    for k, r in enumerate(ratios):
        checks.append(_check(f"ratio_E_{k}_{k + 1}", r["E"], r["E"] >= need, need))
        checks.append(_check(f"ratio_J_{k}_{k + 1}", r["J"], r["J"] >= need, need))
    return {"summary": {"levels": rows, "ratios": ratios}, "artifacts": {}}, checks


def _ode_run(spec):
    o = spec.ode
    traj = solve_exact(o.z0, o.w0, OdeParams(o.sigma), o.t_max)
    n = int(math.floor(o.t_max / o.dt + 1e-9))
    t = o.dt * np.arange(n + 1)
    z, w = traj.evaluate(t)
    path = write_csv(_path(spec, "csv"), ("t", "z", "w", "regime"),
                     zip(t, z, w, traj.regimes(t)))
    summary = {
        "case_trace": traj.case_trace,
        "event_times": traj.event_times,
        "z_inf": traj.z_inf,
        "middle_visits": traj.middle_visits,
        "band_crossings": traj.band_crossings,
    }
    return {"summary": summary, "artifacts": {"csv": path}}, []


def _ode_verify(spec):
    v = spec.ode_verify
    battery = DEFAULT_BATTERY if v.battery == "default" else v.battery
    rep = verify_uniform_decay(battery, v.sigmas, v.t_max)
    report = rep.as_dict()
    path = write_json(_path(spec, "report"), report)
    ratio = float(np.max(rep.ratios))
    checks = [
        _check("M_finite", bool(np.all(np.isfinite(rep.M))), bool(np.all(np.isfinite(rep.M))), True),
        _check("envelope", rep.envelope_ok, rep.envelope_ok, True),
        _check("ratio_max_over_min", ratio, ratio <= THRESHOLDS["ode_ratio_max"], THRESHOLDS["ode_ratio_max"]),
        _check("middle_visits", int(rep.middle_visits.max()),
               rep.middle_visits.max() <= THRESHOLDS["ode_middle_visits_max"],
               THRESHOLDS["ode_middle_visits_max"]),
        _check("band_crossings", int(rep.band_crossings.max()),
               rep.band_crossings.max() <= THRESHOLDS["ode_band_crossings_max"],
               THRESHOLDS["ode_band_crossings_max"]),
    ]
    summary = {"M": rep.M, "ratio_max_over_min": rep.ratios, "R": rep.R, "sigmas": rep.sigmas}
    return {"summary": summary, "artifacts": {"report": path}}, checks


def _potential_table(spec):
    tb = spec.table
    u, f, df = table(PotentialParams(tb.u_star, tb.sigma), tb.start, tb.stop, tb.step)
    path = write_csv(_path(spec, "table"), ("u", "phi", "dphi"), zip(u, f, df))
    return {"summary": {"rows": int(u.size)}, "artifacts": {"csv": path}}, []


_RUNNERS = {
    "pde-run": _pde_run,
    "pde-decay": _pde_decay,
    "pde-linear-decay": _pde_linear_decay,
    "pde-verify-energy": _pde_verify_energy,
    "ode-run": _ode_run,
    "ode-verify": _ode_verify,
    "potential-table": _potential_table,
}

VERIFY_KINDS = ("pde-verify-energy", "pde-decay", "pde-linear-decay", "ode-verify")


def run_experiment(spec, jobs=1):
    """Execute ``spec``, write artifacts and the summary; return the exit status.

    The status is 1 iff a verify kind has a failing check, else 0. Errors
    in the run itself propagate as exceptions.
    """
    from .config import emit

    runner = _RUNNERS[spec.kind]
    if spec.kind == "pde-verify-energy":
        result, checks = runner(spec, jobs)
    else:
        result, checks = runner(spec)
    passed = all(c["pass"] for c in checks)
    payload = {
        "kind": spec.kind,
        "config": emit(spec),
        "summary": result["summary"],
        "artifacts": result["artifacts"],
        "checks": checks,
        "passed": passed,
    }
    path = write_json(_path(spec, "summary"), payload)
    for c in checks:
        log.info("%s %s: value=%s threshold=%s", "PASS" if c["pass"] else "FAIL",
                 c["name"], c["value"], c["threshold"])
    log.info("summary written to %s", path)
    if spec.kind in VERIFY_KINDS and not passed:
        return 1
    return 0
