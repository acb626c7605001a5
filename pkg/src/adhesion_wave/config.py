"""Strict JSON configuration for runs and experiments.

Unknown keys are rejected everywhere: a typo in ``sigma`` or ``dt`` should
stop the run rather than silently fall back to a default.
"""

import json
import os
from dataclasses import dataclass, field

from .errors import AdhesionWaveError, ConfigError
from .pde import Grid1D, InitialData, Profile, RunConfig, cfl_limit
from .potential import PotentialParams

__all__ = [
    "KINDS",
    "OdeSettings",
    "OdeVerifySettings",
    "TableSettings",
    "ExperimentSpec",
    "parse_run_config",
    "emit_run_config",
    "parse_config",
    "emit",
    "load_json",
]

KINDS = (
    "pde-run",
    "pde-verify-energy",
    "pde-decay",
    "pde-linear-decay",
    "ode-run",
    "ode-verify",
    "potential-table",
)


def _check_keys(doc, allowed, where, required=()):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object, got {type(doc).__name__}")
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}; allowed: {sorted(allowed)}")
    missing = [k for k in required if k not in doc]
    if missing:
        raise ConfigError(f"{where}: missing required key(s) {missing}")


def _number(doc, key, where, default=None, integer=False):
    if key not in doc:
        if default is None:
            raise ConfigError(f"{where}.{key}: required")
        return default
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {val!r}")
    if integer:
        if int(val) != val:
            raise ConfigError(f"{where}.{key}: expected an integer, got {val!r}")
        return int(val)
    return float(val)


_PROFILE_KEYS = ("kind", "amplitude", "mode", "center", "width", "offset", "path")


def _parse_profile(doc, where):
    _check_keys(doc, _PROFILE_KEYS, where)
    kw = {}
    if "kind" in doc:
        kw["kind"] = doc["kind"]
    for key in ("amplitude", "center", "width", "offset"):
        if key in doc:
            kw[key] = _number(doc, key, where)
    if "mode" in doc:
        kw["mode"] = _number(doc, "mode", where, integer=True)
    if "path" in doc:
        kw["path"] = str(doc["path"])
    try:
        return Profile(**kw)
    except AdhesionWaveError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _emit_profile(p):
    out = {"kind": p.kind}
    defaults = Profile()
    for key in _PROFILE_KEYS[1:]:
        val = getattr(p, key)
        if val != getattr(defaults, key):
            out[key] = val
    return out


_RUN_KEYS = (
    "potential",
    "grid",
    "dt",
    "t_final",
    "initial",
    "sample_every",
    "force",
    "lambda",
    "u_ref",
    "snapshot_times",
)


def parse_run_config(doc, where="run"):
    """Build a validated :class:`RunConfig` from its JSON object."""
    _check_keys(doc, _RUN_KEYS, where, required=("potential", "grid", "t_final"))
    pot = doc["potential"]
    _check_keys(pot, ("u_star", "sigma"), f"{where}.potential", required=("u_star", "sigma"))
    try:
        potential = PotentialParams(
            _number(pot, "u_star", f"{where}.potential"), _number(pot, "sigma", f"{where}.potential")
        )
    except AdhesionWaveError as exc:
        raise ConfigError(f"{where}.potential: {exc}") from exc
    g = doc["grid"]
    _check_keys(g, ("length", "cells"), f"{where}.grid", required=("length", "cells"))
    try:
        grid = Grid1D(_number(g, "length", f"{where}.grid"), _number(g, "cells", f"{where}.grid", integer=True))
    except AdhesionWaveError as exc:
        raise ConfigError(f"{where}.grid: {exc}") from exc

    limit = cfl_limit(grid, potential)
    dt = _number(doc, "dt", where, default=0.5 * limit)
    if dt > limit * (1 + 1e-12):
        raise ConfigError(f"{where}.dt = {dt:g} exceeds cfl_limit = {limit:.6g}")

    init = doc.get("initial", {})
    _check_keys(init, ("u", "v"), f"{where}.initial")
    initial = InitialData(
        u=_parse_profile(init.get("u", {}), f"{where}.initial.u"),
        v=_parse_profile(init.get("v", {}), f"{where}.initial.v"),
    )
    snaps = doc.get("snapshot_times", [])
    if not isinstance(snaps, list):
        raise ConfigError(f"{where}.snapshot_times: expected a list")
    force = doc.get("force", "nonlinear")
    if not isinstance(force, str):
        raise ConfigError(f"{where}.force: expected a string")
    try:
        return RunConfig(
            potential=potential,
            grid=grid,
            dt=dt,
            t_final=_number(doc, "t_final", where),
            initial=initial,
            sample_every=_number(doc, "sample_every", where, default=10, integer=True),
            force=force,
            lam=_number(doc, "lambda", where, default=0.5),
            u_ref=_number(doc, "u_ref", where, default=0.0),
            snapshot_times=tuple(float(s) for s in snaps),
        )
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def emit_run_config(cfg):
    return {
        "potential": {"u_star": cfg.potential.u_star, "sigma": cfg.potential.sigma},
        "grid": {"length": cfg.grid.length, "cells": cfg.grid.cells},
        "dt": cfg.dt,
        "t_final": cfg.t_final,
        "initial": {"u": _emit_profile(cfg.initial.u), "v": _emit_profile(cfg.initial.v)},
        "sample_every": cfg.sample_every,
        "force": cfg.force,
        "lambda": cfg.lam,
        "u_ref": cfg.u_ref,
        "snapshot_times": list(cfg.snapshot_times),
    }


@dataclass(frozen=True)
class OdeSettings:
    z0: float
    w0: float
    sigma: float
    t_max: float = 30.0
    dt: float = 0.01


@dataclass(frozen=True)
class OdeVerifySettings:
    battery: object = "default"
    sigmas: tuple = (10.0, 100.0, 1000.0, 10000.0)
    t_max: float = 30.0


@dataclass(frozen=True)
class TableSettings:
    u_star: float
    sigma: float
    start: float
    stop: float
    step: float


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    run: RunConfig = None
    ode: OdeSettings = None
    ode_verify: OdeVerifySettings = None
    table: TableSettings = None
    out_dir: str = "."
    levels: int = 2
    outputs: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not 1 <= self.levels <= 4:
            raise ConfigError(f"levels must lie in [1, 4], got {self.levels}")
        needs = {
            "ode-run": "ode",
            "ode-verify": "ode_verify",
            "potential-table": "table",
        }.get(self.kind, "run")
        if getattr(self, needs) is None:
            raise ConfigError(f"kind {self.kind!r} requires the {needs!r} section")
        if self.kind == "pde-linear-decay" and self.run.force != "linear":
            raise ConfigError("pde-linear-decay requires run.force = 'linear'")


_SPEC_KEYS = ("kind", "run", "ode", "ode_verify", "table", "out_dir", "levels", "outputs")


def _writable_dir(path):
    probe = path
    while probe and not os.path.exists(probe):
        probe = os.path.dirname(probe)
    probe = probe or "."
    if not os.access(probe, os.W_OK):
        raise ConfigError(f"out_dir {path!r} is not writable")


def parse_config(document):
    """Validate an experiment document (JSON text or already-parsed dict)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc}") from exc
    _check_keys(document, _SPEC_KEYS, "experiment", required=("kind",))
    kw = {"kind": document["kind"]}
    if "run" in document:
        kw["run"] = parse_run_config(document["run"])
    if "ode" in document:
        d = document["ode"]
        _check_keys(d, ("z0", "w0", "sigma", "t_max", "dt"), "ode", required=("z0", "w0", "sigma"))
        kw["ode"] = OdeSettings(
            _number(d, "z0", "ode"),
            _number(d, "w0", "ode"),
            _number(d, "sigma", "ode"),
            _number(d, "t_max", "ode", default=30.0),
            _number(d, "dt", "ode", default=0.01),
        )
        if kw["ode"].sigma <= 1:
            raise ConfigError(f"ode.sigma must be > 1, got {kw['ode'].sigma}")
    if "ode_verify" in document:
        d = document["ode_verify"]
        _check_keys(d, ("battery", "sigmas", "t_max"), "ode_verify")
        battery = d.get("battery", "default")
        if battery != "default":
            if not (isinstance(battery, list) and all(isinstance(b, list) and len(b) == 2 for b in battery)):
                raise ConfigError("ode_verify.battery: 'default' or a list of [z0, w0] pairs")
            battery = tuple(tuple(float(x) for x in b) for b in battery)
        sigmas = d.get("sigmas", list(OdeVerifySettings.sigmas))
        if not isinstance(sigmas, list) or not sigmas or any(float(s) <= 1 for s in sigmas):
            raise ConfigError("ode_verify.sigmas: non-empty list of values > 1")
        kw["ode_verify"] = OdeVerifySettings(
            battery, tuple(float(s) for s in sigmas), _number(d, "t_max", "ode_verify", default=30.0)
        )
    if "table" in document:
        d = document["table"]
        keys = ("u_star", "sigma", "from", "to", "step")
        _check_keys(d, keys, "table", required=keys)
        kw["table"] = TableSettings(*(_number(d, k, "table") for k in keys))
        try:
            PotentialParams(kw["table"].u_star, kw["table"].sigma)
        except AdhesionWaveError as exc:
            raise ConfigError(f"table: {exc}") from exc
    if "out_dir" in document:
        kw["out_dir"] = str(document["out_dir"])
        _writable_dir(kw["out_dir"])
    if "levels" in document:
        kw["levels"] = _number(document, "levels", "experiment", integer=True)
    if "outputs" in document:
        if not isinstance(document["outputs"], dict):
            raise ConfigError("outputs: expected an object of file names")
        kw["outputs"] = dict(document["outputs"])
    return ExperimentSpec(**kw)


def emit(spec):
    """Inverse of :func:`parse_config`: ``parse_config(emit(s)) == s``."""
    out = {"kind": spec.kind, "out_dir": spec.out_dir, "levels": spec.levels}
    if spec.run is not None:
        out["run"] = emit_run_config(spec.run)
    if spec.ode is not None:
        o = spec.ode
        out["ode"] = {"z0": o.z0, "w0": o.w0, "sigma": o.sigma, "t_max": o.t_max, "dt": o.dt}
    if spec.ode_verify is not None:
        v = spec.ode_verify
        battery = v.battery if v.battery == "default" else [list(b) for b in v.battery]
        out["ode_verify"] = {"battery": battery, "sigmas": list(v.sigmas), "t_max": v.t_max}
    if spec.table is not None:
        t = spec.table
        out["table"] = {"u_star": t.u_star, "sigma": t.sigma, "from": t.start, "to": t.stop, "step": t.step}
    if spec.outputs:
        out["outputs"] = dict(spec.outputs)
    return out


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON: {exc}") from exc
