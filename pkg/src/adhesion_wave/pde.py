"""Finite-difference solver for the damped wave equation with adhesion force.

Solves ``u_tt - u_xx + u_t + phi'(u) = 0`` on ``(0, L)`` with homogeneous
Neumann conditions. Space uses second-order central differences with mirror
ghost nodes; time uses a Verlet splitting whose damping is treated by the
trapezoid rule (explicit in the first half kick, implicit in the second).
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels_py, kernels
from .energy import (
    EnergyLedger,
    energy_E,
    functional_G,
    functional_G_lambda,
    functional_J,
    h1_norm,
    l2_sq,
    mean,
)
from .errors import ConfigError, NumericalBlowupError, ParameterError, PreconditionError
from .potential import PotentialParams

__all__ = [
    "Grid1D",
    "PdeState",
    "Profile",
    "InitialData",
    "RunConfig",
    "Trajectory",
    "neumann_laplacian",
    "cfl_limit",
    "step",
    "simulate",
    "write_snapshot",
]

FORCES = {"nonlinear": kernels.FORCE_NONLINEAR, "linear": kernels.FORCE_LINEAR}


@dataclass(frozen=True)
class Grid1D:
    length: float
    cells: int

    def __post_init__(self):
        if not (isinstance(self.cells, (int, np.integer)) and self.cells >= 4):
            raise ParameterError(f"cells must be an integer >= 4, got {self.cells!r}")
        if not (math.isfinite(self.length) and self.length > 0):
            raise ParameterError(f"length must be positive, got {self.length!r}")
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "cells", int(self.cells))

    @property
    def dx(self):
        return self.length / self.cells

    @property
    def n_nodes(self):
        return self.cells + 1

    @property
    def x(self):
        return np.linspace(0.0, self.length, self.n_nodes)


@dataclass
class PdeState:
    grid: Grid1D
    t: float
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.u = np.ascontiguousarray(self.u, dtype=float)
        self.v = np.ascontiguousarray(self.v, dtype=float)
        n = self.grid.n_nodes
        if self.u.shape != (n,) or self.v.shape != (n,):
            raise ParameterError(
                f"u and v must have {n} entries, got {self.u.shape} and {self.v.shape}"
            )
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v))):
            raise ParameterError("state contains non-finite values")

    def copy(self):
        return PdeState(self.grid, self.t, self.u.copy(), self.v.copy())


_PROFILE_KINDS = ("constant", "cosine", "gaussian", "file")


@dataclass(frozen=True)
class Profile:
    """One initial field: constant, Neumann cosine mode, gaussian bump or file.

    Every analytic kind adds ``offset``. ``file`` reads a CSV with an ``x``
    column and a column named after the field (``u`` or ``v``) and
    interpolates it linearly onto the grid.
    """

    kind: str = "constant"
    amplitude: float = 0.0
    mode: int = 1
    center: float = 0.5
    width: float = 0.1
    offset: float = 0.0
    path: str = ""

    def __post_init__(self):
        if self.kind not in _PROFILE_KINDS:
            raise ParameterError(f"profile kind must be one of {_PROFILE_KINDS}, got {self.kind!r}")
        if self.kind == "cosine" and not (isinstance(self.mode, (int, np.integer)) and self.mode >= 0):
            raise ParameterError(f"cosine mode must be a non-negative integer, got {self.mode!r}")
        if self.kind == "gaussian" and not self.width > 0:
            raise ParameterError("gaussian width must be positive")
        if self.kind == "file" and not self.path:
            raise ParameterError("file profile needs a path")

    def evaluate(self, grid, name="u"):
        x = grid.x
        if self.kind == "constant":
            return np.full_like(x, self.offset)
        if self.kind == "cosine":
            return self.offset + self.amplitude * np.cos(self.mode * np.pi * x / grid.length)
        if self.kind == "gaussian":
            return self.offset + self.amplitude * np.exp(-(((x - self.center) / self.width) ** 2))
        with open(self.path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or "x" not in rows[0] or name not in rows[0]:
            raise ConfigError(f"{self.path}: need columns 'x' and '{name}'")
        xs = np.array([float(r["x"]) for r in rows])
        ys = np.array([float(r[name]) for r in rows])
        order = np.argsort(xs)
        return self.offset + np.interp(x, xs[order], ys[order])


@dataclass(frozen=True)
class InitialData:
    u: Profile = field(default_factory=Profile)
    v: Profile = field(default_factory=Profile)

    def state(self, grid):
        return PdeState(grid, 0.0, self.u.evaluate(grid, "u"), self.v.evaluate(grid, "v"))


def cfl_limit(g, p):
    """Largest admissible time step: half the wave CFL and half the force scale."""
    return 0.5 * min(g.dx, 1.0 / math.sqrt(1.0 + 2.0 * p.stiffness))


@dataclass(frozen=True)
class RunConfig:
    potential: PotentialParams
    grid: Grid1D
    dt: float
    t_final: float
    initial: InitialData = field(default_factory=InitialData)
    sample_every: int = 10
    force: str = "nonlinear"
    lam: float = 0.5
    u_ref: float = 0.0
    snapshot_times: tuple = ()

    def __post_init__(self):
        if self.force not in FORCES:
            raise ConfigError(f"force must be one of {sorted(FORCES)}, got {self.force!r}")
        if not (isinstance(self.sample_every, (int, np.integer)) and self.sample_every >= 1):
            raise ConfigError(f"sample_every must be an integer >= 1, got {self.sample_every!r}")
        if not self.t_final > 0:
            raise ConfigError(f"t_final must be positive, got {self.t_final!r}")
        if not 0.0 < self.lam < 1.0:
            raise ConfigError(f"lambda must lie in (0, 1), got {self.lam!r}")
        limit = cfl_limit(self.grid, self.potential)
        if not 0 < self.dt <= limit * (1 + 1e-12):
            raise ConfigError(f"dt = {self.dt:g} violates 0 < dt <= cfl_limit = {limit:.6g}")
        for ts in self.snapshot_times:
            if not 0 <= ts <= self.t_final:
                raise ConfigError(f"snapshot time {ts} outside [0, t_final]")

    @property
    def n_steps(self):
        return max(1, int(math.ceil(self.t_final / self.dt - 1e-9)))


def neumann_laplacian(s):
    """Discrete Laplacian of ``s.u`` with mirror ghost nodes at both ends."""
    return _kernels_py.laplacian(s.u, s.grid.dx)


def step(s, dt, p, force="nonlinear"):
    """Advance one step. Returns ``(new_state, v_mid)``.

    ``v_mid`` is the average of the old and new velocities; ``dt * ||v_mid||^2``
    is the dissipation booked for this step.
    """
    limit = cfl_limit(s.grid, p)
    if dt > limit * (1 + 1e-12):
        raise PreconditionError(f"dt = {dt:g} exceeds cfl_limit = {limit:.6g}")
    un, vn, vm = _kernels_py.step_arrays(
        s.u, s.v, s.grid.dx, dt, p.u_star, p.sigma, FORCES[force]
    )
    t_new = s.t + dt
    if not (np.all(np.isfinite(un)) and np.all(np.isfinite(vn))):
        raise NumericalBlowupError(int(round(t_new / dt)), t_new)
    return PdeState(s.grid, t_new, un, vn), vm


@dataclass
class Trajectory:
    """Sampled output of :func:`simulate`."""

    config: RunConfig
    ledger: EnergyLedger
    steps: np.ndarray
    states: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)

    @property
    def t(self):
        return self.ledger.t

    @property
    def final(self):
        return self.states[-1] if self.states else None


def _ledger_row(state, p, cfg, D, S):
    dx = state.grid.dx
    return {
        "t": state.t,
        "E": energy_E(state, p, cfg.force),
        "J": functional_J(state),
        "G": functional_G(state),
        "G_lambda": functional_G_lambda(state, cfg.lam, cfg.u_ref, p),
        "D": D,
        "S": S,
        "mean_u": mean(state.u, dx),
        "h1_dev": h1_norm(state.u - cfg.u_ref, dx),
        "u_min": float(state.u.min()),
        "u_max": float(state.u.max()),
        "v_norm": math.sqrt(l2_sq(state.v, dx)),
    }


def simulate(cfg, backend=None, keep_states=True):
    """Run a configuration to ``t_final`` and return the sampled trajectory.

    Samples are taken every ``cfg.sample_every`` steps and at the final step.
    Output is a deterministic function of ``cfg`` (and of ``backend``).
    """
    advance = kernels.get_advance(backend)
    mode = FORCES[cfg.force]
    p = cfg.potential
    grid = cfg.grid
    dt = cfg.dt
    n_steps = cfg.n_steps
    state = cfg.initial.state(grid)
    u = state.u.copy()
    v = state.v.copy()

    snap_steps = {min(n_steps, int(round(ts / dt))): ts for ts in cfg.snapshot_times}
    stops = set(range(0, n_steps + 1, cfg.sample_every)) | {n_steps} | set(snap_steps)
    stops = sorted(stops)

    D = 0.0
    S = 0.0
    rows = []
    steps = []
    states = []
    snapshots = {}
    k = 0
    for stop in stops:
        if stop > k:
            d_inc, s_inc, bad = advance(u, v, grid.dx, dt, stop - k, p.u_star, p.sigma, mode)
            if bad >= 0:
                raise NumericalBlowupError(k + bad + 1, (k + bad + 1) * dt)
            D += d_inc
            S += s_inc
            k = stop
        current = PdeState(grid, k * dt, u.copy(), v.copy())
        if k in snap_steps:
            snapshots[snap_steps[k]] = current
        if k % cfg.sample_every == 0 or k == n_steps:
            rows.append(_ledger_row(current, p, cfg, D, S))
            steps.append(k)
            if keep_states:
                states.append(current)
    ledger = EnergyLedger.from_rows(rows)
    return Trajectory(cfg, ledger, np.asarray(steps), states, snapshots)


def write_snapshot(state, path):
    """Write ``x,u,v`` columns of a state to CSV."""
    x = state.grid.x
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("x", "u", "v"))
        for row in zip(x, state.u, state.v):
            w.writerow([repr(float(c)) for c in row])
