"""Discrete energy functionals and the balance ledger.

Quadratures are tied to the stencil: trapezoid weights on the nodes for
L2 terms, cell sums of forward differences for gradient terms. With these
weights the mirror-node Laplacian is exactly minus the gradient of the
discrete Dirichlet energy, so the semi-discrete system satisfies both
balance identities exactly and the residuals only measure time error.
"""

import csv
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ParameterError, PreconditionError
from .potential import phi

__all__ = [
    "l2_sq",
    "l2_dot",
    "grad_sq",
    "h1_norm",
    "mean",
    "energy_E",
    "functional_J",
    "functional_G",
    "functional_G_lambda",
    "EnergyLedger",
    "LEDGER_COLUMNS",
    "BalanceProfile",
    "balance_residual_E",
    "balance_residual_J",
]

LEDGER_COLUMNS = ("t", "E", "J", "G", "G_lambda", "D", "S", "mean_u", "h1_dev")


def _weights(n, dx):
    w = np.full(n, dx)
    w[0] = w[-1] = 0.5 * dx
    return w


def l2_dot(a, b, dx):
    """Trapezoid approximation of the L2 inner product on the nodes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(dx * (np.dot(a[1:-1], b[1:-1]) + 0.5 * (a[0] * b[0] + a[-1] * b[-1])))


def l2_sq(a, dx):
    return l2_dot(a, a, dx)


def grad_sq(u, dx):
    """Squared L2 norm of the gradient, from forward differences per cell."""
    d = np.diff(np.asarray(u, dtype=float))
    return float(np.dot(d, d) / dx)


def h1_norm(u, dx):
    return float(np.sqrt(l2_sq(u, dx) + grad_sq(u, dx)))


def mean(u, dx):
    u = np.asarray(u, dtype=float)
    length = dx * (u.size - 1)
    return float(np.sum(_weights(u.size, dx) * u) / length)


def _potential_integral(u, dx, p, force):
    if force == "linear":
        return 0.5 * l2_sq(u, dx)
    return float(np.sum(_weights(u.size, dx) * phi(p, u)))


def energy_E(s, p, force="nonlinear"):
    """Kinetic plus gradient plus potential energy of a state.

    With ``force="linear"`` the potential term is ``u**2/2``, the energy of
    the linear homogeneous problem.
    """
    dx = s.grid.dx
    return 0.5 * l2_sq(s.v, dx) + 0.5 * grad_sq(s.u, dx) + _potential_integral(s.u, dx, p, force)


def functional_J(s):
    """Half the squared L2 norm of ``u`` plus ``<u, v>``."""
    dx = s.grid.dx
    return 0.5 * l2_sq(s.u, dx) + l2_dot(s.u, s.v, dx)


def functional_G(s):
    """Lyapunov functional of the linear homogeneous problem (decays like e^-t)."""
    dx = s.grid.dx
    return 0.5 * (l2_sq(s.v, dx) + grad_sq(s.u, dx) + l2_sq(s.u, dx) + l2_dot(s.u, s.v, dx))


def functional_G_lambda(s, lam, u_inf, p):
    """Energy relative to the constant state ``u_inf``, tilted by ``lam <u - u_inf, v>``."""
    if not 0.0 < lam < 1.0:
        raise ParameterError(f"lambda must lie in (0, 1), got {lam}")
    dx = s.grid.dx
    u = np.asarray(s.u, dtype=float)
    w = _weights(u.size, dx)
    pot = float(np.sum(w * (phi(p, u) - phi(p, u_inf))))
    return (
        0.5 * l2_sq(s.v, dx)
        + 0.5 * grad_sq(u, dx)
        + pot
        + lam * l2_dot(u - u_inf, s.v, dx)
    )


@dataclass
class EnergyLedger:
    """Per-sample time series of functionals and accumulated integrals.

    The CSV columns are those in ``LEDGER_COLUMNS``. The remaining fields
    (``u_min``, ``u_max``, ``v_norm``) are kept in memory for the analyses
    that need the range of the solution.
    """

    t: np.ndarray
    E: np.ndarray
    J: np.ndarray
    G: np.ndarray
    G_lambda: np.ndarray
    D: np.ndarray
    S: np.ndarray
    mean_u: np.ndarray
    h1_dev: np.ndarray
    u_min: np.ndarray = field(default_factory=lambda: np.empty(0))
    u_max: np.ndarray = field(default_factory=lambda: np.empty(0))
    v_norm: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __len__(self):
        return len(self.t)

    @classmethod
    def from_rows(cls, rows):
        names = [f.name for f in fields(cls)]
        cols = {name: [] for name in names}
        for row in rows:
            for name in names:
                if name in row:
                    cols[name].append(row[name])
        return cls(**{k: np.asarray(v, dtype=float) for k, v in cols.items()})

    def row(self, i):
        return {name: float(getattr(self, name)[i]) for name in LEDGER_COLUMNS}

    def slice(self, sl):
        out = {}
        for f in fields(self):
            arr = getattr(self, f.name)
            out[f.name] = arr[sl] if arr.size else arr
        return EnergyLedger(**out)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(LEDGER_COLUMNS)
            for i in range(len(self)):
                writer.writerow([repr(float(getattr(self, c)[i])) for c in LEDGER_COLUMNS])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            rows = [{k: float(v) for k, v in r.items()} for r in reader]
        return cls.from_rows(rows)


@dataclass
class BalanceProfile:
    """Relative residual of a balance identity at each sample."""

    t: np.ndarray
    residual: np.ndarray

    @property
    def max(self):
        return float(np.max(self.residual))


def _require_samples(ledger):
    if len(ledger) < 2:
        raise PreconditionError("balance residuals need at least 2 ledger samples")


def balance_residual_E(ledger):
    """Residual of ``E(t) + D(t) = E(0)`` relative to ``E(0)``."""
    _require_samples(ledger)
    scale = max(ledger.E[0], 1e-12)
    r = np.abs(ledger.E + ledger.D - ledger.E[0]) / scale
    return BalanceProfile(np.asarray(ledger.t), r)


def balance_residual_J(ledger):
    """Residual of ``J(t) + S(t) = J(0)`` relative to ``|J(0)| + E(0)``."""
    _require_samples(ledger)
    scale = max(abs(ledger.J[0]) + ledger.E[0], 1e-12)
    r = np.abs(ledger.J + ledger.S - ledger.J[0]) / scale
    return BalanceProfile(np.asarray(ledger.t), r)
