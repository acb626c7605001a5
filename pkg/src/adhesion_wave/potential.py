"""Piecewise-quadratic adhesion potential and its force.

The potential is elastic (``u**2``) near the origin, flattens over a band of
width ``1/sigma`` below the detachment threshold ``u_star`` and is constant
beyond it::

    phi(u) = u**2                                   |u| <= u_star - 1/sigma
           = c - (u_star*sigma - 1)*(u_star - |u|)**2   u_star - 1/sigma <= |u| <= u_star
           = c                                      |u| >= u_star

with plateau value ``c = u_star*(u_star - 1/sigma)``. Every function here works
on ``|u|`` and restores the sign afterwards, so evenness of ``phi`` and oddness
of ``dphi`` hold bit for bit.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, PreconditionError

__all__ = [
    "PotentialParams",
    "PropertyReport",
    "phi",
    "dphi",
    "breakpoints",
    "branch_gaps",
    "check_properties",
    "table",
]


@dataclass(frozen=True)
class PotentialParams:
    """Threshold ``u_star`` and steepness ``sigma`` of the potential."""

    u_star: float
    sigma: float

    def __post_init__(self):
        u_star, sigma = float(self.u_star), float(self.sigma)
        if not (np.isfinite(u_star) and np.isfinite(sigma)):
            raise ParameterError("u_star and sigma must be finite")
        if u_star <= 0:
            raise ParameterError(f"u_star must be positive, got {u_star}")
        if sigma <= 0:
            raise ParameterError(f"sigma must be positive, got {sigma}")
        if sigma * u_star <= 1:
            raise ParameterError(
                f"need sigma*u_star > 1, got sigma*u_star = {sigma * u_star:g}"
            )
        object.__setattr__(self, "u_star", u_star)
        object.__setattr__(self, "sigma", sigma)

    @property
    def inner_edge(self):
        """End of the elastic band, ``u_star - 1/sigma``."""
        return self.u_star - 1.0 / self.sigma

    @property
    def plateau(self):
        """Constant value of the potential beyond ``u_star``."""
        return self.u_star * (self.u_star - 1.0 / self.sigma)

    @property
    def stiffness(self):
        """Slope magnitude of the force on the middle band, ``u_star*sigma - 1``."""
        return self.u_star * self.sigma - 1.0

    @property
    def lipschitz(self):
        """Lipschitz constant of ``dphi``."""
        return 2.0 * max(1.0, self.stiffness)


def _as_array(u):
    a = np.asarray(u, dtype=float)
    return a, a.ndim == 0


def phi(p, u):
    """Evaluate the potential at ``u`` (scalar or array)."""
    a, scalar = _as_array(u)
    x = np.abs(a)
    edge = p.inner_edge
    out = np.where(
        x <= edge,
        x * x,
        np.where(x <= p.u_star, p.plateau - p.stiffness * (p.u_star - x) ** 2, p.plateau),
    )
    return float(out) if scalar else out


def dphi(p, u):
    """Evaluate the force ``phi'(u)`` (scalar or array)."""
    a, scalar = _as_array(u)
    x = np.abs(a)
    edge = p.inner_edge
    mag = np.where(
        x <= edge,
        2.0 * x,
        np.where(x <= p.u_star, 2.0 * p.stiffness * (p.u_star - x), 0.0),
    )
    out = np.copysign(mag, a)
    # copysign would turn the plateau zero into -0.0 on the negative side
    out = np.where(mag == 0.0, 0.0, out)
    return float(out) if scalar else out


def breakpoints(p):
    """The four branch boundaries, in increasing order."""
    e = p.inner_edge
    return (-p.u_star, -e, e, p.u_star)


def _branch_formulas(p, x):
    """All three branch expressions of (phi, dphi) at ``x >= 0``."""
    inner = (x * x, 2.0 * x)
    middle = (
        p.plateau - p.stiffness * (p.u_star - x) ** 2,
        2.0 * p.stiffness * (p.u_star - x),
    )
    outer = (p.plateau, 0.0)
    return inner, middle, outer


def branch_gaps(p):
    """Jump of phi and dphi across each breakpoint.

    Each jump is the difference between the two adjacent branch formulas
    evaluated exactly at the breakpoint. Returns a list of
    ``(breakpoint, phi_gap, dphi_gap)`` tuples.
    """
    gaps = []
    for b in breakpoints(p):
        x = abs(b)
        inner, middle, outer = _branch_formulas(p, x)
        left, right = (inner, middle) if x < p.u_star else (middle, outer)
        gaps.append((b, abs(left[0] - right[0]), abs(left[1] - right[1])))
    return gaps


@dataclass
class PropertyReport:
    """Outcome of :func:`check_properties` on one parameter set."""

    params: PotentialParams
    n_points: int
    bounded: bool
    sign_condition: bool
    concave_remainder: bool
    lipschitz: bool
    force_bound: bool
    max_abs_phi: float
    max_abs_dphi: float
    lipschitz_estimate: float
    notes: list = field(default_factory=list)

    @property
    def all_pass(self):
        return (
            self.bounded
            and self.sign_condition
            and self.concave_remainder
            and self.lipschitz
            and self.force_bound
        )

    def as_dict(self):
        return {
            "u_star": self.params.u_star,
            "sigma": self.params.sigma,
            "n_points": self.n_points,
            "bounded": self.bounded,
            "sign_condition": self.sign_condition,
            "concave_remainder": self.concave_remainder,
            "lipschitz": self.lipschitz,
            "force_bound": self.force_bound,
            "max_abs_phi": self.max_abs_phi,
            "max_abs_dphi": self.max_abs_dphi,
            "lipschitz_estimate": self.lipschitz_estimate,
            "all_pass": self.all_pass,
            "notes": list(self.notes),
        }


def check_properties(p, grid):
    """Check boundedness, sign, concavity and Lipschitz properties on a grid.

    Parameters
    ----------
    p : PotentialParams
    grid : array_like
        Sorted sample points. Must cover ``[-2*u_star, 2*u_star]`` with spacing
        no larger than ``1/(10*u_star*sigma)``.

    Returns
    -------
    PropertyReport
    """
    u = np.sort(np.asarray(grid, dtype=float).ravel())
    if u.size < 3:
        raise PreconditionError("grid needs more than a handful of points")
    max_spacing = 0.1 / (p.u_star * p.sigma)
    h = np.diff(u)
    if u[0] > -2 * p.u_star or u[-1] < 2 * p.u_star:
        raise PreconditionError(
            f"grid [{u[0]:g}, {u[-1]:g}] does not cover [-2u*, 2u*] = "
            f"[{-2 * p.u_star:g}, {2 * p.u_star:g}]"
        )
    if h.max() > max_spacing * (1 + 1e-9):
        raise PreconditionError(
            f"grid spacing {h.max():g} exceeds 1/(10 u* sigma) = {max_spacing:g}"
        )
    if np.any(h <= 0):
        raise PreconditionError("grid points must be distinct")

    eps = np.finfo(float).eps
    f = phi(p, u)
    g = dphi(p, u)
    notes = []

    bounded = bool(np.all(np.abs(f) <= p.u_star**2))
    sign_condition = bool(np.all(u * g >= 0.0))

    rem = f - u * u
    slopes = np.diff(rem) / h
    slope_tol = 64 * eps * max(1.0, np.abs(rem).max()) / h.min()
    concave_remainder = bool(np.all(np.diff(slopes) <= slope_tol))

    lip_est = float(np.max(np.abs(np.diff(g)) / h))
    lip_bound = 2.0 * p.stiffness
    lipschitz = lip_est <= max(lip_bound, 2.0) * (1 + 1e-9) + 64 * eps / h.min()
    if p.stiffness < 1.0:
        # inner branch slope 2 dominates when u_star*sigma < 2
        notes.append(
            f"Lip(dphi) is 2 on the elastic band, above 2(u* sigma - 1) = {lip_bound:g}"
        )

    max_force = float(np.abs(g).max())
    force_bound = max_force <= 2.0 * max(1.0, p.u_star) * (1 + 1e-12)
    if max_force > 2.0:
        notes.append(
            f"max|dphi| = {max_force:g} exceeds 2 (u* = {p.u_star:g} > 1); "
            "bound 2*max(1, u*) holds instead"
        )

    return PropertyReport(
        params=p,
        n_points=int(u.size),
        bounded=bounded,
        sign_condition=sign_condition,
        concave_remainder=concave_remainder,
        lipschitz=bool(lipschitz),
        force_bound=bool(force_bound),
        max_abs_phi=float(np.abs(f).max()),
        max_abs_dphi=max_force,
        lipschitz_estimate=lip_est,
        notes=notes,
    )


def table(p, start, stop, step):
    """Sample ``(u, phi, dphi)`` on ``start, start+step, ...`` up to ``stop``."""
    if step <= 0:
        raise ParameterError("step must be positive")
    if stop < start:
        raise ParameterError("stop must not precede start")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    u = start + step * np.arange(n)
    return u, phi(p, u), dphi(p, u)
