"""Event-driven exact solver for the scalar damped adhesion spring.

The ODE ``z'' + z' + phi'(z) = 0`` with ``u_star = 1`` is linear on each of
the five regimes of the potential, so the trajectory is a chain of closed
forms glued at the regime boundaries ``+-1`` and ``+-(1 - 1/sigma)``:

* ``outer_*`` (``|z| >= 1``): free damped motion, ``z0 + w0 (1 - e^-s)``;
* ``middle_*`` (between the two boundaries): saddle around ``+-1`` with
  rates ``mu`` (unstable) and ``-lambda`` (stable);
* ``inner`` (``|z| <= 1 - 1/sigma``): underdamped oscillator with
  frequency ``omega = sqrt(7)/2``.

Boundary crossings are located by scanning the closed form (with all its
critical points inserted in the scan, so every scan cell is monotone) and
bisecting. An adaptive Runge-Kutta integrator of the full nonlinear ODE
serves as an independent reference.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConsistencyError, ParameterError, PreconditionError, StiffnessError
from .potential import PotentialParams, dphi, phi

__all__ = [
    "OdeParams",
    "CaseInfo",
    "Segment",
    "Event",
    "PiecewiseTrajectory",
    "DenseTrajectory",
    "classify_case",
    "regime_solution",
    "next_event",
    "solve_exact",
    "rk_oracle",
    "verify_uniform_decay",
    "DEFAULT_BATTERY",
    "case_battery",
    "OMEGA",
    "MAX_SEGMENTS",
]

OMEGA = math.sqrt(7.0) / 2.0
MAX_SEGMENTS = 8
SCAN_STEP = min(0.01, math.pi / (4.0 * OMEGA))
BISECT_TOL = 1e-13

REGIMES = ("outer_plus", "outer_minus", "middle_plus", "middle_minus", "inner")


@dataclass(frozen=True)
class OdeParams:
    """Steepness ``sigma`` of the potential; the threshold is fixed to 1."""

    sigma: float

    def __post_init__(self):
        s = float(self.sigma)
        if not (math.isfinite(s) and s > 1.0):
            # at sigma = 1 the potential vanishes identically
            raise ParameterError(f"sigma must be finite and > 1, got {self.sigma!r}")
        object.__setattr__(self, "sigma", s)

    @property
    def root(self):
        return math.sqrt(1.0 + 8.0 * (self.sigma - 1.0))

    @property
    def lam(self):
        """Decay rate of the stable direction on the middle band."""
        return 0.5 * (1.0 + self.root)

    @property
    def mu(self):
        """Growth rate of the unstable direction on the middle band."""
        return 0.5 * (self.root - 1.0)

    @property
    def omega(self):
        return OMEGA

    @property
    def edge(self):
        """Inner band edge ``1 - 1/sigma``."""
        return 1.0 - 1.0 / self.sigma

    @property
    def potential(self):
        return PotentialParams(1.0, self.sigma)


@dataclass(frozen=True)
class CaseInfo:
    label: str
    regime: str
    mirrored: bool
    # True for middle-band interior data, which the case list leaves out
    interior: bool = False


def classify_case(z, w, p):
    """Map ``(z, w)`` to its case label (I to VII) and starting regime."""
    mirrored = z < 0 or (z == 0 and w < 0)
    zz, ww = (-z, -w) if mirrored else (z, w)
    side = "minus" if mirrored else "plus"
    b = p.edge
    if zz >= 1.0:
        if ww > 0:
            return CaseInfo("I", f"outer_{side}", mirrored)
        if ww == 0:
            return CaseInfo("II", f"outer_{side}", mirrored)
        if zz == 1.0:
            return CaseInfo("V", f"middle_{side}", mirrored)
        if 1.0 - zz <= ww:
            return CaseInfo("III", f"outer_{side}", mirrored)
        return CaseInfo("IV", f"outer_{side}", mirrored)
    if zz > b:
        # the force at w = 0 points inward, as in case V
        label = "VII" if ww > 0 else "V"
        return CaseInfo(label, f"middle_{side}", mirrored, interior=True)
    if zz == b and ww > 0:
        return CaseInfo("VII", f"middle_{side}", mirrored)
    return CaseInfo("VI", "inner", mirrored)


@dataclass
class Segment:
    """Closed-form piece of a trajectory, valid on ``[t0, t1]``.

    ``coeffs`` holds the regime-specific constants: ``(z0, w0)`` for the
    outer regimes, ``(A, B)`` for ``z = 1 - A e^{mu s} - B e^{-lam s}`` on
    the middle band (sign-flipped on the minus side), and ``(z0, C)`` for
    ``z = e^{-s/2} (z0 cos(omega s) + C sin(omega s))`` on the inner band.
    """

    regime: str
    t0: float
    z0: float
    w0: float
    coeffs: tuple
    p: OdeParams
    t1: float = None
    label: str = ""

    def _sign(self):
        return -1.0 if self.regime.endswith("minus") else 1.0

    def state(self, s):
        """Position and velocity at local times ``s`` (array or scalar)."""
        s = np.asarray(s, dtype=float)
        if self.regime.startswith("outer"):
            z0, w0 = self.coeffs
            e = np.exp(-s)
            return z0 + w0 * (1.0 - e), w0 * e
        if self.regime.startswith("middle"):
            A, B = self.coeffs
            lam, mu = self.p.lam, self.p.mu
            ep = np.exp(mu * s)
            em = np.exp(-lam * s)
            sg = self._sign()
            return sg * (1.0 - A * ep - B * em), sg * (-A * mu * ep + B * lam * em)
        z0, C = self.coeffs
        env = np.exp(-0.5 * s)
        c = np.cos(OMEGA * s)
        sn = np.sin(OMEGA * s)
        z = env * (z0 * c + C * sn)
        w = env * ((OMEGA * C - 0.5 * z0) * c - (0.5 * C + OMEGA * z0) * sn)
        return z, w

    def limit(self):
        """Limit of the closed form as ``s -> inf`` if it stays bounded, else None."""
        if self.regime.startswith("outer"):
            z0, w0 = self.coeffs
            return z0 + w0
        if self.regime == "inner":
            return 0.0
        A, _ = self.coeffs
        return self._sign() if A == 0.0 else None


def regime_solution(regime, z0, w0, p, t0=0.0):
    """Closed-form segment starting from ``(z0, w0)`` in ``regime``."""
    if regime not in REGIMES:
        raise PreconditionError(f"unknown regime {regime!r}")
    b = p.edge
    tol = 1e-12
    if regime == "outer_plus" and not z0 >= 1.0 - tol:
        raise PreconditionError(f"z0 = {z0} is not in outer_plus")
    if regime == "outer_minus" and not z0 <= -1.0 + tol:
        raise PreconditionError(f"z0 = {z0} is not in outer_minus")
    if regime == "middle_plus" and not (b - tol <= z0 <= 1.0 + tol):
        raise PreconditionError(f"z0 = {z0} is not in middle_plus")
    if regime == "middle_minus" and not (-1.0 - tol <= z0 <= -b + tol):
        raise PreconditionError(f"z0 = {z0} is not in middle_minus")
    if regime == "inner" and not abs(z0) <= b + tol:
        raise PreconditionError(f"z0 = {z0} is not in inner")

    if regime.startswith("outer"):
        coeffs = (z0, w0)
    elif regime.startswith("middle"):
        sg = -1.0 if regime.endswith("minus") else 1.0
        y0, v0 = sg * z0, sg * w0
        lam, mu = p.lam, p.mu
        A = (lam * (1.0 - y0) - v0) / (lam + mu)
        B = (v0 + mu * (1.0 - y0)) / (lam + mu)
        coeffs = (A, B)
    else:
        coeffs = (z0, (2.0 * w0 + z0) / (2.0 * OMEGA))
    return Segment(regime, float(t0), float(z0), float(w0), coeffs, p)


@dataclass(frozen=True)
class Event:
    """Regime exit: local time ``s``, boundary value and state on the boundary."""

    s: float
    boundary: float
    z: float
    w: float


def _critical_points(seg, horizon):
    """Local times in ``(0, horizon)`` where the velocity vanishes."""
    p = seg.p
    if seg.regime.startswith("middle"):
        A, B = seg.coeffs
        if A == 0.0 or B == 0.0:
            return []
        ratio = (B * p.lam) / (A * p.mu)
        if ratio <= 0:
            return []
        s = math.log(ratio) / (p.lam + p.mu)
        return [s] if 0 < s < horizon else []
    if seg.regime == "inner":
        z0, C = seg.coeffs
        a = OMEGA * C - 0.5 * z0
        d = -(0.5 * C + OMEGA * z0)
        # a cos(theta) + d sin(theta) = 0
        theta = math.atan2(-a, d) % math.pi
        s0 = theta / OMEGA
        period = math.pi / OMEGA
        n = int(horizon / period) + 2
        pts = [s0 + k * period for k in range(n)]
        return [s for s in pts if 0 < s < horizon]
    return []


def _boundaries(seg):
    """``(value, direction)`` pairs; ``direction`` is +1 when exit is upward."""
    b = seg.p.edge
    if seg.regime == "outer_plus":
        return [(1.0, -1)]
    if seg.regime == "outer_minus":
        return [(-1.0, +1)]
    if seg.regime == "middle_plus":
        return [(1.0, +1), (b, -1)]
    if seg.regime == "middle_minus":
        return [(-b, +1), (-1.0, -1)]
    return [(b, +1), (-b, -1)]


def _margins(seg, s):
    """Signed distance to each boundary, positive inside the regime."""
    z, _ = seg.state(s)
    return [(val - z) if d > 0 else (z - val) for val, d in _boundaries(seg)]


def _horizon(seg):
    """Local time beyond which the closed form provably never exits; None if it never does."""
    p = seg.p
    if seg.regime.startswith("outer"):
        lim = seg.limit()
        if (seg.regime == "outer_plus" and lim >= 1.0) or (seg.regime == "outer_minus" and lim <= -1.0):
            return None
        # the exit exists; grow the horizon until it is bracketed
        h = 1.0
        while min(_margins(seg, h)) >= 0:
            h *= 2.0
            if h > 1e6:
                raise ConsistencyError("outer segment exit not bracketed")
        return h
    if seg.regime.startswith("middle"):
        A, B = seg.coeffs
        if A == 0.0:
            return None
        # once |A| e^{mu s} exceeds the band width plus |B| the state is outside
        return max(math.log((1.0 / p.sigma + abs(B)) / abs(A)) / p.mu, 0.0) * 1.01 + SCAN_STEP
    z0, C = seg.coeffs
    R = math.hypot(z0, C)
    if R <= p.edge:
        return None
    return 2.0 * math.log(R / p.edge) + SCAN_STEP


def next_event(seg, p=None, horizon=None):
    """First boundary crossing of a segment, or None if it stays in its regime.

    ``horizon`` caps the search (local time); by default the provable
    no-exit horizon of the closed form is used.
    """
    h = _horizon(seg)
    if h is None:
        return None
    if horizon is not None:
        h = min(h, horizon)
    grid = np.arange(0.0, h, SCAN_STEP)
    nodes = np.unique(np.concatenate([grid, _critical_points(seg, h), [h]]))
    bounds = _boundaries(seg)
    z, _ = seg.state(nodes)
    margins = np.array([(val - z) if d > 0 else (z - val) for val, d in bounds])
    # the start lies in the regime (possibly on its boundary) by construction
    margins[:, 0] = np.abs(margins[:, 0]) + 1.0
    outside = margins < 0
    hits = np.nonzero(outside.any(axis=0))[0]
    if hits.size == 0:
        return None
    k = hits[0]
    which = int(np.argmax(outside[:, k]))
    val, d = bounds[which]
    lo, hi = nodes[k - 1], nodes[k]

    def margin(s):
        zz, _ = seg.state(s)
        return float((val - zz) if d > 0 else (zz - val))

    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if margin(mid) >= 0:
            lo = mid
        else:
            hi = mid
    s_event = 0.5 * (lo + hi)
    _, w = seg.state(s_event)
    return Event(float(s_event), val, val, float(w))


@dataclass
class PiecewiseTrajectory:
    """Chain of closed-form segments from one initial datum."""

    z0: float
    w0: float
    p: OdeParams
    segments: list
    case_trace: list
    z_inf: float = None
    t_max: float = None

    def evaluate(self, t):
        """``(z, w)`` at times ``t`` (array)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        z = np.empty_like(t)
        w = np.empty_like(t)
        starts = np.array([seg.t0 for seg in self.segments])
        idx = np.searchsorted(starts, t, side="right") - 1
        idx = np.clip(idx, 0, len(self.segments) - 1)
        for i, seg in enumerate(self.segments):
            m = idx == i
            if m.any():
                z[m], w[m] = seg.state(t[m] - seg.t0)
        return z, w

    def regimes(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        starts = np.array([seg.t0 for seg in self.segments])
        idx = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(self.segments) - 1)
        return [self.segments[i].regime for i in idx]

    @property
    def event_times(self):
        return [seg.t1 for seg in self.segments if seg.t1 is not None]

    @property
    def middle_visits(self):
        return sum(1 for seg in self.segments if seg.regime.startswith("middle"))

    @property
    def band_crossings(self):
        """Inner segments that enter at one band edge and leave at the opposite one."""
        b = self.p.edge
        n = 0
        for i, seg in enumerate(self.segments):
            if seg.regime != "inner" or seg.t1 is None or i + 1 >= len(self.segments):
                continue
            z_start = seg.z0
            z_end = self.segments[i + 1].z0
            if abs(abs(z_start) - b) < 1e-12 and abs(z_end + z_start) < 1e-12:
                n += 1
        return n

    def gluing_gaps(self):
        """Largest position and velocity mismatch across each segment join."""
        gaps = []
        for a, nxt in zip(self.segments, self.segments[1:]):
            za, wa = a.state(a.t1 - a.t0)
            gaps.append((abs(float(za) - nxt.z0), abs(float(wa) - nxt.w0)))
        return gaps


def solve_exact(z0, w0, p, t_max=30.0):
    """Chain closed forms from ``(z0, w0)`` until the terminal regime.

    The chain always continues to the segment with no further exit, so that
    ``z_inf`` is the true limit even if the last event lies past ``t_max``.
    """
    if not (math.isfinite(z0) and math.isfinite(w0)):
        raise PreconditionError("initial data must be finite")
    if not t_max > 0:
        raise PreconditionError("t_max must be positive")
    t = 0.0
    z, w = float(z0), float(w0)
    segments = []
    trace = []
    while True:
        info = classify_case(z, w, p)
        seg = regime_solution(info.regime, z, w, p, t0=t)
        seg.label = info.label
        trace.append(info.label)
        segments.append(seg)
        if len(segments) > MAX_SEGMENTS:
            raise ConsistencyError(
                f"more than {MAX_SEGMENTS} segments from ({z0}, {w0}), sigma={p.sigma}: "
                f"trace {trace}"
            )
        ev = next_event(seg, p)
        if ev is None:
            break
        seg.t1 = t + ev.s
        t = seg.t1
        z, w = ev.z, ev.w
    return PiecewiseTrajectory(
        float(z0), float(w0), p, segments, trace, segments[-1].limit(), float(t_max)
    )


@dataclass
class DenseTrajectory:
    """Output of :func:`rk_oracle`: a continuous interpolant plus the step record."""

    t: np.ndarray
    y: np.ndarray
    sol: object
    n_rejected: int = 0

    def evaluate(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        y = self.sol(t)
        return y[0], y[1]


def rk_oracle(z0, w0, p, t_max, tol=1e-10):
    """Dormand-Prince 5(4) integration of the full ODE with dense output."""
    if not 1e-12 <= tol <= 1e-6:
        raise PreconditionError(f"tol must lie in [1e-12, 1e-6], got {tol}")
    pot = p.potential

    def rhs(_t, y):
        return (y[1], -y[1] - dphi(pot, y[0]))

    res = solve_ivp(
        rhs,
        (0.0, float(t_max)),
        (float(z0), float(w0)),
        method="RK45",
        rtol=tol,
        atol=tol,
        dense_output=True,
    )
    if not res.success:
        raise StiffnessError(f"adaptive integration failed: {res.message}")
    return DenseTrajectory(res.t, res.y, res.sol)


def scalar_energy(z, w, p):
    """``w^2/2 + phi(z)`` for the ODE with threshold 1."""
    return 0.5 * np.asarray(w) ** 2 + phi(p.potential, z)


# initial data for the uniform-decay sweep; one or more per case of the analysis
DEFAULT_BATTERY = (
    (1.5, 1.0),
    (2.0, 0.0),
    (2.0, -0.5),
    (2.0, -3.0),
    (1.0, -1.0),
    (0.5, 0.0),
    (0.0, 0.7),
    (0.0, 3.0),
    (-1.5, -1.0),
    (-2.0, 3.0),
    (-0.3, -2.0),
)


def case_battery(sigma):
    """25 initial data covering cases I to VII (and mirrors) at a given sigma."""
    b = 1.0 - 1.0 / sigma
    return [
        (1.5, 1.0),       # I
        (-1.5, -1.0),     # I mirrored
        (1.0, 0.5),       # I from the threshold
        (2.0, 0.0),       # II
        (-3.0, 0.0),      # II mirrored
        (2.0, -0.5),      # III
        (3.0, -2.0),      # III, limit exactly 1
        (-2.0, 0.5),      # III mirrored
        (2.0, -3.0),      # IV
        (1.2, -4.0),      # IV, fast
        (-2.0, 3.0),      # IV mirrored
        (1.0, -1.0),      # V
        (1.0, -0.05),     # V, slow
        (-1.0, 2.0),      # V mirrored
        (0.5 * b, 0.0),   # VI at rest
        (0.0, 0.7),       # VI
        (0.0, 3.0),       # VI, escapes
        (-0.3, -2.0),     # VI, escapes downward
        (b, 0.0),         # VI on the band edge
        (b, -1.0),        # VI on the band edge moving in
        (-b, 0.5),        # VI on the lower edge moving in
        (b, 2.0),         # VII
        (b, 0.05),        # VII, falls back
        (-b, -2.0),       # VII mirrored
        (0.0, -5.0),      # VI, large kick
    ]


@dataclass
class DecayReport:
    battery: list
    sigmas: list
    M: np.ndarray
    z_inf: np.ndarray
    ratios: np.ndarray
    traces: dict = field(default_factory=dict)
    middle_visits: np.ndarray = None
    band_crossings: np.ndarray = None
    envelope_ok: bool = True

    @property
    def R(self):
        return float(np.max(np.abs(self.z_inf)))

    def as_dict(self):
        return {
            "battery": [list(b) for b in self.battery],
            "sigmas": list(self.sigmas),
            "M": self.M.tolist(),
            "z_inf": self.z_inf.tolist(),
            "ratio_max_over_min": self.ratios.tolist(),
            "R": self.R,
            "middle_visits": self.middle_visits.tolist(),
            "band_crossings": self.band_crossings.tolist(),
            "envelope_ok": self.envelope_ok,
            "case_traces": {f"{k[0]},{k[1]},{k[2]:g}": v for k, v in self.traces.items()},
        }


def verify_uniform_decay(battery=DEFAULT_BATTERY, sigmas=(10.0, 100.0, 1000.0, 10000.0),
                         t_max=30.0, dt=0.01, floor=1e-13):
    """Measure ``M(sigma) = max_t |z(t) - z_inf| e^{t/2}`` over a battery.

    Samples where ``|z - z_inf| < floor`` are dropped: the envelope factor
    would only amplify round-off there.
    """
    battery = [tuple(map(float, b)) for b in battery]
    sigmas = [float(s) for s in sigmas]
    t = np.arange(0.0, t_max + 0.5 * dt, dt)
    grow = np.exp(0.5 * t)
    M = np.zeros((len(battery), len(sigmas)))
    zinf = np.zeros_like(M)
    mids = np.zeros(M.shape, dtype=int)
    cross = np.zeros(M.shape, dtype=int)
    traces = {}
    envelope_ok = True
    for i, (z0, w0) in enumerate(battery):
        for j, s in enumerate(sigmas):
            traj = solve_exact(z0, w0, OdeParams(s), t_max)
            if traj.z_inf is None:
                raise ConsistencyError(f"no limit for ({z0}, {w0}) at sigma={s}")
            z, _ = traj.evaluate(t)
            dev = np.abs(z - traj.z_inf)
            keep = dev >= floor
            M[i, j] = float(np.max(dev[keep] * grow[keep])) if keep.any() else 0.0
            envelope_ok &= bool(np.all(dev[keep] <= M[i, j] / grow[keep] * (1 + 1e-12)))
            envelope_ok &= bool(np.isfinite(M[i, j]))
            zinf[i, j] = traj.z_inf
            mids[i, j] = traj.middle_visits
            cross[i, j] = traj.band_crossings
            traces[(z0, w0, s)] = list(traj.case_trace)
    lo = M.min(axis=1)
    ratios = np.where(lo > 0, M.max(axis=1) / np.where(lo > 0, lo, 1.0), 1.0)
    return DecayReport(battery, sigmas, M, zinf, ratios, traces, mids, cross, envelope_ok)
