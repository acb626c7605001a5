"""Long-time analysis of simulated trajectories.

Covers equilibrium detection, prediction of the limit modulus from the
limit of ``J``, exponential rate fits of deviation series and the check that
the spatial mean obeys ``z'' + z' = 0`` once the solution has detached.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .energy import functional_G_lambda, h1_norm, l2_dot, l2_sq
from .errors import ParameterError, PreconditionError
from .potential import dphi, phi

__all__ = [
    "EquilibriumReport",
    "DecayFit",
    "EllEstimate",
    "AverageOdeFit",
    "detect_equilibrium",
    "predict_u_inf_modulus",
    "ell_limit",
    "fit_decay",
    "deviation_series",
    "regime_entry_time",
    "decay_window",
    "fit_trajectory_decay",
    "average_ode_check",
    "g_lambda_series",
    "comparison_gap",
    "summarize",
]

CLASSIFICATIONS = ("zero", "detached_plus", "detached_minus", "critical_band", "undecided")


@dataclass
class EquilibriumReport:
    classification: str
    u_inf: float
    velocity_residual: float
    oscillation: float

    def as_dict(self):
        return asdict(self)


@dataclass
class DecayFit:
    kappa: float
    amplitude: float
    window: tuple
    r_squared: float
    series: str = ""
    n_samples: int = 0

    def as_dict(self):
        d = asdict(self)
        d["window"] = list(self.window)
        return d


@dataclass
class EllEstimate:
    value: float
    uncertainty: float
    n_samples: int


@dataclass
class AverageOdeFit:
    limit: float
    amplitude: float
    max_residual: float
    window: tuple


def _states(samples):
    return samples.states if hasattr(samples, "states") else list(samples)


def detect_equilibrium(samples, p, tol=1e-4, n_trailing=3):
    """Classify the rest state a trajectory has settled on.

    ``samples`` is a :class:`~adhesion_wave.pde.Trajectory` or a sequence of
    states. The trailing ``n_trailing`` states must all have velocity norm
    and spatial oscillation below ``tol``; otherwise the result is
    ``undecided``.
    """
    states = _states(samples)
    if n_trailing < 3 or len(states) < n_trailing:
        raise PreconditionError(f"need at least 3 trailing samples, got {len(states)}")
    tail = states[-n_trailing:]
    dx = tail[-1].grid.dx
    vres = max(math.sqrt(l2_sq(s.v, dx)) for s in tail)
    osc = max(float(s.u.max() - s.u.min()) for s in tail)
    last = tail[-1]
    length = last.grid.length
    u_inf = l2_dot(last.u, np.ones_like(last.u), dx) / length

    if vres > tol or osc > tol:
        label = "undecided"
    elif abs(u_inf) < tol:
        label = "zero"
    elif abs(abs(u_inf) - p.u_star) <= tol:
        label = "critical_band"
    elif u_inf > p.u_star + tol:
        label = "detached_plus"
    elif u_inf < -p.u_star - tol:
        label = "detached_minus"
    else:
        label = "undecided"
    return EquilibriumReport(label, float(u_inf), float(vres), float(osc))


def predict_u_inf_modulus(ell, domain_length):
    """Modulus of the limit constant implied by ``J -> ell``: ``sqrt(2 ell / L)``."""
    if ell < 0:
        raise ParameterError(f"ell must be non-negative, got {ell}")
    if domain_length <= 0:
        raise ParameterError("domain length must be positive")
    return math.sqrt(2.0 * ell / domain_length)


def ell_limit(ledger, fraction=0.1):
    """Average of ``J`` over the trailing ``fraction`` of samples."""
    n = len(ledger)
    if n == 0:
        raise PreconditionError("empty ledger")
    k = max(1, int(math.ceil(fraction * n)))
    tail = np.asarray(ledger.J[-k:])
    return EllEstimate(float(tail.mean()), float(tail.std()), k)


def fit_decay(t, y, window=None, series=""):
    """Least-squares fit of ``y ~ M exp(-kappa t)`` on a time window."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is None:
        window = (t[0], t[-1])
    t1, t2 = window
    if not t1 < t2:
        raise PreconditionError(f"window must satisfy t1 < t2, got {window}")
    idx = np.nonzero((t >= t1) & (t <= t2))[0]
    if idx.size < 10:
        raise PreconditionError(f"need >= 10 samples in window, got {idx.size}")
    bad = idx[~(y[idx] > 0)]
    if bad.size:
        raise PreconditionError(f"non-positive samples at indices {bad.tolist()}")
    tw = t[idx]
    ly = np.log(y[idx])
    A = np.column_stack([np.ones_like(tw), tw])
    (intercept, slope), *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = ly - (intercept + slope * tw)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(res**2)) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(
        kappa=float(-slope),
        amplitude=float(math.exp(intercept)),
        window=(float(t1), float(t2)),
        r_squared=r2,
        series=series,
        n_samples=int(idx.size),
    )


def deviation_series(trajectory, u_inf):
    """``||u - u_inf||_H1 + ||v||_L2`` at every stored sample."""
    out = []
    for s in trajectory.states:
        dx = s.grid.dx
        out.append(h1_norm(s.u - u_inf, dx) + math.sqrt(l2_sq(s.v, dx)))
    return np.asarray(out)


def _in_regime(ledger, p, classification):
    if classification == "zero":
        return np.maximum(np.abs(ledger.u_min), np.abs(ledger.u_max)) < p.inner_edge
    if classification == "detached_plus":
        return ledger.u_min > p.u_star
    if classification == "detached_minus":
        return ledger.u_max < -p.u_star
    raise PreconditionError(f"no regime to enter for classification {classification!r}")


def regime_entry_time(ledger, p, classification):
    """First sample time after which every sample lies in the limit's regime.

    For ``zero`` the regime is the elastic band, for ``detached_*`` the
    plateau on the matching side. Returns ``None`` if the final sample is
    still outside.
    """
    inside = _in_regime(ledger, p, classification)
    if not inside[-1]:
        return None
    outside = np.nonzero(~inside)[0]
    k = 0 if outside.size == 0 else outside[-1] + 1
    return float(ledger.t[k])


def decay_window(t, y, t_start, floor=1e-9):
    """Window from ``t_start`` to the last sample with ``y`` above ``floor``."""
    t = np.asarray(t)
    y = np.asarray(y)
    above = np.nonzero((y > floor) & (t >= t_start))[0]
    if above.size == 0:
        raise PreconditionError("series is below the floor over the whole window")
    # stop at the first dip under the floor: later samples are round-off
    run_end = above[0]
    while run_end + 1 < y.size and y[run_end + 1] > floor:
        run_end += 1
    return float(t_start), float(t[run_end])


def fit_trajectory_decay(trajectory, p, tol=1e-4, floor=1e-9, u_inf=None):
    """Detect the limit, locate regime entry and fit the deviation decay.

    Returns ``(EquilibriumReport, entry_time, DecayFit)``.
    """
    report = detect_equilibrium(trajectory, p, tol)
    if report.classification in ("critical_band", "undecided"):
        raise PreconditionError(
            f"cannot fit a rate for classification {report.classification!r}"
        )
    target = {"zero": 0.0}.get(report.classification, report.u_inf) if u_inf is None else u_inf
    entry = regime_entry_time(trajectory.ledger, p, report.classification)
    series = deviation_series(trajectory, target)
    window = decay_window(trajectory.t, series, entry, floor)
    fit = fit_decay(trajectory.t, series, window, series="h1_dev+v_l2")
    return report, entry, fit


def average_ode_check(trajectory, window, p=None):
    """Fit ``mean_u(t) = a + b exp(-t)`` on a window of a detached run.

    Every sample in the window must lie strictly beyond the threshold on one
    side; otherwise the mean is not expected to follow the free ODE.
    """
    ledger = trajectory.ledger
    p = p or trajectory.config.potential
    t = np.asarray(ledger.t)
    t1, t2 = window
    idx = np.nonzero((t >= t1) & (t <= t2))[0]
    if idx.size < 3:
        raise PreconditionError("need at least 3 samples in the window")
    plus = np.all(ledger.u_min[idx] > p.u_star)
    minus = np.all(ledger.u_max[idx] < -p.u_star)
    if not (plus or minus):
        raise PreconditionError(
            f"window [{t1:g}, {t2:g}] is not fully detached (|u| <= u* somewhere)"
        )
    tw = t[idx]
    m = np.asarray(ledger.mean_u)[idx]
    A = np.column_stack([np.ones_like(tw), np.exp(-tw)])
    (a, b), *_ = np.linalg.lstsq(A, m, rcond=None)
    res = m - (a + b * np.exp(-tw))
    return AverageOdeFit(float(a), float(b), float(np.max(np.abs(res))), (float(t1), float(t2)))


def g_lambda_series(trajectory, u_inf, lam=0.5, p=None):
    p = p or trajectory.config.potential
    return np.array([functional_G_lambda(s, lam, u_inf, p) for s in trajectory.states])


def comparison_gap(state, u_inf, p):
    """``<u - u_inf, phi'(u)> - 2 * int(phi(u) - phi(u_inf))``; non-negative in the pure regimes."""
    dx = state.grid.dx
    u = state.u
    pot = l2_dot(phi(p, u) - phi(p, u_inf), np.ones_like(u), dx)
    return l2_dot(u - u_inf, dphi(p, u), dx) - 2.0 * pot


def summarize(trajectory, p=None, tol=1e-4, floor=1e-9):
    """JSON-ready summary: classification, limit, ell, rate fit and residual maxima."""
    from .energy import balance_residual_E, balance_residual_J

    p = p or trajectory.config.potential
    report = detect_equilibrium(trajectory, p, tol)
    ell = ell_limit(trajectory.ledger)
    out = {
        "classification": report.classification,
        "u_inf": report.u_inf,
        "velocity_residual": report.velocity_residual,
        "oscillation": report.oscillation,
        "ell": ell.value,
        "ell_uncertainty": ell.uncertainty,
        "residual_E_max": balance_residual_E(trajectory.ledger).max,
        "residual_J_max": balance_residual_J(trajectory.ledger).max,
        "kappa": None,
        "M": None,
        "r_squared": None,
        "regime_entry_time": None,
    }
    if report.classification in ("zero", "detached_plus", "detached_minus"):
        out["regime_entry_time"] = regime_entry_time(trajectory.ledger, p, report.classification)
        try:
            _, _, fit = fit_trajectory_decay(trajectory, p, tol, floor)
        except PreconditionError:
            pass
        else:
            out.update(kappa=fit.kappa, M=fit.amplitude, r_squared=fit.r_squared)
    return out
