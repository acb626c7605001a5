import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from adhesion_wave.errors import ParameterError, PreconditionError
from adhesion_wave.ode import (
    DEFAULT_BATTERY,
    MAX_SEGMENTS,
    OdeParams,
    case_battery,
    classify_case,
    next_event,
    regime_solution,
    rk_oracle,
    scalar_energy,
    solve_exact,
    verify_uniform_decay,
)

P2 = OdeParams(2.0)


@pytest.mark.parametrize(
    "z, w, label, regime",
    [
        (1.5, 1.0, "I", "outer_plus"),
        (2.0, 0.0, "II", "outer_plus"),
        (2.0, -0.5, "III", "outer_plus"),
        (2.0, -3.0, "IV", "outer_plus"),
        (1.0, -1.0, "V", "middle_plus"),
        (0.0, 0.7, "VI", "inner"),
        (0.5, 1.0, "VII", "middle_plus"),
        (-1.5, -1.0, "I", "outer_minus"),
    ],
)
def test_classify(z, w, label, regime):
    info = classify_case(z, w, P2)
    assert (info.label, info.regime) == (label, regime)


def test_band_edge_at_rest_enters_inner():
    assert classify_case(P2.edge, 0.0, P2).regime == "inner"


def test_sigma_must_exceed_one():
    with pytest.raises(ParameterError):
        OdeParams(1.0)


def test_rates():
    # lam and mu solve r^2 - r - 2(sigma - 1) = 0 up to sign
    for s in (2.0, 10.0, 1e4):
        p = OdeParams(s)
        assert p.lam**2 - p.lam - 2 * (s - 1) == pytest.approx(0, abs=1e-9 * s)
        assert p.mu**2 + p.mu - 2 * (s - 1) == pytest.approx(0, abs=1e-9 * s)


def test_outer_limit():
    seg = regime_solution("outer_plus", 1.5, 1.0, P2)
    assert seg.limit() == 2.5
    assert next_event(seg, P2) is None


def test_regime_membership_checked():
    with pytest.raises(PreconditionError):
        regime_solution("inner", 0.9, 0.0, P2)


@pytest.mark.parametrize("z0, w0", [(2.0, -3.0), (1.2, -4.0), (5.0, -4.5), (1.5, -0.6)])
def test_case_IV_event_time(z0, w0):
    ev = next_event(regime_solution("outer_plus", z0, w0, P2), P2)
    T = math.log(abs(w0) / (abs(w0) + 1 - z0))
    assert abs(ev.s - T) <= 1e-10
    assert ev.boundary == 1.0 and ev.w < 0


def test_case_IV_example_value():
    ev = next_event(regime_solution("outer_plus", 2.0, -3.0, P2), P2)
    assert ev.s == pytest.approx(0.405465, abs=1e-6)


@pytest.mark.parametrize("sigma", [2.0, 10.0, 100.0])
@pytest.mark.parametrize("w0", [1.5, 2.0, 10.0])
def test_case_VII_event_time(sigma, w0):
    p = OdeParams(sigma)
    assert w0 > p.lam / sigma  # otherwise the datum falls back into the inner band
    seg = regime_solution("middle_plus", p.edge, w0, p)
    ev = next_event(seg, p)
    T = math.log((w0 + p.mu / sigma) / (w0 - p.lam / sigma)) / (p.lam + p.mu)
    assert abs(ev.s - T) <= 1e-10 and ev.boundary == 1.0


def test_case_V_example_and_bound():
    seg = regime_solution("middle_plus", 1.0, -1.0, P2)
    ev = next_event(seg, P2)
    root = brentq(lambda s: 1 + math.exp(-2 * s) / 3 - math.exp(s) / 3 - 0.5, 0, 5, xtol=1e-15)
    assert abs(ev.s - root) <= 1e-10
    assert ev.s < math.log(5 / 2)


@pytest.mark.parametrize("sigma", [2.0, 10.0, 100.0, 1e4])
@pytest.mark.parametrize("w0", [-0.01, -1.0, -30.0])
def test_case_V_bound(sigma, w0):
    p = OdeParams(sigma)
    ev = next_event(regime_solution("middle_plus", 1.0, w0, p), p)
    assert 0 < ev.s < math.log(1 + (p.lam + p.mu) / (sigma * abs(w0))) / p.mu


@pytest.mark.parametrize(
    "z0, w0, sigma, z_inf, n_seg",
    [(1.5, 1.0, 2.0, 2.5, 1), (2.0, 0.0, 7.0, 2.0, 1), (0.1, 0.0, 4.0, 0.0, 1)],
)
def test_solve_exact_examples(z0, w0, sigma, z_inf, n_seg):
    traj = solve_exact(z0, w0, OdeParams(sigma))
    assert traj.z_inf == z_inf and len(traj.segments) == n_seg


def test_inner_stays_inside():
    traj = solve_exact(0.1, 0.0, OdeParams(4.0))
    z, _ = traj.evaluate(np.linspace(0, 30, 3001))
    assert np.max(np.abs(z)) <= 0.75


def _battery():
    for s in (2.0, 10.0, 100.0):
        for z0, w0 in case_battery(s):
            yield s, z0, w0


def test_battery_covers_all_cases():
    for s in (2.0, 10.0, 100.0):
        labels = {classify_case(z, w, OdeParams(s)).label for z, w in case_battery(s)}
        assert labels == {"I", "II", "III", "IV", "V", "VI", "VII"}
        assert len(case_battery(s)) == 25


@pytest.mark.parametrize("sigma, z0, w0", list(_battery()))
def test_gluing_and_structure(sigma, z0, w0):
    traj = solve_exact(z0, w0, OdeParams(sigma))
    for gz, gw in traj.gluing_gaps():
        assert gz <= 1e-10 and gw <= 1e-10
    assert len(traj.case_trace) <= MAX_SEGMENTS
    assert traj.middle_visits <= 2 and traj.band_crossings <= 1


@pytest.mark.parametrize("z0, w0", [(1.5, 1.0), (0.0, 3.0), (2.0, -3.0), (-0.3, -2.0)])
def test_oracle_matches_exact(z0, w0):
    p = OdeParams(10.0)
    t = np.linspace(0, 20, 4001)
    ze, _ = solve_exact(z0, w0, p).evaluate(t)
    zo, _ = rk_oracle(z0, w0, p, 20.0).evaluate(t)
    assert np.max(np.abs(ze - zo)) <= 1e-6


def test_oracle_equilibrium_and_free_motion():
    t = np.linspace(0, 10, 101)
    z, w = rk_oracle(2.0, 0.0, P2, 10.0).evaluate(t)
    assert np.max(np.abs(z - 2.0)) <= 1e-10 and np.max(np.abs(w)) <= 1e-10
    z, _ = rk_oracle(1.5, 1.0, P2, 10.0).evaluate(t)
    assert np.max(np.abs(z - (1.5 + 1 - np.exp(-t)))) <= 1e-9


def test_oracle_tol_range():
    with pytest.raises(PreconditionError):
        rk_oracle(0.0, 1.0, P2, 1.0, tol=1e-3)


def test_oracle_energy_nonincreasing():
    dense = rk_oracle(0.0, 3.0, OdeParams(10.0), 20.0)
    E = scalar_energy(*dense.evaluate(np.linspace(0, 20, 20001)), OdeParams(10.0))
    assert np.all(np.diff(E) <= 1e-9)


@settings(max_examples=40, deadline=None)
@given(z0=st.floats(-3, 3), w0=st.floats(-4, 4), sigma=st.sampled_from([2.0, 10.0, 100.0]))
def test_exact_solution_energy_nonincreasing(z0, w0, sigma):
    p = OdeParams(sigma)
    traj = solve_exact(z0, w0, p)
    t = np.linspace(0, 15, 1501)
    E = scalar_energy(*traj.evaluate(t), p)
    assert np.all(np.diff(E) <= 1e-12 * max(1.0, E[0]))
    assert traj.middle_visits <= 2


def test_uniform_decay_report():
    rep = verify_uniform_decay()
    assert rep.M.shape == (len(DEFAULT_BATTERY), 4)
    assert np.all(np.isfinite(rep.M)) and rep.envelope_ok
    assert np.max(rep.ratios) <= 5.0
    i = DEFAULT_BATTERY.index((1.5, 1.0))
    np.testing.assert_allclose(rep.M[i], rep.M[i, 0], rtol=1e-12)
    j = DEFAULT_BATTERY.index((0.5, 0.0))
    assert np.all(rep.z_inf[j] == 0.0)
    d = rep.as_dict()
    assert set(d) >= {"M", "ratio_max_over_min", "z_inf", "envelope_ok"}
