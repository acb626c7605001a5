import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adhesion_wave.errors import ParameterError, PreconditionError
from adhesion_wave.potential import (
    PotentialParams,
    branch_gaps,
    breakpoints,
    check_properties,
    dphi,
    phi,
    table,
)

EPS = np.finfo(float).eps


@pytest.mark.parametrize(
    "params, u, expected",
    [
        ((1, 2), 0.0, 0.0),
        ((1, 2), 3.0, 0.5),
        ((1, 2), 0.5, 0.25),
        ((1, 4), 0.9, 0.72),
    ],
)
def test_phi_values(params, u, expected):
    assert phi(PotentialParams(*params), u) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("u, expected", [(0.0, 0.0), (1.0, 0.0), (0.25, 0.5), (0.75, 0.5)])
def test_dphi_values(p12, u, expected):
    assert dphi(p12, u) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("u_star, sigma", [(1.0, 1.0), (0.5, 2.0), (-1.0, 3.0), (1.0, 0.0), (math.nan, 2.0)])
def test_params_rejected(u_star, sigma):
    with pytest.raises(ParameterError):
        PotentialParams(u_star, sigma)


def test_scalar_in_scalar_out(p12):
    assert isinstance(phi(p12, 0.3), float)
    assert isinstance(dphi(p12, -0.3), float)
    assert phi(p12, np.array([0.1, 2.0])).shape == (2,)


@pytest.mark.parametrize("u_star, sigma", [(1, 2), (1, 10), (1, 100), (0.5, 10), (2.0, 3.0)])
def test_branch_continuity(u_star, sigma):
    p = PotentialParams(u_star, sigma)
    for b, gap_f, gap_df in branch_gaps(p):
        assert gap_f <= 4 * EPS * u_star**2 * max(1.0, abs(b)), b
        assert gap_df <= 4 * EPS * max(1.0, u_star * sigma), b
    # sampled on both sides the jump is the slope times 2e-12
    for b in breakpoints(p):
        eps = 1e-12
        lip = max(2.0, 2.0 * p.stiffness)
        assert abs(phi(p, b - eps) - phi(p, b + eps)) <= 2 * lip * 2 * eps
        assert abs(dphi(p, b - eps) - dphi(p, b + eps)) <= lip * 2 * eps + 1e-15


def test_plateau_force_exactly_zero():
    p = PotentialParams(0.5, 10.0)
    u = np.concatenate([np.linspace(0.5, 50, 1001), -np.linspace(0.5, 50, 1001)])
    assert np.all(dphi(p, u) == 0.0)
    assert np.all(phi(p, u) == p.plateau)


@settings(max_examples=200, deadline=None)
@given(
    u=st.floats(-1e3, 1e3, allow_nan=False),
    u_star=st.floats(0.1, 5.0),
    k=st.floats(1.01, 200.0),
)
def test_symmetry_and_bounds(u, u_star, k):
    p = PotentialParams(u_star, k / u_star)
    assert phi(p, u) == phi(p, -u)
    assert dphi(p, u) == -dphi(p, -u)
    assert abs(phi(p, u)) <= u_star**2
    assert u * dphi(p, u) >= 0.0


@settings(max_examples=100, deadline=None)
@given(u=st.floats(-3.0, 3.0), sigma=st.floats(1.5, 50.0))
def test_remainder_slope_bounded_by_zero(u, sigma):
    # phi(u) - u^2 has derivative dphi - 2u, which is <= 0 for u >= 0
    p = PotentialParams(1.0, sigma)
    slope = dphi(p, u) - 2 * u
    assert slope * np.sign(u) <= 1e-12


@pytest.mark.parametrize("sigma", [2.0, 10.0])
def test_fd_derivative_second_order(sigma):
    p = PotentialParams(1.0, sigma)
    b = breakpoints(p)
    u = np.linspace(-2, 2, 401)
    # keep away from the kinks so the central difference is smooth
    far = np.min(np.abs(u[:, None] - np.array(b)[None, :]), axis=1) > 2e-3
    u = u[far]
    errs = []
    for h in (1e-3, 1e-4):
        fd = (phi(p, u + h) - phi(p, u - h)) / (2 * h)
        errs.append(np.max(np.abs(fd - dphi(p, u))))
    # each branch is quadratic, so the error is pure round-off
    assert errs[0] <= 1e-9 and errs[1] <= 1e-8


@pytest.mark.parametrize("params, n", [((1, 2), 10_000), ((1, 10), 100_000)])
def test_check_properties_pass(params, n):
    p = PotentialParams(*params)
    rep = check_properties(p, np.linspace(-2 * p.u_star, 2 * p.u_star, n))
    assert rep.all_pass, rep.as_dict()


def test_check_properties_notes_for_large_threshold():
    p = PotentialParams(2.0, 3.0)
    rep = check_properties(p, np.linspace(-4, 4, 20_001))
    assert rep.all_pass
    assert any("exceeds 2" in n for n in rep.notes)


def test_check_properties_degenerate_grid(p12):
    with pytest.raises(PreconditionError):
        check_properties(p12, [-2.0, 0.0, 2.0])


def test_check_properties_grid_must_cover(p12):
    with pytest.raises(PreconditionError):
        check_properties(p12, np.linspace(-1, 1, 1000))


def test_table(p12):
    u, f, df = table(p12, -2, 2, 0.5)
    assert u.size == 9
    assert f[4] == 0.0 and df[0] == 0.0
    with pytest.raises(ParameterError):
        table(p12, 0, 1, 0)
