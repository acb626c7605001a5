import math

import numpy as np
import pytest

from adhesion_wave.energy import (
    LEDGER_COLUMNS,
    EnergyLedger,
    balance_residual_E,
    balance_residual_J,
    energy_E,
    functional_G,
    functional_G_lambda,
    functional_J,
    h1_norm,
    l2_sq,
)
from adhesion_wave.errors import ParameterError, PreconditionError
from adhesion_wave.pde import Profile, simulate
from adhesion_wave.potential import PotentialParams

from conftest import make_config, uniform_state


def test_energy_examples(p12):
    assert energy_E(uniform_state(1.0, 16, 0, 0), p12) == 0.0
    assert energy_E(uniform_state(1.0, 16, 1.3, 0), p12) == pytest.approx(0.5, abs=1e-15)
    assert energy_E(uniform_state(2.0, 16, 0, 1), p12) == pytest.approx(1.0, abs=1e-15)


def test_energy_linear_mode(p12):
    s = uniform_state(1.0, 8, 3.0, 0.0)
    assert energy_E(s, p12, force="linear") == pytest.approx(4.5)


def test_J_examples():
    assert functional_J(uniform_state(1.0, 8, 0, 5.0)) == 0.0
    assert functional_J(uniform_state(3.0, 8, 1, 0)) == pytest.approx(1.5)
    assert functional_J(uniform_state(1.0, 8, 1, -1)) == pytest.approx(-0.5)


def test_G_examples():
    assert functional_G(uniform_state(1.0, 8, 0, 0)) == 0.0
    assert functional_G(uniform_state(1.0, 8, 1, 0)) == pytest.approx(0.5)
    assert functional_G(uniform_state(1.0, 8, 1, 1)) == pytest.approx(1.5)


def test_G_lambda_examples(p12):
    assert functional_G_lambda(uniform_state(1.0, 8, 0.7, 0), 0.5, 0.7, p12) == 0.0
    assert functional_G_lambda(uniform_state(1.0, 8, 0, 1), 0.5, 0.0, p12) == pytest.approx(0.5)
    assert functional_G_lambda(uniform_state(1.0, 8, 3, 0), 0.5, 2.0, p12) == 0.0
    with pytest.raises(ParameterError):
        functional_G_lambda(uniform_state(1.0, 8, 0, 0), 1.0, 0.0, p12)


def test_constant_gradient_energy_is_zero():
    s = uniform_state(1.0, 16, 2.5, 0)
    assert h1_norm(s.u, s.grid.dx) ** 2 == pytest.approx(l2_sq(s.u, s.grid.dx))


def test_equilibrium_residual_exactly_zero(p12):
    cfg = make_config(p12, cells=16, t_final=1.0, u=Profile("constant", offset=1.5))
    traj = simulate(cfg)
    assert balance_residual_E(traj.ledger).max == 0.0
    assert balance_residual_J(traj.ledger).max == 0.0


@pytest.fixture(scope="module")
def cosine_runs():
    p = PotentialParams(1.0, 2.0)
    out = []
    for cells in (64, 128):
        cfg = make_config(p, cells=cells, t_final=3.0, u=Profile("cosine", 0.3), sample_every=cells // 16)
        out.append(simulate(cfg))
    return out


def test_residuals_converge(cosine_runs):
    coarse, fine = cosine_runs
    for fn in (balance_residual_E, balance_residual_J):
        rc, rf = fn(coarse.ledger).max, fn(fine.ledger).max
        assert rc < 1e-3 and rc / rf >= 2.0


def test_corrupted_dissipation_detected(cosine_runs):
    ledger = cosine_runs[0].ledger.slice(slice(None))
    ledger.D = ledger.D * 0.0
    assert balance_residual_E(ledger).max > 0.1


def test_E_monotone_and_J_minus_D(cosine_runs):
    traj = cosine_runs[1]
    dt = traj.config.dt
    E = traj.ledger.E
    assert np.all(np.diff(E) <= 10 * dt**2)
    # d/dt (J - D) = -(|grad u|^2 + <u, f>) - 2|v|^2 <= 0 by the sign condition
    JD = traj.ledger.J - traj.ledger.D
    assert np.all(np.diff(JD) <= 10 * dt**2)


def test_h1_bounded(cosine_runs):
    traj = cosine_runs[1]
    h1 = np.array([h1_norm(s.u, s.grid.dx) for s in traj.states])
    E0 = traj.ledger.E[0]
    # |grad u|^2 <= 2E and |u|^2 <= |u0|^2 + bounded J terms; a loose data bound
    assert np.all(np.isfinite(h1)) and h1.max() <= 2 * math.sqrt(2 * E0 + h1[0] ** 2)


def test_linear_G_decays_like_exp():
    p = PotentialParams(1.0, 2.0)
    cfg = make_config(p, cells=128, t_final=5.0, u=Profile("cosine", 0.5), v=Profile("cosine", 0.2, mode=2),
                      force="linear", sample_every=8)
    traj = simulate(cfg)
    G = traj.ledger.G
    assert np.max(np.abs(G / G[0] - np.exp(-traj.t))) <= 0.01
    hsq = np.array([h1_norm(s.u, s.grid.dx) ** 2 + l2_sq(s.v, s.grid.dx) for s in traj.states])
    assert np.all(hsq <= 3 * hsq[0] * np.exp(-traj.t) * 1.02)


def test_ledger_csv_roundtrip(tmp_path, cosine_runs):
    ledger = cosine_runs[0].ledger
    path = tmp_path / "ledger.csv"
    ledger.to_csv(path)
    assert path.read_text().splitlines()[0] == ",".join(LEDGER_COLUMNS)
    back = EnergyLedger.from_csv(path)
    for col in LEDGER_COLUMNS:
        np.testing.assert_array_equal(getattr(back, col), getattr(ledger, col))


def test_residual_needs_two_samples(cosine_runs):
    with pytest.raises(PreconditionError):
        balance_residual_E(cosine_runs[0].ledger.slice(slice(0, 1)))
