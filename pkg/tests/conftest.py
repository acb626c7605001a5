import pytest

from adhesion_wave.pde import Grid1D, InitialData, PdeState, Profile, RunConfig
from adhesion_wave.potential import PotentialParams

# filled by test_acceptance; echoed after the run so the lines survive capture
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def p12():
    return PotentialParams(1.0, 2.0)


def uniform_state(length, cells, u, v):
    g = Grid1D(length, cells)
    n = g.n_nodes
    return PdeState(g, 0.0, [float(u)] * n, [float(v)] * n)


def make_config(p, cells=64, t_final=1.0, u=None, v=None, length=1.0, dt=None, **kw):
    g = Grid1D(length, cells)
    init = InitialData(u or Profile(), v or Profile())
    return RunConfig(p, g, dt or g.dx / 4, t_final, init, **kw)
