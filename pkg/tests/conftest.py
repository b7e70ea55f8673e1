import math

import numpy as np
import pytest

from catalyx import BoundaryState, Grid, ReactionNetwork, StateField, conserved_basis, equilibrium_constants
from catalyx.network import BulkReaction

CONFIG_DIR = __import__("pathlib").Path(__file__).resolve().parents[1] / "demos" / "configs"


def three_species(bulk=()):
    """A1 + A2 <-> A3 on the surface, kappa = e^-1."""
    return ReactionNetwork(["A1", "A2", "A3"], [1.0, 0.5, 0.25], [0.0, 0.0, 1.0], list(bulk), [(-1, -1, 1)])


def three_species_initial(grid, kappa):
    """Smooth positive data with zero normal derivative at both ends of [0, 1]."""
    def f(x):
        cs = np.cos(np.pi * np.asarray(x)[..., 0])
        return np.stack([1 + 0.5 * cs, 1 - 0.3 * cs, kappa * (0.85 + 0.2 * cs)], axis=-1)
    return StateField(grid, f(grid.cell_centers)), BoundaryState(f(grid.boundary_faces.center))


@pytest.fixture
def net3():
    return three_species()


@pytest.fixture
def net3_bulk():
    # same surface chemistry plus a detailed-balanced bulk reaction A1 + A2 <-> A3
    kf = 2.0
    return three_species([BulkReaction((1, 1, 0), (0, 0, 1), kf, kf * math.e)])


@pytest.fixture
def grid1d():
    return Grid((1.0,), (12,))


@pytest.fixture
def grid2d():
    return Grid((1.0, 0.5), (5, 4))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_positive_state(grid, n, rng, lo=0.3, hi=2.0):
    c = rng.uniform(lo, hi, size=(grid.n_cells, n))
    b = rng.uniform(lo, hi, size=(grid.n_faces, n))
    return StateField(grid, c), BoundaryState(b)


def setup_net(net):
    return equilibrium_constants(net), conserved_basis(net)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
