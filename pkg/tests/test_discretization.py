import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from catalyx import BoundaryState, Grid, StateField, assemble_step_residual, step_jacobian
from catalyx.discretization import StepSystem, diffusion_operator
from catalyx.network import DegenerateConcentrationError, ReactionNetwork, conserved_basis, equilibrium_constants
from catalyx.timestepper import SolverConfig, newton_solve

from conftest import random_positive_state, setup_net, three_species


def test_grid_geometry_1d():
    g = Grid((2.0,), (4,))
    assert g.h.tolist() == [0.5]
    assert g.cell_centers[:, 0].tolist() == [0.25, 0.75, 1.25, 1.75]
    bf = g.boundary_faces
    assert bf.cell.tolist() == [0, 3]
    assert bf.center[:, 0].tolist() == [0.0, 2.0]
    assert bf.dist.tolist() == [0.25, 0.25]


def test_grid_geometry_2d(grid2d):
    bf = grid2d.boundary_faces
    assert grid2d.n_cells == 20 and grid2d.n_faces == 2 * 4 + 2 * 5
    # every boundary face has exactly one adjacent cell on the grid edge
    assert len(bf.cell) == grid2d.n_faces
    centers = grid2d.cell_centers[bf.cell]
    assert np.allclose(np.abs(bf.center - centers).sum(axis=1), 0.5 * grid2d.h[bf.axis])
    # faces sit on the boundary of the rectangle
    on_edge = np.isclose(bf.center[:, 0], 0) | np.isclose(bf.center[:, 0], 1.0) \
        | np.isclose(bf.center[:, 1], 0) | np.isclose(bf.center[:, 1], 0.5)
    assert on_edge.all()
    assert np.sum(bf.area) == pytest.approx(2 * (1.0 + 0.5))


def test_grid_rejects_too_few_cells():
    with pytest.raises(ValueError):
        Grid((1.0,), (2,))
    with pytest.raises(ValueError):
        Grid((1.0, 1.0, 1.0), (3, 3, 3))


def test_diffusion_constant_field(grid2d):
    c = StateField(grid2d, np.full((grid2d.n_cells, 2), 3.0))
    b = BoundaryState(np.full((grid2d.n_faces, 2), 3.0))
    assert np.max(np.abs(diffusion_operator(grid2d, c, b, [1.0, 2.0]))) < 1e-12


def test_diffusion_quadratic_cell_averages():
    g = Grid((1.0,), (10,))
    h = g.h[0]
    x = g.cell_centers[:, 0]
    avg = (x ** 2 + h ** 2 / 12)[:, None]
    b = np.array([[0.0], [1.0]])
    out = diffusion_operator(g, StateField(g, avg), BoundaryState(b), [0.7])[:, 0]
    assert np.allclose(out[1:-1], 2 * 0.7, rtol=0, atol=1e-9)


def test_diffusion_linear_field(grid2d):
    f = lambda p: 1 + 2 * p[:, 0] - 3 * p[:, 1]
    c = StateField(grid2d, f(grid2d.cell_centers)[:, None])
    b = BoundaryState(f(grid2d.boundary_faces.center)[:, None])
    assert np.max(np.abs(diffusion_operator(grid2d, c, b, [1.5]))) < 1e-11


def test_diffusion_shape_mismatch(grid1d):
    with pytest.raises(ValueError):
        diffusion_operator(grid1d, np.ones((grid1d.n_cells, 2)), np.ones((3, 2)), [1, 1])


@pytest.mark.parametrize("cells", [(8,), (8, 6)])
def test_laplacian_truncation_order_two(cells):
    def error(scale):
        g = Grid((1.0,) * len(cells), tuple(n * scale for n in cells))
        k = np.array([np.pi, 2 * np.pi][: g.dim])
        f = lambda p: np.prod(np.cos(k * p), axis=1)
        lap_exact = -np.sum(k ** 2) * f(g.cell_centers)
        lap = diffusion_operator(g, f(g.cell_centers)[:, None], f(g.boundary_faces.center)[:, None], [1.0])[:, 0]
        # fixed subdomain [1/4, 3/4]^d, tiled exactly by both grids
        inside = np.all(np.abs(g.cell_centers - 0.5) < 0.25, axis=1)
        return np.sqrt(np.sum((lap - lap_exact)[inside] ** 2) * g.cell_volume)
    ratio = error(1) / error(2)
    assert 3.6 < ratio < 4.4


def test_residual_zero_at_equilibrium(net3_bulk, grid2d):
    kappa, basis = setup_net(net3_bulk)
    c = np.tile([0.8, 1.5, kappa[0] * 0.8 * 1.5], (grid2d.n_cells, 1))
    b = np.tile(c[0], (grid2d.n_faces, 1))
    res = assemble_step_residual(net3_bulk, kappa, basis, grid2d, c, (StateField(grid2d, c), BoundaryState(b)), 0.1)
    # rounding only: Laplacian weights are O(1/h^2)
    assert np.max(np.abs(res)) < 1e-12
    assert res.size == (grid2d.n_cells + grid2d.n_faces) * 3


def test_single_species_reduces_to_heat_equation(grid1d):
    net = ReactionNetwork(["u"], [0.3], [0.0])
    kappa, basis = setup_net(net)
    dt = 0.05
    rng = np.random.default_rng(1)
    c_old = rng.uniform(1, 2, (grid1d.n_cells, 1))
    c = rng.uniform(1, 2, (grid1d.n_cells, 1))
    b = rng.uniform(1, 2, (grid1d.n_faces, 1))
    res = assemble_step_residual(net, kappa, basis, grid1d, c_old, (StateField(grid1d, c), BoundaryState(b)), dt)
    h = grid1d.h[0]
    # hand-built: heat balance per cell, zero-flux rows 0.3 (b - c)/(h/2)
    ref = np.empty(grid1d.n_cells)
    for i in range(grid1d.n_cells):
        left = b[0, 0] if i == 0 else c[i - 1, 0]
        right = b[1, 0] if i == grid1d.n_cells - 1 else c[i + 1, 0]
        wl = 2 if i == 0 else 1
        wr = 2 if i == grid1d.n_cells - 1 else 1
        lap = (wl * (left - c[i, 0]) + wr * (right - c[i, 0])) / h ** 2
        ref[i] = (c[i, 0] - c_old[i, 0]) / dt - 0.3 * lap
    flux = 0.3 * (b[:, 0] - c[[0, -1], 0]) / (h / 2)
    assert np.allclose(res, np.concatenate([ref, flux]), rtol=1e-13, atol=1e-12)


def test_boundary_row_perturbation(net3):
    g = Grid((1.0,), (4,))
    kappa, basis = setup_net(net3)
    c = np.tile([1.0, 2.0, kappa[0] * 2.0], (g.n_cells, 1))
    b = np.tile(c[0], (g.n_faces, 1))
    base = assemble_step_residual(net3, kappa, basis, g, c, (StateField(g, c), BoundaryState(b)), 0.1)
    k = g.n_cells * 3
    for i in range(3):
        delta = 1e-6
        bp = b.copy()
        bp[0, i] += delta
        res = assemble_step_residual(net3, kappa, basis, g, c, (StateField(g, c), BoundaryState(bp)), 0.1)
        row = k + 2  # face 0, surface row after 2 conserved rows
        c_a = np.prod(b[0] ** net3.nu_sigma[0]) / b[0]
        predicted = c_a[i] * net3.nu_sigma[0, i] * delta
        assert res[row] - base[row] == pytest.approx(predicted, rel=1e-5, abs=1e-18)


def test_algebraic_row_at_unit_trace():
    net = ReactionNetwork(["A1", "A2", "A3"], [1, 1, 1], [0, 0, 0], [], [(-1, -1, 1)])
    g = Grid((1.0,), (3,))
    kappa, basis = setup_net(net)
    c = np.ones((3, 3))
    b = np.ones((2, 3))
    jac = step_jacobian(net, kappa, basis, g, (StateField(g, c), BoundaryState(b)), 0.1).toarray()
    k = 9
    assert jac[k + 2, k:k + 3].tolist() == [-1.0, -1.0, 1.0]


def test_zero_network_reaction_block(grid2d):
    net = ReactionNetwork(["A", "B"], [1.0, 2.0], [0.0, 0.0])
    kappa, basis = setup_net(net)
    state, bnd = random_positive_state(grid2d, 2, np.random.default_rng(0))
    dt = 0.2
    jac = step_jacobian(net, kappa, basis, grid2d, (state, bnd), dt).toarray()
    acc, _ = grid2d.laplacian_parts
    block = np.eye(grid2d.n_cells * 2) / dt - sp.kron(acc, np.diag(net.d)).toarray()
    k = grid2d.n_cells * 2
    assert np.array_equal(jac[:k, :k], block)


def _fd_check(net, grid, rng, n_dirs=20, eps=1e-6):
    kappa, basis = setup_net(net)
    state, bnd = random_positive_state(grid, net.n_species, rng)
    c_old = rng.uniform(0.3, 2.0, state.c.shape)
    system = StepSystem(net, kappa, basis, grid, c_old, 0.05)
    u = system.pack(state.c, bnd.values)
    jac = system.jacobian(u)
    worst = 0.0
    for _ in range(n_dirs):
        v = rng.normal(size=u.size)
        v /= np.linalg.norm(v)
        fd = (system.residual(u + eps * v) - system.residual(u - eps * v)) / (2 * eps)
        an = jac @ v
        worst = max(worst, np.linalg.norm(fd - an) / np.linalg.norm(an))
    return worst


def test_jacobian_matches_finite_differences_1d(net3_bulk, grid1d, rng):
    assert _fd_check(net3_bulk, grid1d, rng) < 1e-5


def test_jacobian_matches_finite_differences_2d(net3_bulk, grid2d, rng):
    assert _fd_check(net3_bulk, grid2d, rng) < 1e-5


def test_jacobian_second_order_consistency(net3_bulk, grid1d, rng):
    kappa, basis = setup_net(net3_bulk)
    state, bnd = random_positive_state(grid1d, 3, rng)
    system = StepSystem(net3_bulk, kappa, basis, grid1d, state.c, 0.05)
    u = system.pack(state.c, bnd.values)
    v = rng.normal(size=u.size)
    jv = system.jacobian(u) @ v
    errs = []
    for eps in (1e-2, 5e-3):
        fd = (system.residual(u + eps * v) - system.residual(u - eps * v)) / (2 * eps)
        errs.append(np.linalg.norm(fd - jv))
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_jacobian_sparsity(net3_bulk, grid2d, rng):
    kappa, basis = setup_net(net3_bulk)
    state, bnd = random_positive_state(grid2d, 3, rng)
    jac = step_jacobian(net3_bulk, kappa, basis, grid2d, (state, bnd), 0.1)
    # a cell row couples itself, at most 4 neighbours or traces, times N species
    assert np.max(np.diff(jac.tocsr().indptr)) <= 5 * 3


def test_jacobian_degenerate_trace(net3, grid1d):
    kappa, basis = setup_net(net3)
    state = StateField(grid1d, np.ones((grid1d.n_cells, 3)))
    b = np.ones((grid1d.n_faces, 3))
    b[1, 0] = 0.0
    with pytest.raises(DegenerateConcentrationError):
        step_jacobian(net3, kappa, basis, grid1d, (state, BoundaryState(b)), 0.1)
    with pytest.raises(DegenerateConcentrationError):
        assemble_step_residual(net3, kappa, basis, grid1d, state, (state, BoundaryState(b)), 0.1)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_discrete_conservation_at_newton_root(seed):
    rng = np.random.default_rng(seed)
    net = three_species()
    net.bulk_reactions = []
    g = Grid((1.0, 1.0), (4, 3))
    kappa, basis = setup_net(net)
    state, bnd = random_positive_state(g, 3, rng, 0.5, 1.5)
    system = StepSystem(net, kappa, basis, g, state.c, 0.02)
    u, _ = newton_solve(system.residual, system.jacobian, system.pack(state.c, bnd.values),
                        SolverConfig(dt=0.02, t_end=0.02), system.constrained)
    c_new, _ = system.unpack(u)
    for e in basis.e.astype(float):
        before = np.sum(state.c @ e) * g.cell_volume
        after = np.sum(c_new @ e) * g.cell_volume
        assert abs(after - before) <= 1e-10 * abs(before)
