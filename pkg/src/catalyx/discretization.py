"""Cell-centred finite volumes on uniform tensor grids, with boundary traces as unknowns.

Unknown layout for one implicit step: all cell values (cell-major, species
fastest) followed by all boundary-face traces (face-major, species fastest).
Each face contributes N rows: n_sigma no-flux rows for the conserved
combinations, then m_sigma surface-equilibrium rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .network import (
    POSITIVITY_FLOOR,
    ConservedBasis,
    DegenerateConcentrationError,
    ReactionNetwork,
    bulk_rate,
    bulk_rate_jacobian,
    linearized_surface_rows,
    surface_residual,
)


@dataclass(frozen=True)
class Faces:
    """Flat face list; ``cell``/``other`` index adjacent cells, ``dist`` is the centre-to-centre (or centre-to-face) distance."""

    cell: np.ndarray
    other: np.ndarray
    axis: np.ndarray
    side: np.ndarray
    dist: np.ndarray
    area: np.ndarray
    center: np.ndarray

    def __len__(self):
        return len(self.cell)


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [0, L] or [0, L1] x [0, L2]; cells are numbered row-major."""

    extents: tuple[float, ...]
    cells: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(float(x) for x in self.extents))
        object.__setattr__(self, "cells", tuple(int(n) for n in self.cells))
        if len(self.extents) not in (1, 2) or len(self.cells) != len(self.extents):
            raise ValueError("grid must be 1D or 2D with one cell count per axis")
        if min(self.cells) < 3:
            raise ValueError("at least 3 cells per axis are required")
        if min(self.extents) <= 0:
            raise ValueError("extents must be positive")

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def h(self) -> np.ndarray:
        return np.array(self.extents) / np.array(self.cells)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    @property
    def volume(self) -> float:
        return float(np.prod(self.extents))

    @cached_property
    def cell_centers(self) -> np.ndarray:
        axes = [(np.arange(n) + 0.5) * h for n, h in zip(self.cells, self.h)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def _face_area(self, axis: int) -> float:
        return float(np.prod(np.delete(self.h, axis)))

    @cached_property
    def interior_faces(self) -> Faces:
        idx = np.arange(self.n_cells).reshape(self.cells)
        parts = []
        for ax in range(self.dim):
            lo = np.take(idx, np.arange(self.cells[ax] - 1), axis=ax).ravel()
            hi = np.take(idx, np.arange(1, self.cells[ax]), axis=ax).ravel()
            parts.append((lo, hi, ax))
        cell = np.concatenate([p[0] for p in parts])
        other = np.concatenate([p[1] for p in parts])
        axis = np.concatenate([np.full(len(p[0]), p[2]) for p in parts])
        dist = self.h[axis]
        area = np.array([self._face_area(a) for a in axis])
        center = 0.5 * (self.cell_centers[cell] + self.cell_centers[other])
        return Faces(cell, other, axis, np.ones(len(cell), dtype=int), dist, area, center)

    @cached_property
    def boundary_faces(self) -> Faces:
        """Boundary faces ordered: axis 0 low, axis 0 high, axis 1 low, axis 1 high."""
        idx = np.arange(self.n_cells).reshape(self.cells)
        cell, axis, side = [], [], []
        for ax in range(self.dim):
            for s, pos in ((-1, 0), (1, self.cells[ax] - 1)):
                cs = np.take(idx, pos, axis=ax).ravel()
                cell.append(cs)
                axis.append(np.full(len(cs), ax))
                side.append(np.full(len(cs), s))
        cell = np.concatenate(cell)
        axis = np.concatenate(axis)
        side = np.concatenate(side)
        dist = 0.5 * self.h[axis]
        area = np.array([self._face_area(a) for a in axis])
        center = self.cell_centers[cell].copy()
        center[np.arange(len(cell)), axis] += side * dist
        return Faces(cell, np.full(len(cell), -1), axis, side, dist, area, center)

    @property
    def n_faces(self) -> int:
        return len(self.boundary_faces)

    @cached_property
    def laplacian_parts(self) -> tuple[sp.csr_matrix, sp.csr_matrix]:
        """Scalar finite-volume Laplacian split as (cell-cell, cell-trace) operators."""
        nc, nf = self.n_cells, self.n_faces
        vol = self.cell_volume
        inner = self.interior_faces
        w = inner.area / (inner.dist * vol)
        rows = np.concatenate([inner.cell, inner.other, inner.cell, inner.other])
        cols = np.concatenate([inner.other, inner.cell, inner.cell, inner.other])
        vals = np.concatenate([w, w, -w, -w])
        bnd = self.boundary_faces
        wb = bnd.area / (bnd.dist * vol)
        rows = np.concatenate([rows, bnd.cell])
        cols = np.concatenate([cols, bnd.cell])
        vals = np.concatenate([vals, -wb])
        acc = sp.csr_matrix((vals, (rows, cols)), shape=(nc, nc))
        acb = sp.csr_matrix((wb, (bnd.cell, np.arange(nf))), shape=(nc, nf))
        return acc, acb

    def to_dict(self) -> dict:
        return {"dim": self.dim, "extents": list(self.extents), "cells": list(self.cells)}


@dataclass
class StateField:
    grid: Grid
    c: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        if self.c.ndim != 2 or self.c.shape[0] != self.grid.n_cells:
            raise ValueError(f"expected ({self.grid.n_cells}, N) cell values, got {self.c.shape}")


@dataclass
class BoundaryState:
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)


def diffusion_operator(grid: Grid, c: StateField, b: BoundaryState, d) -> np.ndarray:
    """Per-cell d_i * (discrete Laplacian of c_i), using traces on boundary faces."""
    cells = c.c if isinstance(c, StateField) else np.asarray(c, dtype=float)
    trace = b.values if isinstance(b, BoundaryState) else np.asarray(b, dtype=float)
    if cells.shape[0] != grid.n_cells or trace.shape != (grid.n_faces, cells.shape[1]):
        raise ValueError("field shapes do not match the grid")
    acc, acb = grid.laplacian_parts
    return (acc @ cells + acb @ trace) * np.asarray(d, dtype=float)


def _block_diag_coo(blocks: np.ndarray, row0: int, col0: int):
    """Triplets for a block-diagonal matrix of K (r x s) blocks at an offset."""
    k, r, s = blocks.shape
    kk, ii, jj = np.meshgrid(np.arange(k), np.arange(r), np.arange(s), indexing="ij")
    return (row0 + (kk * r + ii).ravel(), col0 + (kk * s + jj).ravel(), blocks.ravel())


class StepSystem:
    """Nonlinear system of one implicit Euler step.

    Rows: interior balances ``(c - c_old)/dt - D lap(c, b) - r(c)``; per
    face the conserved fluxes ``e_k . D (b - c_cell)/(h/2)`` and the
    surface equilibria ``b^nu_sigma - kappa``.
    """

    def __init__(self, net: ReactionNetwork, kappa, basis: ConservedBasis, grid: Grid,
                 c_old, dt: float, floor: float = POSITIVITY_FLOOR):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.net = net
        self.kappa = np.asarray(kappa, dtype=float)
        self.basis = basis
        self.grid = grid
        self.c_old = np.asarray(c_old.c if isinstance(c_old, StateField) else c_old, dtype=float)
        self.dt = float(dt)
        self.floor = floor
        n = net.n_species
        self.n = n
        self.nc = grid.n_cells
        self.nf = grid.n_faces
        self.size = (self.nc + self.nf) * n
        faces = grid.boundary_faces
        # face row operator on (b - c_cell)/dist: conserved rows then zeros
        self._flux = np.zeros((n, n))
        self._flux[: basis.n_conserved] = basis.e.astype(float) * net.d
        acc, acb = grid.laplacian_parts
        dmat = sp.diags(net.d)
        inv = sp.diags(1.0 / faces.dist)
        incidence = sp.csr_matrix((np.ones(self.nf), (np.arange(self.nf), faces.cell)), shape=(self.nf, self.nc))
        flux = sp.csr_matrix(self._flux)
        self._linear = sp.bmat([
            [sp.identity(self.nc * n) / self.dt - sp.kron(acc, dmat), -sp.kron(acb, dmat)],
            [-sp.kron(inv @ incidence, flux), sp.kron(inv, flux)],
        ], format="coo")
        self._lin_rows, self._lin_cols, self._lin_vals = self._linear.row, self._linear.col, self._linear.data
        mask = np.zeros((self.nf, n), dtype=bool)
        if net.surface_reactions:
            mask[:] = (net.nu_sigma < 0).any(axis=0)
        self.constrained = np.concatenate([np.zeros(self.nc * n, dtype=bool), mask.ravel()])

    def restart(self, c_old) -> "StepSystem":
        """Reuse the assembled linear part for the next step."""
        self.c_old = np.asarray(c_old, dtype=float)
        return self

    def pack(self, c, b) -> np.ndarray:
        return np.concatenate([np.asarray(c, dtype=float).ravel(), np.asarray(b, dtype=float).ravel()])

    def unpack(self, u):
        u = np.asarray(u, dtype=float)
        k = self.nc * self.n
        return u[:k].reshape(self.nc, self.n), u[k:].reshape(self.nf, self.n)

    def residual(self, u) -> np.ndarray:
        c, b = self.unpack(u)
        m_cons = self.basis.n_conserved
        lap = diffusion_operator(self.grid, c, b, self.net.d)
        interior = ((c - self.c_old) / self.dt - lap - bulk_rate(self.net, c)).ravel()
        faces = np.empty((self.nf, self.n))
        faces[:, :m_cons] = ((b - c[self.grid.boundary_faces.cell]) / self.grid.boundary_faces.dist[:, None]
                             * self.net.d) @ self.basis.e.T.astype(float)
        if self.net.surface_reactions:
            faces[:, m_cons:] = surface_residual(self.net, self.kappa, b, self.floor)
        return np.concatenate([interior, faces.ravel()])

    def jacobian(self, u) -> sp.csc_matrix:
        c, b = self.unpack(u)
        n, m_cons = self.n, self.basis.n_conserved
        rows, cols, vals = [], [], []
        if self.net.bulk_reactions:
            r_, c_, v_ = _block_diag_coo(-bulk_rate_jacobian(self.net, c), 0, 0)
            rows.append(r_), cols.append(c_), vals.append(v_)
        if self.net.surface_reactions:
            surface_residual(self.net, self.kappa, b, self.floor)  # positivity guard
            blocks = np.zeros((self.nf, n, n))
            blocks[:, m_cons:, :] = linearized_surface_rows(self.net, b)
            r_, c_, v_ = _block_diag_coo(blocks, self.nc * n, self.nc * n)
            rows.append(r_), cols.append(c_), vals.append(v_)
        rows = [self._lin_rows] + rows
        cols = [self._lin_cols] + cols
        vals = [self._lin_vals] + vals
        return sp.csc_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.size, self.size),
        )


def assemble_step_residual(net, kappa, basis, grid, c_old, unknowns, dt,
                           floor: float = POSITIVITY_FLOOR) -> np.ndarray:
    """Residual of one implicit step at ``unknowns = (StateField, BoundaryState)``."""
    state, bnd = unknowns
    system = StepSystem(net, kappa, basis, grid, c_old, dt, floor)
    return system.residual(system.pack(state.c, bnd.values))


def step_jacobian(net, kappa, basis, grid, unknowns, dt, floor: float = POSITIVITY_FLOOR) -> sp.csc_matrix:
    """Analytic Jacobian of :func:`assemble_step_residual` (independent of ``c_old``)."""
    state, bnd = unknowns
    system = StepSystem(net, kappa, basis, grid, np.zeros_like(state.c), dt, floor)
    return system.jacobian(system.pack(state.c, bnd.values))


__all__ = [
    "Grid", "Faces", "StateField", "BoundaryState", "StepSystem", "DegenerateConcentrationError",
    "diffusion_operator", "assemble_step_residual", "step_jacobian",
]
