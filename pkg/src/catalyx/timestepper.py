"""Implicit Euler with damped Newton, and the continuation status of a run."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import diagnostics
from .discretization import BoundaryState, Grid, StateField, StepSystem
from .network import POSITIVITY_FLOOR, ConservedBasis, DegenerateConcentrationError, ReactionNetwork

log = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    dt: float
    t_end: float
    newton_tol: float = 1e-10
    newton_max_iter: int = 30
    damping: float = 0.5
    min_step: float = 2.0 ** -20
    positivity_floor: float = POSITIVITY_FLOOR
    norm_growth_factor: float = 1e6

    def __post_init__(self):
        for name in ("dt", "t_end", "newton_tol", "damping", "min_step", "positivity_floor", "norm_growth_factor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be at least 1")
        if self.dt > self.t_end:
            raise ValueError("dt must not exceed t_end")
        if not self.damping < 1:
            raise ValueError("damping factor must lie in (0, 1)")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))


@dataclass(frozen=True)
class Completed:
    code = 0
    kind = "Completed"

    def to_dict(self):
        return {"status": self.kind}


@dataclass(frozen=True)
class Degeneration:
    species: int
    time: float
    location: object
    code = 3
    kind = "Degeneration"

    def to_dict(self):
        return {"status": self.kind, "species": self.species, "time": self.time, "location": self.location}


@dataclass(frozen=True)
class NonConvergence:
    time: float
    residual: float
    step: int | None = None
    code = 4
    kind = "NonConvergence"

    def to_dict(self):
        return {"status": self.kind, "time": self.time, "residual": self.residual, "step": self.step}


@dataclass(frozen=True)
class NormGrowth:
    time: float
    norm: float
    code = 5
    kind = "NormGrowth"

    def to_dict(self):
        return {"status": self.kind, "time": self.time, "norm": self.norm}


RunStatus = Completed | Degeneration | NonConvergence | NormGrowth


class NewtonFailure(RuntimeError):
    def __init__(self, message, residual, iterations):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def newton_solve(residual: Callable, jacobian: Callable, x0, cfg: SolverConfig,
                 constrained=None) -> tuple[np.ndarray, int]:
    """Damped Newton on ``residual(x) = 0``.

    Steps are halved until the 2-norm of the residual decreases and no
    ``constrained`` component falls to the positivity floor. Converged when
    the max-norm of the residual is below ``cfg.newton_tol``.

    Raises
    ------
    NewtonFailure
        After ``cfg.newton_max_iter`` iterations or when the step length
        underflows ``cfg.min_step``.
    """
    x = np.array(x0, dtype=float)
    mask = np.zeros(x.shape, dtype=bool) if constrained is None else np.asarray(constrained, dtype=bool)
    res = np.atleast_1d(residual(x))
    norm = float(np.linalg.norm(res))
    for it in range(cfg.newton_max_iter + 1):
        if np.max(np.abs(res)) < cfg.newton_tol:
            return x, it
        if it == cfg.newton_max_iter:
            break
        jac = jacobian(x)
        if sp.issparse(jac):
            dx = spla.spsolve(sp.csc_matrix(jac), -res)
        else:
            dx = np.linalg.solve(np.atleast_2d(jac), -res)
        dx = np.atleast_1d(dx)
        if not np.all(np.isfinite(dx)):
            raise NewtonFailure("singular Newton system", float(np.max(np.abs(res))), it)
        step = 1.0
        while True:
            trial = x + step * dx
            if not np.any(trial[mask] <= cfg.positivity_floor):
                try:
                    trial_res = np.atleast_1d(residual(trial))
                except DegenerateConcentrationError:
                    trial_res = None
                if trial_res is not None and np.all(np.isfinite(trial_res)):
                    trial_norm = float(np.linalg.norm(trial_res))
                    if trial_norm < (1.0 - 1e-4 * step) * norm or trial_norm == 0.0:
                        break
            step *= cfg.damping
            if step < cfg.min_step:
                raise NewtonFailure("line search step underflow", float(np.max(np.abs(res))), it + 1)
        x, res, norm = trial, trial_res, trial_norm
    raise NewtonFailure("maximum Newton iterations reached", float(np.max(np.abs(res))), cfg.newton_max_iter)


@dataclass
class RunResult:
    trajectory: list
    state: StateField
    boundary: BoundaryState
    status: RunStatus
    snapshots: list = field(default_factory=list)


def _degenerate_location(grid: Grid, c: np.ndarray, b: np.ndarray, floor: float):
    """First (species, location) with concentration below the floor, or None."""
    cells = np.argwhere(c < floor)
    faces = np.argwhere(b < floor)
    if len(cells):
        cell, i = cells[np.argmin(c[cells[:, 0], cells[:, 1]])]
        return int(i), {"cell": int(cell), "x": grid.cell_centers[cell].tolist()}
    if len(faces):
        f, i = faces[np.argmin(b[faces[:, 0], faces[:, 1]])]
        return int(i), {"face": int(f), "x": grid.boundary_faces.center[f].tolist()}
    return None


def advance(net: ReactionNetwork, kappa, basis: ConservedBasis, grid: Grid, state: StateField,
            cfg: SolverConfig, boundary: BoundaryState | None = None, monitors: bool = True,
            on_step: Callable | None = None) -> RunResult:
    """Integrate from ``state`` to ``cfg.t_end`` with fixed steps.

    ``boundary`` is the initial guess for the face traces (defaults to the
    adjacent cell values). ``on_step(step, t, state, boundary, record)`` is
    called after every accepted step. The run stops at the first
    degeneration, Newton failure or norm growth beyond
    ``cfg.norm_growth_factor`` times the initial max-norm; the last is a
    computable stand-in for blow-up of the phase-space norm.
    """
    c = np.array(state.c, dtype=float)
    b = c[grid.boundary_faces.cell].copy() if boundary is None else np.array(boundary.values, dtype=float)
    floor = cfg.positivity_floor

    def record(t, iters):
        if not monitors:
            return None
        return diagnostics.evaluate(net, basis, grid, c, b, kappa, t, iters, floor)

    trajectory = []
    rec = record(0.0, 0)
    if rec is not None:
        trajectory.append(rec)
    cap = cfg.norm_growth_factor * max(float(np.max(np.abs(c))), floor)
    status: RunStatus = Completed()
    t = 0.0
    system = StepSystem(net, kappa, basis, grid, c, cfg.dt, floor)
    for step in range(1, cfg.n_steps + 1):
        t_new = step * cfg.dt
        system = system.restart(c)
        try:
            u, iters = newton_solve(system.residual, system.jacobian, system.pack(c, b), cfg, system.constrained)
        except DegenerateConcentrationError as exc:
            face = exc.location[0] if exc.location else None
            where = {"face": face, "x": grid.boundary_faces.center[face].tolist()} if face is not None else None
            status = Degeneration(int(exc.species), t_new, where)
            break
        except NewtonFailure as exc:
            log.warning("Newton failed at step %d (t=%g): %s", step, t_new, exc)
            status = NonConvergence(t_new, exc.residual, step)
            break
        c, b = system.unpack(u)
        c, b = c.copy(), b.copy()
        t = t_new
        rec = record(t, iters)
        if rec is not None:
            trajectory.append(rec)
        if on_step is not None:
            on_step(step, t, c, b, rec)
        bad = _degenerate_location(grid, c, b, floor)
        if bad is not None:
            status = Degeneration(bad[0], t, bad[1])
            break
        norm = float(np.max(np.abs(np.concatenate([c.ravel(), b.ravel()]))))
        if not np.isfinite(norm) or norm > cap:
            status = NormGrowth(t, norm)
            break
    return RunResult(trajectory, StateField(grid, c), BoundaryState(b), status)
