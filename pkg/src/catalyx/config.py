"""Run configuration: JSON ingestion, validation and round-tripping."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .discretization import BoundaryState, Grid, StateField
from .expressions import Expression, ExpressionError
from .network import DETAILED_BALANCE_TOL, NetworkError, ReactionNetwork
from .symbol import DEFAULT_MARGIN, DEFAULT_SECTOR_PHI, SamplePlan
from .timestepper import SolverConfig


class ConfigError(ValueError):
    """Malformed or unresolvable run configuration."""


@dataclass
class InitialCondition:
    kind: str
    values: list | None = None
    expressions: list[str] | None = None

    def __post_init__(self):
        if self.kind == "constant":
            if not self.values:
                raise ConfigError("constant initial condition needs 'values'")
            self.values = [float(v) for v in self.values]
        elif self.kind == "expression":
            if not self.expressions:
                raise ConfigError("expression initial condition needs 'species' expressions")
            try:
                self._compiled = [Expression(s) for s in self.expressions]
            except ExpressionError as exc:
                raise ConfigError(str(exc)) from exc
        else:
            raise ConfigError(f"unknown initial condition type {self.kind!r}")

    @property
    def n_species(self) -> int:
        return len(self.values if self.kind == "constant" else self.expressions)

    def evaluate(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "constant":
            return np.tile(np.asarray(self.values, dtype=float), (len(pts), 1))
        return np.stack([f(pts) for f in self._compiled], axis=1)

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"type": "constant", "values": list(self.values)}
        return {"type": "expression", "species": list(self.expressions)}

    @classmethod
    def from_dict(cls, data: dict) -> "InitialCondition":
        kind = data.get("type")
        return cls(kind, values=data.get("values"), expressions=data.get("species"))


@dataclass
class RunConfig:
    network: ReactionNetwork
    grid: Grid
    initial: InitialCondition
    solver: SolverConfig
    compatibility_tol: float = 1e-8
    detailed_balance_tol: float = DETAILED_BALANCE_TOL
    mass_tol: float = 1e-8
    flux_check: str = "grid"
    sector_phi: float = DEFAULT_SECTOR_PHI
    ls_margin: float = DEFAULT_MARGIN
    sample_plan: SamplePlan = field(default_factory=SamplePlan)
    c_star: list | None = None
    output_dir: str | None = None
    snapshot_every: int = 0
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        for name in ("compatibility_tol", "detailed_balance_tol", "mass_tol", "ls_margin"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.initial.n_species != self.network.n_species:
            raise ConfigError("initial condition species count does not match the network")
        if self.flux_check not in ("grid", "absolute"):
            raise ConfigError("flux_check must be 'grid' or 'absolute'")
        if not 0 <= self.sector_phi < math.pi / 2:
            raise ConfigError("sector_phi must lie in [0, pi/2)")
        if self.snapshot_every < 0 or self.threads < 1:
            raise ConfigError("snapshot_every must be >= 0 and threads >= 1")

    def initial_state(self) -> tuple[StateField, BoundaryState]:
        """Initial data sampled at cell centres; traces at boundary-face centres."""
        cells = self.initial.evaluate(self.grid.cell_centers)
        faces = self.initial.evaluate(self.grid.boundary_faces.center)
        if not (np.all(np.isfinite(cells)) and np.all(np.isfinite(faces))):
            raise ConfigError("initial condition evaluates to non-finite values")
        return StateField(self.grid, cells), BoundaryState(faces)

    def to_dict(self) -> dict:
        s = self.solver
        return {
            "network": self.network.to_dict(),
            "grid": {"extents": list(self.grid.extents), "cells": list(self.grid.cells)},
            "initial": self.initial.to_dict(),
            "solver": {
                "dt": s.dt, "t_end": s.t_end, "newton_tol": s.newton_tol,
                "newton_max_iter": s.newton_max_iter, "damping": s.damping, "min_step": s.min_step,
                "positivity_floor": s.positivity_floor, "norm_growth_factor": s.norm_growth_factor,
            },
            "monitors": {
                "compatibility_tol": self.compatibility_tol,
                "detailed_balance_tol": self.detailed_balance_tol,
                "mass_tol": self.mass_tol,
                "flux_check": self.flux_check,
            },
            "ls": {"sector_phi": self.sector_phi, "margin": self.ls_margin, "c_star": self.c_star,
                   "plan": self.sample_plan.to_dict()},
            "output": {"dir": self.output_dir, "snapshot_every": self.snapshot_every},
            "seed": self.seed,
            "threads": self.threads,
        }

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        try:
            if "network" in data:
                net_data = data["network"]
            elif "network_file" in data:
                path = Path(data["network_file"])
                if base_dir is not None and not path.is_absolute():
                    path = base_dir / path
                try:
                    net_data = json.loads(path.read_text())
                except FileNotFoundError as exc:
                    raise ConfigError(f"network file not found: {path}") from exc
            else:
                raise ConfigError("configuration needs 'network' or 'network_file'")
            network = ReactionNetwork.from_dict(net_data)
            g = data["grid"]
            grid = Grid(tuple(g["extents"]), tuple(g["cells"]))
            initial = InitialCondition.from_dict(data["initial"])
            solver = SolverConfig(**data["solver"])
            mon = data.get("monitors", {})
            ls = data.get("ls", {})
            out = data.get("output", {})
            return cls(
                network=network, grid=grid, initial=initial, solver=solver,
                compatibility_tol=float(mon.get("compatibility_tol", 1e-8)),
                detailed_balance_tol=float(mon.get("detailed_balance_tol", DETAILED_BALANCE_TOL)),
                mass_tol=float(mon.get("mass_tol", 1e-8)),
                flux_check=str(mon.get("flux_check", "grid")),
                sector_phi=float(ls.get("sector_phi", DEFAULT_SECTOR_PHI)),
                ls_margin=float(ls.get("margin", DEFAULT_MARGIN)),
                sample_plan=SamplePlan(**ls.get("plan", {})),
                c_star=ls.get("c_star"),
                output_dir=out.get("dir"),
                snapshot_every=int(out.get("snapshot_every", 0)),
                seed=int(data.get("seed", 0)),
                threads=int(data.get("threads", 1)),
            )
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError, NetworkError) as exc:
            raise ConfigError(f"malformed configuration: {exc}") from exc

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"configuration file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        return cls.from_dict(data, base_dir=path.parent)

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))
