"""Reaction-diffusion systems with nonlinear surface equilibria.

Finite-volume implicit Euler integration, Lopatinskii-Shapiro symbol checks
and entropy diagnostics for mass-action networks with detailed balance.
"""

from .config import ConfigError, InitialCondition, RunConfig
from .diagnostics import CSV_COLUMNS, BoundReport, DiagnosticsRecord, check_bounds, entropy_identity_residual, evaluate
from .discretization import BoundaryState, Grid, StateField, assemble_step_residual, step_jacobian
from .network import (
    BulkReaction,
    ConservedBasis,
    DegenerateConcentrationError,
    NetworkError,
    RankDeficiencyError,
    ReactionNetwork,
    SurfaceReaction,
    check_compatibility,
    conserved_basis,
    equilibrium_constants,
    validate_network,
)
from .symbol import (
    BoundarySymbolInstance,
    SamplePlan,
    SweepReport,
    assemble_boundary_matrix,
    certify_invertible,
    lemma_invertibility_hypotheses,
    lemma_matrix,
    ls_sweep,
)
from .timestepper import Completed, Degeneration, NonConvergence, NormGrowth, SolverConfig, advance

__version__ = "0.1.0"
