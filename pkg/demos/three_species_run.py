"""Full run of the three-species demo config with diagnostics.

Equivalent to ``catalyx simulate --config demos/configs/three_species.json``
but keeps the trajectory in memory to show conservation and entropy decay.
"""

from pathlib import Path

import numpy as np

from catalyx import RunConfig, advance, check_bounds, conserved_basis, equilibrium_constants
from catalyx.diagnostics import entropy_identity_residual

cfg = RunConfig.load(Path(__file__).parent / "configs" / "three_species.json")
basis = conserved_basis(cfg.network)
state, bnd = cfg.initial_state()
res = advance(cfg.network, equilibrium_constants(cfg.network), basis, cfg.grid, state, cfg.solver, bnd)

traj = res.trajectory
print("status:", res.status.to_dict())
ent = np.array([r.entropy for r in traj])
print(f"entropy {ent[0]:.6f} -> {ent[-1]:.6f}, largest step increase {np.max(np.diff(ent)):.2e}")
print(f"entropy identity residual (max) {np.max(np.abs(entropy_identity_residual(traj))):.2e}")
print("bounds:", check_bounds(traj, basis, cfg.mass_tol).to_dict())
