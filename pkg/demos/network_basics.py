"""Stoichiometry, conservation laws and detailed balance for a small network.

Run with ``python demos/network_basics.py``.
"""

import math

import numpy as np

from catalyx import (BulkReaction, ReactionNetwork, SurfaceReaction, check_compatibility, conserved_basis,
                     equilibrium_constants, validate_network)
from catalyx.discretization import BoundaryState, Grid, StateField

# A + B <-> C in the bulk and on the surface; chemical potentials chosen
# so the forward/backward rates satisfy detailed balance
mu0 = [0.0, 0.0, 1.0]
kf = 2.0
net = ReactionNetwork(
    ["A", "B", "C"], [1.0, 0.5, 0.25], mu0,
    [BulkReaction((1, 1, 0), (0, 0, 1), kf, kf * math.e)],
    [SurfaceReaction((-1, -1, 1))],
)
print("violations:", validate_network(net))

basis = conserved_basis(net)
print("conserved rows:\n", basis.e)
print("positive conserved vector:", basis.positive_combination)

kappa = equilibrium_constants(net)
print("surface equilibrium constant kappa =", kappa)

# a uniform state sitting on the surface manifold passes every check
g = Grid((1.0,), (16,))
c = np.tile([0.8, 1.5, kappa[0] * 0.8 * 1.5], (g.n_cells, 1))
state, bnd = StateField(g, c), BoundaryState(np.tile(c[0], (g.n_faces, 1)))
print("compatible:", check_compatibility(net, kappa, state, 1e-8, bnd, basis).ok)

# break detailed balance and the validator says which reaction is at fault
bad = ReactionNetwork(["A", "B", "C"], [1, 1, 1], mu0, [BulkReaction((1, 1, 0), (0, 0, 1), 1.0, 1.0)])
for v in validate_network(bad):
    print("rejected:", v.message)
