"""The three ways a run can stop early.

A species driven to zero gives Degeneration; a step the Newton solver
cannot resolve gives NonConvergence; an exploding norm gives NormGrowth.
"""

import math

import numpy as np

from catalyx import (BulkReaction, Grid, ReactionNetwork, SolverConfig, StateField, advance, conserved_basis,
                     equilibrium_constants)


def run(net, c0, dt, t_end, cells=8):
    g = Grid((1.0,), (cells,))
    return advance(net, equilibrium_constants(net), conserved_basis(net), g,
                   StateField(g, np.tile(c0, (cells, 1))), SolverConfig(dt=dt, t_end=t_end)).status


# fast, nearly irreversible A + B -> C exhausts A
net = ReactionNetwork(["A", "B", "C"], [1, 1, 1], [0, 0, -math.log(1e30)],
                      [BulkReaction((1, 1, 0), (0, 0, 1), 1e6, 1e-24)])
print(run(net, [0.5, 1.0, 1e-3], 0.01, 1.0).to_dict())

# a tenth-order reaction with one enormous step
net = ReactionNetwork(["A", "B"], [1, 1], [0, -30],
                      [BulkReaction((10, 0), (0, 1), 1e10, 1e10 * math.exp(-30))])
print(run(net, [1.0, 1.0], 1e6, 1e6).to_dict())
