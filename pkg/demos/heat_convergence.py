"""Spatial and temporal convergence on a single diffusing species.

With no reactions and no surface law the scheme reduces to the heat
equation with zero flux, whose cosine mode decays exactly.
"""

import math

import numpy as np

from catalyx import Grid, ReactionNetwork, SolverConfig, StateField, advance, conserved_basis, equilibrium_constants


def l2_error(cells, dt, t_end):
    net = ReactionNetwork(["u"], [1.0], [0.0])
    g = Grid((1.0,), (cells,))
    x = g.cell_centers[:, 0]
    c0 = (1 + 0.1 * np.cos(np.pi * x))[:, None]
    res = advance(net, equilibrium_constants(net), conserved_basis(net), g, StateField(g, c0),
                  SolverConfig(dt=dt, t_end=t_end), monitors=False)
    exact = 1 + 0.1 * np.cos(np.pi * x) * math.exp(-np.pi ** 2 * t_end)
    return math.sqrt(np.sum((res.state.c[:, 0] - exact) ** 2) * g.cell_volume)


errs = [l2_error(n, 1e-5, 0.05) for n in (8, 16)]
print("space: errors %.3e %.3e ratio %.2f (second order -> 4)" % (*errs, errs[0] / errs[1]))
errs = [l2_error(64, dt, 0.1) for dt in (0.01, 0.005)]
print("time:  errors %.3e %.3e ratio %.2f (first order -> 2)" % (*errs, errs[0] / errs[1]))
