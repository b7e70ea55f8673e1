"""Monitors for conservation, entropy dissipation and boundary defects.

Dissipation terms are the exact discrete counterparts of the continuous
integrals for this finite-volume scheme:

* diffusion: ``d_i |grad c_i|^2 / c_i`` on a face is evaluated as
  ``d_i (dc_i/dx)(d ln c_i/dx)``, i.e. with the logarithmic mean as face
  concentration, over the face's dual volume (half volume at the boundary);
* reactions: ``kf c^alpha * A (exp(A) - 1)`` with affinity ``A = nu.(mu0 + ln c)``,
  evaluated as ``(kf c^alpha - kb c^beta) ln(kf c^alpha / kb c^beta)``.

With these, the semi-discrete entropy identity holds exactly, so the
time-discrete residual measures time quadrature error only.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .network import POSITIVITY_FLOOR, ConservedBasis, ReactionNetwork, entropy_density, monomial

CSV_COLUMNS = (
    "t", "mass_e", "entropy", "diffusive_dissipation", "reactive_dissipation", "l2_sq",
    "max_norm", "min_concentration", "boundary_flux_defect", "boundary_equilibrium_defect",
    "newton_iters",
)


@dataclass
class DiagnosticsRecord:
    t: float
    mass_e: float
    entropy: float
    diffusive_dissipation: float
    reactive_dissipation: float
    l2_sq: float
    max_norm: float
    min_concentration: float
    boundary_flux_defect: float
    boundary_equilibrium_defect: float
    newton_iters: int = 0
    l1_norm: float = 0.0
    skipped_cells: int = 0

    def csv_row(self) -> list[str]:
        return [repr(int(v)) if k == "newton_iters" else repr(float(v))
                for k, v in ((k, getattr(self, k)) for k in CSV_COLUMNS)]

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(net: ReactionNetwork, basis: ConservedBasis, grid, state, boundary, kappa=None,
             t: float = 0.0, newton_iters: int = 0, floor: float = POSITIVITY_FLOOR) -> DiagnosticsRecord:
    c = np.asarray(getattr(state, "c", state), dtype=float)
    b = np.asarray(getattr(boundary, "values", boundary), dtype=float)
    vol = grid.cell_volume
    faces = grid.boundary_faces
    inner = grid.interior_faces

    if basis.positive_combination is not None:
        # exactly rounded sum: independent of cell numbering
        mass_e = math.fsum(c @ np.asarray(basis.positive_combination, dtype=float)) * vol
    else:
        mass_e = float("nan")
    entropy = float(np.sum(entropy_density(net, c)) * vol)

    positive = c >= floor
    skipped = int(np.count_nonzero(~positive.all(axis=1)))
    logc = np.log(np.where(positive, c, 1.0))
    bpos = b >= floor
    logb = np.log(np.where(bpos, b, 1.0))

    # interior faces: weight = area * dist / dist^2
    ok = positive[inner.cell] & positive[inner.other]
    dc = c[inner.other] - c[inner.cell]
    dl = logc[inner.other] - logc[inner.cell]
    w = (inner.area / inner.dist)[:, None]
    diff = np.sum(np.where(ok, w * net.d * dc * dl, 0.0))
    okb = positive[faces.cell] & bpos
    dcb = b - c[faces.cell]
    dlb = logb - logc[faces.cell]
    wb = (faces.area / faces.dist)[:, None]
    diff += np.sum(np.where(okb, wb * net.d * dcb * dlb, 0.0))

    reac = 0.0
    if net.bulk_reactions:
        fwd = net.kf * monomial(c, net.alpha)
        bwd = net.kb * monomial(c, net.beta)
        good = (fwd > 0) & (bwd > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.where(good, (fwd - bwd) * (np.log(np.where(good, fwd, 1.0)) - np.log(np.where(good, bwd, 1.0))), 0.0)
        reac = float(np.sum(term) * vol)

    if basis.n_conserved:
        grad = (b - c[faces.cell]) / faces.dist[:, None]
        flux_defect = float(np.max(np.abs((grad * net.d) @ basis.e.T.astype(float)), initial=0.0))
    else:
        flux_defect = 0.0
    eq_defect = 0.0
    if net.surface_reactions and kappa is not None:
        nus = net.nu_sigma
        with np.errstate(divide="ignore", invalid="ignore"):
            res = monomial(b, nus) - np.asarray(kappa)
        eq_defect = float(np.max(np.abs(res)))

    both = np.concatenate([c, b]) if b.size else c
    return DiagnosticsRecord(
        t=float(t),
        mass_e=mass_e,
        entropy=entropy,
        diffusive_dissipation=float(diff),
        reactive_dissipation=reac,
        l2_sq=float(np.sum(c * c) * vol),
        max_norm=float(np.max(np.abs(both))),
        min_concentration=float(np.min(both)),
        boundary_flux_defect=flux_defect,
        boundary_equilibrium_defect=eq_defect,
        newton_iters=int(newton_iters),
        l1_norm=float(np.sum(np.abs(c)) * vol),
        skipped_cells=skipped,
    )


@dataclass
class BoundReport:
    mass_drift: float
    mass_ok: bool | None
    l1_constant: float | None
    l1_ratio: float
    l1_ok: bool | None
    entropy_residual: np.ndarray
    max_entropy_increase: float
    entropy_monotone: bool
    l1t_linf: float
    l2_l2: float
    finite: bool
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(x is not False for x in (self.mass_ok, self.l1_ok, self.entropy_monotone, self.finite))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["entropy_residual_max"] = float(np.max(np.abs(self.entropy_residual), initial=0.0))
        d.pop("entropy_residual")
        d["ok"] = self.ok
        return d


def entropy_identity_residual(trajectory) -> np.ndarray:
    """E(t_n) - E(0) + trapezoidal integral of total dissipation up to t_n."""
    t = np.array([r.t for r in trajectory])
    ent = np.array([r.entropy for r in trajectory])
    dis = np.array([r.diffusive_dissipation + r.reactive_dissipation for r in trajectory])
    integral = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (dis[1:] + dis[:-1]))])
    return ent - ent[0] + integral


def check_bounds(trajectory, basis: ConservedBasis, tol: float = 1e-8,
                 monotone_slack: float = 1e-10) -> BoundReport:
    """Compare a trajectory against the a-priori bounds.

    Mass drift is relative to the initial conserved mass; the L1 bound uses
    the constant max(e)/min(e) of the positive conserved vector. The
    L1_t L_inf and L2_t L2 quantities are reported as accumulations only.
    """
    if not trajectory:
        raise ValueError("empty trajectory")
    notes = []
    mass = np.array([r.mass_e for r in trajectory])
    l1 = np.array([r.l1_norm for r in trajectory])
    if basis.positive_combination is None:
        drift, mass_ok, const, l1_ok = float("nan"), None, None, None
        notes.append("no strictly positive conserved vector: L1 monitor unavailable")
        l1_ratio = float(np.max(l1) / l1[0]) if l1[0] > 0 else float("nan")
    else:
        drift = float(np.max(np.abs(mass - mass[0])) / abs(mass[0])) if mass[0] else float(np.max(np.abs(mass)))
        mass_ok = drift <= tol
        e = np.asarray(basis.positive_combination, dtype=float)
        const = float(e.max() / e.min())
        l1_ratio = float(np.max(l1) / l1[0]) if l1[0] > 0 else float("nan")
        l1_ok = bool(np.all(l1 <= const * l1[0] * (1 + tol)))
    ent = np.array([r.entropy for r in trajectory])
    inc = float(np.max(np.diff(ent), initial=0.0))
    t = np.array([r.t for r in trajectory])
    dt = np.diff(t)
    maxn = np.array([r.max_norm for r in trajectory])
    l2 = np.array([r.l2_sq for r in trajectory])
    l1t = float(np.sum(0.5 * dt * (maxn[1:] + maxn[:-1])))
    l2l2 = float(np.sqrt(np.sum(0.5 * dt * (l2[1:] + l2[:-1]))))
    finite = bool(np.isfinite(l1t) and np.isfinite(l2l2) and np.all(np.isfinite(ent)))
    return BoundReport(
        mass_drift=drift, mass_ok=mass_ok, l1_constant=const, l1_ratio=l1_ratio, l1_ok=l1_ok,
        entropy_residual=entropy_identity_residual(trajectory),
        max_entropy_increase=inc, entropy_monotone=inc <= monotone_slack,
        l1t_linf=l1t, l2_l2=l2l2, finite=finite, notes=notes,
    )
