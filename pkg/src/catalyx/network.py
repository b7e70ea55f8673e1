"""Chemical model: species, bulk mass-action kinetics and surface equilibria.

Conventions
-----------
Chemical potentials are ideal, ``mu_i = mu0_i + ln c_i``. A bulk reaction
with stoichiometric vector ``nu = beta - alpha`` is detailed balanced when

    kf / kb = exp(-nu . mu0),

which makes its rate ``R = kf c^alpha - kb c^beta`` vanish exactly where
the affinity ``nu . mu`` vanishes. Surface reactions only enter through
their equilibrium condition ``c^nu_sigma = kappa`` with
``kappa = exp(-nu_sigma . mu0)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import exact

DETAILED_BALANCE_TOL = 1e-12
POSITIVITY_FLOOR = 1e-14
#: Above this species count the positive conserved vector comes from an LP.
MAX_ENUMERATION_SPECIES = 12


class NetworkError(ValueError):
    """Structurally malformed network definition."""


class RankDeficiencyError(NetworkError):
    """Surface stoichiometric vectors are linearly dependent."""


class DegenerateConcentrationError(ArithmeticError):
    """A concentration raised to a negative power is at or below the floor."""

    def __init__(self, message, species=None, location=None):
        super().__init__(message)
        self.species = species
        self.location = location


@dataclass(frozen=True)
class BulkReaction:
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    kf: float
    kb: float

    @property
    def nu(self) -> np.ndarray:
        return np.asarray(self.beta, dtype=int) - np.asarray(self.alpha, dtype=int)


@dataclass(frozen=True)
class SurfaceReaction:
    nu_sigma: tuple[int, ...]


@dataclass
class ReactionNetwork:
    species_names: list[str]
    d: np.ndarray
    mu0: np.ndarray
    bulk_reactions: list[BulkReaction] = field(default_factory=list)
    surface_reactions: list[SurfaceReaction] = field(default_factory=list)

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=float)
        self.mu0 = np.asarray(self.mu0, dtype=float)
        self.bulk_reactions = [
            r if isinstance(r, BulkReaction)
            else BulkReaction(tuple(int(x) for x in r[0]), tuple(int(x) for x in r[1]), float(r[2]), float(r[3]))
            for r in self.bulk_reactions
        ]
        self.surface_reactions = [
            r if isinstance(r, SurfaceReaction) else SurfaceReaction(tuple(int(x) for x in r))
            for r in self.surface_reactions
        ]
        n = len(self.species_names)
        if n == 0:
            raise NetworkError("network needs at least one species")
        if self.d.shape != (n,) or self.mu0.shape != (n,):
            raise NetworkError(f"d and mu0 must have length {n}")
        for a, r in enumerate(self.bulk_reactions):
            if len(r.alpha) != n or len(r.beta) != n:
                raise NetworkError(f"bulk reaction {a}: exponent vectors must have length {n}")
            if min(r.alpha + r.beta) < 0:
                raise NetworkError(f"bulk reaction {a}: negative stoichiometric exponent")
        for a, r in enumerate(self.surface_reactions):
            if len(r.nu_sigma) != n:
                raise NetworkError(f"surface reaction {a}: nu_sigma must have length {n}")

    @property
    def n_species(self) -> int:
        return len(self.species_names)

    @property
    def alpha(self) -> np.ndarray:
        """Educt exponents, shape (m, N)."""
        return np.array([r.alpha for r in self.bulk_reactions], dtype=int).reshape(-1, self.n_species)

    @property
    def beta(self) -> np.ndarray:
        return np.array([r.beta for r in self.bulk_reactions], dtype=int).reshape(-1, self.n_species)

    @property
    def nu(self) -> np.ndarray:
        """Bulk stoichiometric vectors, shape (m, N); always beta - alpha."""
        return self.beta - self.alpha

    @property
    def kf(self) -> np.ndarray:
        return np.array([r.kf for r in self.bulk_reactions], dtype=float)

    @property
    def kb(self) -> np.ndarray:
        return np.array([r.kb for r in self.bulk_reactions], dtype=float)

    @property
    def nu_sigma(self) -> np.ndarray:
        """Surface stoichiometric vectors, shape (m_sigma, N)."""
        return np.array([r.nu_sigma for r in self.surface_reactions], dtype=int).reshape(-1, self.n_species)

    def to_dict(self) -> dict:
        return {
            "species": list(self.species_names),
            "d": self.d.tolist(),
            "mu0": self.mu0.tolist(),
            "bulk_reactions": [
                {"alpha": list(r.alpha), "beta": list(r.beta), "kf": r.kf, "kb": r.kb}
                for r in self.bulk_reactions
            ],
            "surface_reactions": [{"nu": list(r.nu_sigma)} for r in self.surface_reactions],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReactionNetwork":
        try:
            species = list(data["species"])
            bulk = [
                BulkReaction(tuple(int(x) for x in r["alpha"]), tuple(int(x) for x in r["beta"]),
                             float(r["kf"]), float(r["kb"]))
                for r in data.get("bulk_reactions", [])
            ]
            surface = []
            for r in data.get("surface_reactions", []):
                if "nu" in r:
                    nu = r["nu"]
                else:
                    nu = [int(b) - int(a) for a, b in zip(r["alpha"], r["beta"])]
                surface.append(SurfaceReaction(tuple(int(x) for x in nu)))
            return cls(species, data["d"], data["mu0"], bulk, surface)
        except (KeyError, TypeError) as exc:
            raise NetworkError(f"malformed network definition: {exc!r}") from exc


@dataclass(frozen=True)
class Violation:
    kind: str
    index: int | None
    defect: float
    message: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "index": self.index, "defect": self.defect, "message": self.message}


def detailed_balance_defects(net: ReactionNetwork) -> np.ndarray:
    """|ln(kf/kb) + nu . mu0| per bulk reaction."""
    if not net.bulk_reactions:
        return np.zeros(0)
    return np.abs(np.log(net.kf / net.kb) + net.nu @ net.mu0)


def validate_network(net: ReactionNetwork, tol: float = DETAILED_BALANCE_TOL) -> list[Violation]:
    """Check the modelling assumptions; violations are returned, never raised."""
    report = []
    for i, di in enumerate(net.d):
        if not di > 0:
            report.append(Violation("diffusion", i, float(di), f"d[{i}] = {di} is not positive"))
    for a, r in enumerate(net.bulk_reactions):
        for name, k in (("kf", r.kf), ("kb", r.kb)):
            if not k > 0:
                report.append(Violation("rate_constant", a, float(k), f"bulk reaction {a}: {name} = {k} is not positive"))
    if all(r.kf > 0 and r.kb > 0 for r in net.bulk_reactions):
        for a, defect in enumerate(detailed_balance_defects(net)):
            if not defect <= tol:
                report.append(Violation(
                    "detailed_balance", a, float(defect),
                    f"bulk reaction {a}: |ln(kf/kb) + nu.mu0| = {defect:.3e} exceeds {tol:.1e}",
                ))
    m_sigma = len(net.surface_reactions)
    if m_sigma > net.n_species:
        report.append(Violation("surface_count", None, float(m_sigma),
                                f"{m_sigma} surface reactions exceed {net.n_species} species"))
    if m_sigma:
        rk = exact.rank(net.nu_sigma.tolist())
        if rk < m_sigma:
            report.append(Violation(
                "linear_dependence", _first_dependent_row(net.nu_sigma), float(m_sigma - rk),
                f"surface stoichiometric vectors have rank {rk} < {m_sigma}",
            ))
    return report


def _first_dependent_row(rows: np.ndarray) -> int:
    for k in range(1, len(rows) + 1):
        if exact.rank(rows[:k].tolist()) < k:
            return k - 1
    return len(rows) - 1


def equilibrium_constants(net: ReactionNetwork) -> np.ndarray:
    """kappa_a = exp(-nu_sigma_a . mu0)."""
    return np.exp(-(net.nu_sigma @ net.mu0))


@dataclass
class ConservedBasis:
    e: np.ndarray
    positive_combination: np.ndarray | None = None

    @property
    def n_conserved(self) -> int:
        return self.e.shape[0]


def conserved_basis(net: ReactionNetwork) -> ConservedBasis:
    """Integer basis of the orthogonal complement of the surface stoichiometry.

    Also searches the joint complement of bulk and surface stoichiometry
    for a strictly positive vector; ``positive_combination`` is None when
    none exists.
    """
    n = net.n_species
    nu_s = net.nu_sigma.tolist()
    if nu_s and exact.rank(nu_s) < len(nu_s):
        raise RankDeficiencyError("surface stoichiometric vectors are linearly dependent")
    n_cons = n - len(nu_s)

    basis = []
    if n <= MAX_ENUMERATION_SPECIES and nu_s:
        # prefer nonnegative conserved quantities (element-count like)
        for ray in exact.extreme_rays(nu_s, n):
            if exact.rank(basis + [ray]) > len(basis):
                basis.append(ray)
            if len(basis) == n_cons:
                break
    if len(basis) < n_cons:
        basis = [exact.primitive_integer(v) for v in exact.nullspace(nu_s, n=n)]
        basis = [v if sum(v) >= 0 else [-x for x in v] for v in basis]

    joint = net.nu.tolist() + nu_s
    positive = _positive_conserved(joint, n)
    return ConservedBasis(np.array(basis, dtype=int).reshape(n_cons, n), positive)


def _positive_conserved(rows: list[list[int]], n: int) -> np.ndarray | None:
    rows = [r for r in rows if any(r)]
    if n <= MAX_ENUMERATION_SPECIES:
        rays = exact.extreme_rays(rows, n)
        if not rays:
            return None
        total = np.sum(np.array(rays, dtype=object), axis=0)
        if not all(x > 0 for x in total):
            return None
        return np.array(exact.primitive_integer(list(total)), dtype=int)

    from scipy.optimize import linprog

    a_eq = np.array(rows, dtype=float).reshape(-1, n)
    res = linprog(np.ones(n), A_eq=a_eq if len(rows) else None,
                  b_eq=np.zeros(len(rows)) if len(rows) else None,
                  bounds=[(1.0, None)] * n, method="highs")
    if res.status != 0:
        return None
    return res.x


def monomial(c: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """c^exponents with 0^0 = 1.

    ``c`` has shape (..., N), ``exponents`` shape (k, N); returns (..., k).
    """
    c = np.asarray(c, dtype=float)
    return np.prod(c[..., None, :] ** exponents, axis=-1)


def reaction_rates(net: ReactionNetwork, c: np.ndarray) -> np.ndarray:
    """R_a(c) = kf c^alpha - kb c^beta, shape (..., m)."""
    return net.kf * monomial(c, net.alpha) - net.kb * monomial(c, net.beta)


def bulk_rate(net: ReactionNetwork, c) -> np.ndarray:
    """Total production r(c) = sum_a R_a(c) nu_a; ``c`` may be batched over leading axes."""
    c = np.asarray(c, dtype=float)
    if not net.bulk_reactions:
        return np.zeros_like(c)
    return reaction_rates(net, c) @ net.nu.astype(float)


def bulk_rate_jacobian(net: ReactionNetwork, c) -> np.ndarray:
    """dr_i/dc_j, shape (..., N, N)."""
    c = np.asarray(c, dtype=float)
    n = net.n_species
    out = np.zeros(c.shape + (n,))
    if not net.bulk_reactions:
        return out
    dfwd = net.kf[:, None] * _monomial_gradient(c, net.alpha)
    dbwd = net.kb[:, None] * _monomial_gradient(c, net.beta)
    # (..., m, N) contracted with nu (m, N) over reactions
    return np.einsum("am,...aj->...mj", net.nu.astype(float), dfwd - dbwd)


def _monomial_gradient(c: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """d(c^exp_a)/dc_j, shape (..., k, N)."""
    powers = c[..., None, :] ** exponents
    grad = np.empty(powers.shape)
    for j in range(exponents.shape[1]):
        others = powers.copy()
        ej = exponents[:, j]
        others[..., j] = np.where(ej > 0, ej * c[..., None, j] ** np.maximum(ej - 1, 0), 0.0)
        grad[..., j] = np.prod(others, axis=-1)
    return grad


def affinities(net: ReactionNetwork, c) -> np.ndarray:
    """nu_a . (mu0 + ln c) for strictly positive c, shape (..., m)."""
    mu = net.mu0 + np.log(np.asarray(c, dtype=float))
    return mu @ net.nu.T.astype(float)


def surface_residual(net: ReactionNetwork, kappa, c_bdry, floor: float = POSITIVITY_FLOOR) -> np.ndarray:
    """c^nu_sigma - kappa for one trace vector or a batch of shape (..., N)."""
    c = np.asarray(c_bdry, dtype=float)
    nus = net.nu_sigma
    if nus.size:
        needs_positive = (nus < 0).any(axis=0)
        bad = (c <= floor) & needs_positive
        if bad.any():
            idx = np.argwhere(bad)[0]
            species = int(idx[-1])
            location = tuple(int(i) for i in idx[:-1]) or None
            raise DegenerateConcentrationError(
                f"species {species} ({net.species_names[species]}) at {c[tuple(idx)]:.3e} "
                f"cannot carry a negative power", species=species, location=location,
            )
    return monomial(c, nus) - np.asarray(kappa, dtype=float)


def linearized_surface_rows(net: ReactionNetwork, c_bdry) -> np.ndarray:
    """C_a nu_sigma_a with C_a = c^nu_sigma_a diag(1/c); shape (..., m_sigma, N).

    This is the gradient of c -> c^nu_sigma_a at strictly positive c.
    """
    c = np.asarray(c_bdry, dtype=float)
    return monomial(c, net.nu_sigma)[..., :, None] * net.nu_sigma / c[..., None, :]


def entropy_density(net: ReactionNetwork, c) -> np.ndarray:
    """sum_i c_i (mu0_i + ln c_i - 1) with 0 ln 0 = 0."""
    c = np.asarray(c, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(c > 0, c * (net.mu0 + np.log(np.where(c > 0, c, 1.0)) - 1.0), 0.0)
    return terms.sum(axis=-1)


@dataclass
class CompatibilityReport:
    surface_residual: np.ndarray
    flux_defect: np.ndarray
    min_concentration: np.ndarray
    tol: float
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "tol": self.tol,
            "max_surface_residual": float(np.max(self.surface_residual, initial=0.0)),
            "max_flux_defect": float(np.max(self.flux_defect, initial=0.0)),
            "min_concentration": float(np.min(self.min_concentration)),
            "violations": [v.to_dict() for v in self.violations],
        }


def check_compatibility(net, kappa, c0, tol: float, boundary=None, basis: ConservedBasis | None = None,
                        floor: float = POSITIVITY_FLOOR, grid_relative: bool = False) -> CompatibilityReport:
    """Discrete compatibility of initial data with the boundary conditions.

    Per boundary face: surface-equilibrium residual of the trace, the
    no-flux defect max_k |e_k . D (b - c_cell)/(h/2)|, and the smallest
    concentration among the cell and trace values. ``boundary`` defaults
    to the adjacent cell values (zero normal derivative).

    With ``grid_relative`` the no-flux defect of a face is only flagged when
    it also exceeds half the conserved flux across the next interior face.
    Sampled smooth data with zero normal derivative has a one-sided defect
    of order h, about a quarter of that interior flux; data with a nonzero
    normal derivative gives a ratio near one.
    """
    grid = c0.grid
    cells = c0.c
    faces = grid.boundary_faces
    trace = cells[faces.cell] if boundary is None else np.asarray(boundary.values, dtype=float)
    if basis is None:
        basis = conserved_basis(net)
    violations = []

    nf = len(faces.cell)
    surf = np.zeros(nf)
    if net.surface_reactions:
        for f in range(nf):
            try:
                surf[f] = np.max(np.abs(surface_residual(net, kappa, trace[f], floor)))
            except DegenerateConcentrationError as exc:
                surf[f] = np.inf
                violations.append(Violation("positivity", f, float(trace[f, exc.species]), str(exc)))
    grad = (trace - cells[faces.cell]) / (faces.dist[:, None])
    if basis.n_conserved:
        flux = np.max(np.abs((grad * net.d) @ basis.e.T.astype(float)), axis=1)
    else:
        flux = np.zeros(nf)
    mins = np.minimum(cells[faces.cell].min(axis=1), trace.min(axis=1))
    flux_tol = np.full(nf, float(tol))
    if grid_relative and basis.n_conserved:
        flux_tol = np.maximum(flux_tol, 0.5 * _inner_conserved_flux(grid, cells, net.d, basis.e))

    for f in range(nf):
        if np.isfinite(surf[f]) and surf[f] > tol:
            violations.append(Violation("surface_equilibrium", f, float(surf[f]),
                                        f"face {f}: surface residual {surf[f]:.3e} exceeds {tol:.1e}"))
        if flux[f] > flux_tol[f]:
            violations.append(Violation("no_flux", f, float(flux[f]),
                                        f"face {f}: conserved flux defect {flux[f]:.3e} exceeds {flux_tol[f]:.1e}"))
    cmin = float(cells.min())
    if cmin <= floor or mins.min() <= floor:
        where = int(np.argmin(cells.min(axis=1)))
        violations.append(Violation("positivity", where, min(cmin, float(mins.min())),
                                    f"minimum concentration {min(cmin, float(mins.min())):.3e} not positive"))
    return CompatibilityReport(surf, flux, mins, tol, violations)



def _inner_conserved_flux(grid, cells, d, e) -> np.ndarray:
    """max_k |e_k . D (c_next - c_cell)/h| across the first interior face behind each boundary face."""
    faces = grid.boundary_faces
    idx = np.array(np.unravel_index(faces.cell, grid.cells))
    idx[faces.axis, np.arange(len(faces.cell))] -= faces.side
    nxt = np.ravel_multi_index(tuple(idx), grid.cells)
    grad = (cells[nxt] - cells[faces.cell]) / grid.h[faces.axis][:, None]
    return np.max(np.abs((grad * d) @ np.asarray(e, dtype=float).T), axis=1)
