"""Algebraic Lopatinskii-Shapiro check for the frozen-coefficient half-space problem.

After a partial Fourier-Laplace transform, the decaying solutions of the
bulk equations are ``exp(-R y)`` with

    R = diag(((lam + mu)/d_i + |xi'|^2)^(1/2))      (principal root),

and the boundary conditions are uniquely solvable iff the N x N matrix with
rows ``e_k`` (conserved quantities) and ``D^-1 R^-* C_a nu_sigma_a`` (surface
reactions, ``C_a = c*^nu_sigma_a diag(1/c*)``) is invertible.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np

from . import exact
from .network import ConservedBasis, ReactionNetwork, conserved_basis

Verdict = Literal["invertible", "singular", "indeterminate"]

DEFAULT_MARGIN = 1e-8
DEFAULT_SECTOR_PHI = math.pi / 4
MAX_CERTIFY_SIZE = 64

MARGIN_NOTE = ("singular-value margins are engineering thresholds; "
               "a pass is numerical evidence for the frozen-coefficient condition, not a proof")


class SymbolDomainError(ValueError):
    """Spectral parameter outside the admissible sector, or (lam, xi', mu) = 0."""


@dataclass
class BoundarySymbolInstance:
    lam: complex
    xi_norm_sq: float
    mu_shift: float
    d: np.ndarray
    c_star: np.ndarray
    nu_sigma: np.ndarray
    e: np.ndarray
    sector_phi: float = DEFAULT_SECTOR_PHI

    def __post_init__(self):
        self.lam = complex(self.lam)
        self.d = np.asarray(self.d, dtype=float)
        self.c_star = np.asarray(self.c_star, dtype=float)
        n = self.d.shape[0]
        self.nu_sigma = np.asarray(self.nu_sigma).reshape(-1, n)
        self.e = np.asarray(self.e).reshape(-1, n)
        if self.nu_sigma.shape[0] + self.e.shape[0] != n:
            raise ValueError("need m_sigma + n_sigma = N boundary rows")


def in_sector(lam: complex, sector_phi: float) -> bool:
    """Closed right half-plane or |arg lam| <= pi - phi."""
    if lam == 0 or lam.real >= 0:
        return True
    return abs(cmath.phase(lam)) <= math.pi - sector_phi


def root_symbol(inst: BoundarySymbolInstance) -> np.ndarray:
    """Diagonal of R (principal square root, positive real part)."""
    return np.sqrt((inst.lam + inst.mu_shift) / inst.d + inst.xi_norm_sq + 0j)


def assemble_boundary_matrix(inst: BoundarySymbolInstance) -> np.ndarray:
    if not 0 <= inst.sector_phi < math.pi / 2:
        raise SymbolDomainError("sector angle phi must lie in [0, pi/2)")
    if not in_sector(inst.lam, inst.sector_phi):
        raise SymbolDomainError(f"lambda = {inst.lam} lies outside the sector |arg| <= pi - {inst.sector_phi:.4f}")
    if inst.lam == 0 and inst.xi_norm_sq == 0 and inst.mu_shift == 0:
        raise SymbolDomainError("(lambda, xi') = (0, 0) with mu = 0 is excluded")
    if inst.xi_norm_sq < 0 or inst.mu_shift < 0:
        raise SymbolDomainError("|xi'|^2 and mu must be nonnegative")
    if np.any(inst.c_star <= 0):
        raise SymbolDomainError("reference trace c* must be strictly positive")
    r = root_symbol(inst)
    scale = 1.0 / (inst.d * np.conj(r) * inst.c_star)       # diag of D^-1 R^-* C~
    factors = np.prod(inst.c_star ** inst.nu_sigma, axis=1)   # c*^nu_sigma_a
    surface = factors[:, None] * scale * inst.nu_sigma
    return np.vstack([inst.e.astype(complex), surface]).reshape(inst.d.shape[0], -1)


def lemma_matrix(v, w, delta) -> np.ndarray:
    """Rows (diag(delta) v_i)^T followed by w_j^T."""
    delta = np.asarray(delta, dtype=complex)
    n = delta.shape[0]
    v = np.asarray(v, dtype=float).reshape(-1, n)
    w = np.asarray(w, dtype=float).reshape(-1, n)
    return np.vstack([v * delta, w.astype(complex)])


def _all_rational(*arrays) -> bool:
    for a in arrays:
        for x in np.asarray(a, dtype=object).ravel():
            if not isinstance(x, (int, np.integer, Fraction)):
                if isinstance(x, (float, np.floating)) and float(x).is_integer():
                    continue
                return False
    return True


def zero_outside_hull(points, margin: float = 0.0) -> bool:
    """True iff 0 is not in conv(points) and lies at distance > margin from it."""
    pts = np.asarray(points, dtype=complex).ravel()
    if pts.size == 0 or np.any(pts == 0):
        return False
    ang = np.sort(np.angle(pts))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * math.pi]]))
    if not np.max(gaps) > math.pi:
        return False
    if margin <= 0:
        return True
    # nearest hull point lies on a segment between two of the points
    best = np.min(np.abs(pts))
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            a, b = pts[i], pts[j]
            seg = b - a
            s = np.clip(-(np.conj(seg) * a).real / (abs(seg) ** 2), 0.0, 1.0)
            best = min(best, abs(a + s * seg))
    return best > margin


def lemma_invertibility_hypotheses(v, w, delta, margin: float = 0.0, tol: float = 1e-12) -> bool:
    """Check independence, mutual orthogonality and 0 outside conv(delta).

    Integer or rational inputs are checked exactly; float inputs with a
    relative tolerance ``tol``.
    """
    v = [list(x) for x in v]
    w = [list(x) for x in w]
    n = len(delta)
    if len(v) + len(w) != n or any(len(x) != n for x in v + w):
        raise ValueError("dimension mismatch: need m + s = N vectors of length N")
    if _all_rational(v, w):
        if v and exact.rank(v) < len(v):
            return False
        if w and exact.rank(w) < len(w):
            return False
        fv, fw = exact.to_fractions(v), exact.to_fractions(w)
        if any(sum(a * b for a, b in zip(x, y)) != 0 for x in fv for y in fw):
            return False
    else:
        va, wa = np.array(v, dtype=float).reshape(-1, n), np.array(w, dtype=float).reshape(-1, n)
        for block in (va, wa):
            if len(block) and np.linalg.matrix_rank(block, tol=tol * max(1.0, np.abs(block).max())) < len(block):
                return False
        if va.size and wa.size:
            scale = np.outer(np.linalg.norm(va, axis=1), np.linalg.norm(wa, axis=1))
            if np.any(np.abs(va @ wa.T) > tol * scale):
                return False
    return zero_outside_hull(delta, margin)


def scaled_min_singular(m) -> float:
    s = np.linalg.svd(np.asarray(m), compute_uv=False)
    return float(s[-1] / s[0]) if s[0] > 0 else 0.0


def certify_invertible(m, margin: float = DEFAULT_MARGIN, max_size: int = MAX_CERTIFY_SIZE) -> Verdict:
    """Classify by the smallest singular value relative to the spectral norm."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("square matrix required")
    if m.shape[0] > max_size:
        raise ValueError(f"matrix larger than {max_size} x {max_size}")
    return _classify(scaled_min_singular(m), margin)


def _classify(ratio: float, margin: float) -> Verdict:
    if ratio > margin:
        return "invertible"
    if ratio < margin / 100:
        return "singular"
    return "indeterminate"


def oracle_verdict(m) -> Verdict:
    """Exact determinant of the stored matrix: zero means singular."""
    re, im = exact.exact_determinant(m)
    return "singular" if re == 0 and im == 0 else "invertible"


@dataclass
class SamplePlan:
    lam_min: float = 1e-3
    lam_max: float = 1e6
    n_lam: int = 10
    n_angle: int = 9
    xi_min: float = 1e-3
    xi_max: float = 1e6
    n_xi: int = 11
    include_xi_zero: bool = True
    mu_shift: float = 0.0

    def points(self, sector_phi: float) -> tuple[np.ndarray, np.ndarray]:
        """All (lam, |xi'|^2) samples, lam-major order."""
        mods = np.geomspace(self.lam_min, self.lam_max, self.n_lam)
        half = math.pi - sector_phi
        angles = np.linspace(-half, half, self.n_angle) if self.n_angle > 1 else np.zeros(1)
        lams = (mods[:, None] * np.exp(1j * angles[None, :])).ravel()
        xis = np.geomspace(self.xi_min, self.xi_max, self.n_xi)
        if self.include_xi_zero:
            xis = np.concatenate([[0.0], xis])
        lam_grid, xi_grid = np.meshgrid(lams, xis, indexing="ij")
        return lam_grid.ravel(), xi_grid.ravel()

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SweepReport:
    passed: bool
    n_samples: int
    counts: dict
    min_scaled_singular_value: float
    witness: dict
    margin: float
    sector_phi: float
    oracle_checks: list = field(default_factory=list)
    note: str = MARGIN_NOTE

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "n_samples": self.n_samples,
            "counts": self.counts,
            "min_scaled_singular_value": self.min_scaled_singular_value,
            "witness": self.witness,
            "margin": self.margin,
            "sector_phi": self.sector_phi,
            "oracle_checks": self.oracle_checks,
            "note": self.note,
        }


def boundary_matrices(d, c_star, nu_sigma, e, lams, xis, mu_shift: float = 0.0) -> np.ndarray:
    """Vectorised :func:`assemble_boundary_matrix` over samples; shape (K, N, N).

    Assumes the samples are admissible (see :meth:`SamplePlan.points`).
    """
    d = np.asarray(d, dtype=float)
    c_star = np.asarray(c_star, dtype=float)
    n = d.shape[0]
    nu_sigma = np.asarray(nu_sigma).reshape(-1, n)
    e = np.asarray(e).reshape(-1, n)
    r = np.sqrt((lams[:, None] + mu_shift) / d[None, :] + xis[:, None] + 0j)
    scale = 1.0 / (d * np.conj(r) * c_star)
    factors = np.prod(c_star ** nu_sigma, axis=1)
    surface = factors[None, :, None] * scale[:, None, :] * nu_sigma[None]
    rows = np.broadcast_to(e.astype(complex), (len(lams),) + e.shape)
    return np.concatenate([rows, surface], axis=1)


def ls_sweep(net: ReactionNetwork, c_star, sector_phi: float = DEFAULT_SECTOR_PHI,
             sample_plan: SamplePlan | None = None, basis: ConservedBasis | None = None,
             margin: float = DEFAULT_MARGIN, threads: int = 1, n_oracle: int = 10,
             seed: int = 0) -> SweepReport:
    """Certify the boundary matrix over a grid of (lam, |xi'|^2).

    ``basis`` defaults to :func:`conserved_basis`; pass another set of rows
    to probe a modified boundary system. ``n_oracle`` randomly chosen
    samples are re-checked with the exact determinant.
    """
    plan = sample_plan or SamplePlan()
    c_star = np.asarray(c_star, dtype=float)
    if np.any(c_star <= 0):
        raise SymbolDomainError("reference trace c* must be strictly positive")
    if not 0 <= sector_phi < math.pi / 2:
        raise SymbolDomainError("sector angle phi must lie in [0, pi/2)")
    if basis is None:
        basis = conserved_basis(net)
    e = np.asarray(basis.e).reshape(-1, net.n_species)
    lams, xis = plan.points(sector_phi)
    if plan.mu_shift == 0:
        keep = ~((lams == 0) & (xis == 0))
        lams, xis = lams[keep], xis[keep]

    chunks = np.array_split(np.arange(len(lams)), max(1, threads))

    def work(idx):
        mats = boundary_matrices(net.d, c_star, net.nu_sigma, e, lams[idx], xis[idx], plan.mu_shift)
        s = np.linalg.svd(mats, compute_uv=False)
        return np.where(s[:, 0] > 0, s[:, -1] / np.where(s[:, 0] > 0, s[:, 0], 1.0), 0.0)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    ratios = np.concatenate(parts)
    verdicts = [_classify(x, margin) for x in ratios]
    counts = {k: verdicts.count(k) for k in ("invertible", "singular", "indeterminate")}
    worst = int(np.argmin(ratios))  # first index among ties
    witness = {
        "index": worst,
        "lam": [float(lams[worst].real), float(lams[worst].imag)],
        "xi_norm_sq": float(xis[worst]),
        "mu_shift": plan.mu_shift,
        "scaled_singular_value": float(ratios[worst]),
        "verdict": verdicts[worst],
    }

    checks = []
    rng = np.random.default_rng(seed)
    for i in sorted(rng.choice(len(lams), size=min(n_oracle, len(lams)), replace=False).tolist()):
        m = boundary_matrices(net.d, c_star, net.nu_sigma, e, lams[i:i + 1], xis[i:i + 1], plan.mu_shift)[0]
        checks.append({"index": i, "svd": verdicts[i], "exact": oracle_verdict(m)})
    return SweepReport(
        passed=counts["invertible"] == len(lams),
        n_samples=len(lams),
        counts=counts,
        min_scaled_singular_value=float(ratios[worst]),
        witness=witness,
        margin=margin,
        sector_phi=sector_phi,
        oracle_checks=checks,
    )
