"""Dirichlet-restricted lattice Hamiltonians, cut variants and resolvents.

The operator on a finite site set S has diagonal 4 + V(a) and -1 on
4-adjacent pairs inside S (couplings leaving S are discarded).  The cutting
procedure replaces the -1 on the edge boundary of a percolation cluster by
t - 1, splitting the operator into blocks at t = 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from .fields import PotentialField
from .geometry import RBitGeometry, BoxSpec, Site, box_sites

DEFAULT_RESIDUAL_TOL = 1e-8


class SingularityError(ArithmeticError):
    """Energy too close to the spectrum for a resolvent computation."""


class EigenvalueProximityWarning(UserWarning):
    """A strict eigenvalue count was requested within tolerance of the spectrum."""


@dataclass(frozen=True)
class LatticeOperator:
    """Real symmetric operator indexed by a sorted tuple of sites."""

    sites: tuple[Site, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.sites)
        if self.matrix.shape != (n, n):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match {n} sites")
        self.matrix.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.sites)

    @property
    def index(self) -> dict[Site, int]:
        idx = self.__dict__.get("_index")
        if idx is None:
            idx = {a: i for i, a in enumerate(self.sites)}
            self.__dict__["_index"] = idx
        return idx

    def entry(self, a: Site, b: Site) -> float:
        return float(self.matrix[self.index[a], self.index[b]])

    def shifted(self, lam: float) -> np.ndarray:
        return self.matrix - lam * np.eye(self.n)


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with aligned orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def residual(self, A: np.ndarray) -> float:
        R = A @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return float(np.max(np.abs(R))) if R.size else 0.0


def assemble(S: Iterable[Site], V: PotentialField) -> LatticeOperator:
    """Dirichlet restriction of -Laplacian + V to the site set S."""
    sites = tuple(sorted(set(S)))
    if not sites:
        raise ValueError("cannot assemble an operator on an empty site set")
    idx = {a: i for i, a in enumerate(sites)}
    vmap = V.index
    missing = [a for a in sites if a not in vmap]
    if missing:
        raise ValueError(f"sites {missing[:3]} outside potential region")
    n = len(sites)
    M = np.zeros((n, n))
    for a, i in idx.items():
        M[i, i] = 4.0 + V.values[vmap[a]]
        x, y = a
        for b in ((x + 1, y), (x, y + 1)):
            j = idx.get(b)
            if j is not None:
                M[i, j] = -1.0
                M[j, i] = -1.0
    return LatticeOperator(sites, M)


def cut_edge_set(cluster: set[Site], within: set[Site]) -> set[frozenset[Site]]:
    """Edges joining the cluster to its complement inside the ambient set."""
    edges: set[frozenset[Site]] = set()
    for a in cluster:
        x, y = a
        for b in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if b in within and b not in cluster:
                edges.add(frozenset((a, b)))
    return edges


def _apply_cut(op: LatticeOperator, edges: set[frozenset[Site]], t: float) -> LatticeOperator:
    if not 0 <= t <= 1:
        raise ValueError(f"cut parameter t={t} outside [0, 1]")
    M = op.matrix.copy()
    idx = op.index
    for e in edges:
        a, b = tuple(e)
        i, j = idx[a], idx[b]
        M[i, j] = t - 1.0
        M[j, i] = t - 1.0
    return LatticeOperator(op.sites, M)


def assemble_cut(a: Site, geo: RBitGeometry, V: PotentialField, t: float) -> LatticeOperator:
    """Cut operator H^t on Q_r(a): entries t-1 across the cluster boundary.

    Requires an admissible r-bit; at t=1 the operator splits into the cluster
    block and its complement.
    """
    from .percolation import cluster_S, is_admissible

    if geo.center != a:
        geo = geo.translated(a)
    if not is_admissible(a, geo, V):
        raise ValueError(f"r-bit at {a} is not admissible; cutting undefined")
    S = cluster_S(a, geo, V)
    q = geo.q_sites
    op = assemble(q, V)
    return _apply_cut(op, cut_edge_set(S, q), t)


def assemble_extended_cut(
    Q: BoxSpec,
    V: PotentialField,
    bits: Sequence[RBitGeometry],
    t: float,
) -> LatticeOperator:
    """Cut operator H^{R,t} on an r-dyadic box for a set of admissible bits."""
    from .percolation import cluster_S, is_admissible

    q_sites = box_sites(Q)
    all_edges: set[frozenset[Site]] = set()
    clusters: list[set[Site]] = []
    for geo in bits:
        if not Q.contains_box(geo.q_box):
            raise ValueError(f"r-bit at {geo.center} not inside the dyadic box")
        if not is_admissible(geo.center, geo, V):
            raise ValueError(f"r-bit at {geo.center} is not admissible")
        S = cluster_S(geo.center, geo, V)
        for prev in clusters:
            assert not (S & prev), "cut clusters of distinct bits must be disjoint"
        clusters.append(S)
        edges = cut_edge_set(S, q_sites)
        assert not (edges & all_edges), "cut edge sets of distinct bits must be disjoint"
        all_edges |= edges
    return _apply_cut(assemble(q_sites, V), all_edges, t)


# ---------------------------------------------------------------------------
# Spectra and resolvents
# ---------------------------------------------------------------------------

def eigendecompose(op: LatticeOperator, residual_tol: float = DEFAULT_RESIDUAL_TOL) -> Spectrum:
    """Full symmetric eigendecomposition with a residual guarantee."""
    A = np.asarray(op.matrix)
    asym = float(np.max(np.abs(A - A.T))) if A.size else 0.0
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if asym > residual_tol * scale:
        raise ValueError(f"matrix not symmetric: max asymmetry {asym:.3e}")
    try:
        w, v = sla.eigh(A)
    except sla.LinAlgError as exc:  # pragma: no cover - LAPACK failure diagnostics
        raise ArithmeticError(f"eigendecomposition failed on {op.n}x{op.n} matrix: {exc}")
    spec = Spectrum(w, v)
    res = spec.residual(A)
    norm = max(float(np.max(np.abs(w))), 1.0)
    if res > residual_tol * norm:
        raise ArithmeticError(f"eigendecomposition residual {res:.3e} exceeds tolerance")
    return spec


def eigenvalues(op: LatticeOperator, banded_cutoff: int = 600) -> np.ndarray:
    """Ascending eigenvalues; uses the banded solver on large lattice boxes."""
    A = op.matrix
    n = op.n
    if n <= banded_cutoff:
        return sla.eigvalsh(A)
    bw = 0
    rows, cols = np.nonzero(A)
    if rows.size:
        bw = int(np.max(np.abs(rows - cols)))
    if bw >= n - 1 or bw > 200:
        return sla.eigvalsh(A)
    band = np.zeros((bw + 1, n))
    for k in range(bw + 1):
        band[k, : n - k] = np.diagonal(A, -k)
    return sla.eig_banded(band, lower=True, eigvals_only=True)


def count_below(op: LatticeOperator | np.ndarray, lam: float,
                proximity_tol: float | None = None) -> int:
    """Number of eigenvalues strictly below lam, with multiplicity.

    Warns when lam sits within ``proximity_tol`` of the spectrum (the strict
    count is then tolerance-sensitive).
    """
    A = op.matrix if isinstance(op, LatticeOperator) else np.asarray(op)
    w = sla.eigvalsh(A)
    if proximity_tol is None:
        scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
        proximity_tol = 1e-9 * scale
    if w.size and float(np.min(np.abs(w - lam))) < proximity_tol:
        warnings.warn(
            f"count_below at lambda={lam} within {proximity_tol:.1e} of an eigenvalue",
            EigenvalueProximityWarning,
            stacklevel=2,
        )
    return int(np.searchsorted(w, lam, side="left"))


def gap_tolerance(vbar: float) -> float:
    """Absolute spectral-gap tolerance below solver eigenvalue resolution."""
    return 1e-10 * max(1.0, vbar)


def _check_not_singular(A: np.ndarray, lam: float, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """LU-factor A - lam and reject when the estimated spectral gap is below tol."""
    B = A - lam * np.eye(A.shape[0])
    lu, piv = sla.lu_factor(B)
    anorm = float(np.linalg.norm(B, 1))
    rcond = float(sla.lapack.dgecon(lu, anorm)[0])
    if rcond * anorm < tol:
        raise SingularityError(
            f"lambda0={lam} within estimated gap {rcond * anorm:.3e} (< {tol:.1e}) of spectrum"
        )
    return lu, piv


def green(S: Iterable[Site], V: PotentialField, lam0: float, b: Site, c: Site,
          gap_tol: float | None = None) -> float:
    """Resolvent entry G_S(b, c) = (H_S - lam0)^{-1}(b, c) by direct solve.

    A direct LU solve keeps full accuracy at large vbar, where a spectral sum
    loses digits to cancellation.
    """
    op = assemble(S, V)
    return green_entry(op, lam0, b, c, gap_tol if gap_tol is not None else gap_tolerance(V.vbar))


def green_entry(op: LatticeOperator, lam0: float, b: Site, c: Site,
                gap_tol: float = 1e-10) -> float:
    lu, piv = _check_not_singular(op.matrix, lam0, gap_tol)
    rhs = np.zeros(op.n)
    rhs[op.index[c]] = 1.0
    x = sla.lu_solve((lu, piv), rhs)
    return float(x[op.index[b]])


def green_matrix(op: LatticeOperator, lam0: float, gap_tol: float = 1e-10) -> np.ndarray:
    """Full resolvent (H - lam0)^{-1} as a dense matrix."""
    lu, piv = _check_not_singular(op.matrix, lam0, gap_tol)
    return sla.lu_solve((lu, piv), np.eye(op.n))


def inverse_norm(op: LatticeOperator, lam0: float, gap_tol: float = 1e-10) -> float:
    """Spectral norm of (A - lam0)^{-1}; equals 1/dist(lam0, spectrum)."""
    w = eigenvalues(op)
    dist = float(np.min(np.abs(w - lam0)))
    if dist < gap_tol:
        raise SingularityError(f"lambda0={lam0} within {dist:.3e} of spectrum")
    return 1.0 / dist


# ---------------------------------------------------------------------------
# Spectral reflection
# ---------------------------------------------------------------------------

def reflect(V: PotentialField, u: np.ndarray | None, lam: float
            ) -> tuple[PotentialField, np.ndarray | None, float]:
    """Map (V, u, lam) to (vbar - V, parity-flipped u, vbar + 8 - lam).

    If H u = lam u on the region (Dirichlet), the reflected triple satisfies
    the eigenproblem for the reflected operator exactly; applying the map
    twice is the identity.
    """
    from dataclasses import replace

    vtilde = replace(V, values=V.vbar - V.values)
    utilde = None
    if u is not None:
        u = np.asarray(u, dtype=float)
        if u.shape != (len(V.sites),):
            raise ValueError("eigenvector not aligned with field region")
        signs = np.array([(-1.0) ** ((x + y) & 1) for x, y in V.sites])
        utilde = signs * u
    return vtilde, utilde, V.vbar + 8.0 - lam


def spectrum_in_bands(w: np.ndarray, vbar: float, tol: float) -> bool:
    """Whether all eigenvalues lie in [0, 8] union [vbar, vbar + 8]."""
    in_low = (w >= -tol) & (w <= 8.0 + tol)
    in_high = (w >= vbar - tol) & (w <= vbar + 8.0 + tol)
    return bool(np.all(in_low | in_high))
