"""Exceptional-energy catalogs and density-of-states histograms.

The catalog collects eigenvalues of the Dirichlet minus-Laplacian over
connected subsets of Q_r; excluded energy windows of half-width U^(-1/4)
around catalog members keep resolvents of admissible bits bounded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .fields import sample
from .geometry import BoxSpec, Site, box_sites, box_sites_sorted, neighbors
from .operators import assemble, eigenvalues

EXHAUSTIVE_SITE_LIMIT = 16
DEDUP_TOL = 1e-9


def _laplacian_matrix(sites: tuple[Site, ...]) -> np.ndarray:
    idx = {a: i for i, a in enumerate(sites)}
    n = len(sites)
    M = np.zeros((n, n))
    for a, i in idx.items():
        M[i, i] = 4.0
        x, y = a
        for b in ((x + 1, y), (x, y + 1)):
            j = idx.get(b)
            if j is not None:
                M[i, j] = M[j, i] = -1.0
    return M


def _is_connected_mask(mask: int, adj: list[int]) -> bool:
    if mask == 0:
        return False
    start = (mask & -mask).bit_length() - 1
    seen = 1 << start
    frontier = seen
    while frontier:
        nxt = 0
        m = frontier
        while m:
            i = (m & -m).bit_length() - 1
            m &= m - 1
            nxt |= adj[i] & mask & ~seen
        seen |= nxt
        frontier = nxt
    return seen == mask


def enumerate_connected(region: set[Site]):
    """Yield every nonempty connected subset of the region exactly once.

    Bitmask enumeration; refuses regions larger than 16 sites (use the
    sampled catalog instead).
    """
    sites = sorted(region)
    n = len(sites)
    if n > EXHAUSTIVE_SITE_LIMIT:
        raise ValueError(
            f"region has {n} > {EXHAUSTIVE_SITE_LIMIT} sites; exhaustive "
            "enumeration refused (use mode='sampled')"
        )
    idx = {a: i for i, a in enumerate(sites)}
    adj = [0] * n
    for a, i in idx.items():
        for b in neighbors(a):
            j = idx.get(b)
            if j is not None:
                adj[i] |= 1 << j
    for mask in range(1, 1 << n):
        if _is_connected_mask(mask, adj):
            yield {sites[i] for i in range(n) if mask & (1 << i)}


def random_connected_subset(region_sorted: list[Site], rng: np.random.Generator) -> set[Site]:
    """Uniform-size random growth: pick a size, grow a cluster site by site."""
    n = len(region_sorted)
    size = int(rng.integers(1, n + 1))
    region = set(region_sorted)
    start = region_sorted[int(rng.integers(n))]
    chosen = {start}
    frontier = [b for b in neighbors(start) if b in region]
    while len(chosen) < size and frontier:
        k = int(rng.integers(len(frontier)))
        site = frontier.pop(k)
        if site in chosen:
            continue
        chosen.add(site)
        frontier.extend(b for b in neighbors(site) if b in region and b not in chosen)
    return chosen


@dataclass(frozen=True)
class EnergyCatalog:
    """Deduplicated sorted eigenvalues of (-Laplacian) on connected subsets."""

    r: int
    energies: np.ndarray
    mode: str                       # "exhaustive" | "sampled"
    n_subsets: int
    seed: int | None = None

    def __post_init__(self) -> None:
        self.energies.setflags(write=False)

    def min_distance(self, lam: float) -> float:
        return float(np.min(np.abs(self.energies - lam)))

    def to_json(self, witnesses: dict[float, list[Site]] | None = None) -> str:
        obj = {
            "r": self.r,
            "mode": self.mode,
            "n_subsets": self.n_subsets,
            "seed": self.seed,
            "energies": [float(e) for e in self.energies],
        }
        if witnesses is not None:
            obj["witnesses"] = {f"{e!r}": sorted(map(list, w)) for e, w in witnesses.items()}
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _dedup(values: list[float], tol: float = DEDUP_TOL) -> np.ndarray:
    values = sorted(values)
    out: list[float] = []
    for v in values:
        if not out or v - out[-1] > tol:
            out.append(v)
    return np.array(out)


def eig_catalog(
    r: int,
    mode: str = "exhaustive",
    n_subsets: int = 2000,
    seed: int = 0,
) -> EnergyCatalog:
    """Catalog of box-Laplacian eigenvalues over connected subsets of Q_r.

    Exhaustive mode covers all connected subsets (r <= 3); sampled mode
    diagonalizes ``n_subsets`` random connected subsets and is marked as such.
    """
    region = box_sites(BoxSpec((0, 0), r))
    values: list[float] = []
    if mode == "exhaustive":
        count = 0
        for subset in enumerate_connected(region):
            sites = tuple(sorted(subset))
            values.extend(sla.eigvalsh(_laplacian_matrix(sites)).tolist())
            count += 1
        return EnergyCatalog(r, _dedup(values), "exhaustive", count)
    if mode == "sampled":
        rng = np.random.default_rng(seed)
        region_sorted = box_sites_sorted(BoxSpec((0, 0), r))
        # always include the cheap deterministic witnesses: singleton and full box
        values.extend(sla.eigvalsh(_laplacian_matrix(((0, 0),))).tolist())
        values.extend(sla.eigvalsh(_laplacian_matrix(tuple(sorted(region)))).tolist())
        for _ in range(n_subsets):
            subset = tuple(sorted(random_connected_subset(region_sorted, rng)))
            values.extend(sla.eigvalsh(_laplacian_matrix(subset)).tolist())
        return EnergyCatalog(r, _dedup(values), "sampled", n_subsets + 2, seed)
    raise ValueError(f"mode must be 'exhaustive' or 'sampled', got {mode!r}")


def exclusion_intervals(catalog: EnergyCatalog, U: float) -> list[tuple[float, float]]:
    """Merged intervals [x - U^(-1/4), x + U^(-1/4)] around catalog energies."""
    if U <= 1:
        raise ValueError(f"U={U} must exceed 1")
    half = U ** -0.25
    merged: list[tuple[float, float]] = []
    for e in catalog.energies:
        lo, hi = float(e) - half, float(e) + half
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def is_excluded(lam0: float, catalog: EnergyCatalog, U: float) -> bool:
    if U <= 1:
        raise ValueError(f"U={U} must exceed 1")
    return catalog.min_distance(lam0) <= U ** -0.25


def pick_midgap_energy(
    catalog: EnergyCatalog,
    U: float,
    lo: float = 0.0,
    hi: float = 8.0,
    min_factor: float = 10.0,
) -> tuple[float, bool]:
    """Midpoint of the widest catalog gap in [lo, hi].

    Returns ``(lambda0, comfortable)`` where ``comfortable`` records whether
    the distance to the catalog reaches ``min_factor * U^(-1/4)``; callers
    treat a False as best-effort exclusion (sampled catalogs especially).
    """
    es = catalog.energies[(catalog.energies >= lo) & (catalog.energies <= hi)]
    if len(es) < 2:
        raise ValueError("catalog too small to pick a mid-gap energy")
    gaps = np.diff(es)
    k = int(np.argmax(gaps))
    lam0 = float((es[k] + es[k + 1]) / 2)
    dist = float(gaps[k] / 2)
    if dist <= U ** -0.25:
        raise ValueError(
            f"widest catalog gap {2 * dist:.3e} cannot clear exclusion half-width"
        )
    return lam0, dist >= min_factor * U ** -0.25


# ---------------------------------------------------------------------------
# Density of states
# ---------------------------------------------------------------------------

def dos_histogram(
    L: int,
    p: float,
    vbar: float,
    n_samples: int,
    bins: int,
    seed: int,
    lo: float = 0.0,
    hi: float = 8.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Histogram of eigenvalues in [lo, hi] across seeded disorder samples.

    Returns ``(edges, mass)`` with mass normalized by the total eigenvalue
    count ``n_samples * L^2``, so sum(mass) approximates the spectral weight
    of the window.
    """
    region = box_sites(BoxSpec((0, 0), L))
    edges = np.linspace(lo, hi, bins + 1)
    counts = np.zeros(bins)
    total = 0
    for trial in range(n_samples):
        V = sample(region, p, vbar, seed, stream=trial)
        w = eigenvalues(assemble(region, V))
        total += len(w)
        sel = w[(w >= lo) & (w <= hi)]
        c, _ = np.histogram(sel, bins=edges)
        counts += c
    return edges, counts / max(total, 1)


def dirichlet_box_energies(nx: int, ny: int) -> np.ndarray:
    """Exact eigenvalues of the minus-Laplacian on an nx-by-ny box (sorted)."""
    jx = np.arange(1, nx + 1)
    jy = np.arange(1, ny + 1)
    ex = 2 - 2 * np.cos(np.pi * jx / (nx + 1))
    ey = 2 - 2 * np.cos(np.pi * jy / (ny + 1))
    return np.sort((ex[:, None] + ey[None, :]).ravel())
