"""Zero-potential site percolation: clusters, admissibility, perfect boxes."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fields import PotentialField, sample, with_override
from .geometry import (
    BoxSpec,
    RBitGeometry,
    Site,
    bit_centers_inside,
    boundaries,
    box_sites,
    chebyshev,
    neighbors,
)


class _UnionFind:
    __slots__ = ("parent", "rank")

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return
        if self.rank[ri] < self.rank[rj]:
            ri, rj = rj, ri
        self.parent[rj] = ri
        if self.rank[ri] == self.rank[rj]:
            self.rank[ri] += 1


@dataclass(frozen=True)
class ClusterLabeling:
    """Connected components of the V=0 sites of a region (4-adjacency)."""

    region: frozenset[Site]
    label: dict[Site, int]
    clusters: tuple[frozenset[Site], ...]

    def cluster_of(self, a: Site) -> frozenset[Site]:
        return self.clusters[self.label[a]]


def zero_clusters(V: PotentialField, region: set[Site] | None = None) -> ClusterLabeling:
    """Union-find labeling of the zero-potential sites within region."""
    if region is None:
        region = V.region
    else:
        region = set(region)
        if not region <= V.region:
            raise ValueError("region not contained in the field's region")
    zeros = sorted(a for a in region if V(a) == 0)
    idx = {a: i for i, a in enumerate(zeros)}
    uf = _UnionFind(len(zeros))
    for a in zeros:
        x, y = a
        for b in ((x + 1, y), (x, y + 1)):
            j = idx.get(b)
            if j is not None:
                uf.union(idx[a], j)
    groups: dict[int, list[Site]] = {}
    for a in zeros:
        groups.setdefault(uf.find(idx[a]), []).append(a)
    clusters = tuple(frozenset(g) for g in groups.values())
    label = {a: ci for ci, cl in enumerate(clusters) for a in cl}
    return ClusterLabeling(frozenset(region), label, clusters)


def percolation_event(l: float, b: Site, V: PotentialField) -> bool:
    """Whether a zero-potential path joins b to the inner boundary of Q_l(b)."""
    box = BoxSpec(b, l)
    sites = box_sites(box)
    if not sites <= V.region:
        raise ValueError("Q_l(b) not contained in the field's region")
    if V(b) != 0:
        return False
    inner, _, _ = boundaries(sites)
    if b in inner:
        return True
    # BFS through zero sites of the box
    seen = {b}
    stack = [b]
    while stack:
        a = stack.pop()
        for nb in neighbors(a):
            if nb in sites and nb not in seen and V(nb) == 0:
                if nb in inner:
                    return True
                seen.add(nb)
                stack.append(nb)
    return False


# ---------------------------------------------------------------------------
# r-bit admissibility and the cluster S_r
# ---------------------------------------------------------------------------

def admissibility_threshold(geo: RBitGeometry) -> int:
    """Max-norm separation beyond which frame 0-paths are forbidden.

    Rounded up: a smaller threshold constrains more pairs, which only makes
    admissibility harder, matching the inequality direction of the bound.
    """
    return int(math.ceil(geo.epsilon0 * geo.r / 30))


def is_admissible(a: Site, geo: RBitGeometry, V: PotentialField) -> bool:
    """Whether the frame pattern blocks both kinds of long zero paths.

    (i) no zero path within the frame joins an inner-boundary site of Q_r to
    any frame site at max-norm distance >= epsilon0*r/30; (ii) no zero path
    within the frame joins the outer boundary of Omega to the inner boundary
    of OmegaTilde.
    """
    if geo.center != a:
        geo = geo.translated(a)
    frame = geo.frame
    if not frame <= V.region:
        raise ValueError("frame F_r(a) not contained in the field's region")
    labeling = zero_clusters(V, frame)

    threshold = admissibility_threshold(geo)
    inner_q, _, _ = boundaries(geo.q_sites)
    _, outer_omega, _ = boundaries(geo.omega)
    inner_omega_tilde, _, _ = boundaries(geo.omega_tilde)

    for cl in labeling.clusters:
        anchors = cl & inner_q
        if anchors:
            for x in anchors:
                for y in cl:
                    if chebyshev(x, y) >= threshold:
                        return False
        if (cl & outer_omega) and (cl & inner_omega_tilde):
            return False
    return True


def cluster_S(a: Site, geo: RBitGeometry, V: PotentialField) -> set[Site]:
    """The cluster S_r(a): Omega grown through zero frame sites, maximally."""
    if geo.center != a:
        geo = geo.translated(a)
    if not is_admissible(a, geo, V):
        raise ValueError(f"r-bit at {a} is not admissible")
    omega = geo.omega
    frame = geo.frame
    allowed = omega | {b for b in frame if V(b) == 0}
    seen = set(omega)
    stack = list(omega)
    while stack:
        s = stack.pop()
        for nb in neighbors(s):
            if nb in allowed and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return seen


def is_perfect(Q: BoxSpec, geo: RBitGeometry, V: PotentialField) -> bool:
    """Whether every r-bit inside the dyadic box Q is admissible."""
    return all(
        is_admissible(b, geo.translated(b), V)
        for b in bit_centers_inside(Q, geo.r, geo.epsilon0)
    )


# ---------------------------------------------------------------------------
# Conditional samplers (rejection)
# ---------------------------------------------------------------------------

def sample_admissible_field(
    geo: RBitGeometry,
    p: float,
    vbar: float,
    seed: int,
    max_attempts: int = 2_000_000,
    stream0: int = 0,
) -> tuple[PotentialField, int]:
    """Field on Q_r whose frame pattern is admissible, by rejection.

    Returns the field and the stream index that produced it (replayable).
    """
    sites = geo.q_sites
    for attempt in range(max_attempts):
        V = sample(sites, p, vbar, seed, stream=stream0 + attempt)
        if is_admissible(geo.center, geo, V):
            return V, stream0 + attempt
    raise RuntimeError(
        f"no admissible frame in {max_attempts} attempts at r={geo.r}, "
        f"epsilon0={geo.epsilon0}, p={p}"
    )


def sample_perfect_field(
    Q: BoxSpec,
    geo: RBitGeometry,
    p: float,
    vbar: float,
    seed: int,
    max_attempts: int = 200_000,
    stream0: int = 0,
) -> tuple[PotentialField, int]:
    """Field on the dyadic box Q with every r-bit admissible, by rejection."""
    sites = box_sites(Q)
    centers = bit_centers_inside(Q, geo.r, geo.epsilon0)
    geos = [geo.translated(b) for b in centers]
    for attempt in range(max_attempts):
        V = sample(sites, p, vbar, seed, stream=stream0 + attempt)
        if all(is_admissible(g.center, g, V) for g in geos):
            return V, stream0 + attempt
    raise RuntimeError(
        f"no perfect box in {max_attempts} attempts at r={geo.r}, L={Q.l}, p={p}"
    )


def force_admissible_frames(
    V: PotentialField,
    geos: list[RBitGeometry],
    frame_p: float,
    seed: int,
    max_attempts: int = 2_000_000,
) -> PotentialField:
    """Override each bit's frame with an admissible pattern (coupling tool).

    Frames are resampled independently at density ``frame_p`` until
    admissible, then written into V; overlapping frames are overridden in
    order, and admissibility of all bits is re-checked on the final field.
    """
    out = V
    for k, geo in enumerate(geos):
        frame = sorted(geo.frame)
        for attempt in range(max_attempts):
            probe = sample(frame, frame_p, V.vbar, seed ^ (0x5EED + k), stream=attempt)
            trial = with_override(out, frame, probe.value_map())
            if is_admissible(geo.center, geo, trial):
                out = trial
                break
        else:
            raise RuntimeError("frame forcing failed")
    for geo in geos:
        if not is_admissible(geo.center, geo, out):
            raise RuntimeError("frame forcing broken by overlapping frames")
    return out


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    phat = successes / n
    denom = 1 + z**2 / n
    center = (phat + z**2 / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z**2 / (4 * n**2)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def estimate_admissibility(
    geo: RBitGeometry, p: float, vbar: float, seed: int, n_trials: int
) -> tuple[float, tuple[float, float]]:
    """Monte Carlo admissibility probability with a Wilson 95% interval."""
    frame = sorted(geo.frame)
    hits = 0
    for k in range(n_trials):
        V = sample(frame, p, vbar, seed, stream=k)
        if is_admissible(geo.center, geo, V):
            hits += 1
    return hits / n_trials, wilson_interval(hits, n_trials)
