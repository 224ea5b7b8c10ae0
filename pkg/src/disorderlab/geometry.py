"""Lattice geometry: boxes, boundaries, tilted rectangles, sparsity and shells.

Sites are plain ``(x, y)`` integer tuples; regions are Python sets of sites.
Adjacency throughout is the 4-neighbor relation (the operator stencil fixes
this choice; the max-norm only enters through distances, never adjacency).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

Site = tuple[int, int]

NEIGHBOR_OFFSETS: tuple[Site, ...] = ((1, 0), (-1, 0), (0, 1), (0, -1))


class GeometryError(ValueError):
    """Raised for degenerate or inconsistent geometric configurations."""


def neighbors(a: Site) -> tuple[Site, ...]:
    x, y = a
    return ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1))


def chebyshev(a: Site, b: Site) -> int:
    """Max-norm distance |a - b|, the paper-wide notion of distance."""
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def set_distance(s1: Iterable[Site], s2: Iterable[Site]) -> int:
    s2 = list(s2)
    return min(chebyshev(a, b) for a in s1 for b in s2)


# ---------------------------------------------------------------------------
# Axis-aligned boxes Q_l(a)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoxSpec:
    """Box Q_l(center): all sites within max-norm radius (l-1)/2 of center.

    ``l`` may be any real >= 1; the site set only depends on
    ``halfwidth = floor((l-1)/2)``.  The reported side length is
    ``2*halfwidth`` (number of lattice steps across).
    """

    center: Site
    l: float

    def __post_init__(self) -> None:
        if self.l < 1:
            raise GeometryError(f"box parameter l={self.l} must be >= 1")

    @property
    def halfwidth(self) -> int:
        return int(math.floor((self.l - 1) / 2))

    @property
    def side_length(self) -> int:
        return 2 * self.halfwidth

    @property
    def n_sites(self) -> int:
        return (2 * self.halfwidth + 1) ** 2

    def __contains__(self, a: Site) -> bool:
        return chebyshev(a, self.center) <= self.halfwidth

    def contains_box(self, other: "BoxSpec") -> bool:
        return chebyshev(other.center, self.center) + other.halfwidth <= self.halfwidth


def box_sites(spec: BoxSpec) -> set[Site]:
    """All sites of Q_l(center), by the max-norm inequality."""
    cx, cy = spec.center
    h = spec.halfwidth
    return {(x, y) for x in range(cx - h, cx + h + 1) for y in range(cy - h, cy + h + 1)}


def box_sites_sorted(spec: BoxSpec) -> list[Site]:
    cx, cy = spec.center
    h = spec.halfwidth
    return [(x, y) for x in range(cx - h, cx + h + 1) for y in range(cy - h, cy + h + 1)]


def boundaries(S: Iterable[Site]) -> tuple[set[Site], set[Site], set[frozenset[Site]]]:
    """Inner boundary, outer boundary and crossing edges of a finite site set.

    Returns ``(inner, outer, edges)`` where ``inner`` holds sites of S with a
    neighbor outside, ``outer`` holds sites outside S with a neighbor in S,
    and ``edges`` holds the unordered adjacent (outer, inner) pairs.
    """
    S = set(S)
    inner: set[Site] = set()
    outer: set[Site] = set()
    edges: set[frozenset[Site]] = set()
    for a in S:
        for b in neighbors(a):
            if b not in S:
                inner.add(a)
                outer.add(b)
                edges.add(frozenset((a, b)))
    return inner, outer, edges


# ---------------------------------------------------------------------------
# Tilted rectangles and diagonals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TiltedRect:
    """Sites with x+y in I and x-y in J; I, J inclusive integer intervals."""

    I: tuple[int, int]
    J: tuple[int, int]

    def __post_init__(self) -> None:
        if self.I[0] > self.I[1] or self.J[0] > self.J[1]:
            raise GeometryError(f"empty interval in tilted rectangle {self.I}, {self.J}")

    @property
    def s_width(self) -> int:
        return self.I[1] - self.I[0] + 1

    @property
    def t_width(self) -> int:
        return self.J[1] - self.J[0] + 1

    def is_square(self) -> bool:
        return self.s_width == self.t_width

    def __contains__(self, a: Site) -> bool:
        s, t = a[0] + a[1], a[0] - a[1]
        return self.I[0] <= s <= self.I[1] and self.J[0] <= t <= self.J[1]


def tilted_sites(R: TiltedRect) -> set[Site]:
    """Exact site set of R; (s,t)=(x+y,x-y) must have s-t even."""
    out: set[Site] = set()
    for s in range(R.I[0], R.I[1] + 1):
        t0 = R.J[0] + ((s - R.J[0]) % 2)
        for t in range(t0, R.J[1] + 1, 2):
            out.add(((s + t) // 2, (s - t) // 2))
    return out


def tilted_cells(R: TiltedRect) -> Iterator[tuple[int, int]]:
    """(s, t) pairs of R in raster order (t outer, s inner)."""
    for t in range(R.J[0], R.J[1] + 1):
        s0 = R.I[0] + ((t - R.I[0]) % 2)
        for s in range(s0, R.I[1] + 1, 2):
            yield s, t


def diagonal_trace(k: int, sign: str, R: TiltedRect) -> set[Site]:
    """Diagonal D_k^± = {x ± y = k} intersected with the tilted rectangle."""
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    out: set[Site] = set()
    if sign == "+":
        if not (R.I[0] <= k <= R.I[1]):
            return out
        t0 = R.J[0] + ((k - R.J[0]) % 2)
        for t in range(t0, R.J[1] + 1, 2):
            out.add(((k + t) // 2, (k - t) // 2))
    else:
        if not (R.J[0] <= k <= R.J[1]):
            return out
        s0 = R.I[0] + ((k - R.I[0]) % 2)
        for s in range(s0, R.I[1] + 1, 2):
            out.add(((s + k) // 2, (s - k) // 2))
    return out


def is_sparse(Theta: set[Site], R: TiltedRect, eta: float, mode: str = "both") -> bool:
    """Whether Theta meets every requested diagonal of R in <= eta fraction."""
    if not 0 <= eta <= 1:
        raise ValueError(f"eta={eta} outside [0, 1]")
    signs = {"plus": ("+",), "minus": ("-",), "both": ("+", "-")}.get(mode)
    if signs is None:
        raise ValueError(f"mode must be plus|minus|both, got {mode!r}")
    for sign in signs:
        ks = range(R.I[0], R.I[1] + 1) if sign == "+" else range(R.J[0], R.J[1] + 1)
        for k in ks:
            diag = diagonal_trace(k, sign, R)
            if not diag:
                continue
            if len(diag & Theta) > eta * len(diag):
                return False
    return True


def regularity_verdict(
    Theta: set[Site],
    E: set[Site],
    eta: float,
    family: list[TiltedRect],
) -> bool:
    """True iff the family certifies that Theta is NOT eta-regular in E.

    The family must consist of pairwise disjoint tilted squares inside E; the
    verdict holds when Theta is non-eta-sparse in every member and the total
    member size exceeds eta*|E|.
    """
    seen: set[Site] = set()
    total = 0
    for sq in family:
        if not sq.is_square():
            raise ValueError("family members must be tilted squares")
        sites = tilted_sites(sq)
        if not sites <= E:
            raise ValueError("family member not contained in E")
        if sites & seen:
            raise ValueError("family members not pairwise disjoint")
        seen |= sites
        total += len(sites)
        if is_sparse(Theta, sq, eta, "both"):
            return False
    return total > eta * len(E)


def find_regularity_violation(
    Theta: set[Site],
    E: set[Site],
    eta: float,
    min_side: int = 2,
    max_side: int | None = None,
) -> list[TiltedRect] | None:
    """Greedy adversary search for a family witnessing a regularity violation.

    Scans anchors and sizes for maximal non-eta-sparse tilted squares inside E
    and packs them disjointly, largest first.  Returns the family if its total
    size beats eta*|E|, else None (the heuristic is one-sided: None does not
    prove regularity).
    """
    if not E:
        return None
    svals = [a[0] + a[1] for a in E]
    tvals = [a[0] - a[1] for a in E]
    smin, smax = min(svals), max(svals)
    tmin, tmax = min(tvals), max(tvals)
    if max_side is None:
        max_side = max(smax - smin, tmax - tmin) + 1

    candidates: list[tuple[int, TiltedRect]] = []
    side = max_side
    while side >= min_side:
        for s0 in range(smin, smax - side + 2):
            for t0 in range(tmin, tmax - side + 2):
                sq = TiltedRect((s0, s0 + side - 1), (t0, t0 + side - 1))
                sites = tilted_sites(sq)
                if not sites or not sites <= E:
                    continue
                if not is_sparse(Theta, sq, eta, "both"):
                    candidates.append((len(sites), sq))
        side -= 1

    candidates.sort(key=lambda c: -c[0])
    chosen: list[TiltedRect] = []
    used: set[Site] = set()
    total = 0
    for size, sq in candidates:
        sites = tilted_sites(sq)
        if sites & used:
            continue
        chosen.append(sq)
        used |= sites
        total += size
        if total > eta * len(E):
            return chosen
    return None


# ---------------------------------------------------------------------------
# r-bit shells and r-dyadic boxes
# ---------------------------------------------------------------------------

def r_prime(r: int, epsilon0: float) -> int:
    return int(math.ceil((1 - epsilon0 / 2) * (r - 1)))


@dataclass(frozen=True)
class RBitGeometry:
    """Shell geometry of one r-bit: Omega ⊂ OmegaTilde ⊂ Q_r around a center.

    Validity requires the three boxes to be pairwise distinct site sets; at
    desk scale many (r, epsilon0) pairs collapse and are rejected here.
    """

    r: int
    epsilon0: float
    center: Site
    r_prime: int = field(init=False)

    def __post_init__(self) -> None:
        if self.r % 2 == 0 or self.r < 3:
            raise GeometryError(f"r={self.r} must be an odd integer >= 3")
        if not 0 < self.epsilon0 < 0.5:
            raise GeometryError(f"epsilon0={self.epsilon0} outside (0, 1/2)")
        object.__setattr__(self, "r_prime", r_prime(self.r, self.epsilon0))
        ho = self.omega_box.halfwidth
        ht = self.omega_tilde_box.halfwidth
        hq = self.q_box.halfwidth
        if not ho < ht < hq:
            raise GeometryError(
                f"degenerate r-bit geometry at r={self.r}, epsilon0={self.epsilon0}: "
                f"shell halfwidths (Omega, OmegaTilde, Q_r) = ({ho}, {ht}, {hq}) "
                f"must be strictly increasing"
            )

    @property
    def omega_box(self) -> BoxSpec:
        return BoxSpec(self.center, (1 - 2 * self.epsilon0) * self.r)

    @property
    def omega_tilde_box(self) -> BoxSpec:
        return BoxSpec(self.center, (1 - 1.5 * self.epsilon0) * self.r)

    @property
    def q_box(self) -> BoxSpec:
        return BoxSpec(self.center, self.r)

    @property
    def omega(self) -> set[Site]:
        return box_sites(self.omega_box)

    @property
    def omega_tilde(self) -> set[Site]:
        return box_sites(self.omega_tilde_box)

    @property
    def q_sites(self) -> set[Site]:
        return box_sites(self.q_box)

    @property
    def frame(self) -> set[Site]:
        """F_r(center) = Q_r minus Omega (the sites an r-bit pattern lives on)."""
        return self.q_sites - self.omega

    def translated(self, center: Site) -> "RBitGeometry":
        return RBitGeometry(self.r, self.epsilon0, center)


def r_geometry(r: int, epsilon0: float, a: Site) -> RBitGeometry:
    """Shells (Omega, OmegaTilde, F) and r' for the bit centered at a."""
    return RBitGeometry(r, epsilon0, a)


def sublattice_sites(spacing: int, within: BoxSpec) -> list[Site]:
    """Sites of spacing*Z^2 inside a box, sorted."""
    cx, cy = within.center
    h = within.halfwidth
    xs = range(math.ceil((cx - h) / spacing), math.floor((cx + h) / spacing) + 1)
    ys = range(math.ceil((cy - h) / spacing), math.floor((cy + h) / spacing) + 1)
    return [(spacing * i, spacing * j) for i in xs for j in ys]


def r_dyadic_box(r: int, epsilon0: float, k: int, a: Site) -> BoxSpec:
    """The dyadic box of generation k >= 0 at center a: L = 2^(k+1) r' + r."""
    if k < 0:
        raise GeometryError(f"dyadic generation k={k} must be >= 0")
    rp = r_prime(r, epsilon0)
    step = (2**k) * rp
    if a[0] % step or a[1] % step:
        raise GeometryError(f"center {a} not on the 2^k r' = {step} sublattice")
    return BoxSpec(a, (2 ** (k + 1)) * rp + r)


def is_r_dyadic(L: int, a: Site, r: int, epsilon0: float, k_max: int = 30) -> bool:
    rp = r_prime(r, epsilon0)
    for k in range(k_max + 1):
        if (2 ** (k + 1)) * rp + r == L:
            step = (2**k) * rp
            return a[0] % step == 0 and a[1] % step == 0
    return False


def r_dyadic_scales(r: int, epsilon0: float, k_max: int) -> list[int]:
    rp = r_prime(r, epsilon0)
    return [(2 ** (k + 1)) * rp + r for k in range(k_max + 1)]


def bit_centers_inside(Q: BoxSpec, r: int, epsilon0: float) -> list[Site]:
    """Centers b of r'-sublattice bits with Q_r(b) inside the box Q."""
    rp = r_prime(r, epsilon0)
    rh = BoxSpec((0, 0), r).halfwidth
    cx, cy = Q.center
    h = Q.halfwidth
    lo, hi = -(h - rh), h - rh
    xs = range(math.ceil((cx + lo) / rp), math.floor((cx + hi) / rp) + 1)
    ys = range(math.ceil((cy + lo) / rp), math.floor((cy + hi) / rp) + 1)
    return [(rp * i, rp * j) for i in xs for j in ys]


def theta1(r: int, epsilon0: float, region: Iterable[Site]) -> set[Site]:
    """Frozen frame set: union of all frames F_r(a), a in r'Z^2, within region.

    Membership is local: p lies in some F_r(a) iff an r'-lattice center a
    within max-norm (r-1)/2 of p has p outside its Omega box.
    """
    rp = r_prime(r, epsilon0)
    rh = BoxSpec((0, 0), r).halfwidth
    oh = BoxSpec((0, 0), (1 - 2 * epsilon0) * r).halfwidth
    out: set[Site] = set()
    for p in region:
        x, y = p
        for i in range(math.ceil((x - rh) / rp), math.floor((x + rh) / rp) + 1):
            for j in range(math.ceil((y - rh) / rp), math.floor((y + rh) / rp) + 1):
                if chebyshev(p, (rp * i, rp * j)) > oh:
                    out.add(p)
                    break
            else:
                continue
            break
    return out


# ---------------------------------------------------------------------------
# Defect covering
# ---------------------------------------------------------------------------

def _boxes_overlap(a: BoxSpec, b: BoxSpec) -> bool:
    return (
        abs(a.center[0] - b.center[0]) <= a.halfwidth + b.halfwidth
        and abs(a.center[1] - b.center[1]) <= a.halfwidth + b.halfwidth
    )


def cover_margin(defect: BoxSpec, cover: BoxSpec, Q: BoxSpec) -> float:
    """Max-norm distance from the defect's sites to Q minus the cover box.

    Infinite when the complement is empty; -inf when the defect is not inside
    the cover.  A cover face flush with Q's face contributes no constraint.
    """
    if not (Q.contains_box(cover) and cover.contains_box(defect)):
        return -math.inf
    m = math.inf
    for axis in range(2):
        for sgn in (-1, 1):
            cov_face = cover.center[axis] + sgn * cover.halfwidth
            q_face = Q.center[axis] + sgn * Q.halfwidth
            if sgn * (q_face - cov_face) <= 0:
                continue  # no complement sites beyond this face
            d_face = defect.center[axis] + sgn * defect.halfwidth
            m = min(m, sgn * (cov_face - d_face) + 1)
    return m


def _best_cover(
    defect: BoxSpec,
    Q: BoxSpec,
    r: int,
    epsilon0: float,
    k: int,
    avoid: list[BoxSpec],
) -> BoxSpec | None:
    """Dyadic generation-k box covering the defect with >= L/8 margin,
    disjoint from every box in ``avoid``; ties broken toward larger margin."""
    rp = r_prime(r, epsilon0)
    step = (2**k) * rp
    L3 = (2 ** (k + 1)) * rp + r
    h3 = BoxSpec((0, 0), L3).halfwidth
    need = L3 / 8
    dx, dy = defect.center
    span = 2 + (h3 - defect.halfwidth) // step
    best: BoxSpec | None = None
    best_margin = -math.inf
    ci, cj = round(dx / step), round(dy / step)
    for i in range(ci - span, ci + span + 1):
        for j in range(cj - span, cj + span + 1):
            cand = BoxSpec((step * i, step * j), L3)
            margin = cover_margin(defect, cand, Q)
            if margin < need:
                continue
            if any(_boxes_overlap(cand, e) for e in avoid):
                continue
            if margin > best_margin:
                best_margin = margin
                best = cand
    return best


def cover_defects(
    Q: BoxSpec,
    defects: list[BoxSpec],
    r: int,
    epsilon0: float,
    k1: int,
    max_growth: int = 10,
) -> tuple[int, list[BoxSpec]]:
    """Cover defect boxes by disjoint r-dyadic boxes with a 1/8-scale margin.

    Starts at dyadic generation ``k1`` and regrows the whole family one
    generation per conflict (the asymptotic procedure jumps many generations
    per merge; single steps keep desk-scale boxes small).  Defects whose
    covers would collide share a box once the scale allows it.  Returns
    ``(k3, covers)`` with exactly ``len(defects)`` pairwise disjoint boxes.
    Raises GeometryError when no disjoint family fits inside Q by generation
    ``k1 + max_growth``.
    """
    for d in defects:
        if not Q.contains_box(d):
            raise GeometryError(f"defect {d} not inside Q")
    if not defects:
        return k1, []

    k = k1
    while k <= k1 + max_growth:
        chosen: list[BoxSpec] = []
        ok = True
        for d in defects:
            if any(cover_margin(d, c, Q) >= (2 * c.halfwidth + 1) / 8 for c in chosen):
                continue  # an existing cover already absorbs this defect
            cand = _best_cover(d, Q, r, epsilon0, k, avoid=chosen)
            if cand is None:
                ok = False
                break
            chosen.append(cand)
        if ok:
            padded = _pad_disjoint(chosen, len(defects), Q, r, epsilon0, k)
            if padded is not None:
                return k, padded
        k += 1
    raise GeometryError(
        f"cover_defects: no disjoint dyadic cover fits in Q by generation {k1 + max_growth}"
    )


def _pad_disjoint(
    covers: list[BoxSpec], want: int, Q: BoxSpec, r: int, epsilon0: float, k: int
) -> list[BoxSpec] | None:
    rp = r_prime(r, epsilon0)
    step = (2**k) * rp
    L3 = (2 ** (k + 1)) * rp + r
    h3 = BoxSpec((0, 0), L3).halfwidth
    out = list(covers)
    if len(out) >= want:
        return out[:want]
    cx, cy = Q.center
    h = Q.halfwidth
    for i in range(math.ceil((cx - h + h3) / step), math.floor((cx + h - h3) / step) + 1):
        for j in range(math.ceil((cy - h + h3) / step), math.floor((cy + h - h3) / step) + 1):
            cand = BoxSpec((step * i, step * j), L3)
            if any(_boxes_overlap(cand, e) for e in out):
                continue
            out.append(cand)
            if len(out) == want:
                return out
    return None
