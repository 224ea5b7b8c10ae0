"""Seeded two-valued Bernoulli potential fields on finite lattice regions.

Each site's value is derived by a counter-based integer hash of
``(seed, stream, x, y)``, so overlapping regions sampled with the same seed
agree on shared sites, and fields are bit-identical across platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

import numpy as np

from .geometry import Site

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO64 = float(2**64)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def site_uniforms(seed: int, stream: int, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Deterministic in-[0,1) uniforms indexed by (seed, stream, site)."""
    with np.errstate(over="ignore"):  # uint64 wraparound is the point
        key = np.array([seed & (2**64 - 1), stream & (2**64 - 1)], dtype=np.uint64)
        base = _mix(key[0] + _GAMMA * key[1])
        h = _mix(base + _GAMMA * xs.astype(np.int64).view(np.uint64))
        h = _mix(h + _GAMMA * ys.astype(np.int64).view(np.uint64))
        return h.astype(np.float64) / _TWO64


class FieldDomainError(ValueError):
    """Raised when sites fall outside a field's region."""


@dataclass(frozen=True)
class PotentialField:
    """Map from a finite region to {0, vbar} with recorded seed lineage."""

    sites: tuple[Site, ...]            # sorted region
    values: np.ndarray                 # float array aligned with sites
    vbar: float
    p: float
    seed: int
    stream: int

    def __post_init__(self) -> None:
        if len(self.sites) != len(self.values):
            raise FieldDomainError("values not aligned with region")
        ok = (self.values == 0) | (self.values == self.vbar)
        if not bool(np.all(ok)):
            raise FieldDomainError("field values must lie in {0, vbar}")
        self.values.setflags(write=False)

    @property
    def region(self) -> set[Site]:
        return set(self.sites)

    @property
    def index(self) -> dict[Site, int]:
        idx = self.__dict__.get("_index")
        if idx is None:
            idx = {a: i for i, a in enumerate(self.sites)}
            self.__dict__["_index"] = idx
        return idx

    def __call__(self, a: Site) -> float:
        i = self.index.get(a)
        if i is None:
            raise FieldDomainError(f"site {a} outside field region")
        return float(self.values[i])

    def value_map(self) -> dict[Site, float]:
        return {a: float(v) for a, v in zip(self.sites, self.values)}

    def zero_sites(self) -> set[Site]:
        return {a for a, v in zip(self.sites, self.values) if v == 0}

    def restrict(self, sub: Iterable[Site]) -> "PotentialField":
        sub_sorted = tuple(sorted(set(sub)))
        idx = self.index
        missing = [a for a in sub_sorted if a not in idx]
        if missing:
            raise FieldDomainError(f"sites {missing[:3]} outside field region")
        vals = np.array([self.values[idx[a]] for a in sub_sorted], dtype=float)
        return replace(self, sites=sub_sorted, values=vals)


def sample(region: Iterable[Site], p: float, vbar: float, seed: int,
           stream: int = 0) -> PotentialField:
    """I.i.d. field with P[V(a) = 0] = p, P[V(a) = vbar] = 1 - p per site."""
    if not 0 <= p <= 1:
        raise ValueError(f"p={p} outside [0, 1]")
    if vbar <= 0:
        raise ValueError(f"vbar={vbar} must be positive")
    sites = tuple(sorted(set(region)))
    xs = np.fromiter((a[0] for a in sites), dtype=np.int64, count=len(sites))
    ys = np.fromiter((a[1] for a in sites), dtype=np.int64, count=len(sites))
    u = site_uniforms(seed, stream, xs, ys)
    values = np.where(u < p, 0.0, float(vbar))
    return PotentialField(sites, values, float(vbar), float(p), seed, stream)


def flip(field: PotentialField, site: Site) -> PotentialField:
    """Toggle 0 <-> vbar at one site."""
    i = field.index.get(site)
    if i is None:
        raise FieldDomainError(f"site {site} outside field region")
    vals = field.values.copy()
    vals[i] = field.vbar - vals[i]
    return replace(field, values=vals)


def with_override(field: PotentialField, theta: Iterable[Site],
                  vprime: Mapping[Site, float]) -> PotentialField:
    """Field equal to vprime on theta and to the original elsewhere."""
    theta = set(theta)
    idx = field.index
    vals = field.values.copy()
    for a in theta:
        if a not in idx:
            raise FieldDomainError(f"override site {a} outside field region")
        if a not in vprime:
            raise FieldDomainError(f"override value missing for site {a}")
        v = float(vprime[a])
        if v not in (0.0, field.vbar):
            raise FieldDomainError(f"override value {v} not in {{0, vbar}}")
        vals[idx[a]] = v
    return replace(field, values=vals)


# ---------------------------------------------------------------------------
# JSON serialization: {vbar, p, seed, region bounds, run-length-encoded bits}
# ---------------------------------------------------------------------------

def _rle(bits: list[int]) -> list[int]:
    """Run lengths, starting with the (possibly zero) leading run of 0s."""
    runs: list[int] = []
    current, count = 0, 0
    for b in bits:
        if b == current:
            count += 1
        else:
            runs.append(count)
            current, count = b, 1
    runs.append(count)
    return runs


def _unrle(runs: list[int], n: int) -> list[int]:
    bits: list[int] = []
    current = 0
    for run in runs:
        bits.extend([current] * run)
        current ^= 1
    if len(bits) != n:
        raise ValueError(f"run lengths decode to {len(bits)} bits, expected {n}")
    return bits


def to_json(field: PotentialField) -> str:
    """Canonical JSON form; byte-identical for identical fields.

    Bits are 1 where V = vbar, raster order over the bounding box.  For
    non-rectangular regions a second RLE array marks region membership.
    """
    xs = [a[0] for a in field.sites]
    ys = [a[1] for a in field.sites]
    bounds = [min(xs), max(xs), min(ys), max(ys)]
    full = [(x, y) for x in range(bounds[0], bounds[1] + 1)
            for y in range(bounds[2], bounds[3] + 1)]
    idx = field.index
    obj: dict = {
        "schema_version": 1,
        "vbar": field.vbar,
        "p": field.p,
        "seed": field.seed,
        "stream": field.stream,
        "bounds": bounds,
        "rle": _rle([int(field.values[idx[a]] != 0) if a in idx else 0 for a in full]),
    }
    if len(full) != len(field.sites):
        obj["mask_rle"] = _rle([int(a in idx) for a in full])
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def from_json(text: str) -> PotentialField:
    obj = json.loads(text)
    if obj.get("schema_version") != 1:
        raise ValueError(f"unsupported field schema {obj.get('schema_version')!r}")
    x0, x1, y0, y1 = obj["bounds"]
    full = [(x, y) for x in range(x0, x1 + 1) for y in range(y0, y1 + 1)]
    bits = _unrle(obj["rle"], len(full))
    if "mask_rle" in obj:
        mask = _unrle(obj["mask_rle"], len(full))
    else:
        mask = [1] * len(full)
    sites = tuple(a for a, m in zip(full, mask) if m)
    vbar = float(obj["vbar"])
    values = np.array([vbar if b else 0.0 for a, b, m in zip(full, bits, mask) if m])
    return PotentialField(sites, values, vbar, float(obj["p"]), obj["seed"], obj["stream"])
