"""Rank-one perturbation predicates: obstruction signs, count shifts,
crossing/non-crossing classification of zero-potential sites."""

from __future__ import annotations

import enum

import numpy as np
import scipy.linalg as sla

from .fields import PotentialField
from .geometry import Site
from .operators import assemble

OBSTRUCTION_TOL = 1e-10


class Sign(enum.Enum):
    POSITIVE = "+"
    NEGATIVE = "-"
    INDETERMINATE = "indeterminate"


class Classification(enum.Enum):
    CROSSING = "crossing"
    NON_CROSSING = "non-crossing"


def _as_matrix(A) -> np.ndarray:
    M = A.matrix if hasattr(A, "matrix") else np.asarray(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    return M


def _count_below(w: np.ndarray, lam: float) -> int:
    return int(np.searchsorted(w, lam, side="left"))


def obstruction_sign(A, k: int, lam: float, tol: float = OBSTRUCTION_TOL) -> Sign:
    """Sign of sum_i v_i(k)^2 / (lambda_i - lam) for the eigenbasis of A.

    A positive sign certifies lam stays off the spectrum of A + t P_k for all
    t > 0; negative, for all t < 0.  Sums below tolerance are refused: the
    dichotomy behind the certificate is strict.
    """
    M = _as_matrix(A)
    w, v = sla.eigh(M)
    gaps = w - lam
    if float(np.min(np.abs(gaps))) < tol:
        raise ValueError(f"lambda={lam} within {tol:.1e} of the spectrum")
    total = float(np.sum(v[k, :] ** 2 / gaps))
    if total > tol:
        return Sign.POSITIVE
    if total < -tol:
        return Sign.NEGATIVE
    return Sign.INDETERMINATE


def rank_one_projector(n: int, k: int) -> np.ndarray:
    P = np.zeros((n, n))
    P[k, k] = 1.0
    return P


def monotone_shift_predicate(
    A,
    k: int,
    thresholds: tuple[float, float, float, float, float],
    j: int,
    i: int,
    C: float = 1.0,
    t_samples: tuple[float, ...] = (1.0,),
) -> bool:
    """Check the five count-shift hypotheses; assert the conclusion when they hold.

    Hypotheses (1-indexed eigenvalues, ascending): thresholds strictly ordered
    in (0,1); r1 <= C*min(r3*r5, r2*r3/r4); 0 < lambda_j <= lambda_i < r1 <
    r2 < lambda_{i+1}; v_j(k)^2 >= r3; the eigenvector mass of k over
    eigenvalues in (r2, r5) at most r4.  When all hold, the strict count below
    r1 drops after adding t*P_k for every sampled t >= 1 (checked here by
    direct recomputation).
    """
    r1, r2, r3, r4, r5 = thresholds
    M = _as_matrix(A)
    n = M.shape[0]
    if not (1 <= j <= i <= n - 1):
        return False
    if not (0 < r1 < r2 < r3 < r4 < r5 < 1):
        return False
    if r1 > C * min(r3 * r5, r2 * r3 / r4):
        return False
    w, v = sla.eigh(M)
    lam_j, lam_i, lam_next = w[j - 1], w[i - 1], w[i]
    if not (0 < lam_j <= lam_i < r1 < r2 < lam_next):
        return False
    if v[k, j - 1] ** 2 < r3:
        return False
    band = (w > r2) & (w < r5)
    if float(np.sum(v[k, band] ** 2)) > r4:
        return False
    n_before = _count_below(w, r1)
    for t in t_samples:
        if t < 1:
            raise ValueError(f"conclusion is only claimed for t >= 1, got {t}")
        w_t = sla.eigvalsh(M + t * rank_one_projector(n, k))
        assert n_before > _count_below(w_t, r1), (
            f"count-shift conclusion failed at t={t}: {n_before} vs "
            f"{_count_below(w_t, r1)}"
        )
    return True


def classify_site(
    S,
    V: PotentialField,
    a: Site,
    lam0: float,
    vbar: float | None = None,
) -> Classification:
    """Crossing/non-crossing verdict for raising the potential at one zero site.

    Crossing: the count of eigenvalues of the cluster operator below lam0
    drops by exactly one when vbar is added at ``a``; non-crossing: the count
    is unchanged.  Interlacing leaves no third case; anything else trips an
    assertion (a genuine bug, not bad data).
    """
    sites = sorted(S)
    if a not in set(sites):
        raise ValueError(f"site {a} not in the cluster")
    if V(a) != 0:
        raise ValueError(f"classification requires V({a}) = 0")
    if vbar is None:
        vbar = V.vbar
    op = assemble(sites, V)
    k = op.index[a]
    w = sla.eigvalsh(op.matrix)
    w_after = sla.eigvalsh(op.matrix + vbar * rank_one_projector(op.n, k))
    # interlacing for a nonnegative rank-one update, checked exactly per call
    tol = 1e-9 * max(1.0, float(np.max(np.abs(w_after))))
    assert bool(np.all(w <= w_after + tol)), "interlacing violated (lower)"
    assert bool(np.all(w_after[:-1] <= w[1:] + tol)), "interlacing violated (upper)"
    before = _count_below(w, lam0)
    after = _count_below(w_after, lam0)
    drop = before - after
    assert drop in (0, 1), f"rank-one count change {drop} is impossible"
    return Classification.CROSSING if drop == 1 else Classification.NON_CROSSING
