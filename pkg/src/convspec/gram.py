"""Exact Gram matrices of exponential families against discrete measures.

The inner product of two exponentials in L^2(mu) is a transform value, so
the Gram matrix of ``{e_l : l in lam}`` has entries mu_hat(l - l'); for a
rational measure and integral frequencies each entry is an integer-weighted
sum of roots of unity, and both the vanishing of off-diagonal entries and
the unit diagonal are decided exactly through cyclotomic sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import DiscreteMeasure
from .hadamard import CyclotomicSum


@dataclass(frozen=True)
class GramReport:
    size: int
    exact: bool
    is_identity: bool
    max_offdiagonal: float
    max_diagonal_error: float
    matrix: np.ndarray = None

    def __bool__(self):
        return self.is_identity


def _scaled_atoms(mu: DiscreteMeasure):
    """Atoms as integer vectors over one common denominator, plus int weights."""
    den = 1
    for p, _ in mu.atoms:
        for x in p:
            den = math.lcm(den, x.denominator)
    wden = 1
    for _, w in mu.atoms:
        wden = math.lcm(wden, w.denominator)
    pts = np.array([[int(x * den) for x in p] for p, _ in mu.atoms], dtype=np.int64)
    wts = np.array([int(w * wden) for _, w in mu.atoms], dtype=np.int64)
    return pts, den, wts


def gram_matrix(mu: DiscreteMeasure, lam, full: bool = False) -> GramReport:
    """Gram report of the exponentials at ``lam`` in L^2(mu).

    ``lam`` may contain integer or rational vectors; rational frequencies
    fold into the phase denominator and stay exact.  ``full=True`` attaches
    the complex float matrix for inspection.
    """
    lam = [tuple(Fraction(x) for x in l) for l in lam]
    if not lam:
        raise ValueError("frequency set must be nonempty")
    lden = 1
    for l in lam:
        for x in l:
            lden = math.lcm(lden, x.denominator)
    lpts = np.array([[int(x * lden) for x in l] for l in lam], dtype=np.int64)
    apts, aden, wts = _scaled_atoms(mu)
    q = aden * lden
    n = len(lam)

    lf = lpts.astype(float) / lden
    af = apts.astype(float) / aden
    wf = np.array([float(w) for _, w in mu.atoms])
    e = np.exp(-2j * np.pi * (lf @ af.T))
    g = (e * wf) @ e.conj().T

    identity = True
    for i in range(n):
        for j in range(i + 1, n):
            nums = (lpts[i] - lpts[j]) @ apts.T   # phase numerators over q
            s = CyclotomicSum(q, zip(nums.tolist(), wts.tolist()))
            if not s.is_zero():
                identity = False
                break
        if not identity:
            break
    # diagonal is the total mass, exactly 1 by construction of the measure
    off = 0.0
    if n > 1:
        mask = ~np.eye(n, dtype=bool)
        off = float(np.max(np.abs(g[mask])))
    diag_err = float(np.max(np.abs(np.diag(g) - 1.0)))
    return GramReport(n, True, identity, off, diag_err, g if full else None)


def empirical_cf(samples, xi) -> complex:
    """(1/N) sum_i exp(-2 pi i xi . x_i) over sample points."""
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    if pts.size == 0:
        raise ValueError("empty sample list")
    xi = np.asarray(xi, dtype=float)
    return complex(np.mean(np.exp(-2j * np.pi * (pts @ xi))))
