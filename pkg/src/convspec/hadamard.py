"""Exact admissibility checks, spectrum search, and the pair calculus.

The workhorse is :class:`CyclotomicSum`, an integer combination of D-th
roots of unity.  Such a sum vanishes iff its coefficient polynomial is
divisible by the D-th cyclotomic polynomial; with Phi_D(x) = Phi_rad(x^M)
for M = D / rad(D) the test reduces to a handful of divisions by the small
polynomial Phi_rad, so it stays fast even for large smooth D.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import ratlin
from .core import AdmissiblePair, DigitSet, ExpandingMatrix, canonical_residue, residues


class ToleranceBreach(RuntimeError):
    """Exact and floating-point admissibility verdicts disagree."""


# ---------------------------------------------------------------------------
# cyclotomic machinery


@lru_cache(maxsize=None)
def _radical(n: int) -> int:
    r, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            r *= p
            while m % p == 0:
                m //= p
        p += 1
    return r * m if m > 1 else r


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple:
    """Integer coefficients of Phi_n, lowest degree first.

    Computed by dividing x^n - 1 by the Phi_e of the proper divisors; only
    ever called with small (radical) n here, so the quadratic cost is fine.
    """
    if n == 1:
        return (-1, 1)
    poly = [-1] + [0] * (n - 1) + [1]
    for e in range(1, n):
        if n % e == 0:
            poly = _poly_div_exact(poly, cyclotomic_polynomial(e))
    return tuple(poly)


def _poly_div_exact(a, b):
    a = list(a)
    out = [0] * (len(a) - len(b) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = a[i + len(b) - 1]
        if c % b[-1] != 0:
            raise ArithmeticError("division is not exact")
        q = c // b[-1]
        out[i] = q
        if q:
            for j, bj in enumerate(b):
                a[i + j] -= q * bj
    if any(a):
        raise ArithmeticError("division is not exact")
    return out


@dataclass(frozen=True)
class CyclotomicSum:
    """sum_j c_j zeta_D^j with integer c_j, stored sparsely by exponent."""

    modulus: int
    coeffs: tuple   # sorted tuple of (exponent mod D, nonzero int coefficient)

    def __init__(self, modulus, coeffs):
        modulus = int(modulus)
        if modulus < 1:
            raise ValueError("modulus must be >= 1")
        acc = {}
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        for j, c in items:
            j = int(j) % modulus
            acc[j] = acc.get(j, 0) + int(c)
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "coeffs", tuple(sorted((j, c) for j, c in acc.items() if c)))

    @classmethod
    def from_phases(cls, phases, weights=None) -> "CyclotomicSum":
        """Build sum_i w_i zeta^{phase_i} from rational phases (mod 1).

        Rational weights are scaled by their common denominator, which does
        not change vanishing.
        """
        fr = [Fraction(p) for p in phases]
        if weights is None:
            ws = [1] * len(fr)
        else:
            ws = [Fraction(w) for w in weights]
            wden = math.lcm(*[w.denominator for w in ws]) if ws else 1
            ws = [int(w * wden) for w in ws]
        d = math.lcm(*[p.denominator for p in fr]) if fr else 1
        return cls(d, [((p.numerator * (d // p.denominator)) % d, w) for p, w in zip(fr, ws)])

    def is_zero(self) -> bool:
        if not self.coeffs:
            return True
        d = self.modulus
        g = math.gcd(d, math.gcd(*[j for j, _ in self.coeffs]))
        d //= g
        rad = _radical(d)
        m = d // rad
        phi = cyclotomic_polynomial(rad)
        groups = {}
        for j, c in self.coeffs:
            j //= g
            s, t = j % m, j // m
            groups.setdefault(s, {})[t] = groups.get(s, {}).get(t, 0) + c
        for poly in groups.values():
            dense = [0] * rad
            for t, c in poly.items():
                dense[t] = c
            if any(_poly_mod_int(dense, phi)):
                return False
        return True

    def value(self) -> complex:
        import cmath
        return sum(c * cmath.exp(-2j * cmath.pi * j / self.modulus)
                   for j, c in self.coeffs)


def _poly_mod_int(a, b):
    r = list(a)
    while len(r) >= len(b):
        if r[-1]:
            # Phi polynomials are monic, so the division stays integral.
            f = r[-1]
            off = len(r) - len(b)
            for i, c in enumerate(b):
                r[off + i] -= f * c
        while r and r[-1] == 0:
            r.pop()
    return r


# ---------------------------------------------------------------------------
# admissibility


def _as_triple(R, B, L):
    R = R if isinstance(R, ExpandingMatrix) else ExpandingMatrix(R)
    B = B if isinstance(B, DigitSet) else DigitSet(B)
    L = tuple(tuple(int(x) for x in l) for l in L)
    return R, B, L


def frac1(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


def mask_phase_matrix(R, B, L):
    """Exact phases theta[b][l] = (R^{-1} b) . l mod 1."""
    R = R if isinstance(R, ExpandingMatrix) else ExpandingMatrix(R)
    B = B if isinstance(B, DigitSet) else DigitSet(B)
    L = tuple(tuple(int(x) for x in l) for l in L)
    if len(L) != len(B):
        raise ValueError("#L != #B")
    rinv = R.inverse
    rows = []
    for b in B.elements:
        rb = ratlin.mat_vec(rinv, b)
        rows.append(tuple(frac1(ratlin.vec_dot(rb, l)) for l in L))
    return tuple(rows)


@dataclass(frozen=True)
class AdmissibilityReport:
    ok: bool
    mode: str
    max_offdiagonal: float
    exact: bool
    failing_pair: tuple = None

    def __bool__(self):
        return self.ok


def _difference_phases(R, B, v):
    rinv = R.inverse
    return [frac1(ratlin.vec_dot(ratlin.mat_vec(rinv, b), v)) for b in B.elements]


def mask_vanishes_exact(R, B, v) -> bool:
    """Exact test of sum_b exp(-2 pi i (R^{-1} b) . v) = 0 for integer v."""
    return CyclotomicSum.from_phases(_difference_phases(R, B, v)).is_zero()


def check_admissible(R, B=None, L=None, mode: str = "exact",
                     float_tol: float = 1e-12) -> AdmissibilityReport:
    """Verify that [e^{-2 pi i (R^{-1}b).l}] / sqrt(#B) is unitary.

    Unitarity holds iff the digit sum vanishes at every difference of two
    spectrum points.  ``mode="exact"`` decides each vanishing through
    cyclotomic divisibility and cross-checks the float path, raising
    ToleranceBreach if they ever disagree; ``mode="float"`` uses only the
    fast path with threshold ``float_tol`` on the normalised modulus.
    """
    if isinstance(R, AdmissiblePair):
        pair = R
        if pair.L is None:
            raise ValueError("pair has no attached spectrum")
        R, B, L = pair.R, pair.B, pair.L
    elif B is None or L is None:
        raise ValueError("R, B and L are all required unless a pair is given")
    R, B, L = _as_triple(R, B, L)
    if len(L) != len(B):
        raise ValueError("#L != #B")
    if mode not in ("exact", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    nb = len(B)
    worst = 0.0
    ok = True
    failing = None
    for i in range(nb):
        for j in range(i + 1, nb):
            v = ratlin.vec_sub(L[i], L[j])
            phases = _difference_phases(R, B, v)
            s = CyclotomicSum.from_phases(phases)
            fmod = abs(s.value()) / nb
            worst = max(worst, fmod)
            fzero = fmod < float_tol
            if mode == "float":
                zero = fzero
            else:
                zero = s.is_zero()
                if zero != fzero:
                    raise ToleranceBreach(
                        f"tolerance breach at {L[i]} - {L[j]}: exact zero={zero}, "
                        f"float modulus {fmod!r} vs tol {float_tol}")
            if not zero:
                ok = False
                failing = failing or (L[i], L[j])
    return AdmissibilityReport(ok, mode, worst, mode == "exact", failing)


# ---------------------------------------------------------------------------
# spectrum search


def vanishing_residue_classes(R, B):
    """Canonical nonzero residues v mod R^T Z^d where the digit sum vanishes.

    Vanishing only depends on the class of v because the digits are integral.
    """
    out = set()
    for v in residues(R):
        if any(v) and mask_vanishes_exact(R, B, v):
            out.add(v)
    return out


def find_spectra(R, B, max_count: int = 1):
    """Candidate spectra among canonical residues, each containing 0.

    The compatibility graph has the residues as vertices and an edge where
    the digit sum vanishes at the difference; spectra of delta_{R^{-1}B} in
    Z^d correspond (after translating and reducing mod R^T Z^d, which is
    lossless) to #B-cliques through 0.  Plain backtracking in lexicographic
    vertex order; meant for |det R| <= 256.
    """
    R = R if isinstance(R, ExpandingMatrix) else ExpandingMatrix(R)
    B = B if isinstance(B, DigitSet) else DigitSet(B)
    target = len(B)
    if target > abs(R.det):
        raise ValueError("#B exceeds |det R|: no residue spectrum can exist")
    reps = sorted(residues(R))
    good = vanishing_residue_classes(R, B)

    def compatible(u, v):
        return canonical_residue(R, ratlin.vec_sub(u, v)) in good

    zero = (0,) * R.dimension
    results = []

    def extend(clique, candidates):
        if len(results) >= max_count:
            return
        if len(clique) == target:
            results.append(tuple(clique))
            return
        if len(clique) + len(candidates) < target:
            return
        for idx, v in enumerate(candidates):
            extend(clique + [v], [w for w in candidates[idx + 1:] if compatible(w, v)])
            if len(results) >= max_count:
                return

    if target == 1:
        return [(zero,)][:max_count]
    starts = [v for v in reps if v != zero and compatible(v, zero)]
    extend([zero], starts)
    return results


# ---------------------------------------------------------------------------
# the admissible-pair calculus


def _sumset(parts):
    out = None
    for part in parts:
        if out is None:
            out = list(part)
            continue
        out = [ratlin.vec_add(u, v) for u in out for v in part]
    seen = set(out)
    if len(seen) != len(out):
        raise ValueError("sumset collision; inputs are not jointly admissible")
    return tuple(sorted(out))


def compose_pairs(triples) -> AdmissiblePair:
    """Fold pairs (R_1,B_1,L_1)..(R_n,B_n,L_n) into one admissible pair.

    R = R_n...R_1, B = (R_n...R_2)B_1 + ... + B_n and the spectrum
    L = L_1 + R_1^T L_2 + ... + (R_1^T...R_{n-1}^T) L_n, all exact.
    """
    items = []
    for t in triples:
        if isinstance(t, AdmissiblePair):
            if t.L is None:
                raise ValueError("pair has no attached spectrum")
            items.append((t.R, t.B, t.L))
        else:
            items.append(_as_triple(*t))
    if not items:
        raise ValueError("nothing to compose")
    d = items[0][0].dimension
    if any(r.dimension != d for r, _, _ in items):
        raise ValueError("dimension mismatch")
    n = len(items)
    big_r = items[0][0].rows
    for r, _, _ in items[1:]:
        big_r = ratlin.mat_mul(r.rows, big_r)
    b_parts = []
    for k, (_, b, _) in enumerate(items):
        m = ratlin.identity(d)
        for r, _, _ in items[k + 1:]:
            m = ratlin.mat_mul(r.rows, m)
        b_parts.append([tuple(int(x) for x in ratlin.mat_vec(m, v)) for v in b.elements])
    l_parts = []
    m = ratlin.identity(d)
    for k, (r, _, l) in enumerate(items):
        l_parts.append([tuple(int(x) for x in ratlin.mat_vec(m, v)) for v in l])
        m = ratlin.mat_mul(m, r.transpose)
    return AdmissiblePair(ExpandingMatrix(big_r), DigitSet(_sumset(b_parts)),
                          _sumset(l_parts))


def translate_spectrum(L, l0):
    return tuple(tuple(int(x) for x in ratlin.vec_add(l, l0)) for l in L)


def translate_digits(B, t) -> DigitSet:
    B = B if isinstance(B, DigitSet) else DigitSet(B)
    return DigitSet([ratlin.vec_add(b, t) for b in B.elements], B.weights)


def pushforward_spectrum(L, M):
    """(M^T)^{-1} L, exact rationals; the spectrum of an affine image."""
    m = ratlin.as_matrix(M)
    mt_inv = ratlin.inverse(ratlin.transpose(m))
    return tuple(ratlin.mat_vec(mt_inv, tuple(Fraction(x) for x in l)) for l in L)
