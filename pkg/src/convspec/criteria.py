"""Sufficient-condition checkers for spectrality of infinite convolutions.

Four families of checks live here: exact cube-containment of the
contraction images, the exact digit-isolation search for diagonal systems,
isolation witnesses certifying that no integral translate of a set carries
mass, and grid-based estimation (zero-set scans and equi-positivity
certificates).  The first three are exact rational/integer computations;
the grid estimates are evidence at stated parameters, never proof.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import ratlin
from .core import (ConvolutionSystem, DigitSet, DiscreteMeasure, ExpandingMatrix,
                   build_mu_n, check_Dd_membership)
from .fourier import MaskProductEvaluator


class SupportBoundError(ValueError):
    """No certified support bound, so lattice translates cannot be bounded."""


class EquiPositivityFailure(RuntimeError):
    def __init__(self, message, worst_point=None, value=None):
        super().__init__(message)
        self.worst_point = worst_point
        self.value = value


MAX_CUBE_DIMENSION = 20


@dataclass(frozen=True)
class CubeSpec:
    """The cube C = t0 + [0,1]^d with a rational corner."""

    t0: tuple

    def __init__(self, t0):
        object.__setattr__(self, "t0", tuple(Fraction(x) for x in t0))

    @property
    def dimension(self) -> int:
        return len(self.t0)

    def vertices(self):
        d = self.dimension
        return [ratlin.vec_add(self.t0, v) for v in itertools.product((0, 1), repeat=d)]

    def contains(self, x, strict: bool = False) -> bool:
        if strict:
            return all(t < c < t + 1 for t, c in zip(self.t0, x))
        return all(t <= c <= t + 1 for t, c in zip(self.t0, x))

    def radius(self) -> float:
        """max |x| over the cube, a support-radius bound for measures in C."""
        return max(math.sqrt(sum(float(c) ** 2 for c in v)) for v in self.vertices())


def _image_in_cube(R: ExpandingMatrix, b, cube: CubeSpec, strict: bool) -> tuple:
    """Exact check R^{-1}(C + b) inside C (interior when strict).

    The image is a parallelepiped, so containment in the convex cube is
    equivalent to containment of the 2^d vertex images.
    """
    for v in cube.vertices():
        img = ratlin.mat_vec(R.inverse, ratlin.vec_add(v, b))
        if not cube.contains(img, strict=strict):
            return False, v
    return True, None


@dataclass(frozen=True)
class CubeReport:
    cube: CubeSpec
    pair_verdicts: tuple        # ((name, ok, failing (b, vertex) or None), ...)
    containment_ok: bool        # (ii) over every letter the word uses
    interior_pair: str
    interior_digit: tuple
    interior_ok: bool
    recurs_in_cycle: bool
    recurs_note: str

    def __bool__(self):
        return self.containment_ok and self.interior_ok


def recurring_letters(system: ConvolutionSystem):
    """Letters occurring infinitely often: the cycle letters, or — for a
    purely finite word standing in for an infinite sequence — the letters
    repeated at least twice in the prefix."""
    if system.cycle:
        return tuple(sorted(set(system.cycle))), True
    counts = {}
    for w in system.prefix:
        counts[w] = counts.get(w, 0) + 1
    return tuple(sorted(k for k, c in counts.items() if c >= 2)), False


def check_cube_conditions(system: ConvolutionSystem, cube: CubeSpec,
                          distinguished=None) -> CubeReport:
    """Exact rational verdicts for the containment and interior conditions.

    Condition (ii): every menu pair maps C + b back into C for each digit.
    Condition (iii): some recurring pair maps C + b0 into the open interior
    for a distinguished digit b0 (searched when not supplied).
    """
    d = system.dimension
    if d > MAX_CUBE_DIMENSION:
        raise ValueError(f"vertex enumeration limited to d <= {MAX_CUBE_DIMENSION}")
    if cube.dimension != d:
        raise ValueError("cube dimension mismatch")
    verdicts = []
    per_pair_ok = {}
    for name, pair in system.menu:
        failing = None
        for b in pair.B.elements:
            ok, vert = _image_in_cube(pair.R, b, cube, strict=False)
            if not ok:
                failing = (b, tuple(vert))
                break
        verdicts.append((name, failing is None, failing))
        per_pair_ok[name] = failing is None
    containment_ok = all(per_pair_ok[w] for w in system.letters_used())

    recurring, genuine_cycle = recurring_letters(system)
    note = ("distinguished pair recurs in the cycle" if genuine_cycle
            else "no cycle: recurrence assessed on the explicit prefix")
    interior_pair, interior_digit, interior_ok, recurs = None, None, False, False
    if distinguished is not None:
        name, b0 = distinguished
        b0 = tuple(int(x) for x in b0)
        pair = system.pair(name)
        if b0 not in pair.B.elements:
            raise ValueError(f"digit {b0} not in pair {name!r}")
        interior_pair, interior_digit = name, b0
        interior_ok = _image_in_cube(pair.R, b0, cube, strict=True)[0]
        recurs = name in recurring
    else:
        for name in recurring:
            pair = system.pair(name)
            for b0 in pair.B.elements:
                if _image_in_cube(pair.R, b0, cube, strict=True)[0]:
                    interior_pair, interior_digit, interior_ok, recurs = name, b0, True, True
                    break
            if interior_ok:
                break
    return CubeReport(cube, tuple(verdicts), containment_ok,
                      interior_pair, interior_digit, interior_ok and recurs,
                      recurs and genuine_cycle, note)


# ---------------------------------------------------------------------------
# digit isolation for diagonal systems


def find_isolating_digit(R, B):
    """Lexicographically first digit b with b + Rn - b' outside {0,1}^d for
    every nonzero integral n and every digit b'; None when no digit passes.

    The test is against the support cover R^{-1}B + R^{-1}[0,1]^d, which is
    conservative: a None answer never refutes existence for the actual tail
    measure.  Only n in {-1,0,1}^d can matter since m_i n_i must land in
    [-(m_i - 1), m_i]; per coordinate the feasible n_i reduce to n_i = 0
    (when b_i - b'_i in {0,1}) or n_i = 1 (when b_i = 0 and b'_i = m_i - 1),
    which is what the loop below enumerates.
    """
    if not check_Dd_membership(R, B):
        raise ValueError("pair is not a diagonal digit-box pair")
    rows = R.rows if isinstance(R, ExpandingMatrix) else ratlin.as_int_matrix(R)
    ms = [rows[i][i] for i in range(len(rows))]
    digits = B.elements if isinstance(B, DigitSet) else tuple(tuple(int(x) for x in b) for b in B)
    for b in sorted(digits):
        isolated = True
        for bp in digits:
            feasible = True
            has_step = False
            for bi, bpi, mi in zip(b, bp, ms):
                step = bi == 0 and bpi == mi - 1
                stay = bi - bpi in (0, 1)
                if not (step or stay):
                    feasible = False
                    break
                if step:
                    has_step = True
            if feasible and has_step:
                isolated = False
                break
        if isolated:
            return b
    return None


def isolating_digit_brute(R, B):
    """Reference n-box scan; slower but literal.  Used as a cross-check."""
    if not check_Dd_membership(R, B):
        raise ValueError("pair is not a diagonal digit-box pair")
    rows = R.rows if isinstance(R, ExpandingMatrix) else ratlin.as_int_matrix(R)
    d = len(rows)
    ms = [rows[i][i] for i in range(d)]
    digits = B.elements if isinstance(B, DigitSet) else tuple(tuple(int(x) for x in b) for b in B)
    shifts = [tuple(m * n for m, n in zip(ms, nv))
              for nv in itertools.product((-1, 0, 1), repeat=d) if any(nv)]
    for b in sorted(digits):
        hit = any(all(x - y in (0, 1) for x, y in zip(ratlin.vec_add(b, s), bp))
                  for s in shifts for bp in digits)
        if not hit:
            return b
    return None


# ---------------------------------------------------------------------------
# isolation witnesses


@dataclass(frozen=True)
class SupportCover:
    """Certified cover of a measure's support: atom + cell for each atom.

    ``cell`` is a rational box (lo, hi); the measure of any set containing a
    whole cell is at least that atom's weight, and sets missing every cell
    carry no mass.
    """

    atoms: DiscreteMeasure
    cell: tuple   # (lo, hi) tuples of Fractions

    @property
    def dimension(self) -> int:
        return self.atoms.dimension

    def hull(self):
        lo, hi = self.atoms.support_box()
        clo, chi = self.cell
        return (ratlin.vec_add(lo, clo), ratlin.vec_add(hi, chi))


def truncated_support_cover(system: ConvolutionSystem, n: int,
                            cube: CubeSpec) -> SupportCover:
    """Cover of the full convolution from its depth-n atoms.

    Requires the cube-containment condition so that the rescaled tail stays
    inside ``cube``; each atom of the depth-n measure then carries a cell
    (R_n...R_1)^{-1} C, boxed here by its vertex hull.
    """
    report = check_cube_conditions(system, cube)
    if not report.containment_ok:
        raise SupportBoundError("cannot bound lattice translates: cube containment fails")
    mu = build_mu_n(system, n)
    m = system.inverse_products(n)[-1]
    imgs = [ratlin.mat_vec(m, v) for v in cube.vertices()]
    d = system.dimension
    lo = tuple(min(img[i] for img in imgs) for i in range(d))
    hi = tuple(max(img[i] for img in imgs) for i in range(d))
    return SupportCover(mu, (lo, hi))


@dataclass(frozen=True)
class IsolationCheck:
    ok: bool
    kind: str
    checked_radius: int
    detail: str

    def __bool__(self):
        return self.ok


def _as_box(E, d):
    E = tuple(E)
    if len(E) == 2 and isinstance(E[0], (tuple, list)):
        lo = tuple(Fraction(x) for x in E[0])
        hi = tuple(Fraction(x) for x in E[1])
    else:
        lo = hi = tuple(Fraction(x) for x in E)
    if len(lo) != d or len(hi) != d or any(a > b for a, b in zip(lo, hi)):
        raise ValueError("witness set must be a point or box of the right dimension")
    return lo, hi


def _boxes_intersect(alo, ahi, blo, bhi) -> bool:
    return all(al <= bh and bl <= ah for al, ah, bl, bh in zip(alo, ahi, blo, bhi))


def check_isolation_witness(target, E, lattice_radius: int = None) -> IsolationCheck:
    """Exact verdict that E carries mass while every E + k (k != 0) does not.

    ``target`` is a DiscreteMeasure (exact atoms) or a SupportCover from a
    truncated system.  All lattice vectors that could possibly intersect are
    enumerated from the exact support bound; ``lattice_radius``, when given,
    caps that range and the check fails loudly if the bound does not fit.
    """
    if isinstance(target, DiscreteMeasure):
        d = target.dimension
        lo, hi = _as_box(E, d)
        positive = any(all(l <= x <= h for x, l, h in zip(p, lo, hi))
                       for p, _ in target.atoms)
        slo, shi = target.support_box()
        clo = (Fraction(0),) * d
        chi = (Fraction(0),) * d
        cells = [(p, p) for p, _ in target.atoms]
        kind = "atomic"
    elif isinstance(target, SupportCover):
        d = target.dimension
        lo, hi = _as_box(E, d)
        clo, chi = target.cell
        positive = any(all(l <= x + cl and x + ch <= h
                           for x, cl, ch, l, h in zip(p, clo, chi, lo, hi))
                       for p, _ in target.atoms.atoms)
        slo, shi = target.hull()
        cells = [(ratlin.vec_add(p, clo), ratlin.vec_add(p, chi))
                 for p, _ in target.atoms.atoms]
        kind = "cover"
    else:
        raise SupportBoundError("cannot bound lattice translates: "
                                "target has no certified support bound")
    # integral k with (E + k) possibly meeting the support hull
    kranges = []
    for i in range(d):
        kmin = math.floor(slo[i] - hi[i])
        kmax = math.ceil(shi[i] - lo[i])
        kranges.append(range(kmin, kmax + 1))
    needed = max((max(abs(r.start), abs(r.stop - 1)) for r in kranges), default=0)
    if lattice_radius is not None and needed > lattice_radius:
        raise SupportBoundError(
            f"cannot bound lattice translates within radius {lattice_radius}; "
            f"support bound needs {needed}")
    ok = positive
    if ok:
        for k in itertools.product(*kranges):
            if not any(k):
                continue
            elo = ratlin.vec_add(lo, k)
            ehi = ratlin.vec_add(hi, k)
            if any(_boxes_intersect(elo, ehi, blo, bhi) for blo, bhi in cells):
                ok = False
                break
    detail = (f"support hull fits within lattice radius {needed}; "
              f"E carries mass: {positive}")
    return IsolationCheck(ok, kind, needed, detail)


# ---------------------------------------------------------------------------
# grid scans


@dataclass(frozen=True)
class ZeroScanReport:
    """Grid points where every lattice translate of the transform is tiny.

    An empty candidate list is evidence (not proof) that the integral
    periodic zero set is empty at the stated parameters.
    """

    candidates: tuple      # ((index, point, max modulus), ...)
    resolution: int
    lattice_radius: int
    tol: float
    depth: int
    dimension: int

    def is_empty(self) -> bool:
        return not self.candidates


def _unit_grid(d: int, resolution: int) -> np.ndarray:
    axes = [np.arange(resolution) / resolution for _ in range(d)]
    if d == 1:
        return axes[0][:, None]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.ravel() for g in grids])


def scan_zero_set(transform, resolution: int = 128, lattice_radius: int = 8,
                  tol: float = 1e-6) -> ZeroScanReport:
    """Scan [0,1)^d for x with max_{|k|_inf <= K} |transform(x + k)| < tol.

    ``transform`` needs vectorised ``values`` plus ``dimension`` (a
    MaskProductEvaluator or a DiscreteMeasure wrapped by ``cf_values``).
    """
    d = transform.dimension
    values = transform.cf_values if isinstance(transform, DiscreteMeasure) else transform.values
    depth = getattr(transform, "depth", 0)
    grid = _unit_grid(d, resolution)
    best = np.full(len(grid), -1.0)
    for k in itertools.product(range(-lattice_radius, lattice_radius + 1), repeat=d):
        vals = np.abs(values(grid + np.asarray(k, dtype=float)))
        np.maximum(best, vals, out=best)
    hits = np.nonzero(best < tol)[0]
    cands = tuple((int(i), tuple(float(c) for c in grid[i]), float(best[i]))
                  for i in hits)
    return ZeroScanReport(cands, resolution, lattice_radius, tol, depth, d)


@dataclass(frozen=True)
class EquiPositivityCertificate:
    """Grid table x -> (k_x, |nu_hat(x + k_x)|) with eps = min attained.

    Always empirical: moduli come from the truncated transform on a finite
    grid.  ``gamma`` is half the grid spacing; when a support radius bound
    is known the printed continuity factor 2*pi*r turns grid positivity into
    a heuristic lower bound nearby.
    """

    eps: float
    gamma: float
    resolution: int
    tail_index: int
    truncation_depth: int
    box_radius: int
    table: tuple          # ((x, k, value), ...)
    continuity_factor: float = None
    empirical: bool = True


def estimate_equipositivity(system: ConvolutionSystem, tail_index: int,
                            grid_resolution: int = 128, box_radius: int = 3,
                            tail_depth: int = 30, eps_min: float = 1e-4,
                            support_radius: float = None) -> EquiPositivityCertificate:
    """Estimate the positivity constants of one rescaled tail.

    For every grid x the integral shift maximising the truncated tail
    modulus is chosen (ties: smallest norm, then lexicographic; forced to 0
    at x = 0); failure below ``eps_min`` raises EquiPositivityFailure naming
    the worst grid point.
    """
    d = system.dimension
    tail = MaskProductEvaluator(system.shift(tail_index), tail_depth)
    grid = _unit_grid(d, grid_resolution)
    ks = sorted(itertools.product(range(-box_radius, box_radius + 1), repeat=d),
                key=lambda k: (sum(x * x for x in k), k))
    stack = np.empty((len(ks), len(grid)))
    for i, k in enumerate(ks):
        stack[i] = np.abs(tail.values(grid + np.asarray(k, dtype=float)))
    pick = np.argmax(stack, axis=0)          # first max in (norm, lex) order
    zero_idx = ks.index((0,) * d)
    origin = np.nonzero(~grid.any(axis=1))[0]
    pick[origin] = zero_idx
    vals = stack[pick, np.arange(len(grid))]
    worst = int(np.argmin(vals))
    eps = float(vals[worst])
    if eps <= eps_min:
        x = tuple(float(c) for c in grid[worst])
        raise EquiPositivityFailure(
            f"equi-positivity fails at x = {x}: best |nu_hat| = {eps:.3g} <= {eps_min}",
            worst_point=x, value=eps)
    table = tuple((tuple(float(c) for c in grid[i]), ks[pick[i]], float(vals[i]))
                  for i in range(len(grid)))
    factor = 2 * math.pi * support_radius if support_radius else None
    return EquiPositivityCertificate(eps, 1.0 / (2 * grid_resolution), grid_resolution,
                                     tail_index, tail.depth, box_radius, table, factor)
