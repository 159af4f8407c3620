"""Data model for admissible pairs, convolution systems and discrete measures.

Everything that feeds an exact check (atom coordinates, matrix products,
weights) is kept in arbitrary-precision rationals; floating point appears
only in eigenvalue/norm estimates and in sampling.  All types are immutable
values after construction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import ratlin
from .ratlin import Fraction as _F  # noqa: F401  (re-export convenience)
from .ratlin import SingularMatrixError

DEFAULT_ATOM_CAP = 10**6


class DepthError(ValueError):
    """A word depth beyond what the system's word can address."""


class AtomBudgetError(RuntimeError):
    """Exact convolution would exceed the configured atom cap."""


def _unit_root_eigenvalue(rows) -> bool:
    """True if the integer matrix provably has an eigenvalue of modulus 1.

    Checks whether the characteristic polynomial shares a root with x^k - 1
    for every k whose primitive roots can have degree <= d.  That covers the
    root-of-unity eigenvalues, which are the common reason a float spectral
    radius lands on 1.
    """
    d = len(rows)
    cp = ratlin.char_poly(rows)
    ks = [k for k in range(1, 6 * d * d + 7)
          if sum(1 for j in range(1, k + 1) if math.gcd(j, k) == 1) <= d]
    return any(_poly_common_root(cp, k) for k in ks)


def _trim(p):
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_mod(a, b):
    r = [Fraction(c) for c in a]
    _trim(r)
    while len(r) >= len(b):
        f = r[-1] / b[-1]
        off = len(r) - len(b)
        for i, c in enumerate(b):
            r[off + i] -= f * c
        _trim(r)
    return r


def _poly_common_root(cp, k) -> bool:
    # gcd(cp, x^k - 1) is nonconstant over the rationals.
    a = _trim([Fraction(c) for c in cp])
    b = [Fraction(-1)] + [Fraction(0)] * (k - 1) + [Fraction(1)]
    while b:
        a, b = b, _poly_mod(a, b)
    return len(a) > 1


def check_expanding(rows, tol: float = 1e-9):
    """Decide whether an integer matrix has all eigenvalue moduli > 1.

    Returns ``(verdict, rho)`` where ``rho`` is the float spectral radius of
    the inverse; verdict is True iff ``rho`` is safely below 1.  Raises on a
    singular matrix, and on a genuinely borderline radius that cannot be
    attributed to an exact unit-circle eigenvalue.
    """
    m = ratlin.as_int_matrix(rows)
    if ratlin.det(m) == 0:
        raise SingularMatrixError("not invertible")
    inv = ratlin.to_float_array(ratlin.inverse(m))
    rho = float(np.max(np.abs(np.linalg.eigvals(inv))))
    if rho < 1 - tol:
        return True, rho
    if rho > 1 + tol:
        return False, rho
    if _unit_root_eigenvalue(m):
        return False, rho
    raise ValueError(f"borderline, refine: spectral radius {rho!r} within {tol} of 1")


@dataclass(frozen=True)
class ExpandingMatrix:
    """Integer d x d matrix whose eigenvalues all have modulus > 1."""

    rows: tuple

    def __init__(self, rows):
        object.__setattr__(self, "rows", ratlin.as_int_matrix(rows))
        ok, rho = check_expanding(self.rows)
        if not ok:
            raise ValueError(f"matrix is not expanding (spectral radius of inverse {rho})")

    @property
    def dimension(self) -> int:
        return len(self.rows)

    @cached_property
    def det(self) -> int:
        d = ratlin.det(self.rows)
        return int(d)

    @cached_property
    def inverse(self):
        return ratlin.inverse(self.rows)

    @cached_property
    def transpose(self):
        return ratlin.transpose(self.rows)

    def __mul__(self, other: "ExpandingMatrix") -> "ExpandingMatrix":
        return ExpandingMatrix(ratlin.mat_mul(self.rows, other.rows))

    def is_diagonal(self) -> bool:
        return all(self.rows[i][j] == 0 for i in range(self.dimension)
                   for j in range(self.dimension) if i != j)

    def diagonal(self):
        return tuple(self.rows[i][i] for i in range(self.dimension))


@dataclass(frozen=True)
class DigitSet:
    """Finite set of integer digit vectors with positive rational weights.

    Weights default to uniform and are normalised exactly; they matter for
    measures and sampling only — the Hadamard/admissibility machinery always
    treats the digits uniformly.
    """

    elements: tuple
    weights: tuple

    def __init__(self, elements, weights=None):
        elems = tuple(tuple(int(x) for x in e) for e in elements)
        if not elems:
            raise ValueError("digit set must be nonempty")
        if len(set(elems)) != len(elems):
            raise ValueError("digit set has duplicate vectors")
        if any(len(e) != len(elems[0]) for e in elems):
            raise ValueError("digit vectors must share a dimension")
        if weights is None:
            w = tuple(Fraction(1, len(elems)) for _ in elems)
        else:
            w = tuple(Fraction(x) for x in weights)
            if len(w) != len(elems):
                raise ValueError("one weight per digit required")
            if any(x <= 0 for x in w):
                raise ValueError("weights must be positive")
            total = sum(w)
            w = tuple(x / total for x in w)
        object.__setattr__(self, "elements", elems)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def dimension(self) -> int:
        return len(self.elements[0])

    def is_uniform(self) -> bool:
        return len(set(self.weights)) == 1


@dataclass(frozen=True)
class AdmissiblePair:
    """(R, B) with an optional candidate spectrum L attached.

    Construction validates structure only (counts, dimensions, distinctness
    of L modulo R^T Z^d); the unitarity check itself lives in
    :mod:`convspec.hadamard`.
    """

    R: ExpandingMatrix
    B: DigitSet
    L: tuple = None

    def __init__(self, R, B, L=None):
        if not isinstance(R, ExpandingMatrix):
            R = ExpandingMatrix(R)
        if not isinstance(B, DigitSet):
            B = DigitSet(B)
        if R.dimension != B.dimension:
            raise ValueError("matrix and digit set dimensions differ")
        if L is not None:
            L = tuple(tuple(int(x) for x in l) for l in L)
            if len(L) != len(B):
                raise ValueError("#L != #B")
            if any(len(l) != R.dimension for l in L):
                raise ValueError("spectrum vectors must match the dimension")
            reduced = {canonical_residue(R, l) for l in L}
            if len(reduced) != len(L):
                raise ValueError("spectrum elements must be distinct modulo R^T Z^d")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "L", L)

    @property
    def dimension(self) -> int:
        return self.R.dimension

    def with_spectrum(self, L) -> "AdmissiblePair":
        return AdmissiblePair(self.R, self.B, L)


@dataclass(frozen=True)
class ConvolutionSystem:
    """A menu of named pairs plus an eventually periodic selection word.

    The word is ``prefix`` followed by ``cycle`` repeated forever; an empty
    cycle makes the system finite, addressable to ``len(prefix)`` only.
    """

    menu: tuple            # tuple of (name, AdmissiblePair)
    prefix: tuple
    cycle: tuple

    def __init__(self, menu, prefix=(), cycle=()):
        if isinstance(menu, dict):
            menu = tuple(menu.items())
        menu = tuple((str(k), v) for k, v in menu)
        names = [k for k, _ in menu]
        if len(set(names)) != len(names):
            raise ValueError("menu names must be unique")
        if not menu:
            raise ValueError("menu must contain at least one pair")
        dims = {v.dimension for _, v in menu}
        if len(dims) != 1:
            raise ValueError("all menu pairs must share a dimension")
        prefix = tuple(str(x) for x in prefix)
        cycle = tuple(str(x) for x in cycle)
        known = set(names)
        for w in itertools.chain(prefix, cycle):
            if w not in known:
                raise ValueError(f"word letter {w!r} is not a menu name")
        if not prefix and not cycle:
            raise ValueError("word must contain at least one letter")
        object.__setattr__(self, "menu", menu)
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "cycle", cycle)

    @classmethod
    def constant(cls, pair, name="p") -> "ConvolutionSystem":
        return cls(((name, pair),), prefix=(), cycle=(name,))

    @cached_property
    def _menu_map(self):
        return dict(self.menu)

    @property
    def dimension(self) -> int:
        return self.menu[0][1].dimension

    @property
    def max_depth(self):
        """None when the word is infinite, else the prefix length."""
        return None if self.cycle else len(self.prefix)

    def addressable(self, n: int) -> bool:
        return n >= 0 and (self.cycle or n <= len(self.prefix))

    def require_depth(self, n: int):
        if not self.addressable(n):
            raise DepthError(f"depth {n} beyond the {len(self.prefix)}-letter word")

    def letter(self, n: int) -> str:
        """Menu name at position n (1-based)."""
        if n < 1:
            raise DepthError("positions are 1-based")
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        if not self.cycle:
            raise DepthError(f"depth {n} beyond the {len(self.prefix)}-letter word")
        return self.cycle[(n - len(self.prefix) - 1) % len(self.cycle)]

    def pair_at(self, n: int) -> AdmissiblePair:
        return self._menu_map[self.letter(n)]

    def pair(self, name: str) -> AdmissiblePair:
        return self._menu_map[name]

    def letters_used(self):
        return tuple(sorted(set(self.prefix) | set(self.cycle)))

    def shift(self, n: int) -> "ConvolutionSystem":
        """Drop the first n letters of the word."""
        self.require_depth(n)
        if n <= len(self.prefix):
            return ConvolutionSystem(self.menu, self.prefix[n:], self.cycle)
        r = (n - len(self.prefix)) % len(self.cycle)
        return ConvolutionSystem(self.menu, (), self.cycle[r:] + self.cycle[:r])

    def with_spectra(self, spectra: dict) -> "ConvolutionSystem":
        menu = tuple((k, v.with_spectrum(spectra[k]) if k in spectra else v)
                     for k, v in self.menu)
        return ConvolutionSystem(menu, self.prefix, self.cycle)

    def inverse_products(self, n: int):
        """[(R_k...R_1)^{-1} for k = 1..n], exact."""
        self.require_depth(n)
        out = []
        acc = ratlin.identity(self.dimension)
        for k in range(1, n + 1):
            acc = ratlin.mat_mul(acc, self.pair_at(k).R.inverse)
            out.append(acc)
        return out


# ---------------------------------------------------------------------------
# residues and lattice quotients


def _normalized_adjugate(rows):
    """(adj, det) with det > 0 so that S^{-1} v = adj v / det."""
    d = ratlin.det(rows)
    if d == 0:
        raise SingularMatrixError("not invertible")
    adj = ratlin.adjugate_int(rows)
    d = int(d)
    if d < 0:
        adj = tuple(tuple(-x for x in row) for row in adj)
        d = -d
    return adj, d


def residues(R) -> tuple:
    """Canonical coset representatives of Z^d / R^T Z^d.

    The canonical representative of a class is the unique member r with
    R^{-T} r in [0,1)^d; they are found by scanning the integer bounding box
    of the parallelepiped R^T [0,1)^d.  Exactly ``|det R|`` vectors come back.
    """
    if isinstance(R, ExpandingMatrix):
        rows = R.rows
    else:
        rows = ratlin.as_int_matrix(R)
    st = ratlin.transpose(rows)
    adj, dpos = _normalized_adjugate(st)
    d = len(rows)
    corners = [ratlin.mat_vec(st, v) for v in itertools.product((0, 1), repeat=d)]
    lo = [min(int(c[i]) for c in corners) for i in range(d)]
    hi = [max(int(c[i]) for c in corners) for i in range(d)]
    out = []
    for r in itertools.product(*[range(lo[i], hi[i] + 1) for i in range(d)]):
        coords = [sum(adj[i][j] * r[j] for j in range(d)) for i in range(d)]
        if all(0 <= c < dpos for c in coords):
            out.append(r)
    out.sort()
    expected = abs(int(ratlin.det(rows)))
    if len(out) != expected:
        raise AssertionError(f"residue scan found {len(out)}, expected {expected}")
    return tuple(out)


def canonical_residue(R, v) -> tuple:
    """Reduce an integer vector to its canonical representative mod R^T Z^d."""
    rows = R.rows if isinstance(R, ExpandingMatrix) else ratlin.as_int_matrix(R)
    st = ratlin.transpose(rows)
    adj, dpos = _normalized_adjugate(st)
    d = len(rows)
    v = tuple(int(x) for x in v)
    nums = [sum(adj[i][j] * v[j] for j in range(d)) for i in range(d)]
    k = [n // dpos for n in nums]
    return tuple(v[i] - sum(st[i][j] * k[j] for j in range(d)) for i in range(d))


def check_Dd_membership(R, B) -> bool:
    """True iff R = diag(m_1..m_d) with all m_i >= 2 and B inside the digit box."""
    if isinstance(R, ExpandingMatrix):
        rows = R.rows
    else:
        try:
            rows = ratlin.as_int_matrix(R)
        except ValueError:
            return False
    d = len(rows)
    if any(rows[i][j] != 0 for i in range(d) for j in range(d) if i != j):
        return False
    ms = [rows[i][i] for i in range(d)]
    if any(m < 2 for m in ms):
        return False
    digits = B.elements if isinstance(B, DigitSet) else tuple(tuple(int(x) for x in b) for b in B)
    return all(all(0 <= b[i] < ms[i] for i in range(d)) for b in digits)


@dataclass(frozen=True)
class ContractionTrend:
    """Operator norms of R_1^{-1} R_2^{-1} ... R_n^{-1} for n = 1..n_max."""

    norms: tuple
    threshold: float = None
    below_threshold: bool = None


def contraction_norms(system: ConvolutionSystem, n_max: int,
                      threshold: float = None) -> ContractionTrend:
    system.require_depth(n_max)
    norms = tuple(ratlin.operator_norm(p) for p in system.inverse_products(n_max))
    below = None if threshold is None else bool(norms[-1] < threshold)
    return ContractionTrend(norms, threshold, below)


# ---------------------------------------------------------------------------
# discrete measures


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely many rational atoms with positive rational weights of mass 1."""

    atoms: tuple   # sorted tuple of (point, weight), point a tuple of Fractions

    def __init__(self, atoms):
        merged = {}
        for point, weight in atoms:
            p = tuple(Fraction(x) for x in point)
            w = Fraction(weight)
            if w <= 0:
                raise ValueError("weights must be positive")
            merged[p] = merged.get(p, Fraction(0)) + w
        if not merged:
            raise ValueError("measure needs at least one atom")
        dims = {len(p) for p in merged}
        if len(dims) != 1:
            raise ValueError("atoms must share a dimension")
        if sum(merged.values()) != 1:
            raise ValueError("weights must sum to 1 exactly")
        object.__setattr__(self, "atoms", tuple(sorted(merged.items())))

    @classmethod
    def dirac(cls, point) -> "DiscreteMeasure":
        return cls([(point, Fraction(1))])

    @classmethod
    def uniform(cls, points) -> "DiscreteMeasure":
        pts = list(points)
        w = Fraction(1, len(pts))
        return cls([(p, w) for p in pts])

    @property
    def dimension(self) -> int:
        return len(self.atoms[0][0])

    def __len__(self):
        return len(self.atoms)

    def mass(self) -> Fraction:
        return sum(w for _, w in self.atoms)

    def weight_at(self, point) -> Fraction:
        p = tuple(Fraction(x) for x in point)
        for q, w in self.atoms:
            if q == p:
                return w
        return Fraction(0)

    def affine(self, matrix=None, shift=None) -> "DiscreteMeasure":
        """Pushforward under x -> M x + t, exact."""
        d = self.dimension
        m = ratlin.as_matrix(matrix) if matrix is not None else ratlin.identity(d)
        t = as_fraction_vector(shift) if shift is not None else (Fraction(0),) * d
        return DiscreteMeasure([(ratlin.vec_add(ratlin.mat_vec(m, p), t), w)
                                for p, w in self.atoms])

    def support_box(self):
        """Componentwise (min, max) over the atoms, exact."""
        d = self.dimension
        lo = tuple(min(p[i] for p, _ in self.atoms) for i in range(d))
        hi = tuple(max(p[i] for p, _ in self.atoms) for i in range(d))
        return lo, hi

    def cf(self, xi) -> complex:
        """Characteristic-function value sum_atoms w exp(-2 pi i xi.x)."""
        from .fourier import cis  # local import to keep module layering simple
        return complex(sum(complex(w) * cis(ratlin.vec_dot(p, tuple(xi)))
                           for p, w in self.atoms))

    def cf_values(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        a = np.array([[float(x) for x in p] for p, _ in self.atoms])
        w = np.array([float(wt) for _, wt in self.atoms])
        phases = pts @ a.T
        return np.exp(-2j * np.pi * phases) @ w


def as_fraction_vector(v):
    return tuple(Fraction(x) for x in v)


def convolve_discrete(mu: DiscreteMeasure, nu: DiscreteMeasure) -> DiscreteMeasure:
    """Exact convolution: pairwise atom sums, product weights, merged exactly."""
    if mu.dimension != nu.dimension:
        raise ValueError("dimension mismatch")
    merged = {}
    for p, wp in mu.atoms:
        for q, wq in nu.atoms:
            s = ratlin.vec_add(p, q)
            w = wp * wq
            merged[s] = merged.get(s, Fraction(0)) + w
    return DiscreteMeasure(list(merged.items()))


def level_measure(system: ConvolutionSystem, k: int) -> DiscreteMeasure:
    """delta_{(R_k...R_1)^{-1} B_k} with the digit weights of level k."""
    system.require_depth(k)
    m = system.inverse_products(k)[-1]
    pair = system.pair_at(k)
    return DiscreteMeasure([(ratlin.mat_vec(m, b), w)
                            for b, w in zip(pair.B.elements, pair.B.weights)])


def build_mu_n(system: ConvolutionSystem, n: int,
               atom_cap: int = DEFAULT_ATOM_CAP) -> DiscreteMeasure:
    """The depth-n convolution with exact rational atoms.

    Atom coordinates are sums of (R_k...R_1)^{-1} b_k over digit choices;
    duplicate atoms merge by exact equality.  Raises AtomBudgetError before
    the intermediate atom count can exceed ``atom_cap``.
    """
    system.require_depth(n)
    if n == 0:
        return DiscreteMeasure.dirac((0,) * system.dimension)
    prods = system.inverse_products(n)
    mu = None
    for k in range(1, n + 1):
        pair = system.pair_at(k)
        lvl = DiscreteMeasure([(ratlin.mat_vec(prods[k - 1], b), w)
                               for b, w in zip(pair.B.elements, pair.B.weights)])
        if mu is None:
            mu = lvl
        else:
            if len(mu) * len(lvl) > atom_cap:
                raise AtomBudgetError(
                    f"depth too large: {len(mu)} x {len(lvl)} atoms exceeds cap {atom_cap}")
            mu = convolve_discrete(mu, lvl)
    return mu


def sample(system: ConvolutionSystem, depth: int, count: int, seed: int) -> np.ndarray:
    """Monte Carlo points of the depth-``depth`` convolution.

    Digits are drawn independently per level according to the digit weights;
    output is deterministic for a given seed.  Returns an array of shape
    (count, d).
    """
    system.require_depth(depth)
    d = system.dimension
    if count == 0:
        return np.zeros((0, d))
    rng = np.random.default_rng(seed)
    pts = np.zeros((count, d))
    if depth == 0:
        return pts
    for k, prod in enumerate(system.inverse_products(depth), start=1):
        pair = system.pair_at(k)
        digits = np.array(pair.B.elements, dtype=float)
        probs = np.array([float(w) for w in pair.B.weights])
        probs = probs / probs.sum()
        idx = rng.choice(len(digits), size=count, p=probs)
        pts += digits[idx] @ ratlin.to_float_array(prod).T
    return pts
