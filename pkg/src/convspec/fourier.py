"""Masks, truncated transforms of infinite convolutions, and Q(xi).

The transform of the depth-n convolution factors level by level,

    mu_n_hat(xi) = prod_{k<=n} m_{B_k}((R_k...R_1)^{-T} xi),

so evaluation precomputes the exact transposed-inverse products once and
multiplies masks.  Phases stay rational until the final complex exponential
whenever the argument is rational; arbitrary float arguments take a
vectorised numpy path instead.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import ratlin
from .core import ConvolutionSystem, DigitSet

DEFAULT_TRUNCATION = 40
CONTRACTION_CUTOFF = 1e-10


def cis(t) -> complex:
    """exp(-2 pi i t); rational t is reduced mod 1 first for accuracy."""
    if isinstance(t, Fraction):
        t = t - (t.numerator // t.denominator)
    return cmath.exp(-2j * cmath.pi * float(t))


def _is_rational_vector(xi) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in xi)


def mask_eval(B, xi) -> complex:
    """m_B(xi) = sum_b p_b exp(-2 pi i b . xi); |m_B| <= 1, m_B(0) = 1."""
    B = B if isinstance(B, DigitSet) else DigitSet(B)
    xi = tuple(xi)
    return complex(sum(complex(w) * cis(ratlin.vec_dot(b, xi))
                       for b, w in zip(B.elements, B.weights)))


@dataclass(frozen=True)
class TruncationBound:
    """|mu_hat(xi) - mu_n_hat(xi)| <= 2 pi r |xi| ||(R_n...R_1)^{-1}||.

    ``radius`` bounds the support of the rescaled tail; the bound is only
    meaningful (``valid``) when that containment has been certified, which
    the criteria module does via cube containment.  Otherwise the evaluator
    still reports its depth, labelled heuristic.
    """

    depth: int
    radius: float
    contraction: float
    valid: bool

    def bound_at(self, xi_norm: float) -> float:
        if not self.valid:
            raise ValueError("no certified support radius; bound is heuristic only")
        return 2 * math.pi * self.radius * xi_norm * self.contraction


class MaskProductEvaluator:
    """Evaluates the depth-T truncation of the infinite convolution transform.

    ``support_radius``, when given, must be a certified bound on the radius
    of every rescaled tail support; it enables :meth:`truncation_bound`.
    """

    def __init__(self, system: ConvolutionSystem, depth: int = None,
                 support_radius: float = None):
        auto = depth is None
        if auto:
            depth = DEFAULT_TRUNCATION
            if system.max_depth is not None:
                depth = min(depth, system.max_depth)
        system.require_depth(depth)
        self.system = system
        self.support_radius = support_radius
        prods = system.inverse_products(depth) if depth else []
        if auto:
            # stop early once the contraction makes further factors ~ 1
            for k, p in enumerate(prods, start=1):
                if ratlin.operator_norm(p) < CONTRACTION_CUTOFF:
                    depth = k
                    prods = prods[:k]
                    break
        self.depth = depth
        # (R_k...R_1)^{-T} = transpose of the inverse product, exact
        self._exact = [ratlin.transpose(p) for p in prods]
        self._float = [ratlin.to_float_array(t) for t in self._exact]
        self._digits = []
        self._weights = []
        for k in range(1, depth + 1):
            b = system.pair_at(k).B
            self._digits.append(np.array(b.elements, dtype=float))
            self._weights.append(np.array([float(w) for w in b.weights]))
        self._contraction = ratlin.operator_norm(prods[-1]) if prods else 1.0

    @property
    def dimension(self) -> int:
        return self.system.dimension

    def value(self, xi) -> complex:
        """Scalar transform value; exact phase arithmetic for rational xi."""
        xi = tuple(xi)
        acc = complex(1.0)
        exact = _is_rational_vector(xi)
        for k in range(self.depth):
            if exact:
                eta = ratlin.mat_vec(self._exact[k], xi)
            else:
                eta = tuple(float(sum(float(a) * float(x) for a, x in zip(row, xi)))
                            for row in self._exact[k])
            pair = self.system.pair_at(k + 1)
            acc *= complex(sum(complex(w) * cis(ratlin.vec_dot(b, eta))
                               for b, w in zip(pair.B.elements, pair.B.weights)))
        return acc

    def values(self, points: np.ndarray) -> np.ndarray:
        """Vectorised float path over an (N, d) array of arguments."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        acc = np.ones(len(pts), dtype=complex)
        for t, dig, w in zip(self._float, self._digits, self._weights):
            eta = pts @ t.T
            acc *= np.exp(-2j * np.pi * (eta @ dig.T)) @ w
        return acc

    def truncation_bound(self) -> TruncationBound:
        return TruncationBound(self.depth,
                               self.support_radius if self.support_radius else 0.0,
                               self._contraction,
                               self.support_radius is not None)


def mu_n_hat(system: ConvolutionSystem, n: int, xi) -> complex:
    """Transform of the depth-n convolution; the empty product at n=0 is 1."""
    return MaskProductEvaluator(system, n).value(xi)


def nu_gt_n_hat(system: ConvolutionSystem, n: int, t: int, xi) -> complex:
    """Transform of the rescaled tail after level n, truncated at t factors."""
    system.require_depth(n + t)
    return MaskProductEvaluator(system.shift(n), t).value(xi)


def tail_evaluator(system: ConvolutionSystem, n: int, depth: int,
                   support_radius: float = None) -> MaskProductEvaluator:
    return MaskProductEvaluator(system.shift(n), depth, support_radius)


def Q_function(evaluator: MaskProductEvaluator, lam, xi) -> float:
    """Q(xi) = sum_{l in lam} |mu_hat_T(l + xi)|^2 for a finite lam."""
    xi = tuple(xi)
    total = 0.0
    for l in lam:
        total += abs(evaluator.value(ratlin.vec_add(tuple(l), xi))) ** 2
    return total


def q_values(evaluator: MaskProductEvaluator, lam, points: np.ndarray) -> np.ndarray:
    """Vectorised Q over an (N, d) array of arguments."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    acc = np.zeros(len(pts))
    for l in lam:
        acc += np.abs(evaluator.values(pts + np.asarray(l, dtype=float))) ** 2
    return acc


def grid_points(box, resolution):
    """Half-open uniform grid over ``box``; includes the lower edge only.

    box is ((x0, x1),) for d=1 or ((x0, x1), (y0, y1)) for d=2; resolution is
    points per axis.  The half-open convention puts exact lattice points on
    the grid, which the zero-set scans rely on.
    """
    axes = []
    for (a, b) in box:
        a, b = float(a), float(b)
        if resolution < 2:
            raise ValueError("resolution must be >= 2 per axis")
        axes.append(a + (b - a) * np.arange(resolution) / resolution)
    return axes


def grid_eval(evaluator: MaskProductEvaluator, box, resolution: int,
              quantity: str = "muhat2", lam=None) -> np.ndarray:
    """Raster of |mu_hat_T|^2 or Q over a half-open uniform grid.

    d=1 returns shape (resolution,); d=2 returns (resolution, resolution) in
    row-major order with the top row at the largest second coordinate.
    """
    d = evaluator.dimension
    if d not in (1, 2):
        raise ValueError("raster output supports d in {1, 2} only")
    if len(box) != d:
        raise ValueError("box must provide one (lo, hi) interval per axis")
    axes = grid_points(box, resolution)
    if d == 1:
        pts = axes[0][:, None]
    else:
        xx, yy = np.meshgrid(axes[0], axes[1][::-1])   # top row = max y
        pts = np.column_stack([xx.ravel(), yy.ravel()])
    if quantity == "muhat2":
        vals = np.abs(evaluator.values(pts)) ** 2
    elif quantity == "Q":
        if lam is None:
            raise ValueError("quantity 'Q' needs a frequency set")
        vals = q_values(evaluator, lam, pts)
    else:
        raise ValueError(f"unknown quantity {quantity!r}")
    return vals if d == 1 else vals.reshape(resolution, resolution)
