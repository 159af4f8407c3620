"""Candidate spectra: the canonical tower and its corrected refinement.

The canonical tower stacks the per-level spectra through transposed matrix
products.  The corrected construction additionally shifts each new block
element by an integral vector chosen so the truncated tail transform stays
bounded below at the shifted points; levels are spaced so that rescaled
lower-level frequencies fall inside the positivity radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

from . import ratlin
from .core import ConvolutionSystem, build_mu_n
from .fourier import MaskProductEvaluator, q_values
from .gram import GramReport, gram_matrix
from .hadamard import translate_spectrum


class LevelGapError(ValueError):
    """Chosen level depth leaves a rescaled frequency above gamma/2."""


class CorrectionNotFound(RuntimeError):
    """No integral shift in the search box lifts the tail modulus to eps."""


def _normalized_level_spectrum(pair, position):
    if pair.L is None:
        raise ValueError(f"pair at position {position} has no attached spectrum")
    L = pair.L
    zero = (0,) * pair.dimension
    if zero not in L:
        L = translate_spectrum(L, tuple(-x for x in min(L)))
    return L


def canonical_spectrum(system: ConvolutionSystem, n: int):
    """L_1 + R_1^T L_2 + ... + (R_1^T...R_{n-1}^T) L_n, exact and sorted.

    Every pair in the first n letters must carry a spectrum; spectra are
    translated to contain 0 so the tower is nested across depths.
    """
    system.require_depth(n)
    if n < 1:
        raise ValueError("depth must be >= 1")
    d = system.dimension
    acc = [(0,) * d]
    m = ratlin.identity(d)
    for k in range(1, n + 1):
        pair = system.pair_at(k)
        lk = _normalized_level_spectrum(pair, k)
        block = [tuple(int(x) for x in ratlin.mat_vec(m, l)) for l in lk]
        acc = [ratlin.vec_add(a, b) for a in acc for b in block]
        m = ratlin.mat_mul(m, pair.R.transpose)
    out = sorted(acc)
    if len(set(out)) != len(out):
        raise ValueError("canonical spectrum collided; system is not admissible")
    return tuple(out)


def transpose_product(system: ConvolutionSystem, p: int, q: int):
    """R_{p+1}^T R_{p+2}^T ... R_q^T as an exact integer matrix."""
    m = ratlin.identity(system.dimension)
    for k in range(p + 1, q + 1):
        m = ratlin.mat_mul(m, system.pair_at(k).R.transpose)
    return m


@dataclass(frozen=True)
class SpectrumCandidate:
    """Leveled frequency sets with per-element correction vectors.

    ``levels[j-1]`` is a spectrum of the depth-``depths[j-1]`` convolution;
    ``corrections`` maps (level j, block element lambda) to the integral
    shift applied there, with the zero element always unshifted.
    """

    depths: tuple
    levels: tuple
    corrections: tuple        # ((j, lambda, k), ...)
    gamma: float
    eps: float
    box_radius: int
    tail_depth: int
    tail_minima: tuple = ()   # attained min |nu_hat| per level j >= 2

    @cached_property
    def correction_map(self):
        return {(j, lam): k for j, lam, k in self.corrections}

    def correction(self, j, lam):
        return self.correction_map[(j, tuple(lam))]

    def table_rows(self):
        """Rows (level, lambda components..., correction components...)."""
        rows = []
        d = len(self.levels[0][0])
        zero = (0,) * d
        block_of = {}
        for j, lam, k in self.corrections:
            block_of.setdefault(j, {})[lam] = k
        for j, level in enumerate(self.levels, start=1):
            for lam in level:
                rows.append((j,) + tuple(lam) + tuple(block_of.get(j, {}).get(lam, zero)))
        return rows

    def is_canonical(self) -> bool:
        zero = tuple(0 for _ in self.levels[0][0])
        return all(k == zero for _, _, k in self.corrections)


def _correction_box(d: int, radius: int):
    import itertools
    ks = list(itertools.product(range(-radius, radius + 1), repeat=d))
    ks.sort(key=lambda k: (sum(x * x for x in k), k))
    return ks


def _gap_violation(system, depth, frequencies, gamma):
    ginv_t = ratlin.transpose(system.inverse_products(depth)[-1])
    worst, worst_lam = -1.0, None
    for lam in frequencies:
        v = ratlin.mat_vec(ginv_t, lam)
        norm = math.sqrt(sum(float(x) * float(x) for x in v))
        if norm > worst:
            worst, worst_lam = norm, lam
    return worst, worst_lam


def corrected_spectrum(system: ConvolutionSystem, level_depths=None, *,
                       gamma: float, eps: float, box_radius: int = 3,
                       tail_depth: int = 30, num_levels: int = 3) -> SpectrumCandidate:
    """Build the corrected tower.

    For each level j >= 2 and each element lambda of the block spectrum, the
    integral shift k maximising |nu_hat_{>m_j}| at the rescaled point is
    recorded (ties broken by smallest Euclidean norm, then lexicographic;
    k = 0 is forced at lambda = 0) and must reach ``eps``.  When
    ``level_depths`` is omitted the smallest depths satisfying the gap rule
    for ``gamma`` are chosen by scanning; explicit depths that violate the
    rule raise LevelGapError.
    """
    if gamma <= 0 or eps <= 0:
        raise ValueError("gamma and eps must be positive")
    explicit = level_depths is not None
    if explicit:
        depths = [int(m) for m in level_depths]
        if depths != sorted(set(depths)) or depths[0] < 1:
            raise ValueError("level depths must be strictly increasing and >= 1")
        num_levels = len(depths)
    d = system.dimension
    zero = (0,) * d
    box = _correction_box(d, box_radius)

    m1 = depths[0] if explicit else 1
    levels = [canonical_spectrum(system, m1)]
    chosen = [m1]
    corrections = []
    minima = []
    for j in range(2, num_levels + 1):
        if explicit:
            mj = depths[j - 1]
            worst, worst_lam = _gap_violation(system, mj, levels[-1], gamma)
            if worst >= gamma / 2:
                raise LevelGapError(
                    f"level gap too small at level {j}: |(R_1^T..R_{mj}^T)^-1 "
                    f"{worst_lam}| = {worst:.6g} >= gamma/2 = {gamma / 2:.6g}")
        else:
            mj = chosen[-1] + 1
            while True:
                system.require_depth(mj)
                worst, _ = _gap_violation(system, mj, levels[-1], gamma)
                if worst < gamma / 2:
                    break
                mj += 1
                if mj > chosen[-1] + 256:
                    raise LevelGapError("no depth within 256 levels satisfies the gap rule")
        prev = chosen[-1]
        block = canonical_spectrum(system.shift(prev), mj - prev)
        g_block_t = transpose_product(system, prev, mj)
        g_block_t_inv = ratlin.inverse(g_block_t)
        g_prev_t = transpose_product(system, 0, prev)
        tail = MaskProductEvaluator(system.shift(mj), tail_depth)
        level_min = None
        shifted_block = []
        for lam in block:
            x = ratlin.mat_vec(g_block_t_inv, lam)
            if lam == zero:
                k_best, v_best = zero, abs(tail.value(x))
            else:
                k_best, v_best = None, -1.0
                for k in box:
                    v = abs(tail.value(ratlin.vec_add(x, k)))
                    if v > v_best:
                        k_best, v_best = k, v
                if v_best < eps:
                    raise CorrectionNotFound(
                        f"equi-positivity correction not found at level {j}, "
                        f"lambda {lam}: best |nu_hat| = {v_best:.6g} < eps = {eps}")
            corrections.append((j, lam, k_best))
            level_min = v_best if level_min is None else min(level_min, v_best)
            shifted_block.append(ratlin.vec_add(lam, ratlin.mat_vec(g_block_t, k_best)))
        minima.append(level_min)
        nxt = sorted(ratlin.vec_add(a, tuple(int(x) for x in ratlin.mat_vec(g_prev_t, s)))
                     for a in levels[-1] for s in shifted_block)
        if len(set(nxt)) != len(nxt):
            raise ValueError("corrected level collided; corrections are inconsistent")
        levels.append(tuple(nxt))
        chosen.append(mj)
    return SpectrumCandidate(tuple(chosen), tuple(levels), tuple(corrections),
                             gamma, eps, box_radius, tail_depth, tuple(minima))


@dataclass(frozen=True)
class LevelReport:
    level: int
    depth: int
    gram: GramReport
    q_min: float
    q_max: float
    delta: float
    grid_resolution: int
    truncation_depth: int

    @property
    def gram_exact_identity(self) -> bool:
        return self.gram.is_identity


def verify_level(system: ConvolutionSystem, candidate: SpectrumCandidate, j: int,
                 truncation_depth: int = 40, grid_resolution: int = None) -> LevelReport:
    """Check level j: exact Gram identity, and Q within [1-delta, 1+1e-9].

    The Gram check certifies that the level is an exact spectrum of the
    depth-m_j convolution; the Q numbers use the truncated full transform on
    a half-open unit-box grid and are evidence, not proof.
    """
    import numpy as np

    if not 1 <= j <= len(candidate.levels):
        raise ValueError(f"candidate has no level {j}")
    depth = candidate.depths[j - 1]
    lam = candidate.levels[j - 1]
    mu = build_mu_n(system, depth)
    gram = gram_matrix(mu, lam)
    d = system.dimension
    if grid_resolution is None:
        grid_resolution = 64 if d > 1 else 256
    axes = [np.arange(grid_resolution) / grid_resolution for _ in range(d)]
    if d == 1:
        pts = axes[0][:, None]
    else:
        grids = np.meshgrid(*axes)
        pts = np.column_stack([g.ravel() for g in grids])
    ev = MaskProductEvaluator(system, min(truncation_depth, system.max_depth or truncation_depth))
    q = q_values(ev, lam, pts)
    q_min, q_max = float(q.min()), float(q.max())
    return LevelReport(j, depth, gram, q_min, q_max, max(0.0, 1.0 - q_min),
                       grid_resolution, ev.depth)
