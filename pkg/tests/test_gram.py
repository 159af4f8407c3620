import random
from fractions import Fraction as F

import numpy as np
import pytest

import convspec as cs
from convspec.gram import empirical_cf, gram_matrix


class TestGramMatrix:
    def test_singleton(self):
        mu = cs.DiscreteMeasure.dirac((F(1, 3),))
        rep = gram_matrix(mu, [(0,)], full=True)
        assert rep.is_identity and rep.size == 1
        assert rep.matrix[0, 0] == pytest.approx(1.0)

    def test_quarter_level_one(self, quarter):
        mu = cs.build_mu_n(quarter, 1)
        rep = gram_matrix(mu, [(0,), (1,)])
        assert rep.exact and rep.is_identity
        assert rep.max_offdiagonal < 1e-12

    def test_plane_level_one(self, plane_menu, plane_pairs):
        mu = cs.build_mu_n(plane_menu, 1)
        rep = gram_matrix(mu, plane_pairs[0].L)
        assert rep.is_identity

    def test_not_identity(self, quarter):
        mu = cs.build_mu_n(quarter, 1)
        rep = gram_matrix(mu, [(0,), (2,)])
        assert not rep.is_identity
        assert rep.max_offdiagonal > 0.5

    def test_hermitian_unit_diagonal(self):
        rng = random.Random(6)
        pts = [(F(rng.randint(0, 40), 41),) for _ in range(5)]
        mu = cs.DiscreteMeasure.uniform(set(pts))
        rep = gram_matrix(mu, [(0,), (1,), (3,)], full=True)
        g = rep.matrix
        assert np.allclose(g, g.conj().T)
        assert np.allclose(np.diag(g), 1.0)
        assert rep.max_diagonal_error < 1e-12

    def test_rational_frequencies(self):
        mu = cs.DiscreteMeasure.uniform([(0,), (F(1, 2),)])
        rep = gram_matrix(mu, [(F(0),), (F(1),)])
        assert rep.exact and rep.is_identity


def _random_diagonal_fixture(rng):
    d = rng.choice([1, 1, 2])
    ms = tuple(rng.randint(2, 6) for _ in range(d))
    box = [b for b in __import__("itertools").product(*[range(m) for m in ms])]
    size = rng.randint(2, min(4, len(box)))
    digits = [box[0]] + rng.sample(box[1:], size - 1)
    r = [[ms[i] if i == j else 0 for j in range(d)] for i in range(d)]
    return r, digits


def test_gram_identity_iff_admissible():
    """Unitarity of the mask matrix and the exact Gram identity coincide."""
    rng = random.Random(31)
    reps = 0
    while reps < 50:
        r, digits = _random_diagonal_fixture(rng)
        found = cs.find_spectra(r, digits, max_count=1)
        if found:
            lam = found[0]
        else:
            # an arbitrary residue selection of the right size
            pool = list(cs.residues(r))
            if len(pool) < len(digits):
                continue
            lam = tuple(sorted(rng.sample(pool, len(digits))))
        reps += 1
        pair_system = cs.ConvolutionSystem.constant(cs.AdmissiblePair(r, digits), "x")
        mu1 = cs.build_mu_n(pair_system, 1)
        agree = gram_matrix(mu1, lam).is_identity == \
            cs.check_admissible(r, digits, lam, mode="exact").ok
        assert agree


class TestEmpiricalCf:
    def test_all_at_origin(self):
        assert empirical_cf(np.zeros((10, 1)), (0.7,)) == pytest.approx(1.0)

    def test_zero_frequency(self):
        pts = np.random.default_rng(0).normal(size=(100, 2))
        assert empirical_cf(pts, (0.0, 0.0)) == pytest.approx(1.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            empirical_cf(np.zeros((0, 1)), (1.0,))

    def test_quarter_at_integer(self, quarter):
        pts = cs.sample(quarter, 10, 10**5, seed=14)
        # the infinite-depth transform vanishes at 1; depth-10 is within O(4^-10)
        assert abs(empirical_cf(pts, (1.0,))) < 0.02

    def test_error_decays_with_sample_size(self, quarter):
        xi = (0.37,)
        truth = cs.mu_n_hat(quarter, 8, xi)
        medians = []
        for count in (10**3, 10**4, 10**5):
            errs = []
            for seed in range(20):
                pts = cs.sample(quarter, 8, count, seed=seed)
                errs.append(abs(empirical_cf(pts, xi) - truth))
            medians.append(sorted(errs)[10])
        assert medians[0] > medians[1] > medians[2]
