"""Acceptance suite: one test per shipped guarantee, each printing a verdict.

Exact-arithmetic guarantees run at zero tolerance; grid and Monte Carlo
guarantees run at the frozen thresholds stated inline.  The whole module is
budgeted to finish within a few minutes on a laptop.
"""

import itertools
import random
from fractions import Fraction as F

import numpy as np
import pytest

import convspec as cs
from convspec.criteria import (CubeSpec, check_cube_conditions, estimate_equipositivity,
                               find_isolating_digit, scan_zero_set)
from convspec.fourier import MaskProductEvaluator, q_values
from convspec.gram import empirical_cf, gram_matrix
from convspec.pipeline import PASS, HYPOTHESIS, certify_spectrality
from convspec.spectrum import canonical_spectrum, corrected_spectrum
from conftest import (CANTOR3_CONFIG, PLANE_CONFIG, QUARTER_CONFIG,
                      plane_word_system, write_config)


def report(name, ok):
    print(f"{'PASS' if ok else 'FAIL'} - {name}")
    assert ok, name


def unit_grid(d, resolution):
    axes = [np.arange(resolution) / resolution for _ in range(d)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.ravel() for g in grids])


def test_01_admissibility_fixtures_exact(plane_pairs, cantor3_triple):
    ok = all(cs.check_admissible(p, mode="exact").ok for p in plane_pairs)
    ok = ok and not cs.check_admissible(*cantor3_triple, mode="exact").ok
    report("admissibility fixtures decided in exact arithmetic", ok)


def test_02_inverse_operator_norms(plane_menu):
    trend = cs.contraction_norms(plane_menu, 1)
    n1 = trend.norms[0]
    n2 = cs.contraction_norms(plane_menu.shift(1), 1).norms[0]
    ok = abs(n1 - (1 + 5 ** 0.5) / 8) < 1e-9 and abs(n2 - 2 ** 0.5 / 6) < 1e-9
    report("inverse operator norms (1+sqrt5)/8 and sqrt2/6 within 1e-9", ok)


def test_03_gram_exactness(plane_pairs, quarter):
    words = ["1", "2", "11", "12", "21", "22", "111", "212", "1212", "2121"]
    ok = True
    for w in words:
        system = plane_word_system(plane_pairs, w)
        lam = canonical_spectrum(system, len(w))
        ok = ok and gram_matrix(cs.build_mu_n(system, len(w)), lam).is_identity
    for n in range(1, 7):
        lam = canonical_spectrum(quarter, n)
        ok = ok and gram_matrix(cs.build_mu_n(quarter, n), lam).is_identity
    report("exact identity Gram for 10 menu words and 6 quarter levels", ok)


def test_04_exact_level_q_is_one(plane_menu, quarter):
    rng = random.Random(41)
    ok = True
    for system, n in ((quarter, 3), (quarter, 6), (plane_menu, 2), (plane_menu, 4)):
        lam = canonical_spectrum(system, n)
        ev = MaskProductEvaluator(system, n)
        d = system.dimension
        for _ in range(100):
            xi = tuple(F(rng.randint(-2 ** 17, 2 ** 17), 2 ** 16) for _ in range(d))
            q = cs.Q_function(ev, lam, xi)
            ok = ok and abs(q - 1.0) < 1e-10
    report("exact finite-level Q equals 1 within 1e-10 at 100 random points", ok)


def test_05_partial_sum_bound_and_monotonicity(plane_menu, quarter):
    ok = True
    for system in (quarter, plane_menu):
        ev = MaskProductEvaluator(system, 40)
        pts = unit_grid(system.dimension, 64)
        prev = np.zeros(len(pts))
        for n in range(1, 5):
            q = q_values(ev, canonical_spectrum(system, n), pts)
            ok = ok and q.max() <= 1 + 1e-9 and q.min() >= 0
            ok = ok and bool(np.all(q >= prev - 1e-12))
            prev = q
    report("truncated Q within [0, 1+1e-9] and monotone across levels 1..4", ok)


def test_06_completeness_evidence(plane_menu, quarter):
    ev = MaskProductEvaluator(quarter, 40)
    lam6 = canonical_spectrum(quarter, 6)
    assert len(lam6) == 64
    q = q_values(ev, lam6, unit_grid(1, 256))
    ok = q.min() >= 0.99
    cand = corrected_spectrum(plane_menu, gamma=0.1, eps=0.05, num_levels=2)
    assert cand.depths[-1] == 4
    evp = MaskProductEvaluator(plane_menu, 40)
    qp = q_values(evp, cand.levels[-1], unit_grid(2, 64))
    ok = ok and qp.min() >= 0.98
    report("grid Q floors: 0.99 (quarter level 6), 0.98 (corrected plane level 4)", ok)


def test_07_cube_conditions(plane_menu, plane_pairs):
    good = check_cube_conditions(plane_menu, CubeSpec((0, 0)))
    p1, p2 = plane_pairs
    perturbed = cs.AdmissiblePair(p1.R, list(p1.B.elements) + [(7, 0)])
    bad_system = cs.ConvolutionSystem([("p1", perturbed), ("p2", p2)], (), ("p1", "p2"))
    bad = check_cube_conditions(bad_system, CubeSpec((0, 0)))
    report("cube conditions: menu passes exactly, perturbed digit set fails",
           bool(good) and not bad.containment_ok)


def test_08_diagonal_chain(growing_prefix):
    cert = certify_spectrality(growing_prefix, "dd")
    ok = cert.verdict == PASS
    ok = ok and find_isolating_digit([[3, 0], [0, 3]],
                                     [(0, 0), (0, 1), (1, 0)]) == (0, 0)
    for d in (1, 2, 3):
        for ms in itertools.product(range(d + 1, 6), repeat=d):
            r = [[ms[i] if i == j else 0 for j in range(d)] for i in range(d)]
            box = [b for b in itertools.product(*[range(m) for m in ms]) if any(b)]
            zero = (0,) * d
            for size in range(0, min(3, len(box)) + 1):
                for rest in itertools.combinations(box, size):
                    if find_isolating_digit(r, (zero,) + rest) is None:
                        ok = False
                        break
    report("diagonal chain: certification, witness digit, exhaustive existence", ok)


def test_09_zero_set_evidence(quarter):
    mu = cs.DiscreteMeasure([((0,), F(1, 2)), ((1,), F(1, 2))])
    scan = scan_zero_set(mu, resolution=128, lattice_radius=8, tol=1e-6)
    ok = [pt for _, pt, _ in scan.candidates] == [(0.5,)]
    ok = ok and scan.candidates[0][2] < 1e-12
    ev = MaskProductEvaluator(quarter, 40)
    ok = ok and scan_zero_set(ev, resolution=128, lattice_radius=8,
                              tol=1e-6).is_empty()
    report("zero-set scans: two-atom measure yields 1/2, quarter measure none", ok)


def test_10_monte_carlo_consistency(plane_menu, quarter):
    ok = True
    for system in (quarter, plane_menu):
        d = system.dimension
        rng = random.Random(100)
        xis = [tuple(rng.uniform(-3, 3) for _ in range(d)) for _ in range(10)]
        truth = {xi: cs.mu_n_hat(system, 8, xi) for xi in xis}
        for seed in range(5):
            pts = cs.sample(system, 8, 10 ** 5, seed=seed)
            for xi in xis:
                ok = ok and abs(empirical_cf(pts, xi) - truth[xi]) < 0.02
    report("empirical characteristic functions within 0.02 across 5 seeds", ok)


def test_11_deterministic_cli_outputs(tmp_path):
    from convspec.cli import main
    quarter = write_config(tmp_path, QUARTER_CONFIG, "jp.json")
    plane = write_config(tmp_path, PLANE_CONFIG, "plane.json")
    jobs = [
        ["sample", plane, "--depth", "6", "--count", "500", "--seed", "11"],
        ["render", quarter, "--quantity", "muhat2", "--box", "0,4",
         "--res", "512", "--depth", "30"],
        ["zeroscan", quarter, "--grid", "64", "--lattice", "4"],
        ["equipos", quarter, "--grid", "32", "--depth", "20"],
    ]
    ok = True
    for i, argv in enumerate(jobs):
        a = tmp_path / f"a{i}.out"
        b = tmp_path / f"b{i}.out"
        ra = main(argv + ["--threads", "1", "--out", str(a)])
        rb = main(argv + ["--threads", "4", "--out", str(b)])
        ok = ok and ra == rb and a.read_bytes() == b.read_bytes()
    report("identical CLI invocations emit byte-identical files", ok)
