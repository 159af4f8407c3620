"""End-to-end spectrality certification workflows.

A run walks the hypothesis chain of the chosen strategy and then builds and
verifies a candidate spectrum.  Every stage carries a grade: PASS means the
check was decided in exact arithmetic, EVIDENCE means a truncated or grid
computation supports it, FAIL means it was refuted.  The overall verdict is
the weakest grade among hypothesis stages; any FAIL anywhere is fatal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from . import ratlin
from .core import ConvolutionSystem, check_Dd_membership, contraction_norms
from .criteria import (CubeSpec, EquiPositivityFailure, check_cube_conditions,
                       estimate_equipositivity, find_isolating_digit,
                       recurring_letters)
from .fourier import MaskProductEvaluator, q_values
from .gram import gram_matrix
from .hadamard import check_admissible, find_spectra
from .spectrum import canonical_spectrum
from .core import build_mu_n

PASS = "PASS"
EVIDENCE = "EVIDENCE"
FAIL = "FAIL"
_RANK = {FAIL: 0, EVIDENCE: 1, PASS: 2}

HYPOTHESIS = "hypothesis"
CHECK = "conclusion-check"


class AdmissibilityError(RuntimeError):
    def __init__(self, pair_name, message):
        super().__init__(f"pair {pair_name!r}: {message}")
        self.pair_name = pair_name


@dataclass(frozen=True)
class Stage:
    name: str
    grade: str
    role: str
    detail: str


@dataclass(frozen=True)
class CertifyParams:
    strategy_cube_t0: tuple = None      # defaults to the origin corner
    distinguished: tuple = None         # (pair name, digit)
    tails: tuple = (0,)
    grid_resolution: int = 64
    truncation_depth: int = 40
    spectrum_depth: int = 4
    contraction_depth: int = 12
    contraction_threshold: float = 1e-6
    box_radius: int = 3
    tail_depth: int = 30
    eps_min: float = 1e-4
    equipos_resolution: int = 64


@dataclass(frozen=True)
class CertificationReport:
    strategy: str
    stages: tuple
    verdict: str
    spectrum_size: int
    q_min: float = None
    q_max: float = None

    def to_text(self) -> str:
        lines = [f"strategy: {self.strategy}"]
        for s in self.stages:
            lines.append(f"[{s.grade:8s}] {s.name} ({s.role}): {s.detail}")
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines) + "\n"

    def csv_rows(self):
        return [(s.name, s.grade, s.role, s.detail) for s in self.stages]


def _verdict(stages) -> str:
    if any(s.grade == FAIL for s in stages):
        return FAIL
    hyp = [s for s in stages if s.role == HYPOTHESIS]
    return min((s.grade for s in hyp), key=_RANK.get, default=EVIDENCE)


def ensure_spectra(system: ConvolutionSystem) -> ConvolutionSystem:
    """Attach a spectrum to every menu pair, searching residues when absent.

    The residue clique search is complete for integral spectra, so an empty
    result refutes admissibility.
    """
    found = {}
    for name, pair in system.menu:
        if pair.L is None:
            spectra = find_spectra(pair.R, pair.B, max_count=1)
            if not spectra:
                raise AdmissibilityError(name, "no integral spectrum exists")
            found[name] = spectra[0]
    return system.with_spectra(found) if found else system


def _contraction_stage(system: ConvolutionSystem, params: CertifyParams) -> Stage:
    letters = system.letters_used()
    norms = {name: ratlin.operator_norm(system.pair(name).R.inverse) for name in letters}
    if all(ratlin.operator_norm_lt_one(system.pair(name).R.inverse) for name in letters):
        detail = ("every inverse norm < 1 exactly (Sylvester), products contract "
                  "geometrically; " +
                  ", ".join(f"{n}: {norms[n]!r}" for n in letters))
        return Stage("contraction of inverse products", PASS, HYPOTHESIS, detail)
    n_max = params.contraction_depth
    if system.max_depth is not None:
        n_max = min(n_max, system.max_depth)
    trend = contraction_norms(system, n_max, threshold=params.contraction_threshold)
    grade = EVIDENCE if trend.below_threshold else FAIL
    detail = (f"norm at depth {n_max} is {trend.norms[-1]!r} vs threshold "
              f"{params.contraction_threshold}")
    return Stage("contraction of inverse products", grade, HYPOTHESIS, detail)


def _cube_stages(system, params):
    t0 = params.strategy_cube_t0 or (0,) * system.dimension
    cube = CubeSpec(t0)
    report = check_cube_conditions(system, cube, params.distinguished)
    bad = [f"{name}: digit {f[0]} vertex {f[1]}" for name, ok, f in report.pair_verdicts
           if not ok and name in system.letters_used()]
    s2 = Stage("cube containment of contraction images", PASS if report.containment_ok else FAIL,
               HYPOTHESIS,
               "all digit images stay in the cube (exact)" if report.containment_ok
               else "; ".join(bad))
    if report.interior_ok:
        d3 = (f"pair {report.interior_pair!r}, digit {report.interior_digit} maps "
              f"strictly inside; {report.recurs_note}")
        g3 = PASS
    else:
        d3 = "no recurring pair maps a digit strictly into the interior"
        g3 = FAIL
    s3 = Stage("recurring strict-interior digit", g3, HYPOTHESIS, d3)
    radius = cube.radius() if report.containment_ok else None
    return [s2, s3], radius


def _dd_stages(system, params):
    stages = []
    letters = system.letters_used()
    non_dd = [n for n in letters
              if not check_Dd_membership(system.pair(n).R, system.pair(n).B)]
    stages.append(Stage("diagonal digit-box membership", FAIL if non_dd else PASS,
                        HYPOTHESIS,
                        f"pairs outside the digit-box family: {non_dd}" if non_dd
                        else "every pair is diagonal with digits in the box (exact)"))
    if non_dd:
        return stages, None
    d = system.dimension
    recurring, genuine = recurring_letters(system)
    candidates = [n for n in recurring
                  if min(system.pair(n).R.diagonal()) >= d + 1]
    if candidates:
        name = candidates[0]
        note = ("recurs in the cycle" if genuine
                else "recurs in the explicit prefix (finite word stands in for the sequence)")
        stages.append(Stage("recurring pair with diagonal >= d+1", PASS, HYPOTHESIS,
                            f"pair {name!r}, diagonal {system.pair(name).R.diagonal()}; {note}"))
        pair = system.pair(name)
        digit = find_isolating_digit(pair.R, pair.B)
        if digit is not None:
            stages.append(Stage("isolating digit", PASS, CHECK,
                                f"digit {digit} of pair {name!r} isolates under the "
                                f"support cover (exact integers)"))
        else:
            stages.append(Stage("isolating digit", EVIDENCE, CHECK,
                                "conservative cover check found no digit "
                                "(does not refute existence)"))
    else:
        stages.append(Stage("recurring pair with diagonal >= d+1", FAIL, HYPOTHESIS,
                            f"no recurring pair has all diagonal entries >= {d + 1}"))
    return stages, math.sqrt(d)


def _equipos_stages(system, params):
    details = []
    eps_values = []
    for n in params.tails:
        try:
            cert = estimate_equipositivity(system, int(n),
                                           grid_resolution=params.equipos_resolution,
                                           box_radius=params.box_radius,
                                           tail_depth=params.tail_depth,
                                           eps_min=params.eps_min)
        except EquiPositivityFailure as exc:
            return [Stage("equi-positivity certificate", FAIL, HYPOTHESIS,
                          f"tail {n}: {exc}")], None
        eps_values.append(cert.eps)
        details.append(f"tail {n}: eps = {cert.eps!r} at resolution {cert.resolution}")
    detail = ("empirical at truncation depth "
              f"{params.tail_depth}; min eps = {min(eps_values)!r}; " + "; ".join(details))
    return [Stage("equi-positivity certificate", EVIDENCE, HYPOTHESIS, detail)], None


def certify_spectrality(system: ConvolutionSystem, strategy: str,
                        params: CertifyParams = None) -> CertificationReport:
    """Run the hypothesis chain for ``strategy`` (cube | dd | equipositivity).

    Raises AdmissibilityError if any menu pair fails the exact unitarity
    check; otherwise returns a graded report whose verdict is PASS only when
    every hypothesis was decided exactly.
    """
    params = params or CertifyParams()
    strategy = {"equipos": "equipositivity"}.get(strategy, strategy)
    if strategy not in ("cube", "dd", "equipositivity"):
        raise ValueError(f"unknown strategy {strategy!r}")
    system = ensure_spectra(system)
    stages = []
    for name, pair in system.menu:
        report = check_admissible(pair, mode="exact")
        if not report.ok:
            raise AdmissibilityError(name, f"not admissible (worst off-diagonal "
                                           f"{report.max_offdiagonal!r})")
    stages.append(Stage("admissibility of menu pairs", PASS, HYPOTHESIS,
                        "unitarity decided by exact cyclotomic sums for every pair"))
    stages.append(_contraction_stage(system, params))

    support_radius = None
    if strategy == "cube":
        more, support_radius = _cube_stages(system, params)
    elif strategy == "dd":
        more, support_radius = _dd_stages(system, params)
    else:
        more, support_radius = _equipos_stages(system, params)
    stages.extend(more)

    size = 0
    q_min = q_max = None
    if not any(s.grade == FAIL for s in stages):
        depth = params.spectrum_depth
        if system.max_depth is not None:
            depth = min(depth, system.max_depth)
        towers = [canonical_spectrum(system, n) for n in range(1, depth + 1)]
        size = len(towers[-1])
        stages.append(Stage("canonical spectrum tower", PASS, CHECK,
                            f"levels 1..{depth}, sizes {[len(t) for t in towers]}"))
        bad_levels = [n for n, lam in enumerate(towers, start=1)
                      if not gram_matrix(build_mu_n(system, n), lam).is_identity]
        stages.append(Stage("level Gram identities", FAIL if bad_levels else PASS, CHECK,
                            f"non-identity Gram at levels {bad_levels}" if bad_levels
                            else f"exact identity Gram for every level <= {depth}"))
        import numpy as np
        tdepth = params.truncation_depth
        if system.max_depth is not None:
            tdepth = min(tdepth, system.max_depth)
        ev = MaskProductEvaluator(system, tdepth, support_radius=support_radius)
        d = system.dimension
        axes = [np.arange(params.grid_resolution) / params.grid_resolution
                for _ in range(d)]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.column_stack([g.ravel() for g in grids])
        q = q_values(ev, towers[-1], pts)
        q_min, q_max = float(q.min()), float(q.max())
        label = ("certified truncation bound available"
                 if support_radius is not None else "heuristic depth")
        grade = FAIL if q_max > 1 + 1e-9 else EVIDENCE
        stages.append(Stage("completeness grid", grade, CHECK,
                            f"Q over the top level on a {params.grid_resolution}^"
                            f"{d} grid: min {q_min!r}, max {q_max!r} at depth "
                            f"{ev.depth}; {label}"))
    return CertificationReport(strategy, tuple(stages), _verdict(stages), size,
                               q_min, q_max)


# ---------------------------------------------------------------------------
# hypothesis matrix


@dataclass(frozen=True)
class HypothesisRow:
    route: str
    status: str
    clause: str


@dataclass(frozen=True)
class HypothesisMatrix:
    rows: tuple

    def to_text(self) -> str:
        return "".join(f"[{r.status:8s}] {r.route}: {r.clause}\n" for r in self.rows)


def hypothesis_matrix(system: ConvolutionSystem, cube_t0=None) -> HypothesisMatrix:
    """Which spectrality routes apply, with the failing clause named.

    The two limit routes (equi-positive tail family; weak tail limit with
    empty integral periodic zero set) are not finitely certifiable and come
    back EVIDENCE pointing to the numeric tools; the three structural routes
    are decided exactly on the word data.
    """
    try:
        system = ensure_spectra(system)
        bad = [name for name, pair in system.menu if not check_admissible(pair).ok]
    except AdmissibilityError as exc:
        bad = [exc.pair_name]
    if bad:
        clause = f"not admissible: {', '.join(repr(b) for b in bad)}"
        routes = ("equi-positive tail family",
                  "tail limit with empty integral periodic zero set",
                  "cube containment route",
                  "recurring diagonal pair route",
                  "bounded diagonal menu route")
        return HypothesisMatrix(tuple(HypothesisRow(r, FAIL, clause) for r in routes))
    rows = [
        HypothesisRow("equi-positive tail family", EVIDENCE,
                      "not finitely certifiable; estimate via the equi-positivity grid"),
        HypothesisRow("tail limit with empty integral periodic zero set", EVIDENCE,
                      "not finitely certifiable; scan the zero set for evidence"),
    ]
    letters = system.letters_used()
    contraction_ok = all(ratlin.operator_norm_lt_one(system.pair(n).R.inverse)
                         for n in letters)
    cube = CubeSpec(cube_t0 or (0,) * system.dimension)
    creport = check_cube_conditions(system, cube)
    if not contraction_ok:
        rows.append(HypothesisRow("cube containment route", EVIDENCE,
                                  "(i): contraction not certified exactly"))
    elif not creport.containment_ok:
        rows.append(HypothesisRow("cube containment route", FAIL,
                                  "(ii): some digit image leaves the cube"))
    elif not creport.interior_ok:
        rows.append(HypothesisRow("cube containment route", FAIL,
                                  "(iii): no recurring pair maps a digit strictly "
                                  "into the interior"))
    else:
        rows.append(HypothesisRow("cube containment route", PASS,
                                  f"cube at {tuple(float(t) for t in cube.t0)}, "
                                  f"interior pair {creport.interior_pair!r}"))
    d = system.dimension
    all_dd = all(check_Dd_membership(system.pair(n).R, system.pair(n).B) for n in letters)
    recurring, genuine = recurring_letters(system)
    big = [n for n in recurring if min(system.pair(n).R.diagonal()) >= d + 1] if all_dd else []
    if not all_dd:
        rows.append(HypothesisRow("recurring diagonal pair route", FAIL,
                                  "some pair is not a diagonal digit-box pair"))
    elif big:
        rows.append(HypothesisRow("recurring diagonal pair route", PASS,
                                  f"pair {big[0]!r} recurs with diagonal >= {d + 1}"))
    else:
        rows.append(HypothesisRow("recurring diagonal pair route", FAIL,
                                  f"no recurring pair has diagonal entries >= {d + 1}"))
    if not all_dd:
        rows.append(HypothesisRow("bounded diagonal menu route", FAIL,
                                  "some pair is not a diagonal digit-box pair"))
    elif system.cycle:
        rows.append(HypothesisRow("bounded diagonal menu route", PASS,
                                  "finite menu recurs through the cycle, norms bounded"))
    else:
        rows.append(HypothesisRow("bounded diagonal menu route", EVIDENCE,
                                  "finite prefix cannot witness the bound over an "
                                  "infinite sequence"))
    return HypothesisMatrix(tuple(rows))
