import json

import pytest

import convspec as cs

# Two-pair planar menu: a skew pair with |det| = 16 and a rotation-like pair
# with |det| = 18, alternating word.  Both carry verified spectra.
PLANE_P1 = dict(R=[[4, 0], [4, -4]],
                B=[(2, 0), (3, 0), (2, 1), (3, 1)],
                L=[(0, 0), (2, 0), (2, -2), (4, -2)])
PLANE_P2 = dict(R=[[3, -3], [3, 3]],
                B=[(0, 2), (1, 2), (0, 3)],
                L=[(0, 0), (3, 1), (3, -1)])


@pytest.fixture(scope="session")
def plane_pairs():
    return (cs.AdmissiblePair(PLANE_P1["R"], PLANE_P1["B"], PLANE_P1["L"]),
            cs.AdmissiblePair(PLANE_P2["R"], PLANE_P2["B"], PLANE_P2["L"]))


@pytest.fixture(scope="session")
def plane_menu(plane_pairs):
    p1, p2 = plane_pairs
    return cs.ConvolutionSystem([("p1", p1), ("p2", p2)], (), ("p1", "p2"))


def plane_word_system(plane_pairs, word):
    p1, p2 = plane_pairs
    return cs.ConvolutionSystem([("1", p1), ("2", p2)], tuple(word), ())


@pytest.fixture(scope="session")
def quarter_pair():
    return cs.AdmissiblePair([[4]], [(0,), (2,)], [(0,), (1,)])


@pytest.fixture(scope="session")
def quarter(quarter_pair):
    return cs.ConvolutionSystem.constant(quarter_pair, "jp")


@pytest.fixture(scope="session")
def cantor3_triple():
    return ([[3]], [(0,), (2,)], [(0,), (1,)])


@pytest.fixture(scope="session")
def growing_prefix():
    """Six-level explicit prefix: diag(3,3) at odd positions, diag(n,n) with
    corner digits at even positions."""
    a = cs.AdmissiblePair([[3, 0], [0, 3]], [(0, 0), (0, 1), (1, 0)],
                          [(0, 0), (1, 2), (2, 1)])
    d2 = cs.AdmissiblePair([[2, 0], [0, 2]], [(0, 0), (1, 1)], [(0, 0), (1, 0)])
    d4 = cs.AdmissiblePair([[4, 0], [0, 4]], [(0, 0), (3, 3)], [(0, 0), (2, 0)])
    d6 = cs.AdmissiblePair([[6, 0], [0, 6]], [(0, 0), (5, 5)], [(0, 0), (3, 0)])
    menu = [("a", a), ("d2", d2), ("d4", d4), ("d6", d6)]
    return cs.ConvolutionSystem(menu, ("a", "d2", "a", "d4", "a", "d6"), ())


PLANE_CONFIG = {
    "dimension": 2,
    "pairs": [
        {"name": "p1", "R": [[4, 0], [4, -4]],
         "B": [[2, 0], [3, 0], [2, 1], [3, 1]],
         "L": [[0, 0], [2, 0], [2, -2], [4, -2]]},
        {"name": "p2", "R": [[3, -3], [3, 3]],
         "B": [[0, 2], [1, 2], [0, 3]],
         "L": [[0, 0], [3, 1], [3, -1]]},
    ],
    "word": {"prefix": [], "cycle": ["p1", "p2"]},
}

QUARTER_CONFIG = {
    "dimension": 1,
    "pairs": [{"name": "jp", "R": [[4]], "B": [[0], [2]], "L": [[0], [1]]}],
    "word": {"prefix": [], "cycle": ["jp"]},
}

CANTOR3_CONFIG = {
    "dimension": 1,
    "pairs": [{"name": "c", "R": [[3]], "B": [[0], [2]], "L": [[0], [1]]}],
    "word": {"prefix": [], "cycle": ["c"]},
}


def write_config(tmp_path, doc, name="system.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc, indent=1))
    return str(path)
