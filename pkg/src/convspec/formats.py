"""Bit-exact output formats: rational strings, CSV tables, 16-bit PGM.

CSV uses '.' decimals, ',' separators, LF line endings and a header row;
optional parameter lines are written first as '# key=value' comments.
Floats are rendered with repr so identical runs emit identical bytes.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

PGM_MAXVAL = 65535


def format_fraction(x) -> str:
    f = Fraction(x)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def parse_fraction(s: str) -> Fraction:
    return Fraction(s.strip())


def format_cell(x) -> str:
    if isinstance(x, (Fraction,)):
        return format_fraction(x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def csv_text(header, rows, params: dict = None) -> str:
    lines = []
    if params:
        for k in sorted(params):
            lines.append(f"# {k}={format_cell(params[k])}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_cell(x) for x in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows, params: dict = None):
    with open(path, "w", newline="") as fh:
        fh.write(csv_text(header, rows, params))


def read_csv(path):
    """(header, rows of strings); '#' parameter lines are skipped."""
    header, rows = None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            cells = line.split(",")
            if header is None:
                header = cells
            else:
                rows.append(cells)
    return header, rows


def atoms_csv_rows(measure):
    d = measure.dimension
    header = [f"x{i + 1}" for i in range(d)] + ["weight"]
    rows = [[format_fraction(c) for c in p] + [format_fraction(w)]
            for p, w in measure.atoms]
    return header, rows


def measure_from_csv(path):
    from .core import DiscreteMeasure
    header, rows = read_csv(path)
    d = len(header) - 1
    atoms = [(tuple(parse_fraction(c) for c in row[:d]), parse_fraction(row[d]))
             for row in rows]
    return DiscreteMeasure(atoms)


def pgm_bytes(values: np.ndarray, binary: bool = False) -> bytes:
    """16-bit PGM from values in [0, 1]; 1.0 maps to 65535.

    ``values`` is a 2-D array already in display order (row 0 on top).  P2
    ASCII by default, P5 with big-endian 16-bit samples when ``binary``.
    """
    v = np.atleast_2d(np.asarray(values, dtype=float))
    pix = np.clip(np.rint(np.clip(v, 0.0, 1.0) * PGM_MAXVAL), 0, PGM_MAXVAL).astype(np.uint16)
    h, w = pix.shape
    header = f"{'P5' if binary else 'P2'}\n{w} {h}\n{PGM_MAXVAL}\n"
    if binary:
        return header.encode("ascii") + pix.astype(">u2").tobytes()
    body = "\n".join(" ".join(str(int(x)) for x in row) for row in pix)
    return header.encode("ascii") + body.encode("ascii") + b"\n"


def write_pgm(path, values: np.ndarray, binary: bool = False):
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(values, binary))


def read_pgm(path):
    """(array of ints, maxval); accepts the P2/P5 subset written here."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic, rest = data.split(b"\n", 1)
    dims, rest = rest.split(b"\n", 1)
    maxval_b, rest = rest.split(b"\n", 1)
    w, h = (int(x) for x in dims.split())
    maxval = int(maxval_b)
    if magic == b"P5":
        pix = np.frombuffer(rest[: w * h * 2], dtype=">u2").reshape(h, w).astype(int)
    elif magic == b"P2":
        nums = [int(x) for x in rest.split()]
        if len(nums) != w * h:
            raise ValueError("pixel count does not match dimensions")
        pix = np.array(nums, dtype=int).reshape(h, w)
    else:
        raise ValueError(f"unsupported magic {magic!r}")
    return pix, maxval
