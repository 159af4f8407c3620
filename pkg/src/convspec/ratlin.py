"""Exact rational linear algebra on small matrices.

Matrices are tuples of tuples of :class:`fractions.Fraction` (or plain ints),
vectors are tuples.  Every caller works in dimension <= 20 and usually <= 3,
so the routines favour clarity over asymptotics.  Floating point enters only
through the norm helpers at the bottom.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


class SingularMatrixError(ValueError):
    pass


def as_vector(v):
    return tuple(Fraction(x) for x in v)


def as_matrix(rows):
    m = tuple(tuple(Fraction(x) for x in row) for row in rows)
    if not m or any(len(row) != len(m[0]) for row in m):
        raise ValueError("matrix rows must be nonempty and of equal length")
    return m


def as_int_matrix(rows):
    m = tuple(tuple(int(x) for x in row) for row in rows)
    for row, orig in zip(m, rows):
        for a, b in zip(row, orig):
            if a != b:
                raise ValueError("matrix entries must be integers")
    if not m or any(len(row) != len(m) for row in m):
        raise ValueError("matrix must be square")
    return m


def identity(d):
    return tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))


def transpose(a):
    return tuple(zip(*a))


def mat_mul(a, b):
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def mat_vec(a, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def vec_add(u, v):
    return tuple(x + y for x, y in zip(u, v))


def vec_sub(u, v):
    return tuple(x - y for x, y in zip(u, v))


def vec_dot(u, v):
    return sum(x * y for x, y in zip(u, v))


def det(a):
    """Determinant by fraction-free elimination; exact."""
    n = len(a)
    m = [list(row) for row in as_matrix(a)]
    sign = 1
    result = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            sign = -sign
        p = m[col][col]
        result *= p
        for r in range(col + 1, n):
            f = m[r][col] / p
            if f:
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return sign * result


def inverse(a):
    """Exact inverse by Gauss-Jordan; raises SingularMatrixError."""
    n = len(a)
    m = [list(row) + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(as_matrix(a))]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrixError("matrix is not invertible")
        m[col], m[pivot] = m[pivot], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return tuple(tuple(row[n:]) for row in m)


def adjugate_int(a):
    """det(a) * inverse(a) for an integer matrix, as an integer matrix."""
    d = det(a)
    if d == 0:
        raise SingularMatrixError("matrix is not invertible")
    inv = inverse(a)
    adj = tuple(tuple(x * d for x in row) for row in inv)
    out = []
    for row in adj:
        r = []
        for x in row:
            if x.denominator != 1:
                raise ValueError("adjugate of an integer matrix must be integral")
            r.append(x.numerator)
        out.append(tuple(r))
    return tuple(out)


def char_poly(a):
    """Monic characteristic polynomial of a square rational matrix.

    Faddeev-LeVerrier; returns coefficients [c0, c1, ..., c_{n-1}, 1] of
    c0 + c1 x + ... + x^n, all exact.
    """
    a = as_matrix(a)
    n = len(a)
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    m = identity(n)
    c = Fraction(1)
    for k in range(1, n + 1):
        am = mat_mul(a, m)
        tr = sum(am[i][i] for i in range(n))
        c = -tr / k
        coeffs[n - k] = c
        m = tuple(tuple(am[i][j] + (c if i == j else 0) for j in range(n)) for i in range(n))
    return coeffs


def to_float_array(a) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in a], dtype=float)


def operator_norm(a) -> float:
    """Largest singular value, computed in floating point."""
    return float(np.linalg.norm(to_float_array(a), 2))


def operator_norm_lt_one(a) -> bool:
    """Exact test ||a||_2 < 1 via positive definiteness of I - a^T a.

    Sylvester's criterion on exact rationals, so the answer is rigorous even
    when the norm sits close to 1.
    """
    m = as_matrix(a)
    n = len(m)
    g = mat_mul(transpose(m), m)
    s = tuple(tuple((1 if i == j else 0) - g[i][j] for j in range(n)) for i in range(n))
    for k in range(1, n + 1):
        minor = tuple(row[:k] for row in s[:k])
        if det(minor) <= 0:
            return False
    return True
