"""Exact rational linear algebra on small dense matrices.

Elimination is fraction-free (Bareiss) over denominator-cleared integer
rows, so ranks and nullspaces carry no tolerance questions.  A numerical
SVD-based rank is provided for float data.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

Vec = list[Fraction]
Mat = list[list[Fraction]]


def _to_int_rows(m: Sequence[Sequence]) -> list[list[int]]:
    out = []
    for row in m:
        fr = [Fraction(x) for x in row]
        scale = 1
        for x in fr:
            scale = lcm(scale, x.denominator)
        out.append([int(x * scale) for x in fr])
    return out


def echelon_fraction_free(m: Sequence[Sequence]) -> tuple[list[list[int]], list[int]]:
    """Row echelon form by Bareiss elimination; returns (rows, pivot columns).

    Row scaling by denominators does not change rank or nullspace.
    """
    a = _to_int_rows(m)
    n_rows = len(a)
    n_cols = len(a[0]) if n_rows else 0
    pivot_cols: list[int] = []
    prev = 1
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        pivot_row = None
        for i in range(r, n_rows):
            if a[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        a[r], a[pivot_row] = a[pivot_row], a[r]
        for i in range(r + 1, n_rows):
            for j in range(c + 1, n_cols):
                a[i][j] = (a[i][j] * a[r][c] - a[i][c] * a[r][j]) // prev
            a[i][c] = 0
        prev = a[r][c]
        pivot_cols.append(c)
        r += 1
    return a, pivot_cols


def rank_exact(m: Sequence[Sequence]) -> int:
    if not m:
        return 0
    return len(echelon_fraction_free(m)[1])


def nullspace_exact(m: Sequence[Sequence], n_cols: int | None = None) -> list[Vec]:
    """Basis of the right nullspace, one vector per free column.

    The basis is deterministic: free column f gets the vector with 1 in
    position f, 0 in the other free positions, and pivot entries solved
    by back substitution.
    """
    if n_cols is None:
        if not m:
            raise ValueError("empty matrix needs an explicit column count")
        n_cols = len(m[0])
    if not m:
        return [[Fraction(1 if i == j else 0) for i in range(n_cols)]
                for j in range(n_cols)]
    rows, pivot_cols = echelon_fraction_free(m)
    pivot_set = set(pivot_cols)
    free_cols = [c for c in range(n_cols) if c not in pivot_set]
    basis = []
    for f in free_cols:
        v: Vec = [Fraction(0)] * n_cols
        v[f] = Fraction(1)
        for r in range(len(pivot_cols) - 1, -1, -1):
            p = pivot_cols[r]
            s = Fraction(0)
            for j in range(p + 1, n_cols):
                if rows[r][j]:
                    s += Fraction(rows[r][j]) * v[j]
            v[p] = -s / Fraction(rows[r][p])
        basis.append(v)
    return basis


def mat_vec(m: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vec:
    return [sum((row[j] * v[j] for j in range(len(v))), Fraction(0)) for row in m]


def identity(n: int) -> Mat:
    return [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]


def numerical_rank(rows: Sequence[Sequence[float]], rel_tol: float = 1e-9) -> int:
    """Rank by SVD with a relative singular-value cutoff."""
    a = np.asarray(rows, dtype=float)
    if a.size == 0:
        return 0
    sv = np.linalg.svd(a, compute_uv=False)
    largest = sv.max(initial=0.0)
    if largest == 0.0:
        return 0
    return int(np.sum(sv > rel_tol * largest))
