"""Exact rational linear algebra: sparse RREF, null spaces, particular solutions.

Rows are sparse dicts ``{column: Fraction}``; elimination is plain
Gauss-Jordan with deterministic pivoting (first column, in the global
unknown order, that has a nonzero entry).  Everything is exact -- no
floating point anywhere, which is what keeps determining-system null
spaces honest.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

SparseRow = dict  # dict[int, Fraction]

_F0 = Fraction(0)
_F1 = Fraction(1)


def rref(rows: list[SparseRow], ncols: int) -> tuple[list[SparseRow], list[int]]:
    """Reduced row echelon form.

    Returns (reduced nonzero rows, pivot column per row).  Input rows are
    not mutated.
    """
    work = [dict(r) for r in rows if r]
    reduced: list[SparseRow] = []
    pivots: list[int] = []
    for col in range(ncols):
        pivot_row = None
        for r in work:
            if r.get(col):
                pivot_row = r
                break
        if pivot_row is None:
            continue
        work.remove(pivot_row)
        inv = 1 / pivot_row[col]
        pivot_row = {c: v * inv for c, v in pivot_row.items()}
        for target in (work, reduced):
            for i, r in enumerate(target):
                factor = r.get(col)
                if not factor:
                    continue
                nr = dict(r)
                for c, v in pivot_row.items():
                    acc = nr.get(c, _F0) - factor * v
                    if acc:
                        nr[c] = acc
                    else:
                        nr.pop(c, None)
                target[i] = nr
        work = [r for r in work if r]
        reduced.append(pivot_row)
        pivots.append(col)
    return reduced, pivots


def _primitive_signed(vec: list[Fraction]) -> list[Fraction]:
    """Scale to a primitive integer vector whose first nonzero entry is positive."""
    lcm = 1
    for v in vec:
        if v:
            lcm = lcm * v.denominator // gcd(lcm, v.denominator)
    ints = [int(v * lcm) for v in vec]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    for v in ints:
        if v:
            if v < 0:
                ints = [-w for w in ints]
            break
    return [Fraction(v) for v in ints]


def nullspace(rows: list[SparseRow], ncols: int) -> list[list[Fraction]]:
    """Basis of the null space of the homogeneous system, one vector per free
    column, each scaled to a primitive integer vector with positive leading
    entry."""
    reduced, pivots = rref(rows, ncols)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vec = [_F0] * ncols
        vec[free] = _F1
        for row, piv in zip(reduced, pivots):
            coeff = row.get(free)
            if coeff:
                vec[piv] = -coeff
        basis.append(_primitive_signed(vec))
    return basis


def solve_particular(rows: list[SparseRow], rhs: Sequence[Fraction],
                     ncols: int) -> list[Fraction] | None:
    """One exact solution of A x = rhs with free variables set to 0, or None
    if the system is inconsistent."""
    augmented = []
    for r, b in zip(rows, rhs):
        row = dict(r)
        if b:
            row[ncols] = Fraction(b)
        augmented.append(row)
    reduced, pivots = rref(augmented, ncols + 1)
    sol = [_F0] * ncols
    for row, piv in zip(reduced, pivots):
        if piv == ncols:
            return None
        sol[piv] = row.get(ncols, _F0)
    return sol


def solve_dense(matrix: list[list], rhs: list, zero) -> list | None:
    """Gauss-Jordan over any exact field (Fraction or Expr entries).

    Returns the unique solution, or None when the matrix is singular.
    Entries need +, -, *, / and == comparison against ``zero``.
    """
    m = len(matrix)
    a = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(m):
        piv = None
        for r in range(col, m):
            if not (a[r][col] == zero):
                piv = r
                break
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = a[col][col]
        a[col] = [v / inv for v in a[col]]
        for r in range(m):
            if r == col:
                continue
            factor = a[r][col]
            if factor == zero:
                continue
            a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
    return [a[r][m] for r in range(m)]


def rank(rows: list[SparseRow], ncols: int) -> int:
    return len(rref(rows, ncols)[1])
