"""Exact linear algebra over the integers and rationals.

Everything here is deliberately dependency-free: intersection forms of
plumbing trees are small (tens of rows), and the rest of the package needs
exact answers, not fast approximate ones.  Matrices are plain lists of lists
of ints; rational results use fractions.Fraction.
"""

from __future__ import annotations

from fractions import Fraction


def mat_mul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    """Product of two integer matrices."""
    n, k, m = len(a), len(b), len(b[0])
    assert all(len(row) == k for row in a)
    return [[sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m)] for i in range(n)]


def determinant(m: list[list[int]]) -> int:
    """Integer determinant by fraction-free Bareiss elimination.

    >>> determinant([[2, 1], [1, 2]])
    3
    >>> determinant([[0, 1], [1, 0]])
    -1
    """
    n = len(m)
    if n == 0:
        return 1
    a = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            # find a row below with a nonzero pivot and swap
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                # Bareiss: exact division, stays integral
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def leading_minors(m: list[list[int]]) -> list[int]:
    """Leading principal minors [det m[:1,:1], det m[:2,:2], ...]."""
    return [determinant([row[: k + 1] for row in m[: k + 1]]) for k in range(len(m))]


def is_negative_definite(m: list[list[int]]) -> bool:
    """Sylvester test: k-th leading minor has sign (-1)^k.

    >>> is_negative_definite([[-2, 1], [1, -2]])
    True
    >>> is_negative_definite([[-2, 3], [3, -2]])
    False
    """
    minors = leading_minors(m)
    return all((-1) ** (k + 1) * minors[k] > 0 for k in range(len(m)))


def solve_exact(m: list[list[int]], rhs: list) -> list[Fraction]:
    """Solve m x = rhs exactly; raises ValueError if m is singular.

    Entries of rhs may be ints or Fractions.
    """
    n = len(m)
    a = [[Fraction(m[i][j]) for j in range(n)] + [Fraction(rhs[i])] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        pv = a[col][col]
        a[col] = [x / pv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def invert_exact(m: list[list[int]]) -> list[list[Fraction]]:
    """Exact inverse of an integer matrix (columns solved one at a time)."""
    n = len(m)
    cols = [solve_exact(m, [1 if i == j else 0 for i in range(n)]) for j in range(n)]
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def smith_normal_form(
    m: list[list[int]],
) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Smith normal form with transforms: returns (l, d, r) with l m r = d.

    l and r are unimodular, d is diagonal with d[i][i] dividing d[i+1][i+1],
    diagonal entries nonnegative.
    """
    rows = len(m)
    cols = len(m[0]) if rows else 0
    d = [row[:] for row in m]
    l = [[int(i == j) for j in range(rows)] for i in range(rows)]
    r = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def row_op(i, j, q):  # row i -= q * row j
        d[i] = [x - q * y for x, y in zip(d[i], d[j])]
        l[i] = [x - q * y for x, y in zip(l[i], l[j])]

    def col_op(i, j, q):  # col i -= q * col j
        for row in d:
            row[i] -= q * row[j]
        for row in r:
            row[i] -= q * row[j]

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        l[i], l[j] = l[j], l[i]

    def swap_cols(i, j):
        for row in d:
            row[i], row[j] = row[j], row[i]
        for row in r:
            row[i], row[j] = row[j], row[i]

    def negate_row(i):
        d[i] = [-x for x in d[i]]
        l[i] = [-x for x in l[i]]

    t = 0
    while t < rows and t < cols:
        # move a nonzero pivot (smallest magnitude, for fewer steps) to (t, t)
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if d[i][j] != 0 and (best is None or abs(d[i][j]) < abs(d[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        dirty = True
        while dirty:
            dirty = False
            for i in range(t + 1, rows):
                if d[i][t] != 0:
                    q = d[i][t] // d[t][t]
                    row_op(i, t, q)
                    if d[i][t] != 0:  # remainder became the smaller pivot
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, cols):
                if d[t][j] != 0:
                    q = d[t][j] // d[t][t]
                    col_op(j, t, q)
                    if d[t][j] != 0:
                        swap_cols(t, j)
                        dirty = True
        if d[t][t] < 0:
            negate_row(t)
        t += 1

    # enforce the divisibility chain d[i] | d[i+1]
    changed = True
    while changed:
        changed = False
        for i in range(t - 1):
            a, b = d[i][i], d[i + 1][i + 1]
            if b % a != 0:
                # fold b into position i: add col i+1 to col i, then reduce
                col_op(i, i + 1, -1)
                dirty = True
                while dirty:
                    dirty = False
                    if d[i + 1][i] != 0:
                        q = d[i][i] // d[i + 1][i] if d[i + 1][i] else 0
                        # standard 2x2 gcd dance
                        while d[i + 1][i] != 0:
                            q = d[i][i] // d[i + 1][i]
                            row_op(i, i + 1, q)
                            d[i], d[i + 1] = d[i + 1], d[i]
                            l[i], l[i + 1] = l[i + 1], l[i]
                        if d[i][i] < 0:
                            negate_row(i)
                    if d[i][i + 1] != 0:
                        q = d[i][i + 1] // d[i][i]
                        col_op(i + 1, i, q)
                        if d[i][i + 1] != 0:
                            swap_cols(i, i + 1)
                            dirty = True
                if d[i + 1][i + 1] < 0:
                    negate_row(i + 1)
                changed = True
    return l, d, r


def solve_mod2(m: list[list[int]], rhs: list[int]) -> list[int] | None:
    """One solution of m x = rhs over F_2, or None if inconsistent."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    a = [[m[i][j] & 1 for j in range(cols)] + [rhs[i] & 1] for i in range(rows)]
    pivots = []
    rank = 0
    for col in range(cols):
        piv = next((r for r in range(rank, rows) if a[r][col]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for r in range(rows):
            if r != rank and a[r][col]:
                a[r] = [x ^ y for x, y in zip(a[r], a[rank])]
        pivots.append(col)
        rank += 1
    if any(row[cols] for row in a[rank:]):
        return None
    x = [0] * cols
    for r, col in enumerate(pivots):
        x[col] = a[r][cols]
    return x
