"""Dense exact linear algebra on small matrices (lists of rows).

Entries are field elements (gmpy2.mpq or FpElement); zero tests use ``bool``.
All routines are deterministic: pivots are chosen left to right, first
nonzero row downward.
"""
from __future__ import annotations

from .errors import NotInvertible


def rref(rows, ncols: int):
    """Reduced row echelon form.  Returns (rows, pivot_columns)."""
    a = [list(r) for r in rows]
    pivots = []
    r = 0
    nrows = len(a)
    for c in range(ncols):
        if r >= nrows:
            break
        p = next((i for i in range(r, nrows) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        if piv != 1:
            inv = 1 / piv
            a[r] = [x * inv for x in a[r]]
        row = a[r]
        for i in range(nrows):
            if i != r and a[i][c]:
                t = a[i][c]
                ai = a[i]
                a[i] = [x - t * y for x, y in zip(ai, row)]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank(rows, ncols: int) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows, ncols: int, zero):
    """Basis (list of vectors) of {x : A x = 0} for A given by rows."""
    red, piv = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in set(piv)]
    basis = []
    for f in free:
        v = [zero] * ncols
        v[f] = zero + 1
        for i, pc in enumerate(piv):
            v[pc] = -red[i][f]
        basis.append(v)
    return basis


def independent_subset(vectors, ncols: int):
    """Indices of a maximal independent subset, greedy in the given order."""
    chosen = []
    basis = []  # reduced rows with pivot positions
    for idx, v in enumerate(vectors):
        w = list(v)
        for prow, pc in basis:
            if w[pc]:
                t = w[pc]
                w = [x - t * y for x, y in zip(w, prow)]
        pc = next((c for c in range(ncols) if w[c]), None)
        if pc is None:
            continue
        inv = 1 / w[pc]
        w = [x * inv for x in w]
        basis.append((w, pc))
        chosen.append(idx)
    return chosen


def complement_units(vectors, ncols: int):
    """Standard unit positions completing ``vectors`` to a basis of k^ncols.

    The positions are the non-pivot columns of the row-reduced span, so the
    choice is deterministic in column order.
    """
    if not vectors:
        return list(range(ncols))
    _, piv = rref(vectors, ncols)
    ps = set(piv)
    return [c for c in range(ncols) if c not in ps]


def solve(rows, ncols: int, b, zero):
    """One solution x of A x = b, or None if inconsistent."""
    aug = [list(r) + [bi] for r, bi in zip(rows, b)]
    red, piv = rref(aug, ncols + 1)
    if piv and piv[-1] == ncols:
        return None
    x = [zero] * ncols
    for i, pc in enumerate(piv):
        x[pc] = red[i][ncols]
    return x


def inverse(rows, zero):
    n = len(rows)
    one = zero + 1
    aug = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(rows)]
    red, piv = rref(aug, 2 * n)
    if len(piv) < n or piv[n - 1] != n - 1:
        raise NotInvertible("singular matrix")
    return [r[n:] for r in red]


def matmul(a, b, zero):
    if not a:
        return []
    m = len(b[0]) if b else 0
    out = []
    for row in a:
        acc = [zero] * m
        for k, x in enumerate(row):
            if x:
                bk = b[k]
                for j in range(m):
                    if bk[j]:
                        acc[j] += x * bk[j]
        out.append(acc)
    return out
