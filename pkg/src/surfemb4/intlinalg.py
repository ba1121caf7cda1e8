"""Exact integer matrix routines: Smith diagonal, Hermite form, determinants.

Everything here works on plain Python ints (arbitrary precision) held in
lists of lists.  Matrices stay small throughout the package, so the
classical cubic algorithms are used without any fill-in control.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with g = gcd(a,b) > 0 and x*a + y*b = g."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def smith_diagonal(rows: Sequence[Sequence[int]], ncols: int) -> list[int]:
    """Nonzero diagonal entries of the Smith normal form of an integer matrix.

    Returns the invariant factors d_1 | d_2 | ... | d_r (all positive); the
    cokernel of the row lattice is Z^(ncols-r) + sum_i Z/d_i.
    """
    a = [list(row) for row in rows if any(row)]
    m = len(a)
    if m == 0:
        return []
    n = ncols
    diag: list[int] = []
    t = 0
    while t < m and t < n:
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = a[i][j]
                if v != 0 and (best is None or abs(v) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        bi, bj = best
        a[t], a[bi] = a[bi], a[t]
        for row in a:
            row[t], row[bj] = row[bj], row[t]
        # clear row and column t; each restart strictly shrinks |pivot|
        while True:
            pivot = a[t][t]
            dirty = False
            for i in range(t + 1, m):
                if a[i][t] != 0:
                    q = a[i][t] // pivot
                    for j in range(t, n):
                        a[i][j] -= q * a[t][j]
                    if a[i][t] != 0:
                        a[t], a[i] = a[i], a[t]
                        dirty = True
                        break
            if dirty:
                continue
            for j in range(t + 1, n):
                if a[t][j] != 0:
                    q = a[t][j] // pivot
                    for i in range(t, m):
                        a[i][j] -= q * a[i][t]
                    if a[t][j] != 0:
                        for i in range(t, m):
                            a[i][t], a[i][j] = a[i][j], a[i][t]
                        dirty = True
                        break
            if not dirty:
                break
        diag.append(abs(a[t][t]))
        t += 1
    diag = [d for d in diag if d != 0]
    for i in range(len(diag)):
        for j in range(i + 1, len(diag)):
            if diag[j] % diag[i] != 0:
                g = math.gcd(diag[i], diag[j])
                diag[i], diag[j] = g, diag[i] * diag[j] // g
    return sorted(diag)


class HermiteLattice:
    """An integer lattice in Z^n held in row-echelon Hermite form.

    Supports canonical coset representatives and membership tests, which
    is all the orbit machinery for finitely generated abelian groups needs.
    """

    def __init__(self, rows: Sequence[Sequence[int]], ncols: int):
        self.ncols = ncols
        self.rows: list[list[int]] = []  # echelon, positive pivots, sorted by pivot col
        self.pivot_cols: list[int] = []
        for row in rows:
            self._insert(list(row))

    def _insert(self, row: list[int]) -> None:
        while any(row):
            col = next(j for j in range(self.ncols) if row[j] != 0)
            idx = None
            for k, pc in enumerate(self.pivot_cols):
                if pc == col:
                    idx = k
                if pc >= col:
                    break
            if idx is None:
                if row[col] < 0:
                    row = [-v for v in row]
                pos = 0
                while pos < len(self.pivot_cols) and self.pivot_cols[pos] < col:
                    pos += 1
                self.rows.insert(pos, row)
                self.pivot_cols.insert(pos, col)
                return
            p = self.rows[idx]
            g, x, y = _egcd(p[col], row[col])
            pa, ra = p[col] // g, row[col] // g
            # unimodular combination: pivot row keeps column col with entry g,
            # the remainder row becomes zero at col and strictly shorter
            new_p = [x * p[j] + y * row[j] for j in range(self.ncols)]
            new_r = [-ra * p[j] + pa * row[j] for j in range(self.ncols)]
            self.rows[idx] = new_p
            row = new_r

    def reduce(self, vec: Sequence[int]) -> tuple[int, ...]:
        """Canonical representative of ``vec`` modulo the lattice."""
        v = list(vec)
        for idx, col in enumerate(self.pivot_cols):
            p = self.rows[idx][col]
            q = v[col] // p
            if q:
                row = self.rows[idx]
                for j in range(col, self.ncols):
                    v[j] -= q * row[j]
        return tuple(v)

    def contains(self, vec: Sequence[int]) -> bool:
        return not any(self.reduce(vec))


def bareiss_det(mat: Sequence[Sequence[int]]) -> int:
    """Exact determinant of an integer matrix (fraction-free Bareiss)."""
    n = len(mat)
    if n == 0:
        return 1
    a = [list(row) for row in mat]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def linear_pencil_det(pairs: Sequence[Sequence[tuple[int, int]]]) -> list[int]:
    """Coefficients of det(t*V - W), low degree first, for entries (v, w).

    Evaluates exact integer determinants at n+1 points and interpolates.
    """
    n = len(pairs)
    if n == 0:
        return [1]
    xs = list(range(n + 1))
    ys = [
        bareiss_det([[v * x - w for (v, w) in row] for row in pairs]) for x in xs
    ]
    coeffs = [Fraction(0)] * (n + 1)
    for i, xi in enumerate(xs):
        poly = [Fraction(1)]
        denom = 1
        for j, xj in enumerate(xs):
            if j == i:
                continue
            denom *= xi - xj
            new = [Fraction(0)] * (len(poly) + 1)
            for k, c in enumerate(poly):
                new[k + 1] += c
                new[k] -= c * xj
            poly = new
        scale = Fraction(ys[i], denom)
        for k, c in enumerate(poly):
            coeffs[k] += scale * c
    out = []
    for c in coeffs:
        assert c.denominator == 1
        out.append(int(c))
    return out


def poly_divmod(num: Sequence[int], den: Sequence[int]) -> tuple[list[int], list[int]]:
    """Division with remainder for integer polynomials; ``den`` must be monic."""
    den = list(den)
    while den and den[-1] == 0:
        den.pop()
    assert den and den[-1] == 1, "divisor must be monic"
    rem = list(num)
    qlen = max(0, len(rem) - len(den) + 1)
    quot = [0] * qlen
    for k in range(qlen - 1, -1, -1):
        c = rem[k + len(den) - 1]
        quot[k] = c
        if c:
            for j in range(len(den)):
                rem[k + j] -= c * den[j]
    while rem and rem[-1] == 0:
        rem.pop()
    return quot, rem


@lru_cache(maxsize=None)
def _cyclotomic(m: int) -> tuple[int, ...]:
    poly = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            poly, rem = poly_divmod(poly, list(_cyclotomic(d)))
            assert not rem
    return tuple(poly)


def cyclotomic(m: int) -> list[int]:
    """Coefficients of the m-th cyclotomic polynomial, low degree first."""
    assert m >= 1
    return list(_cyclotomic(m))
