"""Integer and rational linear algebra on small lattices.

Smith normal form (with transforms) is the one primitive used for
stabilizers, torsion and Gale duals.  Rational inverses go through FLINT.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import gcd
from typing import Sequence

import flint

Matrix = list  # list of rows of ints


def identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def matmul(a, b):
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [[sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(cols)] for i in range(len(a))]


def matvec(a, v):
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def transpose(a):
    return [list(r) for r in zip(*a)] if a else []


def smith_normal_form(a: Sequence[Sequence[int]]):
    """Return (D, U, V) with U*A*V = D diagonal, d1 | d2 | ..., U, V unimodular.

    A is m x n.  Diagonal entries are nonnegative.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    d = [list(map(int, row)) for row in a]
    u = identity(m)
    v = identity(n)

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in d:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):  # row_dst += c * row_src
        d[dst] = [x + c * y for x, y in zip(d[dst], d[src])]
        u[dst] = [x + c * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, c):
        for row in d:
            row[dst] += c * row[src]
        for row in v:
            row[dst] += c * row[src]

    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero |entry| in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if d[i][j] and (best is None or abs(d[i][j]) < abs(d[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        done = False
        while not done:
            done = True
            p = d[t][t]
            for i in range(t + 1, m):
                if d[i][t]:
                    add_row(t, i, -(d[i][t] // p))
                    if d[i][t]:
                        swap_rows(t, i)
                        done = False
                        break
            if not done:
                continue
            p = d[t][t]
            for j in range(t + 1, n):
                if d[t][j]:
                    add_col(t, j, -(d[t][j] // p))
                    if d[t][j]:
                        swap_cols(t, j)
                        done = False
                        break
            if not done:
                continue
            # divisibility of the remaining block
            p = d[t][t]
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if d[i][j] % p:
                        add_row(i, t, 1)
                        done = False
                        break
                if not done:
                    break
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return d, u, v


def int_inverse(a):
    """Inverse of a unimodular integer matrix."""
    inv = flint.fmpq_mat(a).inv()
    out = [[Fraction(int(x.p), int(x.q)) for x in row] for row in inv.tolist()]
    for row in out:
        for x in row:
            if x.denominator != 1:
                raise ValueError("matrix is not unimodular")
    return [[int(x) for x in row] for row in out]


def rational_inverse(a) -> list[list[Fraction]]:
    inv = flint.fmpq_mat([[flint.fmpq(Fraction(x).numerator, Fraction(x).denominator) for x in row] for row in a]).inv()
    return [[Fraction(int(x.p), int(x.q)) for x in row] for row in inv.tolist()]


def det(a) -> Fraction:
    if not a:
        return Fraction(1)
    x = flint.fmpq_mat([[flint.fmpq(Fraction(y).numerator, Fraction(y).denominator) for y in row] for row in a]).det()
    return Fraction(int(x.p), int(x.q))


def rank(a) -> int:
    if not a:
        return 0
    return flint.fmpq_mat([[flint.fmpq(Fraction(y).numerator, Fraction(y).denominator) for y in row] for row in a]).rank()


def is_primitive(v: Sequence[int]) -> bool:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g == 1


class FiniteAbelianGroup:
    """Quotient Z^m / (column span of R), finite part plus free rank.

    Elements are given as integer vectors in Z^m; ``normal_form`` maps them
    to a canonical tuple (torsion coordinates reduced mod the invariant
    factors, followed by free coordinates).
    """

    def __init__(self, ambient_dim: int, relations: Sequence[Sequence[int]]):
        # relations: list of vectors in Z^m (the columns of R)
        self.ambient_dim = m = ambient_dim
        cols = [list(map(int, r)) for r in relations]
        if cols:
            mat = transpose(cols)
        else:
            mat = [[] for _ in range(m)]
        if cols:
            d, u, _ = smith_normal_form(mat)
            diag = [d[i][i] if i < len(cols) else 0 for i in range(m)]
        else:
            u = identity(m)
            diag = [0] * m
        self._u = u
        self._uinv = int_inverse(u) if m else []
        self._diag = diag
        self.torsion_idx = [i for i in range(m) if diag[i] > 1]
        self.free_idx = [i for i in range(m) if diag[i] == 0]
        self.invariant_factors = tuple(diag[i] for i in self.torsion_idx)

    @property
    def free_rank(self) -> int:
        return len(self.free_idx)

    @property
    def is_finite(self) -> bool:
        return not self.free_idx

    def order(self) -> int:
        if self.free_idx:
            raise ValueError("infinite group")
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    def torsion_order(self) -> int:
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    def normal_form(self, x: Sequence[int]) -> tuple:
        y = matvec(self._u, list(x))
        tors = tuple(y[i] % self._diag[i] for i in self.torsion_idx)
        free = tuple(y[i] for i in self.free_idx)
        return tors + free

    def is_zero(self, x) -> bool:
        return all(c == 0 for c in self.normal_form(x))

    def torsion_representatives(self):
        """Lattice representatives of every torsion element, in normal-form order."""
        for t in itertools.product(*[range(d) for d in self.invariant_factors]):
            y = [0] * self.ambient_dim
            for i, c in zip(self.torsion_idx, t):
                y[i] = c
            yield matvec(self._uinv, y)

    def torsion_generators(self):
        """One lattice vector per invariant factor (order = that factor)."""
        out = []
        for i in self.torsion_idx:
            y = [0] * self.ambient_dim
            y[i] = 1
            out.append(matvec(self._uinv, y))
        return out

    def element_order(self, x) -> int:
        nf = self.normal_form(x)
        if any(nf[len(self.torsion_idx):]):
            raise ValueError("element of infinite order")
        o = 1
        for c, d in zip(nf, self.invariant_factors):
            k = d // gcd(c, d)
            o = o * k // gcd(o, k)
        return o
