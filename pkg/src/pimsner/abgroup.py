"""Exact integer linear algebra and finitely generated abelian groups.

Everything here is computed over Z with Python's arbitrary-precision
integers; there is no floating point anywhere.  The central routine is
``smith_normal_form``, which diagonalizes an integer matrix by unimodular
row and column operations.  From the Smith form we read off integer
kernels, cokernels, and the kernel/cokernel data of a map of free (or
cyclic-coefficient) abelian groups, packaged as ``LesSegment`` values for
the long-exact-sequence pipelines built on top of this module.

>>> S, U, V = smith_normal_form(IntMatrix.from_rows([[2, 4], [6, 8]]))
>>> S.diagonal()
[2, 4]
>>> print(cokernel(IntMatrix.from_rows([[-2]])))
Z/2
"""

from __future__ import annotations

from dataclasses import dataclass


class AbgroupError(ValueError):
    """Raised on malformed input (shape mismatches, bad coefficient groups)."""


# ---------------------------------------------------------------------------
# Integer matrices
# ---------------------------------------------------------------------------

class IntMatrix:
    """An immutable integer matrix, stored row-major.

    Empty matrices (0 rows and/or 0 columns) are legal and show up
    naturally: the adjacency map of a quiver with no regular vertices has
    zero columns.
    """

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows, cols, entries):
        if rows < 0 or cols < 0:
            raise AbgroupError("matrix dimensions must be nonnegative")
        entries = tuple(tuple(int(x) for x in row) for row in entries)
        if len(entries) != rows or any(len(r) != cols for r in entries):
            raise AbgroupError("entry grid does not match declared shape")
        self.rows = rows
        self.cols = cols
        self.entries = entries

    @classmethod
    def from_rows(cls, rows):
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        return cls(len(rows), ncols, rows)

    @classmethod
    def identity(cls, n):
        return cls(n, n, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, rows, cols):
        return cls(rows, cols, [[0] * cols for _ in range(rows)])

    def __eq__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.entries == other.entries and self.cols == other.cols

    def __hash__(self):
        return hash((self.cols, self.entries))

    def __repr__(self):
        return f"IntMatrix({list(map(list, self.entries))!r})"

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def transpose(self):
        return IntMatrix(self.cols, self.rows,
                         [[self.entries[i][j] for i in range(self.rows)]
                          for j in range(self.cols)])

    def mul(self, other):
        if self.cols != other.rows:
            raise AbgroupError("shape mismatch in matrix product")
        out = []
        for i in range(self.rows):
            row = self.entries[i]
            out.append([sum(row[k] * other.entries[k][j] for k in range(self.cols))
                        for j in range(other.cols)])
        return IntMatrix(self.rows, other.cols, out)

    def __mul__(self, other):
        return self.mul(other)

    def hstack(self, other):
        if self.rows != other.rows:
            raise AbgroupError("row count mismatch in hstack")
        return IntMatrix(self.rows, self.cols + other.cols,
                         [list(a) + list(b) for a, b in zip(self.entries, other.entries)])

    def column(self, j):
        return [self.entries[i][j] for i in range(self.rows)]

    def diagonal(self):
        return [self.entries[i][i] for i in range(min(self.rows, self.cols))]

    def is_zero(self):
        return all(x == 0 for row in self.entries for x in row)

    def det(self):
        """Determinant by fraction-free (Bareiss) elimination. Square only."""
        if self.rows != self.cols:
            raise AbgroupError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = [list(r) for r in self.entries]
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
                a[i][k] = 0
            prev = a[k][k]
        return sign * a[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

def smith_normal_form(mat):
    """Diagonalize ``mat`` by unimodular row/column operations.

    Returns ``(S, U, V)`` with ``U * mat * V == S``, ``det(U), det(V)`` in
    ``{1, -1}``, ``S`` diagonal with nonnegative entries ``d_1 | d_2 | ...``
    and every entry after the first zero equal to zero.

    Pivots are chosen with minimal absolute value to keep intermediate
    entries small; correctness does not depend on the choice.
    """
    m, n = mat.rows, mat.cols
    s = [list(row) for row in mat.entries]
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    v = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        s[i], s[j] = s[j], s[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in s:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):
        # row[dst] -= q * row[src]
        sd, ss = s[dst], s[src]
        for j in range(n):
            sd[j] -= q * ss[j]
        ud, us = u[dst], u[src]
        for j in range(m):
            ud[j] -= q * us[j]

    def add_col(dst, src, q):
        for row in s:
            row[dst] -= q * row[src]
        for row in v:
            row[dst] -= q * row[src]

    t = 0
    while t < m and t < n:
        # Locate a pivot of minimal absolute value in the trailing block.
        best = None
        for i in range(t, m):
            row = s[i]
            for j in range(t, n):
                e = row[j]
                if e != 0 and (best is None or abs(e) < best[0]):
                    best = (abs(e), i, j)
        if best is None:
            break
        _, pi, pj = best
        if pi != t:
            swap_rows(t, pi)
        if pj != t:
            swap_cols(t, pj)
        if s[t][t] < 0:
            s[t] = [-x for x in s[t]]
            u[t] = [-x for x in u[t]]

        while True:
            a = s[t][t]
            # Clear the pivot column.  Remainders stay in [0, a); a nonzero
            # remainder becomes the next (smaller) pivot.
            dirty = False
            for i in range(t + 1, m):
                x = s[i][t]
                if x:
                    add_row(i, t, x // a)
                    if s[i][t]:
                        dirty = True
            if dirty:
                best = None
                for i in range(t + 1, m):
                    x = s[i][t]
                    if x and (best is None or x < best[0]):
                        best = (x, i)
                swap_rows(t, best[1])
                continue
            a = s[t][t]
            dirty = False
            for j in range(t + 1, n):
                x = s[t][j]
                if x:
                    add_col(j, t, x // a)
                    if s[t][j]:
                        dirty = True
            if dirty:
                best = None
                for j in range(t + 1, n):
                    x = s[t][j]
                    if x and (best is None or x < best[0]):
                        best = (x, j)
                swap_cols(t, best[1])
                continue
            if any(s[i][t] for i in range(t + 1, m)):
                continue
            # Pivot row/column clean.  Enforce divisibility of the rest of
            # the block: fold a non-multiple row into row t and redo.
            a = s[t][t]
            offender = None
            for i in range(t + 1, m):
                row = s[i]
                for j in range(t + 1, n):
                    if row[j] % a:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            add_row(t, offender, -1)
        t += 1

    return (IntMatrix(m, n, s),
            IntMatrix(m, m, u),
            IntMatrix(n, n, v))


def rank(mat):
    """Rank over Q, read off the Smith diagonal."""
    s, _, _ = smith_normal_form(mat)
    return sum(1 for d in s.diagonal() if d != 0)


def kernel_basis(mat):
    """An integer basis of ``{v : mat . v = 0}``, one basis vector per column.

    The basis is saturated (it spans the full kernel lattice, not a finite-
    index sublattice) because it consists of columns of a unimodular matrix.
    """
    s, _, v = smith_normal_form(mat)
    diag = s.diagonal()
    free_cols = [j for j in range(mat.cols)
                 if j >= len(diag) or diag[j] == 0]
    return IntMatrix(mat.cols, len(free_cols),
                     [[v.entries[i][j] for j in free_cols] for i in range(mat.cols)])


def cokernel(mat):
    """Isomorphism class of ``Z^rows / column-span(mat)``."""
    s, _, _ = smith_normal_form(mat)
    diag = [d for d in s.diagonal() if d != 0]
    free = mat.rows - len(diag)
    return FgAbelianGroup.from_divisors(*(d for d in diag if d >= 2),
                                        *([0] * free))


def solve_int(mat, rhs):
    """One integer solution ``x`` of ``mat . x = rhs``, or None.

    ``rhs`` is a list of length ``mat.rows``.
    """
    if len(rhs) != mat.rows:
        raise AbgroupError("right-hand side length mismatch")
    s, u, v = smith_normal_form(mat)
    ub = [sum(u.entries[i][k] * rhs[k] for k in range(mat.rows))
          for i in range(mat.rows)]
    y = [0] * mat.cols
    diag = s.diagonal()
    for i in range(mat.rows):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            if ub[i] != 0:
                return None
        else:
            q, r = divmod(ub[i], d)
            if r:
                return None
            y[i] = q
    return [sum(v.entries[i][k] * y[k] for k in range(mat.cols))
            for i in range(mat.cols)]


# ---------------------------------------------------------------------------
# Finitely generated abelian groups
# ---------------------------------------------------------------------------

def _factorint(n):
    """Prime factorization by trial division; torsion orders here are small."""
    out = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


class FgAbelianGroup:
    """A finitely generated abelian group in canonical form.

    Stored as a free rank plus, per prime, the multiset of exponents of its
    primary cyclic summands.  The public ``torsion`` view is the invariant
    factor chain ``d_1 | d_2 | ...`` with every ``d_i >= 2``; trivial factors
    are dropped and the free part lives only in ``free_rank``, so equal
    groups always compare equal.

    >>> FgAbelianGroup.from_divisors(2, 3) == FgAbelianGroup.from_divisors(6)
    True
    >>> print(FgAbelianGroup.from_divisors(0, 4, 6))
    Z x Z/2 x Z/12
    """

    __slots__ = ("free_rank", "_primary")

    def __init__(self, free_rank=0, primary=None):
        self.free_rank = int(free_rank)
        prim = {}
        for p, exps in (primary or {}).items():
            exps = tuple(sorted((int(e) for e in exps if e > 0), reverse=True))
            if exps:
                prim[int(p)] = exps
        self._primary = dict(sorted(prim.items()))

    @classmethod
    def from_divisors(cls, *divisors):
        """Build from cyclic orders; 0 means an infinite cyclic summand."""
        rank = 0
        primary = {}
        for d in divisors:
            d = abs(int(d))
            if d == 0:
                rank += 1
            elif d > 1:
                for p, e in _factorint(d).items():
                    primary.setdefault(p, []).append(e)
        return cls(rank, primary)

    @classmethod
    def trivial(cls):
        return cls(0, {})

    @classmethod
    def free(cls, rank):
        return cls(rank, {})

    @property
    def torsion(self):
        """Invariant factors d_1 | d_2 | ... in ascending divisibility order."""
        cols = [[p ** e for e in exps] for p, exps in self._primary.items()]
        chain = [1] * max((len(c) for c in cols), default=0)
        for c in cols:
            for i, q in enumerate(c):
                chain[i] *= q
        chain = [d for d in chain if d >= 2]
        chain.reverse()
        return chain

    def primary_components(self):
        """All cyclic summands: 0 repeated free_rank times, then each p^e."""
        out = [0] * self.free_rank
        for p, exps in self._primary.items():
            out.extend(p ** e for e in exps)
        return out

    def is_trivial(self):
        return self.free_rank == 0 and not self._primary

    def is_free(self):
        return not self._primary

    def is_cyclic(self):
        comps = self.primary_components()
        if len(comps) <= 1:
            return True
        return self.free_rank == 0 and len(self.torsion) == 1

    def order(self):
        """Cardinality for finite groups, None for infinite ones."""
        if self.free_rank:
            return None
        n = 1
        for p, exps in self._primary.items():
            for e in exps:
                n *= p ** e
        return n

    def direct_sum(self, *others):
        rank = self.free_rank + sum(g.free_rank for g in others)
        primary = {p: list(exps) for p, exps in self._primary.items()}
        for g in others:
            for p, exps in g._primary.items():
                primary.setdefault(p, []).extend(exps)
        return FgAbelianGroup(rank, primary)

    def __eq__(self, other):
        if not isinstance(other, FgAbelianGroup):
            return NotImplemented
        return (self.free_rank == other.free_rank
                and self._primary == other._primary)

    def __hash__(self):
        return hash((self.free_rank, tuple(self._primary.items())))

    def __str__(self):
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " x ".join(parts) if parts else "0"

    def __repr__(self):
        divisors = [0] * self.free_rank + self.torsion
        return f"FgAbelianGroup.from_divisors({', '.join(map(str, divisors))})"


# ---------------------------------------------------------------------------
# Long-exact-sequence segments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LesSegment:
    """Kernel and cokernel of one map in a long exact sequence window."""

    kernel: FgAbelianGroup
    cokernel: FgAbelianGroup
    map_matrix: IntMatrix


def _mod_m_cokernel(mat, m):
    """Cokernel of ``mat`` acting on (Z/m)-columns: coker([mat | m*I])."""
    return cokernel(mat.hstack(IntMatrix.from_rows(
        [[m if i == j else 0 for j in range(mat.rows)] for i in range(mat.rows)])))


def les_segment(mat, coeff):
    """Kernel and cokernel of ``mat`` acting coordinatewise on ``coeff``.

    ``coeff`` must be free (Z^r) or cyclic torsion (Z/m); callers split
    mixed groups into primary components first.  For free coefficients the
    answer is the integer kernel/cokernel replicated r times.  For Z/m the
    cokernel is read from the Smith form of ``mat`` augmented with an
    m-identity block, and the kernel is the Pontryagin dual statement:
    ker(mat on Z/m) is isomorphic to coker(mat^T on Z/m), a finite group
    equal to its own dual.
    """
    if not isinstance(coeff, FgAbelianGroup):
        raise AbgroupError("coefficient must be an FgAbelianGroup")
    if coeff.is_free():
        r = coeff.free_rank
        ker_rank = mat.cols - rank(mat)
        ker = FgAbelianGroup.free(ker_rank * r)
        cok = cokernel(mat)
        cok = FgAbelianGroup(cok.free_rank * r,
                             {p: list(exps) * r for p, exps in cok._primary.items()})
        return LesSegment(ker, cok, mat)
    if coeff.free_rank or len(coeff.torsion) != 1:
        raise AbgroupError(
            "mixed coefficient group; split into primary components first")
    m = coeff.torsion[0]
    cok = _mod_m_cokernel(mat, m)
    ker = _mod_m_cokernel(mat.transpose(), m)
    return LesSegment(ker, cok, mat)
