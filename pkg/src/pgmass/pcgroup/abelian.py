"""Smith normal form over the integers and abelian invariants."""
from __future__ import annotations

from dataclasses import dataclass, field


def smith_normal_form(A):
    """Return ``(D, U, V)`` with ``U A V = D`` diagonal, ``d_1 | d_2 | ...``.

    ``A`` is a list of integer rows.  ``U`` and ``V`` are unimodular.  Only
    exact integer arithmetic is used.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    D = [list(map(int, row)) for row in A]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(M, i, j):
        M[i], M[j] = M[j], M[i]

    def swap_cols(M, i, j):
        for row in M:
            row[i], row[j] = row[j], row[i]

    def add_row(M, src, dst, k):      # row dst += k * row src
        if k:
            rs, rd = M[src], M[dst]
            for c in range(len(rd)):
                rd[c] += k * rs[c]

    def add_col(M, src, dst, k):      # col dst += k * col src
        if k:
            for row in M:
                row[dst] += k * row[src]

    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero absolute value in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if D[i][j] and (best is None or abs(D[i][j]) < abs(D[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i, j = best
        swap_rows(D, t, i); swap_rows(U, t, i)
        swap_cols(D, t, j); swap_cols(V, t, j)
        done = False
        while not done:
            done = True
            piv = D[t][t]
            for i in range(t + 1, m):
                q = D[i][t] // piv
                add_row(D, t, i, -q); add_row(U, t, i, -q)
                if D[i][t]:
                    done = False
            for j in range(t + 1, n):
                q = D[t][j] // piv
                add_col(D, t, j, -q); add_col(V, t, j, -q)
                if D[t][j]:
                    done = False
            if not done:
                best = None
                for i in range(t, m):
                    if D[i][t] and (best is None or abs(D[i][t]) < abs(D[best][t])):
                        best = i
                bc = None
                for j in range(t, n):
                    if D[t][j] and (bc is None or abs(D[t][j]) < abs(D[t][bc])):
                        bc = j
                if abs(D[best][t]) <= abs(D[t][bc]):
                    swap_rows(D, t, best); swap_rows(U, t, best)
                else:
                    swap_cols(D, t, bc); swap_cols(V, t, bc)
                continue
            # divisibility: if some entry of the block is not divisible, fold it in
            piv = D[t][t]
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if D[i][j] % piv:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is not None:
                add_row(D, bad, t, 1); add_row(U, bad, t, 1)
                done = False
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return D, U, V


@dataclass
class AbelianInvariants:
    """Invariant factors (excluding 1s) and, per generator, its coordinates."""
    invariants: tuple
    projection: list = field(default_factory=list)

    @property
    def order(self) -> int:
        o = 1
        for d in self.invariants:
            o *= d
        return o

    def __iter__(self):
        return iter(self.invariants)

    def __eq__(self, other):
        if isinstance(other, AbelianInvariants):
            return self.invariants == other.invariants
        return tuple(other) == self.invariants

    def __hash__(self):
        return hash(self.invariants)

    def __repr__(self):
        return f"AbelianInvariants{self.invariants}"


def abelian_group_from_relations(rows, ngens: int) -> AbelianInvariants:
    """Abelian group ``Z^ngens / rowspan(rows)``.

    The projection lists, for each generator, its coordinates with respect
    to the cyclic factors (reduced modulo the invariants).
    """
    if ngens == 0:
        return AbelianInvariants((), [])
    rows = [list(r) for r in rows] or [[0] * ngens]
    D, U, V = smith_normal_form(rows)
    diag = [D[i][i] if i < len(D) else 0 for i in range(ngens)]
    keep = [k for k, d in enumerate(diag) if d != 1]
    invariants = tuple(diag[k] for k in keep)
    proj = []
    for g in range(ngens):
        coords = []
        for k in keep:
            c = V[g][k]
            coords.append(c % diag[k] if diag[k] else c)
        proj.append(tuple(coords))
    return AbelianInvariants(invariants, proj)
