"""Linear algebra over F_p with small dense matrices."""
from __future__ import annotations

import itertools

import numpy as np


def rref(rows, p: int, ncols: int | None = None):
    """Reduced row echelon form; returns ``(matrix, pivots)``.

    The matrix is an int64 array containing only the nonzero rows.
    """
    A = np.array(rows, dtype=np.int64) % p if len(rows) else np.zeros((0, ncols or 0), dtype=np.int64)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if ncols is not None and A.shape[1] != ncols and A.shape[0] == 0:
        A = np.zeros((0, ncols), dtype=np.int64)
    m, n = A.shape
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(A[r:, c])[0]
        if len(nz) == 0:
            continue
        k = r + nz[0]
        if k != r:
            A[[r, k]] = A[[k, r]]
        inv = pow(int(A[r, c]), -1, p)
        A[r] = (A[r] * inv) % p
        col = A[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if len(nzr):
            A[nzr] = (A[nzr] - np.outer(col[nzr], A[r])) % p
        pivots.append(c)
        r += 1
    return A[:r], pivots


def rank(rows, p: int) -> int:
    if len(rows) == 0:
        return 0
    return len(rref(rows, p)[1])


def left_nullspace(A, p: int):
    """Basis (rows) of ``{v : v A = 0}`` for an ``m x r`` matrix A."""
    A = np.array(A, dtype=np.int64).reshape(len(A), -1) % p
    m = A.shape[0]
    return nullspace(A.T, p) if m else np.zeros((0, 0), dtype=np.int64)


def nullspace(A, p: int):
    """Basis (rows) of ``{x : A x = 0}``."""
    A = np.array(A, dtype=np.int64) % p
    if A.ndim == 1:
        A = A.reshape(1, -1)
    n = A.shape[1]
    R, piv = rref(A, p, n)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = np.zeros(n, dtype=np.int64)
        v[f] = 1
        for i, c in enumerate(piv):
            v[c] = (-R[i, f]) % p
        basis.append(v)
    return np.array(basis, dtype=np.int64).reshape(len(basis), n)


def subspace_key(rows, p: int, ncols: int) -> tuple:
    R, _ = rref(rows, p, ncols)
    return tuple(tuple(int(x) for x in row) for row in R)


def subspaces(m: int, k: int, p: int):
    """All k-dimensional subspaces of F_p^m, as RREF keys."""
    for piv in itertools.combinations(range(m), k):
        slots = []
        for i, c in enumerate(piv):
            for j in range(c + 1, m):
                if j not in piv:
                    slots.append((i, j))
        for vals in itertools.product(range(p), repeat=len(slots)):
            M = [[0] * m for _ in range(k)]
            for i, c in enumerate(piv):
                M[i][c] = 1
            for (i, j), v in zip(slots, vals):
                M[i][j] = v
            yield tuple(tuple(r) for r in M)


def count_subspaces(m: int, k: int, p: int) -> int:
    num = den = 1
    for i in range(k):
        num *= p ** (m - i) - 1
        den *= p ** (i + 1) - 1
    return num // den


def gl_order(d: int, p: int) -> int:
    o = 1
    for i in range(d):
        o *= p ** d - p ** i
    return o


def gl_generators(d: int, p: int) -> list:
    """Generators of GL_d(F_p): transvections and a primitive-root diagonal."""
    gens = []
    for i in range(d):
        for j in range(d):
            if i != j:
                A = np.eye(d, dtype=np.int64)
                A[i, j] = 1
                gens.append(A)
    if p > 2 and d > 0:
        g = primitive_root(p)
        A = np.eye(d, dtype=np.int64)
        A[0, 0] = g
        gens.append(A)
    return gens


def primitive_root(p: int) -> int:
    if p == 2:
        return 1
    phi = p - 1
    fac = [q for q in range(2, phi + 1) if phi % q == 0 and all(q % r for r in range(2, q))]
    for g in range(2, p):
        if all(pow(g, phi // q, p) != 1 for q in fac):
            return g
    raise ValueError(p)
