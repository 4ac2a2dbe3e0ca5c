"""p-covering groups, multiplicators and nuclei.

The cover is built from a standard presentation (weights and definitions
recorded) by adding a central tail of order p to every relation that is not
a definition, then imposing the linear conditions produced by the
consistency test on the tails.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..linalg import rref, rank
from ..pcgroup.presentation import PcPresentation, PresentationError


class NotStandardError(PresentationError):
    """The operation requires weights and definitions."""


def relation_keys(G: PcPresentation) -> list:
    keys = [("pow", i) for i in range(G.n)]
    keys += [("comm", i, j) for i in range(G.n) for j in range(i)]
    return keys


def relation_rhs(G: PcPresentation, key) -> tuple:
    if key[0] == "pow":
        return G.powers[key[1]]
    return G.comm_word(key[1], key[2])


def require_standard(G: PcPresentation):
    if G.n == 0:
        return
    if G.weights is None or G.definitions is None:
        raise NotStandardError("presentation lacks weights/definitions; standardize it first")


@dataclass
class Cover:
    """The p-covering group of ``G``.

    ``star`` has the generators of G followed by ``mult_rank`` central
    generators spanning the multiplicator M.  ``nucleus`` holds row vectors
    (in the M coordinates) spanning N.
    """
    G: PcPresentation
    star: PcPresentation
    mult_rank: int
    nucleus: np.ndarray
    tail_keys: list = field(default_factory=list)

    @property
    def nuc_rank(self) -> int:
        return len(self.nucleus)

    @property
    def n(self) -> int:
        return self.G.n

    def m_part(self, x) -> tuple:
        return tuple(x[self.G.n:])


def _with_tails(G: PcPresentation, keys: list, extra: int = 0) -> PcPresentation:
    """Presentation on G's generators plus one central tail per key."""
    n, T = G.n, len(keys) + extra
    N = n + T
    tail_of = {k: n + t for t, k in enumerate(keys)}
    powers = {}
    comms = {}
    for i in range(n):
        v = list(G.powers[i]) + [0] * T
        t = tail_of.get(("pow", i))
        if t is not None:
            v[t] = 1
        powers[i] = v
    for i in range(n):
        for j in range(i):
            v = list(G.comm_word(i, j)) + [0] * T
            t = tail_of.get(("comm", i, j))
            if t is not None:
                v[t] = 1
            if any(v):
                comms[(i, j)] = v
    return PcPresentation(G.p, N, powers, comms, check=False)


def tail_relations(E: PcPresentation, n: int, weight_bound=None) -> list:
    """Tail differences from the consistency test of the extended presentation."""
    p = E.p
    rows = []
    for _, lhs, rhs in E.consistency_pairs(weight_bound):
        if lhs[:n] != rhs[:n]:
            raise PresentationError("base presentation is inconsistent")
        d = [(a - b) % p for a, b in zip(lhs[n:], rhs[n:])]
        if any(d):
            rows.append(d)
    return rows


def p_cover(G: PcPresentation) -> Cover:
    """The p-covering group ``G*`` with multiplicator and nucleus."""
    require_standard(G)
    p, n = G.p, G.n
    defined = {d for d in (G.definitions or []) if d is not None}
    keys = [k for k in relation_keys(G) if k not in defined]
    E = _with_tails(G, keys)
    if n:
        ext_weights = list(G.weights) + [max(G.weights) + 1] * len(keys)
        E = E.with_bookkeeping(weights=ext_weights)
    rows = tail_relations(E, n)
    T = len(keys)
    R, piv = rref(rows, p, T) if rows else (np.zeros((0, T), dtype=np.int64), [])
    free = [t for t in range(T) if t not in piv]
    m = len(free)
    pos = {t: s for s, t in enumerate(free)}
    # image of each tail in the free basis
    image = np.zeros((T, m), dtype=np.int64)
    for t in free:
        image[t, pos[t]] = 1
    for r, t in enumerate(piv):
        for f in free:
            image[t, pos[f]] = (-R[r, f]) % p
    tail_index = {k: t for t, k in enumerate(keys)}
    powers, comms = {}, {}
    for i in range(n):
        v = list(G.powers[i]) + [0] * m
        t = tail_index.get(("pow", i))
        if t is not None:
            v[n:] = image[t].tolist()
        powers[i] = v
    for i in range(n):
        for j in range(i):
            v = list(G.comm_word(i, j)) + [0] * m
            t = tail_index.get(("comm", i, j))
            if t is not None:
                v[n:] = image[t].tolist()
            if any(v):
                comms[(i, j)] = v
    c = max(G.weights) if n else 0
    weights = list(G.weights or []) + [c + 1] * m
    definitions = list(G.definitions or []) + [keys[t] for t in free]
    star = PcPresentation(p, n + m, powers, comms, weights, definitions, check=False)
    # nucleus: tails of weight-(c+1) relations [g_i, g_j] (w_i = c, w_j = 1) and g_i^p (w_i = c)
    nuc_rows = []
    if n:
        w = G.weights
        for k in keys:
            if k[0] == "pow" and w[k[1]] == c:
                nuc_rows.append(image[tail_index[k]])
            elif k[0] == "comm" and w[k[1]] == c and w[k[2]] == 1:
                nuc_rows.append(image[tail_index[k]])
    N, _ = rref(nuc_rows, p, m) if nuc_rows else (np.zeros((0, m), dtype=np.int64), [])
    return Cover(G, star, m, N, [keys[t] for t in free])


def ranks(G: PcPresentation) -> tuple:
    """``(h1, h2, nuclear rank)``."""
    if G.n == 0:
        return (0, 0, 0)
    require_standard(G)
    cov = p_cover(G)
    d = sum(1 for x in G.definitions if x is None)
    return (d, cov.mult_rank, cov.nuc_rank)
