"""Immediate descendants: orbits of allowable subspaces of the multiplicator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..linalg import rref, rank, subspaces, count_subspaces, subspace_key
from ..pcgroup.presentation import PcPresentation
from ..pcgroup.table import CapacityError
from .autgroup import PcAutGroup, perm_inverse, reduce_generators, hom_array, full_images
from .cover import Cover, p_cover

DEFAULT_SUBSPACE_BUDGET = 2_000_000


def descendant_presentation(cover: Cover, U) -> PcPresentation:
    """``G*/U`` for a subspace U (rows in multiplicator coordinates)."""
    return descendant_with_reducer(cover, U)[0]


def descendant_with_reducer(cover: Cover, U):
    """``(G*/U, reduce)`` where ``reduce`` maps elements of G* to G*/U."""
    star, G = cover.star, cover.G
    p, n, m = star.p, G.n, cover.mult_rank
    if len(U):
        R, piv = rref(U, p, m)
    else:
        R, piv = np.zeros((0, m), dtype=np.int64), []
    keep = [j for j in range(m) if j not in piv]

    def reduce(v):
        t = np.array(v[n:], dtype=np.int64)
        for r, c in enumerate(piv):
            if t[c]:
                t = (t - t[c] * R[r]) % p
        return list(v[:n]) + [int(t[j]) for j in keep]

    N = n + len(keep)
    powers = {i: reduce(star.powers[i]) for i in range(n)}
    comms = {}
    for (i, j), v in star.comms.items():
        w = reduce(v)
        if any(w):
            comms[(i, j)] = w
    weights = list(star.weights[:n]) + [star.weights[n + j] for j in keep]
    defs = list(star.definitions[:n]) + [star.definitions[n + j] for j in keep]
    return PcPresentation(p, N, powers, comms, weights, defs, check=False), \
        (lambda x: tuple(reduce(x)))


def allowable(cover: Cover, key) -> bool:
    m = cover.mult_rank
    rows = list(key) + [list(r) for r in cover.nucleus]
    return rank(rows, cover.star.p) == m if rows else m == 0


def allowable_subspaces(cover: Cover, dims, budget=DEFAULT_SUBSPACE_BUDGET):
    p, m = cover.star.p, cover.mult_rank
    total = sum(count_subspaces(m, k, p) for k in dims)
    if total > budget:
        raise CapacityError(
            f"{total} subspaces of the {m}-dimensional multiplicator exceed budget {budget}")
    out = []
    for k in dims:
        for key in subspaces(m, k, p):
            if allowable(cover, key):
                out.append(key)
    return out


@dataclass
class Descendant:
    group: PcPresentation
    step: int
    U: tuple
    aut: PcAutGroup | None
    orbit_size: int
    aut_order: int = 0
    orbit: dict | None = None


def _act(key, A, p, m):
    if not key:
        return key
    return subspace_key(np.array(key, dtype=np.int64) @ A % p, p, m)


def orbit_data(keys, mats, p, m):
    """Partition ``keys`` into orbits; returns list of (rep, orbit dict
    key -> (parent_key, gen_index))."""
    remaining = set(keys)
    orbits = []
    for k0 in sorted(keys):
        if k0 not in remaining:
            continue
        tree = orbit_of(k0, mats, p, m)
        for k in tree:
            remaining.discard(k)
        orbits.append((k0, tree))
    return orbits


def stabilizer_perms(aut: PcAutGroup, mats, tree, p, m) -> list:
    """Schreier generators of the stabilizer of the orbit root."""
    gens = aut.perms
    t, tinv = {}, {}
    for k, par in tree.items():          # parents are inserted before children
        if par is None:
            t[k] = tinv[k] = aut.identity()
        else:
            V, gi = par
            t[k] = gens[gi][t[V]]
            tinv[k] = perm_inverse(t[k])
    out = []
    for V in tree:
        for gi, A in enumerate(mats):
            W = _act(V, A, p, m)
            s = tinv[W][gens[gi][t[V]]]
            out.append(s)
    return out


def central_automorphisms(D: PcPresentation, layer_start: int) -> list:
    """Images of defining generators for g_i -> g_i * l_j (l_j in the top layer)."""
    defs = [k for k, d in enumerate(D.definitions) if d is None]
    out = []
    for i in defs:
        for j in range(layer_start, D.n):
            imgs = []
            for k in defs:
                v = list(D.gen(k))
                if k == i:
                    v[j] = 1
                imgs.append(tuple(v))
            out.append(imgs)
    return out


def immediate_descendants(G: PcPresentation, aut: PcAutGroup | None = None, steps=None,
                          max_relators: int | None = None, cover: Cover | None = None,
                          with_aut: bool = True, rng=None,
                          budget: int = DEFAULT_SUBSPACE_BUDGET) -> list:
    """One descendant per Aut(G)-orbit of allowable subspaces.

    ``steps`` restricts the step sizes s = dim M - dim U; ``max_relators``
    bounds dim U (the relator-rank pruning used for viable groups).
    """
    if cover is None:
        cover = p_cover(G)
    p, m, nuc = G.p, cover.mult_rank, cover.nuc_rank
    if nuc == 0:
        return []
    dims = [m - s for s in range(1, nuc + 1)]
    if steps is not None:
        dims = [m - s for s in steps if 1 <= s <= nuc]
    if max_relators is not None:
        dims = [k for k in dims if k <= max_relators]
    keys = allowable_subspaces(cover, sorted(dims), budget)
    if aut is None:
        from .standard import automorphism_group_lifted
        aut = automorphism_group_lifted(G)
    mats = aut.action_matrices(cover) if aut.perms else []
    if rng is None:
        rng = np.random.default_rng(0x5EED)
    out = []
    for rep, tree in orbit_data(keys, mats, p, m):
        D = descendant_presentation(cover, np.array(rep, dtype=np.int64).reshape(len(rep), m))
        daut = descendant_aut(aut, mats, tree, D, cover, rng) if with_aut else None
        s = m - len(rep)
        order = aut.order // len(tree) * p ** (len(aut.defs) * s)
        out.append(Descendant(D, s, rep, daut, len(tree), order, tree))
    return out


def descendant_aut(aut: PcAutGroup, mats, tree, D, cover, rng) -> PcAutGroup:
    """Aut(G*/U) from the stabilizer of U (the root of ``tree``) and the
    central automorphisms of the new layer."""
    p, m = cover.star.p, cover.mult_rank
    s = D.n - cover.G.n
    stab_order = aut.order // len(tree)
    schreier = stabilizer_perms(aut, mats, tree, p, m) if mats else []
    stab = reduce_generators(aut, schreier, stab_order, rng) if schreier else []
    d = len(aut.defs)
    lifted = [[tuple(v) + (0,) * s for v in aut.images(g)] for g in stab]
    central = central_automorphisms(D, cover.G.n)
    return PcAutGroup.from_images(D, stab_order * p ** (d * s), lifted + central)


def orbit_of(key, mats, p, m, cap: int | None = None) -> dict:
    """Orbit of ``key`` as a Schreier tree ``point -> (parent, generator)``."""
    tree = {key: None}
    queue = [key]
    while queue:
        V = queue.pop()
        for gi, A in enumerate(mats):
            W = _act(V, A, p, m)
            if W not in tree:
                tree[W] = (V, gi)
                queue.append(W)
                if cap is not None and len(tree) > cap:
                    raise CapacityError(f"orbit exceeds {cap} subspaces")
    return tree
