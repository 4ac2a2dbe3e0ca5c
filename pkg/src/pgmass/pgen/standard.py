"""Standard presentations, automorphism groups by lifting, and p-quotients.

Any p-group G is reached from ``(Z/p)^d`` by a chain of immediate
descendants ``Q_{k+1} = Q_k*/U_k`` where ``U_k`` is the kernel of the map from
the multiplicator of ``Q_k`` onto ``P_{k+1}(G)/P_{k+2}(G)``.  Carrying
``Aut(Q_k)`` along the chain (stabilizer of ``U_k`` plus central
automorphisms) yields ``Aut(G)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..catalog import elementary_abelian
from ..linalg import left_nullspace, rref, subspace_key
from ..pcgroup.presentation import PcPresentation
from ..pcgroup.subgroups import (Quotient, closure, lower_p_central_series,
                                 Subgroup)
from .autgroup import PcAutGroup, eval_word, full_images, hom_array, perm_inverse
from .cover import p_cover
from .descendants import descendant_presentation, descendant_aut, orbit_of, allowable


@dataclass
class StandardForm:
    group: PcPresentation          # standard presentation
    images: list                   # image in the original group of each pc generator
    aut: PcAutGroup | None


def _layer_coordinates(G, series, k):
    """Function mapping x in P_{k+1}(G) to coordinates in P_{k+1}/P_{k+2}."""
    Q = Quotient(G, series[k + 1])
    L = closure(Q.Q, [Q.project(x) for x in series[k].elements_list()])
    depths = list(L.pcs)

    def coords(x):
        y = Q.project(x)
        exps, rest = L.sift(y)
        assert not any(rest), "element outside the layer"
        return [exps.get(dd, 0) for dd in depths]
    return coords, len(depths)


def standardize(G: PcPresentation, gens=None, with_aut: bool = True, rng=None,
                canonical: bool = False, orbit_cap: int = 2_000_000) -> StandardForm:
    """Standard presentation of ``G`` (optionally on a given minimal generating
    tuple), with the isomorphism and, if requested, the automorphism group.

    With ``canonical`` the kernel chosen at every step is the least key in
    its Aut-orbit, so isomorphic groups get identical presentations.
    """
    if canonical:
        with_aut = True
    p = G.p
    if rng is None:
        rng = np.random.default_rng(0xA07)
    if G.n == 0:
        Q = PcPresentation(p, 0, weights=[], definitions=[])
        return StandardForm(Q, [], PcAutGroup(Q, 1, []) if with_aut else None)
    series = lower_p_central_series(G)
    if gens is None:
        lead = set(series[1].pcs)
        gens = [G.gen(k) for k in range(G.n) if k not in lead]
    gens = [tuple(g) for g in gens]
    d = len(gens)
    Q = elementary_abelian(p, d)
    aut = PcAutGroup.general_linear(Q) if with_aut else None
    k = 1
    while Q.n < G.n:
        cover = p_cover(Q)
        star = cover.star
        imgs = full_images(star, G, gens)
        coords, r = _layer_coordinates(G, series, k)
        n, m = Q.n, cover.mult_rank
        mat = [coords(imgs[n + j]) for j in range(m)]
        U = left_nullspace(mat, p) if m else np.zeros((0, 0), dtype=np.int64)
        key = subspace_key(U, p, m) if len(U) else ()
        if not allowable(cover, key) or m - len(key) != r:
            raise AssertionError("kernel of the layer map is not allowable")
        mats = aut.action_matrices(cover) if with_aut and aut.perms else []
        if with_aut:
            tree = orbit_of(key, mats, p, m, cap=orbit_cap)
        if canonical:
            best = min(tree)
            if best != key:
                gens = _move_generators(Q, G, aut, tree, best, gens)
                imgs = full_images(star, G, gens)
                mat = [coords(imgs[n + j]) for j in range(m)]
                key = subspace_key(left_nullspace(mat, p), p, m)
                assert key == best, "canonical kernel not reached"
                tree = orbit_of(key, mats, p, m, cap=orbit_cap)
        D = descendant_presentation(cover, np.array(key, dtype=np.int64).reshape(len(key), m))
        if with_aut:
            aut = descendant_aut(aut, mats, tree, D, cover, rng)
        Q = D
        k += 1
    images = full_images(Q, G, gens)
    return StandardForm(Q, images, aut)


def _move_generators(Q, G, aut, tree, target, gens):
    """Generating tuple whose layer kernel is ``target`` (an orbit point of
    the current kernel): precompose with the inverse of the automorphism
    carrying the kernel to ``target``."""
    path = []
    k = target
    while tree[k] is not None:
        V, gi = tree[k]
        path.append(gi)
        k = V
    a = aut.identity()
    for gi in reversed(path):
        a = aut.perms[gi][a]
    ainv = perm_inverse(a)
    base = full_images(Q, G, gens)
    return [eval_word(G, base, y) for y in aut.images(ainv)]


def canonical_form(G: PcPresentation, rng=None) -> StandardForm:
    return standardize(G, rng=rng, canonical=True)


def transport_aut(sf: StandardForm, G: PcPresentation, gen_elements=None) -> PcAutGroup:
    """Aut(G) on the original presentation, transported through the
    isomorphism of a standard form."""
    TQ, TG = sf.group.table(), G.table()
    iso = hom_array(TQ, TG, sf.images)
    perms = []
    for a in sf.aut.perms:
        b = np.empty_like(a)
        b[iso] = iso[a]
        perms.append(b)
    if gen_elements is None:
        defs = [k for k, dd in enumerate(sf.group.definitions) if dd is None]
        gen_elements = [sf.images[k] for k in defs]
    return PcAutGroup(G, sf.aut.order, perms, gen_elements=gen_elements)


def automorphism_group_lifted(G: PcPresentation, rng=None) -> PcAutGroup:
    sf = standardize(G, rng=rng)
    if G.n == 0:
        return sf.aut
    return transport_aut(sf, G)
