"""Automorphism groups of standard presentations, carried as permutations.

An automorphism of a standard presentation is determined by the images of
the defining generators; the images of the remaining generators follow from
the definitions.  For groups small enough to tabulate we store each
automorphism as the permutation it induces on the element indices, which
makes composition and inversion array operations.
"""
from __future__ import annotations

import math

import numpy as np

from ..linalg import gl_generators, gl_order
from ..pcgroup.table import CapacityError


def defining_indices(G) -> list:
    return [k for k, d in enumerate(G.definitions) if d is None]


def full_images(G, H, def_images) -> list:
    """Images in ``H`` of all pc generators of the standard group ``G``, given
    images of its defining generators (evaluated through the definitions)."""
    imgs = [None] * G.n
    it = iter(def_images)
    for k, d in enumerate(G.definitions):
        if d is None:
            imgs[k] = tuple(next(it))
            continue
        if d[0] == "pow":
            lhs = H.power(imgs[d[1]], G.p)
            rhs = G.powers[d[1]]
        else:
            lhs = H.comm(imgs[d[1]], imgs[d[2]])
            rhs = G.comm_word(d[1], d[2])
        if rhs[k] != 1 or any(rhs[k + 1:]):
            raise ValueError(f"definition of generator {k + 1} is not of the form u*g_k")
        u = H.identity()
        for l in range(k):
            if rhs[l]:
                u = H.mul(u, H.power(imgs[l], rhs[l]))
        imgs[k] = H.mul(H.inv(u), lhs)
    return imgs


def eval_word(H, imgs, x):
    r = H.identity()
    for k, e in enumerate(x):
        if e:
            r = H.mul(r, H.power(imgs[k], e))
    return r


def hom_array(T_dom, T_cod, imgs) -> np.ndarray:
    """Array ``phi[x]`` for every element index x of the domain table, where
    phi maps pc generator k to ``imgs[k]`` (a codomain exponent vector)."""
    cur = np.zeros(T_dom.size, dtype=np.int64)
    H = T_cod.G
    for k in range(T_dom.n):
        col = T_dom.digits[:, k]
        y = imgs[k]
        for e in range(1, T_dom.p):
            m = col >= e
            if not m.any():
                break
            cur[m] = T_cod._rmul_word(cur[m], H.letters(y))
    return cur


def perm_inverse(a: np.ndarray) -> np.ndarray:
    inv = np.empty_like(a)
    inv[a] = np.arange(len(a), dtype=a.dtype)
    return inv


class PcAutGroup:
    """Automorphism group of a standard presentation ``G``.

    ``perms`` are permutations of element indices; ``order`` is exact.
    """

    def __init__(self, G, order: int, perms: list, gen_elements=None):
        self.G = G
        self.order = int(order)
        self.perms = list(perms)
        self.T = G.table()
        if gen_elements is None:
            gen_elements = [G.gen(k) for k in defining_indices(G)]
        self.gen_elements = [tuple(x) for x in gen_elements]
        self.defs = list(range(len(self.gen_elements)))
        self._def_idx = [self.T.index(x) for x in self.gen_elements]

    @classmethod
    def from_images(cls, G, order, images_list):
        T = G.table()
        perms = [hom_array(T, T, full_images(G, G, imgs)) for imgs in images_list]
        return cls(G, order, perms)

    @classmethod
    def general_linear(cls, G):
        """Aut of an elementary abelian group on its defining generators."""
        d, p = G.n, G.p
        imgs = [[tuple(int(v) for v in A[i]) for i in range(d)] for A in gl_generators(d, p)]
        return cls.from_images(G, gl_order(d, p), imgs)

    def images(self, a: np.ndarray) -> list:
        return [self.T.element(int(a[i])) for i in self._def_idx]

    def generator_images(self) -> list:
        return [self.images(a) for a in self.perms]

    def identity(self) -> np.ndarray:
        return np.arange(self.T.size, dtype=np.int64)

    # ------------------------------------------------------------------
    def tuple_orbit_size(self, perms=None, cap: int = 2_000_000) -> int:
        """Size of the orbit of the defining-generator tuple; equals the order
        of the group generated by ``perms`` since the action is free."""
        perms = self.perms if perms is None else perms
        size = self.T.size
        pts = np.array(self._def_idx, dtype=np.int64)
        if len(pts) == 0:
            return 1
        def encode(arr):
            code = np.zeros(arr.shape[1], dtype=np.int64)
            for row in arr:
                code = code * size + row
            return code
        if size ** len(pts) >= 2**62:
            raise CapacityError("tuple encoding overflow")
        frontier = pts.reshape(-1, 1)
        seen = encode(frontier)
        while frontier.shape[1]:
            new = [np.stack([g[row] for row in frontier]) for g in perms]
            if not new:
                break
            cand = np.concatenate(new, axis=1)
            codes = encode(cand)
            codes, first = np.unique(codes, return_index=True)
            fresh = ~np.isin(codes, seen, assume_unique=True)
            frontier = cand[:, first[fresh]]
            seen = np.union1d(seen, codes[fresh])
            if len(seen) > cap:
                raise CapacityError("automorphism group too large to verify")
        return len(seen)

    def action_matrices(self, cover) -> list:
        """Matrices of the generators acting on the multiplicator of ``cover``."""
        return [action_matrix(cover, self.images(a)) for a in self.perms]


def action_matrix(cover, def_images) -> np.ndarray:
    """Matrix (rows = images of the multiplicator basis) of the lift of the
    automorphism with the given defining-generator images."""
    star = cover.star
    n = cover.G.n
    m = cover.mult_rank
    padded = [tuple(v) + (0,) * m for v in def_images]
    imgs = full_images(star, star, padded)
    A = np.zeros((m, m), dtype=np.int64)
    for j in range(m):
        v = imgs[n + j]
        if any(v[:n]):
            raise AssertionError("lifted automorphism does not preserve the multiplicator")
        A[j] = v[n:]
    return A


def random_subproducts(perms: list, k: int, rng) -> list:
    out = []
    size = len(perms[0])
    for _ in range(k):
        cur = np.arange(size, dtype=np.int64)
        for g in perms:
            if rng.random() < 0.5:
                cur = g[cur]
        out.append(cur)
    return out


def reduce_generators(aut_like_G, perms: list, target_order: int, rng, verify_cap=2_000_000):
    """Replace a (large) generating set by random subproducts, verified by the
    free action on the generating tuple when the order is small enough."""
    uniq = {}
    ident = None
    for g in perms:
        key = g.tobytes()
        if key not in uniq:
            if ident is None:
                ident = np.arange(len(g), dtype=g.dtype)
            if not np.array_equal(g, ident):
                uniq[key] = g
    perms = list(uniq.values())
    if not perms:
        return []
    k0 = 2 * max(1, math.ceil(math.log2(max(target_order, 2)))) + 10
    if len(perms) <= k0:
        cand = perms
    else:
        cand = random_subproducts(perms, k0, rng)
    if target_order <= verify_cap:
        while True:
            got = aut_like_G.tuple_orbit_size(cand)
            if got == target_order:
                break
            if got > target_order or len(cand) >= len(perms):
                raise AssertionError(
                    f"stabilizer order mismatch: generated {got}, expected {target_order}")
            cand = cand + random_subproducts(perms, k0, rng)
    return cand
