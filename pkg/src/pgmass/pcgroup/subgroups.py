"""Subgroups via induced pc sequences, quotients and the lower p-central series.

An induced pc sequence for a subgroup H is a map ``depth -> element`` where
each element has its first nonzero exponent (at ``depth``) equal to 1.  Every
element of H is then uniquely a product ``h_1^e_1 h_2^e_2 ...`` in increasing
depth.
"""
from __future__ import annotations

from collections import deque

from .presentation import PcPresentation
from .abelian import AbelianInvariants, abelian_group_from_relations


def depth(x) -> int:
    for k, e in enumerate(x):
        if e:
            return k
    return len(x)


class Subgroup:
    """A subgroup of ``G`` given by an induced pc sequence."""

    def __init__(self, G, pcs: dict):
        self.G = G
        self.pcs = dict(sorted(pcs.items()))

    @property
    def order(self) -> int:
        return self.G.p ** len(self.pcs)

    @property
    def rank(self) -> int:
        return len(self.pcs)

    def leading(self) -> list:
        return list(self.pcs)

    def elements_list(self) -> list:
        return list(self.pcs.values())

    def sift(self, x):
        """Reduce ``x`` by the sequence from the left; returns ``(exps, rest)``
        with ``x = prod h^e * rest`` and rest having no leading depth in H."""
        G = self.G
        exps = {}
        for d, h in self.pcs.items():
            e = x[d]
            if e:
                exps[d] = e
                x = G.mul(G.power(h, G.p - e), x)
        return exps, x

    def contains(self, x) -> bool:
        G = self.G
        for d, h in self.pcs.items():
            e = x[d]
            if e:
                x = G.mul(G.power(h, G.p - e), x)
        return not any(x)

    def coset_rep(self, x):
        """Canonical representative of ``x N`` (zeros at leading positions);
        valid for normal subgroups."""
        G = self.G
        for d, h in self.pcs.items():
            e = x[d]
            if e:
                x = G.mul(x, G.power(h, G.p - e))
        return x

    def __contains__(self, x):
        return self.contains(x)

    def __repr__(self):
        return f"Subgroup(order={self.order})"


def _normalize(G, x):
    d = depth(x)
    lead = x[d]
    if lead != 1:
        x = G.power(x, pow(lead, -1, G.p))
    return d, x


def closure(G, gens, pcs=None, normal: bool = False) -> Subgroup:
    """Subgroup generated by ``gens`` (normal closure when ``normal``),
    optionally extending an existing induced sequence ``pcs``."""
    pcs = dict(pcs or {})
    queue = deque(tuple(g) for g in gens)
    group_gens = [G.gen(i) for i in range(G.n)] if normal else []
    while queue:
        x = queue.popleft()
        # sift from the left
        while True:
            d = depth(x)
            if d == G.n:
                break
            if d in pcs:
                x = G.mul(G.power(pcs[d], G.p - x[d]), x)
                continue
            d, x = _normalize(G, x)
            pcs[d] = x
            queue.append(G.power(x, G.p))
            for y in list(pcs.values()):
                if y is not x:
                    queue.append(G.comm(x, y))
            for g in group_gens:
                queue.append(G.comm(x, g))
            break
    return Subgroup(G, pcs)


def subgroup(G, gens) -> Subgroup:
    return closure(G, gens)


def normal_closure(G, gens) -> Subgroup:
    return closure(G, gens, normal=True)


def whole_group(G) -> Subgroup:
    return Subgroup(G, {i: G.gen(i) for i in range(G.n)})


def trivial_subgroup(G) -> Subgroup:
    return Subgroup(G, {})


def commutator_subgroup(G, H: Subgroup, K: Subgroup) -> Subgroup:
    """``[H, K]`` for normal subgroups H, K."""
    gens = [G.comm(h, k) for h in H.elements_list() for k in K.elements_list()]
    return normal_closure(G, gens)


def derived_subgroup(G) -> Subgroup:
    gens = [G.comm(G.gen(i), G.gen(j)) for i in range(G.n) for j in range(i)]
    return normal_closure(G, gens)


def frattini_subgroup(G) -> Subgroup:
    gens = [G.comm(G.gen(i), G.gen(j)) for i in range(G.n) for j in range(i)]
    gens += [G.power(G.gen(i), G.p) for i in range(G.n)]
    return normal_closure(G, gens)


def lower_p_central_series(G) -> list:
    """Terms ``P_1 = G > P_2 > ... > P_{c+1} = 1`` as subgroups."""
    series = [whole_group(G)]
    gens = [G.gen(i) for i in range(G.n)]
    while series[-1].order > 1:
        P = series[-1]
        new = [G.comm(x, g) for x in P.elements_list() for g in gens]
        new += [G.power(x, G.p) for x in P.elements_list()]
        series.append(normal_closure(G, new))
    return series


def p_class(G) -> int:
    return len(lower_p_central_series(G)) - 1


class Quotient:
    """``G / N`` with the projection map."""

    def __init__(self, G, N: Subgroup):
        self.G, self.N = G, N
        lead = set(N.pcs)
        self.keep = [k for k in range(G.n) if k not in lead]
        pos = {k: t for t, k in enumerate(self.keep)}
        m = len(self.keep)
        powers, comms = {}, {}
        for t, a in enumerate(self.keep):
            powers[t] = self.project(G.power(G.gen(a), G.p))
            for u in range(t):
                b = self.keep[u]
                c = self.project(G.comm(G.gen(a), G.gen(b)))
                if any(c):
                    comms[(t, u)] = c
        weights = None
        if G.weights is not None:
            weights = [G.weights[a] for a in self.keep]
        self.Q = PcPresentation(G.p, m, powers, comms, weights=weights, check=True)

    def project(self, x) -> tuple:
        y = self.N.coset_rep(tuple(x))
        return tuple(y[k] for k in self.keep)

    def lift(self, y) -> tuple:
        x = [0] * self.G.n
        for t, k in enumerate(self.keep):
            x[k] = y[t]
        return tuple(x)


def quotient(G, normal_generators) -> Quotient:
    return Quotient(G, normal_closure(G, list(normal_generators)))


def subgroup_presentation(G, H: Subgroup) -> PcPresentation:
    """Pc presentation of H on its induced sequence."""
    hs = H.elements_list()
    ds = list(H.pcs)
    m = len(hs)

    def express(x):
        v = [0] * m
        for t, h in enumerate(hs):
            e = x[ds[t]]
            if e:
                v[t] = e
                x = G.mul(G.power(h, G.p - e), x)
        assert not any(x), "element not in subgroup"
        return tuple(v)

    powers = {t: express(G.power(h, G.p)) for t, h in enumerate(hs)}
    comms = {}
    for t in range(m):
        for u in range(t):
            c = express(G.comm(hs[t], hs[u]))
            if any(c):
                comms[(t, u)] = c
    return PcPresentation(G.p, m, powers, comms)


def abelianization(G) -> AbelianInvariants:
    """Invariants of ``G/[G,G]`` and the image of every pc generator."""
    D = derived_subgroup(G)
    Q = Quotient(G, D)
    A = Q.Q
    rows = []
    for t in range(A.n):
        row = [0] * A.n
        row[t] = A.p
        for k, e in enumerate(A.powers[t]):
            row[k] -= e
        rows.append(row)
    inv = abelian_group_from_relations(rows, A.n)
    proj = []
    for i in range(G.n):
        y = Q.project(G.gen(i))
        coords = [0] * len(inv.invariants)
        for t, e in enumerate(y):
            for j in range(len(coords)):
                coords[j] += e * inv.projection[t][j]
        proj.append(tuple(c % d for c, d in zip(coords, inv.invariants)))
    return AbelianInvariants(inv.invariants, proj)


def frattini_rank(G) -> int:
    return G.n - frattini_subgroup(G).rank


def maximal_subgroups(G) -> list:
    """The index-p subgroups, one per hyperplane of the Frattini quotient."""
    Phi = frattini_subgroup(G)
    Q = Quotient(G, Phi)
    d = Q.Q.n
    p = G.p
    result = []
    # hyperplanes of F_p^d <-> nonzero functionals up to scalar (first nonzero = 1)
    import itertools
    for f in itertools.product(range(p), repeat=d):
        if not any(f) or f[depth(f)] != 1:
            continue
        gens = list(Phi.elements_list())
        # basis of kernel of f
        basis = []
        for v in itertools.product(range(p), repeat=d):
            if any(v) and sum(a * b for a, b in zip(f, v)) % p == 0:
                basis.append(v)
        for v in basis:
            gens.append(Q.lift(v))
        result.append(closure(G, gens))
    return result


def maximal_subgroups_abelianizations(G) -> list:
    return [abelianization(subgroup_presentation(G, M)) for M in maximal_subgroups(G)]
