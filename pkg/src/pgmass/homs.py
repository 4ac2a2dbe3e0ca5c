"""Homomorphisms, isomorphism testing and automorphism groups of p-groups.

Isomorphism is decided through a canonical presentation: along the
standardization chain the kernel chosen at each covering step is the least
point of its orbit under the automorphism group of the previous quotient.
Brute-force image search is kept for small groups and cross-checks.
"""
from __future__ import annotations

import hashlib
import itertools
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .linalg import rank
from .pcgroup.classes import class_data
from .pcgroup.presentation import PcPresentation, format_pc
from .pcgroup.subgroups import Quotient, abelianization, frattini_subgroup
from .pcgroup.table import CapacityError
from .pgen.autgroup import eval_word, full_images, hom_array, perm_inverse
from .pgen.standard import automorphism_group_lifted, canonical_form, standardize

BRUTE_TUPLE_BUDGET = 200_000


def group_hash(G: PcPresentation) -> str:
    return hashlib.sha256(format_pc(G).encode()).hexdigest()[:16]


class HomomorphismError(ValueError):
    """Images do not define a homomorphism."""


def _relations_hold(G, H, imgs) -> bool:
    p = G.p
    for i in range(G.n):
        if H.power(imgs[i], p) != eval_word(H, imgs, G.powers[i]):
            return False
    for i in range(G.n):
        for j in range(i):
            if H.comm(imgs[i], imgs[j]) != eval_word(H, imgs, G.comm_word(i, j)):
                return False
    return True


class GroupMap:
    """Homomorphism given by the images of the pc generators of the domain."""

    def __init__(self, domain: PcPresentation, codomain: PcPresentation, images, check=True):
        self.domain = domain
        self.codomain = codomain
        self.images = [tuple(int(v) for v in x) for x in images]
        if len(self.images) != domain.n:
            raise HomomorphismError("one image per domain generator is required")
        if check and not _relations_hold(domain, codomain, self.images):
            raise HomomorphismError("images violate a defining relation")

    def __call__(self, x):
        return eval_word(self.codomain, self.images, x)

    def is_surjective(self) -> bool:
        return _generates(self.codomain, self.images)

    def is_bijective(self) -> bool:
        return self.domain.order == self.codomain.order and self.is_surjective()

    def compose(self, other: "GroupMap") -> "GroupMap":
        """``other`` after ``self``."""
        return GroupMap(self.domain, other.codomain, [other(x) for x in self.images], check=False)

    def to_json(self) -> dict:
        return {"domain_hash": group_hash(self.domain),
                "codomain_hash": group_hash(self.codomain),
                "images": [list(x) for x in self.images]}

    def __eq__(self, other):
        return isinstance(other, GroupMap) and self.images == other.images

    def __hash__(self):
        return hash(tuple(self.images))

    def __repr__(self):
        return f"GroupMap({self.images})"


def _frattini_quotient(H):
    fq = getattr(H, "_frattini_q", None)
    if fq is None:
        fq = Quotient(H, frattini_subgroup(H))
        H._frattini_q = fq
    return fq


def _generates(H, elements) -> bool:
    if H.n == 0:
        return True
    fq = _frattini_quotient(H)
    d = fq.Q.n
    rows = [list(fq.project(tuple(x))) for x in elements]
    return rank(rows, H.p) == d if rows else d == 0


def minimal_generators(G) -> list:
    lead = set(frattini_subgroup(G).pcs)
    return [G.gen(k) for k in range(G.n) if k not in lead]


# ---------------------------------------------------------------------------
def homomorphisms(domain: PcPresentation, codomain: PcPresentation,
                  class_constraints=None, surjective_only: bool = False,
                  budget: int = BRUTE_TUPLE_BUDGET) -> list:
    """All homomorphisms ``domain -> codomain`` as ``(GroupMap, surjective)``.

    ``class_constraints`` maps domain pc-generator indices (or a full list,
    ``None`` meaning free) to codomain classes that the image must lie in.
    """
    H = codomain
    cd = class_data(H)
    cons = {}
    if class_constraints is not None:
        items = (class_constraints.items() if isinstance(class_constraints, dict)
                 else enumerate(class_constraints))
        for k, c in items:
            if c is None:
                continue
            lab = cd.label_of(c.representative)
            if cd.conj_class(lab) != c:
                raise ValueError(f"{c} is not a conjugacy class of the codomain")
            cons[k] = lab
    sf = standardize(domain, with_aut=False)
    Q = sf.group
    TQ, TD = Q.table(), domain.table()
    iso = hom_array(TQ, TD, sf.images)
    back = perm_inverse(iso)
    # domain generators as elements of Q
    words = [TQ.element(int(back[TD.index(domain.gen(k))])) for k in range(domain.n)]
    d = sum(1 for x in Q.definitions if x is None)
    TH = H.table()
    if TH.size ** d > budget:
        raise CapacityError(f"{TH.size}^{d} image tuples exceed the search budget {budget}")
    elements = [TH.element(i) for i in range(TH.size)]
    out = []
    for tup in itertools.product(elements, repeat=d):
        imgs = full_images(Q, H, tup)
        if not _relations_hold(Q, H, imgs):
            continue
        gimgs = [eval_word(H, imgs, w) for w in words]
        if any(cd.label_of(gimgs[k]) != lab for k, lab in cons.items()):
            continue
        surj = _generates(H, tup)
        if surjective_only and not surj:
            continue
        out.append((GroupMap(domain, H, gimgs, check=False), surj))
    return out


# ---------------------------------------------------------------------------
def fingerprint(G: PcPresentation) -> tuple:
    """Cheap isomorphism invariants."""
    if G.n == 0:
        return (G.p, 0)
    cd = class_data(G)
    orders = G.table().orders()
    rep_orders = orders[cd.reps]
    cls = Counter(zip(cd.sizes.tolist(), rep_orders.tolist()))
    pw = cd.power_labels(G.p)
    pstat = Counter(zip(cd.sizes.tolist(), cd.sizes[pw].tolist()))
    return (G.p, G.n, tuple(abelianization(G).invariants), int(orders.max()),
            tuple(sorted(Counter(orders.tolist()).items())),
            tuple(sorted(cls.items())), tuple(sorted(pstat.items())))


def canonical_key(G: PcPresentation) -> str:
    """Presentation text of the canonical form (equal iff isomorphic)."""
    key = getattr(G, "_canonical_key", None)
    if key is None:
        if G.n == 0:
            key = f"{G.p} 0\n"
        else:
            key = format_pc(_canonical(G).group)
        G._canonical_key = key
    return key


def _canonical(G):
    sf = getattr(G, "_canonical_sf", None)
    if sf is None:
        sf = canonical_form(G)
        G._canonical_sf = sf
    return sf


def isomorphism(G: PcPresentation, H: PcPresentation):
    """A GroupMap witnessing ``G ~= H``, or ``None``."""
    if G.p != H.p or G.n != H.n:
        return None
    if G.n == 0:
        return GroupMap(G, H, [])
    if fingerprint(G) != fingerprint(H):
        return None
    if canonical_key(G) != canonical_key(H):
        return None
    sG, sH = _canonical(G), _canonical(H)
    TC = sG.group.table()
    toG = hom_array(TC, G.table(), sG.images)
    toH = hom_array(sH.group.table(), H.table(), sH.images)
    fromG = perm_inverse(toG)
    TG, TH = G.table(), H.table()
    imgs = [TH.element(int(toH[fromG[TG.index(G.gen(k))]])) for k in range(G.n)]
    return GroupMap(G, H, imgs)


def is_isomorphic(G: PcPresentation, H: PcPresentation) -> bool:
    return isomorphism(G, H) is not None


# ---------------------------------------------------------------------------
@dataclass
class AutGroup:
    order: int
    generators: list          # GroupMap automorphisms


def automorphism_group(G: PcPresentation, method: str = "lift") -> AutGroup:
    """Exact ``|Aut(G)|`` with generators; ``method`` is ``lift`` (orbit-
    stabilizer along the standardization chain) or ``brute`` (image search)."""
    if method == "brute":
        return automorphism_group_brute(G)
    cached = getattr(G, "_aut", None)
    if cached is not None:
        return cached
    A = automorphism_group_lifted(G)
    gens = []
    T = G.table()
    for a in A.perms:
        gens.append(GroupMap(G, G, [T.element(int(a[T.index(G.gen(k))])) for k in range(G.n)],
                             check=False))
    out = AutGroup(A.order, gens)
    G._aut = out
    return out


def automorphism_group_brute(G: PcPresentation, budget: int = BRUTE_TUPLE_BUDGET) -> AutGroup:
    """Count minimal generating tuples satisfying the relations of a standard
    form (each is the image tuple of exactly one automorphism)."""
    if G.n == 0:
        return AutGroup(1, [])
    sf = standardize(G, with_aut=False)
    Q = sf.group
    d = sum(1 for x in Q.definitions if x is None)
    T = G.table()
    fq = _frattini_quotient(G)
    proj = np.array([fq.project(T.element(i)) for i in range(T.size)], dtype=np.int64)
    nonphi = [i for i in range(T.size) if proj[i].any()]
    if len(nonphi) ** d > budget:
        raise CapacityError(f"{len(nonphi)}^{d} candidate tuples exceed the search budget {budget}")
    maps = []
    TQ = Q.table()
    iso = hom_array(TQ, T, sf.images)
    back = perm_inverse(iso)
    words = [TQ.element(int(back[T.index(G.gen(k))])) for k in range(G.n)]
    for tup in itertools.product(nonphi, repeat=d):
        if rank(proj[list(tup)].tolist(), G.p) < d:
            continue
        elems = [T.element(i) for i in tup]
        imgs = full_images(Q, G, elems)
        if _relations_hold(Q, G, imgs):
            maps.append(GroupMap(G, G, [eval_word(G, imgs, w) for w in words], check=False))
    return AutGroup(len(maps), maps)
