"""The mass-decorated, viability-pruned descendant tree."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..homs import canonical_key, is_isomorphic
from ..catalog import elementary_abelian
from ..mass import TypeZ, count_A_Z
from ..pcgroup.classes import class_data
from ..pcgroup.presentation import PcPresentation, format_pc, parse_pc
from ..pcgroup.subgroups import (Quotient, abelianization, closure, derived_subgroup,
                                 p_class)
from ..pcgroup.table import CapacityError
from .cover import p_cover
from .descendants import (DEFAULT_SUBSPACE_BUDGET, descendant_aut, immediate_descendants)
from .standard import standardize


@dataclass
class TreeNode:
    group: PcPresentation
    mass: Fraction
    mult_rank: int
    nuc_rank: int
    terminal: bool
    order_exponent: int
    p_class: int
    children: list = field(default_factory=list)
    status: str = "pending"          # expanded | terminal | order-bound | budget: ... | pruned
    complete: bool = False           # all descendants within the bound were computed
    aut_order: int = 0
    name: str = ""
    full: bool = False               # abelianization equals W(Z)
    aut: object = None
    cover: object = None

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "order_exponent": self.order_exponent,
            "p_class": self.p_class,
            "mass": f"{self.mass.numerator}/{self.mass.denominator}",
            "mult_rank": self.mult_rank,
            "nuc_rank": self.nuc_rank,
            "terminal": self.terminal,
            "status": self.status,
            "aut_order": self.aut_order,
            "full": self.full,
            "group": format_pc(self.group),
            "children": [c.to_json() for c in self.children],
        }

    @classmethod
    def from_json(cls, d) -> "TreeNode":
        num, den = d["mass"].split("/")
        node = cls(parse_pc(d["group"]), Fraction(int(num), int(den)), d["mult_rank"],
                   d["nuc_rank"], d["terminal"], d["order_exponent"], d["p_class"],
                   status=d["status"], aut_order=d.get("aut_order", 0), name=d.get("name", ""),
                   full=d.get("full", False))
        node.children = [cls.from_json(c) for c in d["children"]]
        return node


@dataclass
class TreeResult:
    root: TreeNode
    anomalies: list = field(default_factory=list)
    conservation: list = field(default_factory=list)   # (name, parent mass, child sum, ok)
    budget_reports: list = field(default_factory=list)

    def nodes(self):
        return list(self.root.walk())

    def to_json(self) -> dict:
        return {
            "tree": self.root.to_json(),
            "anomalies": self.anomalies,
            "conservation": [
                {"vertex": n, "mass": str(a), "children": str(b), "ok": ok}
                for n, a, b, ok in self.conservation],
            "budget": self.budget_reports,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def is_viable(G: PcPresentation, Z: TypeZ, g: int | None = None) -> bool:
    """Right abelianization, ``h2 - nuclear <= g`` and nonzero mass."""
    if g is None:
        g = Z.g
    if G.p != Z.p:
        return False
    if tuple(abelianization(G).invariants) != Z.w.invariants():
        return False
    if G.weights is None:
        G = standardize(G, with_aut=False).group
    cov = p_cover(G)
    if cov.mult_rank - cov.nuc_rank > g:
        return False
    return count_A_Z(G, Z) > 0


def vertex_type(Z: TypeZ, c: int) -> TypeZ:
    """Type used at a vertex of p-class c: W is replaced by ``W / p^c W``,
    the abelianization of the class-c quotient of any group with
    abelianization W."""
    return Z.truncated(c)


def _vertex_mass(G, Z: TypeZ, c: int) -> int:
    Zc = vertex_type(Z, c)
    if tuple(abelianization(G).invariants) != Zc.w.invariants():
        return 0
    return count_A_Z(G, Zc)


def _node(G, Z, aut_order, name, A=None) -> TreeNode:
    cov = p_cover(G)
    c = p_class(G)
    if A is None:
        A = _vertex_mass(G, Z, c)
    node = TreeNode(G, Fraction(A, aut_order), cov.mult_rank, cov.nuc_rank,
                    cov.nuc_rank == 0, G.n, c, aut_order=aut_order, name=name)
    node.full = tuple(abelianization(G).invariants) == Z.w.invariants()
    node.cover = cov
    return node


def explore_tree(root: PcPresentation | None, Z: TypeZ, g: int | None = None,
                 max_order_exponent: int = 8, budget: int = DEFAULT_SUBSPACE_BUDGET,
                 check_anomalies: bool = True, rng=None) -> TreeResult:
    """Breadth-first viable descendant tree up to order ``p^max_order_exponent``.

    The default root is the elementary abelian group of the rank of W(Z).
    A vertex of p-class c is kept when its abelianization is ``W / p^c W``,
    its multiplicator and nuclear ranks differ by at most g, and its mass
    for the correspondingly truncated type is nonzero; for c large enough
    this is exactly viability.  A vertex whose expansion exceeds the
    subspace budget is marked and reported, never dropped.
    """
    if g is None:
        g = Z.g
    if rng is None:
        rng = np.random.default_rng(0x7EE)
    if root is None:
        d = sum(1 for w in Z.w.orders if w > 1)
        root = elementary_abelian(Z.p, d)
    sf = standardize(root, rng=rng)
    top = _node(sf.group, Z, sf.aut.order, "r")
    top.aut = sf.aut
    result = TreeResult(top)
    if top.mass == 0 or top.mult_rank - top.nuc_rank > g:
        top.status = "not viable"
        return result
    queue = deque([top])
    while queue:
        node = queue.popleft()
        G, p = node.group, node.group.p
        if node.terminal:
            node.status = "terminal"
            node.complete = True
            continue
        room = max_order_exponent - G.n
        if room < 1:
            node.status = "order-bound"
            continue
        steps = list(range(1, min(node.nuc_rank, room) + 1))
        try:
            if node.aut is None:
                raise AssertionError("vertex without automorphism group")
            descs = immediate_descendants(G, node.aut, steps=steps, cover=node.cover,
                                          with_aut=False, rng=rng, budget=budget)
        except CapacityError as exc:
            node.status = f"budget: {exc}"
            result.budget_reports.append({"vertex": node.name, "order_exponent": G.n,
                                          "message": str(exc)})
            continue
        node.status = "expanded"
        node.complete = len(steps) == node.nuc_rank
        mats = None
        kids = []
        for dsc in descs:
            D = dsc.group
            A = _vertex_mass(D, Z, p_class(D))
            if A == 0:
                continue
            child = _node(D, Z, dsc.aut_order, "", A)
            if child.mult_rank - child.nuc_rank > g:
                continue
            kids.append((child, dsc))
        kids.sort(key=lambda t: (t[0].order_exponent, format_pc(t[0].group)))
        for i, (child, dsc) in enumerate(kids):
            child.name = f"{node.name}.{i + 1}"
            node.children.append(child)
            if not child.terminal and child.order_exponent < max_order_exponent:
                if mats is None:
                    mats = node.aut.action_matrices(node.cover) if node.aut.perms else []
                child.aut = descendant_aut(node.aut, mats, dsc.orbit, child.group,
                                           node.cover, rng)
                queue.append(child)
            else:
                child.status = "terminal" if child.terminal else "order-bound"
                child.complete = child.terminal
        node.aut = None               # release memory; not needed further
    if check_anomalies:
        result.anomalies = find_anomalies(result.root, budget=budget)
    hits = [a for a in result.anomalies if a["status"] == "anomaly"]
    anomalous = {a["quotient"] for a in hits} | {a["cover"] for a in hits}
    for node in result.root.walk():
        if node.status == "expanded" and node.complete:
            s = sum((c.mass for c in node.children), Fraction(0))
            involved = node.name in anomalous or any(c.name in anomalous for c in node.children)
            result.conservation.append((node.name, node.mass, s,
                                        s == node.mass or involved))
    return result


# ---------------------------------------------------------------------------
def _central_quotients(H):
    """Quotients of H by order-p central subgroups lying in [H, H]."""
    T = H.table()
    cd = class_data(H)
    Dsub = derived_subgroup(H)
    central = [int(cd.reps[c]) for c in range(len(cd)) if cd.sizes[c] == 1]
    seen = set()
    out = []
    for i in central:
        x = T.element(i)
        if not any(x) or H.power(x, H.p) != H.identity() or not Dsub.contains(x):
            continue
        N = closure(H, [x])
        key = tuple(sorted(N.pcs.items()))
        if key in seen:
            continue
        seen.add(key)
        out.append(Quotient(H, N).Q)
    return out


def is_quotient_of(big: PcPresentation, small: PcPresentation, limit: int = 5000) -> bool:
    """Whether ``small`` is a quotient of ``big`` by a normal subgroup inside
    the derived subgroup (searching chains of central quotients)."""
    target_n = small.n
    cls = p_class(small)
    level = {canonical_key(big): big}
    touched = 0
    while level:
        H0 = next(iter(level.values()))
        if H0.n == target_n:
            return any(is_isomorphic(H, small) for H in level.values())
        nxt = {}
        for H in level.values():
            for Q in _central_quotients(H):
                touched += 1
                if touched > limit:
                    raise CapacityError("quotient search budget exhausted")
                if p_class(Q) < cls:
                    continue
                nxt.setdefault(canonical_key(Q), Q)
        level = nxt
    return False


def find_anomalies(root: TreeNode, budget: int = 5000) -> list:
    """Pairs of saved vertices of equal p-class where the smaller one is a
    quotient of the larger one."""
    by_class = {}
    for node in root.walk():
        by_class.setdefault(node.p_class, []).append(node)
    out = []
    for c, nodes in sorted(by_class.items()):
        for a in nodes:
            for b in nodes:
                if a.order_exponent >= b.order_exponent:
                    continue
                try:
                    hit = is_quotient_of(b.group, a.group, limit=budget)
                except CapacityError:
                    out.append({"quotient": a.name, "cover": b.name, "status": "unchecked"})
                    continue
                if hit:
                    out.append({"quotient": a.name, "cover": b.name, "status": "anomaly"})
    return out
