"""p-quotients of finitely presented groups.

The class-(k+1) quotient is obtained from the p-covering group of the
class-k quotient: free generators that are not defining generators get a
fresh central "image tail", the relators are evaluated in this extension,
and the resulting linear relations are echelonized with the image tails
first so that every image tail is eliminated in favour of cover tails.
The surviving layer is then spanned by cover tails, which keeps the
presentation standard for the next step.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from ..catalog import elementary_abelian
from ..linalg import rref
from ..pcgroup.presentation import PcPresentation
from .cover import p_cover
from .descendants import descendant_with_reducer


@dataclass
class FpPresentation:
    """Finite presentation; relators are words of ``(generator, exponent)``."""
    ngens: int
    relators: list = field(default_factory=list)
    names: list | None = None

    def __post_init__(self):
        if self.names is None:
            self.names = [f"x{i + 1}" for i in range(self.ngens)]
        for r in self.relators:
            for g, _ in r:
                if not 0 <= g < self.ngens:
                    raise ValueError(f"generator index {g} out of range")

    @classmethod
    def parse(cls, names, relations) -> "FpPresentation":
        """Build from generator names and relation strings such as
        ``"x^4 = x^5"``, ``"[x,y] y^-2"`` or ``"a b a^-1 b^-1"``."""
        names = list(names)
        rels = [parse_word(r, names) for r in relations]
        return cls(len(names), rels, names)


_TOKEN = re.compile(r"\[([^\]]+)\]|([A-Za-z_]\w*)(?:\^(-?\d+))?")


def _inverse(word):
    return [(g, -e) for g, e in reversed(word)]


def parse_word(text: str, names) -> list:
    if "=" in text:
        lhs, rhs = text.split("=", 1)
        return parse_word(lhs, names) + _inverse(parse_word(rhs, names))
    index = {n: i for i, n in enumerate(names)}
    word = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        if text[pos] in " *.\t":
            pos += 1
            continue
        if text[pos] == "1" and (pos + 1 == len(text) or not text[pos + 1].isalnum()):
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse word at {text[pos:]!r}")
        if m.group(1):
            a, b = (parse_word(s, names) for s in m.group(1).split(",", 1))
            atom = _inverse(a) + _inverse(b) + a + b
        else:
            name = m.group(2)
            if name not in index:
                raise ValueError(f"unknown generator {name!r}")
            atom = [(index[name], int(m.group(3) or 1))]
        pos = m.end()
        # conjugation x^y = y^-1 x y, with y a generator or a parenthesized word
        while pos < len(text) and text[pos] == "^":
            if text.startswith("(", pos + 1):
                close = text.find(")", pos + 2)
                if close < 0:
                    raise ValueError(f"unbalanced parenthesis in {text!r}")
                c = parse_word(text[pos + 2:close], names)
                pos = close + 1
            else:
                cm = re.compile(r"[A-Za-z_]\w*").match(text, pos + 1)
                if not cm or cm.group(0) not in index:
                    raise ValueError(f"cannot parse conjugator at {text[pos:]!r}")
                c = [(index[cm.group(0)], 1)]
                pos = cm.end()
            atom = _inverse(c) + atom + c
        word += atom
    return word


def _evaluate(H: PcPresentation, images, word):
    x = H.identity()
    for g, e in word:
        x = H.mul(x, H.power(images[g], e))
    return x


@dataclass
class PQuotient:
    group: PcPresentation
    images: list          # image of each free generator
    p_class: int


def _class_one(fp: FpPresentation, p: int) -> PQuotient:
    k = fp.ngens
    # columns in reverse generator order: pivots (eliminated generators) fall
    # on the last generators, so the leading ones become defining generators
    col_gen = list(range(k - 1, -1, -1))
    rows = []
    for r in fp.relators:
        v = [0] * k
        for g, e in r:
            v[g] += e
        rows.append([v[g] % p for g in col_gen])
    R, piv = rref(rows, p, k) if rows else (np.zeros((0, k), dtype=np.int64), [])
    free_cols = [c for c in range(k) if c not in piv]
    free_gens = sorted(col_gen[c] for c in free_cols)
    d = len(free_gens)
    slot = {g: t for t, g in enumerate(free_gens)}
    images = [None] * k
    for g in free_gens:
        v = [0] * d
        v[slot[g]] = 1
        images[g] = tuple(v)
    for r, c in enumerate(piv):
        v = [0] * d
        for f in free_cols:
            v[slot[col_gen[f]]] = int(-R[r, f]) % p
        images[col_gen[c]] = tuple(v)
    return PQuotient(elementary_abelian(p, d), images, 1 if d else 0)


def _next_class(fp: FpPresentation, pq: PQuotient) -> PQuotient | None:
    Q, p = pq.group, pq.group.p
    cover = p_cover(Q)
    star = cover.star
    n, m = Q.n, cover.mult_rank
    if m == 0:
        return None
    # which free generators are sent to defining generators
    defs = [k for k, d in enumerate(Q.definitions) if d is None]
    defining_of = {}
    for i, y in enumerate(pq.images):
        for t, k in enumerate(defs):
            if y == Q.gen(k) and k not in defining_of.values():
                defining_of[i] = k
                break
    redundant = [i for i in range(fp.ngens) if i not in defining_of]
    r = len(redundant)
    N = n + m + r
    powers = {i: list(star.powers[i]) + [0] * r for i in range(star.n)}
    comms = {key: list(v) + [0] * r for key, v in star.comms.items()}
    E = PcPresentation(p, N, powers, comms, check=False)
    images = []
    tail_of = {i: n + m + t for t, i in enumerate(redundant)}
    for i, y in enumerate(pq.images):
        v = list(y) + [0] * (m + r)
        if i in tail_of:
            v[tail_of[i]] = 1
        images.append(tuple(v))
    rows = []
    for rel in fp.relators:
        x = _evaluate(E, images, rel)
        if any(x[:n]):
            raise AssertionError("relator does not hold in the previous quotient")
        # columns: image tails first, then multiplicator
        rows.append(list(x[n + m:]) + list(x[n:n + m]))
    if rows:
        R, piv = rref(rows, p, r + m)
    else:
        R, piv = np.zeros((0, r + m), dtype=np.int64), []
    if any(t not in piv for t in range(r)):
        raise AssertionError("an image tail was not eliminated")
    U = [R[k, r:] for k, c in enumerate(piv) if c >= r]
    U = np.array(U, dtype=np.int64).reshape(len(U), m)
    D, reduce = descendant_with_reducer(cover, U)
    new_images = []
    row_of = {c: k for k, c in enumerate(piv)}
    for i in range(fp.ngens):
        v = list(images[i][:n + m])
        if i in tail_of:
            t = redundant.index(i)
            row = R[row_of[t]]
            for j in range(m):
                v[n + j] = (v[n + j] - int(row[r + j])) % p
        new_images.append(reduce(v))
    if D.n == Q.n:
        return None
    return PQuotient(D, new_images, pq.p_class + 1)


def p_quotient(fp: FpPresentation, p: int, class_bound: int, with_images: bool = False):
    """Largest quotient of p-class at most ``class_bound`` (standard
    presentation with weights and definitions)."""
    if class_bound < 1:
        raise ValueError("class_bound must be at least 1")
    pq = _class_one(fp, p)
    while pq.p_class < class_bound and pq.group.n:
        nxt = _next_class(fp, pq)
        if nxt is None:
            break
        pq = nxt
    return pq if with_images else pq.group


def pq_tower(fp: FpPresentation, p: int, max_class: int) -> list:
    """Order exponents of the class-k quotients, k = 1..max_class."""
    pq = _class_one(fp, p)
    out = [pq.group.n]
    done = pq.group.n == 0
    for _ in range(2, max_class + 1):
        if not done:
            nxt = _next_class(fp, pq)
            if nxt is None:
                done = True
            else:
                pq = nxt
        out.append(pq.group.n)
    return out
