"""Ramification types, the local-data count A_Z and the heuristic mass.

A type is a tuple of procyclic subgroups ``Z_i`` of the p-adic units, each
stored through one topological generator ``l_i`` (an integer unit).  Local
data of type Z on a finite p-group is a tuple of conjugacy classes
``(c_1, ..., c_g)`` together with an involution ``iota`` such that

* each ``c_i`` is stable under ``x -> x^z`` for ``z`` in ``Z_i``;
* the images ``pi(c_i)`` generate the abelianization;
* ``(w_i) -> sum w_i pi(c_i)`` is an isomorphism ``W(Z) -> Gamma^ab``, with
  ``W(Z) = sum Z_p/(l_i - 1)``;
* for p = 2, ``pi(iota) = sum iota_i`` where ``iota_i`` is the involution of
  the cyclic group generated by ``pi(c_i)`` (iota is trivial for odd p).

Stability is checked on the generator ``l_i`` only: if ``x^l`` is conjugate
to x then so is ``x^(l^k)`` for every k, and in a finite group every element
of the closure of ``l^Z`` acts through some power of l.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, prod

import numpy as np

from .linalg import rank
from .pcgroup.abelian import AbelianInvariants
from .pcgroup.classes import ConjClass, class_data, exponent
from .pcgroup.subgroups import abelianization

DEFAULT_PRECISION = 40


class TypeSpecError(ValueError):
    """Invalid ramification type."""


class PrecisionError(ValueError):
    """The working precision of a type is too small for the group."""


def vp(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class TypeZ:
    """Ramification type: generators ``l_i`` reduced modulo ``p^precision``."""
    p: int
    entries: tuple
    precision: int = DEFAULT_PRECISION
    wcap: int | None = None      # truncate W to exponent p^wcap (tree vertices of low class)

    def __post_init__(self):
        mod = self.p ** self.precision
        ents = tuple(int(u) % mod for u in self.entries)
        object.__setattr__(self, "entries", ents)
        for u in ents:
            if u % self.p == 0:
                raise TypeSpecError(f"{u} is not a {self.p}-adic unit")
            if u == 1 % mod:
                raise TypeSpecError("l = 1 gives an infinite W_i")

    @property
    def g(self) -> int:
        return len(self.entries)

    @property
    def w(self) -> "WGroup":
        v = [vp(u - 1, self.p) for u in self.entries]
        if self.wcap is not None:
            v = [min(e, self.wcap) for e in v]
        return WGroup(tuple(self.p ** e for e in v))

    def truncated(self, c: int) -> "TypeZ":
        """Type whose W is ``W / p^c W`` (same stability data)."""
        return TypeZ(self.p, self.entries, self.precision, c)

    @property
    def max_valuation(self) -> int:
        return max((vp(u - 1, self.p) for u in self.entries), default=0)

    @property
    def mod8(self) -> tuple:
        return tuple(u % 8 for u in self.entries) if self.p == 2 else ()

    def with_precision(self, M: int) -> "TypeZ":
        return TypeZ(self.p, self.entries, M, self.wcap)

    def __str__(self):
        return f"{self.p}:" + ",".join(str(u) for u in self.entries)


@dataclass(frozen=True)
class WGroup:
    orders: tuple

    @property
    def order(self) -> int:
        return prod(self.orders)

    def invariants(self) -> tuple:
        return tuple(sorted(o for o in self.orders if o > 1))


def type_of_primes(p: int, primes, precision: int = DEFAULT_PRECISION) -> tuple:
    """Type and W-group attached to a tuple of primes."""
    for l in primes:
        if l == p:
            raise TypeSpecError(f"prime {l} equals p")
        if p == 2 and l % 2 == 0:
            raise TypeSpecError(f"{l} is even")
        if p != 2 and l % p != 1:
            raise TypeSpecError(f"{l} is not 1 mod {p}")
    Z = TypeZ(p, tuple(primes), precision)
    return Z, Z.w


_ENTRY_PLUS = re.compile(r"^1\+(\d+)Z$")
_ENTRY_MOD = re.compile(r"^(\d+)\s*mod\s*(\d+)$")


def _is_power_of(m: int, p: int) -> bool:
    while m > 1 and m % p == 0:
        m //= p
    return m == 1


def parse_type(spec: str, precision: int = DEFAULT_PRECISION) -> TypeZ:
    """Parse ``p:e1,e2,...`` where each entry is ``1+p^kZ``, ``a mod p^k``
    or an integer generator.  An entry whose residue does not determine
    ``v_p(l - 1)`` (e.g. ``1mod4`` for p = 2) is rejected as ambiguous."""
    try:
        head, body = spec.split(":", 1)
        p = int(head)
    except ValueError:
        raise TypeSpecError(f"bad type spec {spec!r}: expected 'p:entries'") from None
    if p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
        raise TypeSpecError(f"{p} is not prime")
    entries = []
    for raw in filter(None, (s.strip() for s in body.split(","))):
        tok = raw.replace(" ", "")
        m = _ENTRY_PLUS.match(tok)
        if m:
            base = int(m.group(1))
            if not _is_power_of(base, p) or base == 1:
                raise TypeSpecError(f"{raw!r}: modulus must be a power of {p}")
            if p == 2 and base == 2:
                raise TypeSpecError(f"{raw!r}: 1+2Z_2 is not procyclic")
            entries.append(1 + base)
            continue
        m = _ENTRY_MOD.match(tok)
        if m:
            a, mod = int(m.group(1)), int(m.group(2))
            if not _is_power_of(mod, p) or mod == 1:
                raise TypeSpecError(f"{raw!r}: modulus must be a power of {p}")
            if a % p == 0:
                raise TypeSpecError(f"{raw!r}: not a unit")
            if (a - 1) % mod == 0:
                raise TypeSpecError(f"{raw!r}: ambiguous type (W_i not determined)")
            entries.append(a % mod)
            continue
        if tok.isdigit():
            entries.append(int(tok))
            continue
        raise TypeSpecError(f"cannot parse type entry {raw!r}")
    return TypeZ(p, tuple(entries), precision)


# ---------------------------------------------------------------------------
def _check_precision(G, Z: TypeZ):
    e = exponent(G)
    if e > Z.p ** Z.precision:
        raise PrecisionError(f"precision {Z.p}^{Z.precision} below exponent {e}")


def stable_classes(G, z: int, precision: int | None = None) -> list:
    """Classes c with ``c^z = c``."""
    if precision is not None and exponent(G) > G.p ** precision:
        raise PrecisionError("precision below group exponent")
    cd = class_data(G)
    lab = cd.power_labels(int(z))
    return [cd.conj_class(c) for c in range(len(cd)) if lab[c] == c]


class _AbData:
    """Abelianization codes for every element of a tabulated group."""

    def __init__(self, G):
        self.ab: AbelianInvariants = abelianization(G)
        inv = self.ab.invariants
        self.inv = inv
        self.size = prod(inv)
        T = G.table()
        if G.n and inv:
            P = np.array(self.ab.projection, dtype=np.int64).reshape(G.n, len(inv))
            coords = (T.digits.astype(np.int64) @ P) % np.array(inv)
        else:
            coords = np.zeros((T.size, len(inv)), dtype=np.int64)
        self.coords = coords
        self.codes = self.encode(coords)

    def encode(self, coords) -> np.ndarray:
        code = np.zeros(len(coords), dtype=np.int64)
        for j, d in enumerate(self.inv):
            code = code * d + coords[:, j]
        return code

    def decode(self, code: int) -> tuple:
        out = []
        for d in reversed(self.inv):
            out.append(code % d)
            code //= d
        return tuple(reversed(out))

    def add(self, a, b) -> tuple:
        return tuple((x + y) % d for x, y, d in zip(a, b, self.inv))

    def scale(self, k, a) -> tuple:
        return tuple((k * x) % d for x, d in zip(a, self.inv))

    def order(self, a) -> int:
        o = 1
        for x, d in zip(a, self.inv):
            if x:
                o = max(o, d // gcd(x, d))
        return o

    def generates(self, vals) -> bool:
        """Generation checked on the Frattini quotient A/pA."""
        r = len(self.inv)
        if r == 0:
            return True
        if not vals:
            return False
        p = _prime_of(self.inv)
        return rank([[x % p for x in a] for a in vals], p) == r


def _prime_of(inv) -> int:
    d = inv[0]
    for q in range(2, d + 1):
        if d % q == 0:
            return q
    return d


def _ab_data(G) -> _AbData:
    ad = getattr(G, "_ab_data", None)
    if ad is None:
        ad = _AbData(G)
        G._ab_data = ad
    return ad


def _iso_ok(ad: _AbData, vals, W: WGroup) -> bool:
    if ad.size != W.order:
        return False
    for a, w in zip(vals, W.orders):
        if w % ad.order(a):
            return False
    return ad.generates(list(vals))


def _involution_counts(G, ad: _AbData) -> dict:
    """Number of elements x with x^2 = 1 per abelianization code."""
    T = G.table()
    sq = T.power_all(2)
    codes = ad.codes[sq == 0]
    u, c = np.unique(codes, return_counts=True)
    return dict(zip(u.tolist(), c.tolist()))


def _iota_target(ad: _AbData, vals, W: WGroup) -> tuple:
    t = tuple(0 for _ in ad.inv)
    for a, w in zip(vals, W.orders):
        t = ad.add(t, ad.scale(w // 2, a))
    return t


def _stable_by_code(G, ad: _AbData, z: int) -> dict:
    cd = class_data(G)
    lab = cd.power_labels(int(z))
    out = {}
    for c in np.nonzero(lab == np.arange(len(cd)))[0]:
        code = int(ad.codes[cd.reps[c]])
        out.setdefault(code, []).append(int(c))
    return out


def count_A_Z(G, Z: TypeZ) -> int:
    """The number of local data of type Z on G."""
    if G.p != Z.p:
        return 0
    _check_precision(G, Z)
    W = Z.w
    ad = _ab_data(G)
    if ad.size != W.order or tuple(sorted(ad.inv)) != W.invariants():
        return 0
    per = [_stable_by_code(G, ad, z) for z in Z.entries]
    choices = []
    for i, st in enumerate(per):
        opts = []
        for code, cls in st.items():
            a = ad.decode(code)
            if W.orders[i] % ad.order(a) == 0:
                opts.append((a, len(cls)))
        choices.append(sorted(opts))
    invol = _involution_counts(G, ad) if Z.p == 2 else None
    total = 0
    for combo in itertools.product(*choices):
        vals = [a for a, _ in combo]
        if not _iso_ok(ad, vals, W):
            continue
        n = prod(k for _, k in combo)
        if invol is not None:
            tgt = _iota_target(ad, vals, W)
            code = int(ad.encode(np.array([tgt], dtype=np.int64))[0]) if ad.inv else 0
            n *= invol.get(code, 0)
        total += n
    return total


def automorphism_order(G) -> int:
    from .homs import automorphism_group
    return automorphism_group(G).order


def mass(G, Z: TypeZ, aut_order: int | None = None) -> Fraction:
    """``A_Z(G) / |Aut(G)|`` as an exact fraction."""
    A = count_A_Z(G, Z)
    if A == 0:
        return Fraction(0)
    if aut_order is None:
        aut_order = automorphism_order(G)
    return Fraction(A, aut_order)


# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class LocalData:
    classes: tuple          # ConjClass per i
    involution: tuple       # identity for odd p


def validate_local_data(G, Z: TypeZ, data: LocalData) -> bool:
    """Check the four defining conditions directly."""
    if G.p != Z.p or len(data.classes) != Z.g:
        return False
    cd = class_data(G)
    ad = _ab_data(G)
    T = G.table()
    W = Z.w
    labels = []
    for c in data.classes:
        c = c if isinstance(c, ConjClass) else ConjClass(tuple(c), 0)
        labels.append(cd.label_of(c.representative))
    for lab, z in zip(labels, Z.entries):
        x = tuple(T.element(int(cd.reps[lab])))
        if cd.label_of(G.power(x, z)) != lab:
            return False
    vals = [ad.decode(int(ad.codes[cd.reps[lab]])) for lab in labels]
    if not ad.generates(vals):
        return False
    if not _iso_ok(ad, vals, W):
        return False
    iota = tuple(data.involution)
    if Z.p == 2:
        if G.power(iota, 2) != G.identity():
            return False
        pi_iota = ad.decode(int(ad.codes[T.index(iota)]))
        if pi_iota != _iota_target(ad, vals, W):
            return False
    elif any(iota):
        return False
    return True


def enumerate_local_data(G, Z: TypeZ):
    """All candidate local data, filtered by ``validate_local_data``
    (exhaustive; intended for cross-checks on small groups)."""
    cd = class_data(G)
    classes = cd.classes()
    if Z.p == 2:
        T = G.table()
        sq = T.power_all(2)
        invs = [T.element(int(i)) for i in np.nonzero(sq == 0)[0]]
    else:
        invs = [G.identity()]
    for tup in itertools.product(classes, repeat=Z.g):
        for iota in invs:
            data = LocalData(tuple(tup), tuple(iota))
            if validate_local_data(G, Z, data):
                yield data
