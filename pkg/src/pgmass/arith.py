"""Arithmetic side: prime sampling by type, residue classifiers, form class
groups of imaginary quadratic fields, 2-parts of ray class groups and
density reports."""
from __future__ import annotations

import hashlib
import itertools
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.stats import binomtest
from sympy import isprime, primerange

from .mass import TypeSpecError, TypeZ, parse_type, type_of_primes, vp
from .pcgroup.abelian import abelian_group_from_relations


class PreconditionError(ValueError):
    """Input outside the documented domain of an operation."""


class CertificationError(RuntimeError):
    """A relation could not be verified; no result is guessed."""


# ---------------------------------------------------------------------------
# residues
def power_residue(a: int, l: int, k: int) -> bool:
    """Whether a is a k-th power modulo the prime l (k | l - 1)."""
    if k <= 0 or (l - 1) % k:
        raise PreconditionError(f"{k} does not divide {l} - 1")
    if a % l == 0:
        raise PreconditionError(f"{a} is not a unit mod {l}")
    return pow(a, (l - 1) // k, l) == 1


# ---------------------------------------------------------------------------
# prime tuples
@dataclass(frozen=True)
class PrimeTuple:
    p: int
    primes: tuple
    type: TypeZ


_PLUS = re.compile(r"^1\+(\d+)Z$")
_MOD = re.compile(r"^(\d+)mod(\d+)$")


def _closure_key(l: int, p: int) -> tuple:
    """Invariants of the closed subgroup of Z_p^* generated by l."""
    if p == 2:
        return (l % 4, vp(l * l - 1, 2))
    order = next(d for d in range(1, p) if pow(l, d, p) == 1)
    return (order, vp(pow(l, p - 1) - 1, p))


def type_predicates(spec: str) -> tuple:
    """(p, [predicate per entry]) for a type spec; a prime matches an entry
    of the form ``1+p^kZ`` when l = 1 mod p^k but not mod p^(k+1), of the
    form ``a mod m`` when l = a mod m, and a bare generator a when l
    generates the same closed subgroup of Z_p^* as a."""
    Z = parse_type(spec)
    p = Z.p
    preds = []
    for raw in filter(None, (s.strip() for s in spec.split(":", 1)[1].split(","))):
        tok = raw.replace(" ", "")
        m = _PLUS.match(tok)
        if m:
            base = int(m.group(1))
            preds.append(lambda l, b=base: (l - 1) % b == 0 and (l - 1) % (b * p) != 0)
            continue
        m = _MOD.match(tok)
        if m:
            a, mod = int(m.group(1)), int(m.group(2))
            preds.append(lambda l, a=a, mod=mod: l % mod == a % mod)
            continue
        key = _closure_key(int(tok), p)
        preds.append(lambda l, key=key: _closure_key(l, p) == key)
    return p, preds


def _window(window) -> tuple:
    lo, hi = window
    if hi < lo:
        raise PreconditionError("empty window")
    return int(lo), int(hi)


def sample_primes(p: int, type_spec: str, window, count: int, seed: int) -> list:
    """Ordered tuples of distinct primes matching the type, uniformly sampled
    (exhaustive, in lexicographic order, when count reaches the population)."""
    q, preds = type_predicates(type_spec)
    if q != p:
        raise TypeSpecError(f"type is for p = {q}, not {p}")
    lo, hi = _window(window)
    pools = []
    for pr in preds:
        pool = [l for l in primerange(max(lo, 2), hi + 1) if l != p and pr(l)]
        if not pool:
            raise PreconditionError(f"no prime in [{lo}, {hi}] matches an entry of {type_spec}")
        pools.append(pool)
    g = len(pools)
    pop = _population(pools)
    out = []
    if count >= pop:
        for tup in itertools.product(*pools):
            if len(set(tup)) == g:
                out.append(tup)
    else:
        rng = np.random.default_rng(seed)
        seen = set()
        while len(out) < count:
            tup = tuple(int(pool[rng.integers(len(pool))]) for pool in pools)
            if len(set(tup)) < g or tup in seen:
                continue
            seen.add(tup)
            out.append(tup)
    return [PrimeTuple(p, t, type_of_primes(p, t)[0]) for t in out]


def _population(pools) -> int:
    """Number of ordered tuples of distinct entries (inclusion–exclusion for g <= 2)."""
    total = math.prod(len(x) for x in pools)
    if len(pools) == 2:
        total -= len(set(pools[0]) & set(pools[1]))
    elif len(pools) > 2:
        total = sum(1 for t in itertools.product(*pools) if len(set(t)) == len(t))
    return total


# ---------------------------------------------------------------------------
# classifiers
@dataclass(frozen=True)
class Outcome:
    label: str
    ordered: tuple          # (q, r) as used by the criterion
    detail: str = ""
    order: int = 0          # predicted group order where determined


def classify_koch(p: int, q: int, r: int) -> Outcome:
    """Γ of order p^3 iff q is not a p-th power mod r or r is not one mod q."""
    for l in (q, r):
        if l % p != 1 or l % (p * p) == 1:
            raise PreconditionError(f"{l} must be 1 mod {p} and not 1 mod {p * p}")
    if not power_residue(q, r, p) or not power_residue(r, q, p):
        return Outcome(f"Gamma_{p ** 3}", (q, r), order=p ** 3)
    return Outcome("deeper", (q, r))


def _sd_literal(q: int) -> int:
    return 2 ** vp(q * q - 1, 2)


def classify_boston_perry(q: int, r: int) -> Outcome:
    """Order the pair so that q is a square mod r; the group is semidihedral
    of order 2^(v_2(q^2 - 1) + 1).  ``detail`` holds the literal largest
    power of 2 dividing q^2 - 1."""
    if q % 4 != 3 or r % 4 != 3 or q == r:
        raise PreconditionError("need distinct primes q, r = 3 mod 4")
    a, b = power_residue(q, r, 2), power_residue(r, q, 2)
    if a == b:
        raise AssertionError("quadratic reciprocity violated")   # cannot happen for primes
    if not a:
        q, r = r, q
    lit = _sd_literal(q)
    return Outcome(f"SD{2 * lit}", (q, r), detail=f"2^k||q^2-1: {lit}", order=2 * lit)


def classify_z2z4(q: int, r: int) -> Outcome:
    if q % 8 != 3 or r % 8 != 5:
        raise PreconditionError("need q = 3 mod 8 and r = 5 mod 8")
    if not power_residue(q, r, 2):
        return Outcome("modular16", (q, r), order=16)
    if power_residue(q, r, 4):
        return Outcome("g128", (q, r), order=128)
    return Outcome("rayclass_case", (q, r))


def classify_z4z4(q: int, r: int) -> Outcome:
    if q % 8 != 5 or r % 8 != 5 or q == r:
        raise PreconditionError("need distinct q, r = 5 mod 8")
    if not power_residue(q, r, 2):
        return Outcome("part_I", (q, r))
    a, b = power_residue(q, r, 4), power_residue(r, q, 4)
    if a != b:
        return Outcome("Gamma1_branch", (q, r))
    if not a:
        return Outcome("Gamma2_Gamma3_branch", (q, r),
                       detail="neither a 4th power: endpoint one of four groups of order 2^27")
    return Outcome("Gamma2_Gamma3_branch", (q, r),
                   detail="both 4th powers: Gamma_3 subtree, exploration prohibitive")


CLASSIFIERS = {
    "koch": (3, "3:1+3Z,1+3Z", lambda q, r: classify_koch(3, q, r)),
    "bp": (2, "2:3mod4,3mod4", classify_boston_perry),
    "z2z4": (2, "2:3mod8,5mod8", classify_z2z4),
    "z4z4": (2, "2:5mod8,5mod8", classify_z4z4),
}

PREDICTIONS = {
    "koch": {"Gamma_27": Fraction(8, 9), "deeper": Fraction(1, 9)},
    "z2z4": {"modular16": Fraction(1, 2), "g128": Fraction(1, 4),
             "rayclass_case": Fraction(1, 4)},
    "z4z4": {"part_I": Fraction(1, 2), "Gamma1_branch": Fraction(1, 4),
             "Gamma2_Gamma3_branch": Fraction(1, 4)},
}


# ---------------------------------------------------------------------------
# density reports
@dataclass
class DensityReport:
    window: tuple
    total: int = 0
    counts: dict = field(default_factory=dict)
    predicted: dict = field(default_factory=dict)
    confidence: float = 0.99

    def proportion(self, label) -> float:
        return self.counts.get(label, 0) / self.total if self.total else 0.0

    def interval(self, label) -> tuple:
        """Exact (Clopper–Pearson) interval for the proportion."""
        if not self.total:
            return (0.0, 1.0)
        ci = binomtest(self.counts.get(label, 0), self.total).proportion_ci(
            confidence_level=self.confidence, method="exact")
        return (ci.low, ci.high)

    def radius(self, label) -> float:
        lo, hi = self.interval(label)
        x = self.proportion(label)
        return max(x - lo, hi - x)

    def to_json(self) -> dict:
        labels = sorted(set(self.counts) | set(self.predicted))
        return {"window": list(self.window), "total": self.total,
                "outcomes": [{"outcome": k, "count": self.counts.get(k, 0),
                              "proportion": self.proportion(k),
                              "radius": self.radius(k),
                              "predicted": str(self.predicted[k]) if k in self.predicted else None}
                             for k in labels]}


def density_report(classifier, tuples, predictions=None, window=(0, 0)) -> DensityReport:
    rep = DensityReport(tuple(window), predicted=dict(predictions or {}))
    for t in tuples:
        primes = t.primes if isinstance(t, PrimeTuple) else tuple(t)
        label = classifier(*primes).label
        rep.counts[label] = rep.counts.get(label, 0) + 1
        rep.total += 1
    return rep


def census(name: str, window, count: int, seed: int) -> tuple:
    """Sample ``count`` ordered pairs for a named classifier; returns the
    report and the per-pair outcomes."""
    p, spec, fn = CLASSIFIERS[name]
    tuples = sample_primes(p, spec, window, count, seed)
    rep = density_report(fn, tuples, PREDICTIONS.get(name), window)
    rows = [(t.primes, fn(*t.primes)) for t in tuples]
    return rep, rows


# ---------------------------------------------------------------------------
# binary quadratic forms
def _xgcd(a: int, b: int) -> tuple:
    """(g, x, y) with a x + b y = g >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        k, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - k * x1
        y0, y1 = y1, y0 - k * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def reduce_form(f, with_transform: bool = False):
    """Reduce a positive definite form (a, b, c).  With ``with_transform``
    also return M in SL_2(Z) with reduced = f∘M (columns: new basis)."""
    a, b, c = f
    M = [[1, 0], [0, 1]]

    def apply(t00, t01, t10, t11):
        nonlocal M
        M = [[M[0][0] * t00 + M[0][1] * t10, M[0][0] * t01 + M[0][1] * t11],
             [M[1][0] * t00 + M[1][1] * t10, M[1][0] * t01 + M[1][1] * t11]]

    while True:
        if not (-a < b <= a):
            t = (a - b) // (2 * a)          # b + 2 a t in (-a, a]
            c = a * t * t + b * t + c
            b = b + 2 * a * t
            if with_transform:
                apply(1, t, 0, 1)
            continue
        if a > c or (a == c and b < 0):
            a, b, c = c, -b, a
            if with_transform:
                apply(0, -1, 1, 0)
            continue
        break
    return ((a, b, c), M) if with_transform else (a, b, c)


def compose(f1, f2):
    """Gauss composition followed by reduction."""
    a1, b1, c1 = f1
    a2, b2, c2 = f2
    if a1 > a2:
        a1, b1, c1, a2, b2, c2 = a2, b2, c2, a1, b1, c1
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d, u, _ = _xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        d1, x2, y2 = _xgcd(s, d)
        y2 = -y2
    v1, v2 = a1 // d1, a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (c2 * d1 + r * (b2 + v2 * r)) // v1
    return reduce_form((a3, b3, c3))


def identity_form(D: int):
    return (1, D % 2, (D % 2 - D) // 4)


def inverse_form(f):
    return reduce_form((f[0], -f[1], f[2]))


def form_power(f, e: int, D: int):
    result, base = identity_form(D), f
    if e < 0:
        base, e = inverse_form(f), -e
    while e:
        if e & 1:
            result = compose(result, base)
        e >>= 1
        if e:
            base = compose(base, base)
    return result


def reduced_forms(D: int) -> list:
    """All reduced primitive forms of discriminant D < 0."""
    if D >= 0 or D % 4 not in (0, 1):
        raise PreconditionError(f"{D} is not a negative discriminant")
    out = []
    amax = math.isqrt(-D // 3)
    for a in range(1, amax + 1):
        b = np.arange(-a + 1, a + 1, dtype=np.int64)
        b = b[(b - D) % 2 == 0]
        num = b * b - D
        b = b[num % (4 * a) == 0]
        c = (b * b - D) // (4 * a)
        ok = (c > a) | ((c == a) & (b >= 0))
        for bb, cc in zip(b[ok].tolist(), c[ok].tolist()):
            if math.gcd(math.gcd(a, bb), cc) == 1:
                out.append((a, bb, cc))
    return out


def is_fundamental(D: int) -> bool:
    if D % 4 == 1:
        return _squarefree(-D)
    if D % 4 == 0:
        m = (-D) // 4
        return m % 4 in (1, 2) and _squarefree(m)
    return False


def _squarefree(n: int) -> bool:
    n = abs(n)
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


@dataclass
class FormClassGroup:
    D: int
    forms: list
    invariants: tuple
    fundamental: bool

    @property
    def class_number(self) -> int:
        return len(self.forms)

    def compose(self, f, g):
        return compose(f, g)

    def identity(self):
        return identity_form(self.D)


def form_class_group(D: int) -> FormClassGroup:
    """Class group of primitive forms of discriminant D; invariants by
    building the group one cyclic extension at a time and eliminating."""
    forms = reduced_forms(D)
    e = identity_form(D)
    gens = []
    span = {e: ()}                 # element -> exponent vector over gens
    rows = []
    for f in forms:
        if f in span:
            continue
        # smallest m with f^m in the current subgroup
        m, cur = 1, f
        while cur not in span:
            cur = compose(cur, f)
            m += 1
        vec = span[cur]
        k = len(gens)
        rows = [list(r) + [0] for r in rows]
        rows.append([-x for x in vec] + [0] * (k - len(vec)) + [m])
        gens.append(f)
        new = {}
        power = e
        for t in range(m):
            for g, v in span.items():
                new[compose(g, power)] = tuple(v) + (0,) * (k - len(v)) + (t,)
            power = compose(power, f)
        span = new
    if len(span) != len(forms):
        raise AssertionError("class group enumeration incomplete")
    inv = abelian_group_from_relations(rows, len(gens)).invariants if gens else ()
    return FormClassGroup(D, forms, tuple(inv), is_fundamental(D))


def class_number(D: int) -> int:
    return len(reduced_forms(D))


# ---------------------------------------------------------------------------
# ray class groups
@dataclass
class RayClass2:
    discriminant: int
    modulus: int
    invariants: tuple           # Sylow-2 invariants, divisibility chain
    class_number: int = 0
    relations: list = field(default_factory=list)

    @property
    def order(self) -> int:
        return math.prod(self.invariants)

    @property
    def n(self) -> int:
        """Exponent of the largest cyclic factor (log_2)."""
        return vp(self.invariants[-1], 2) if self.invariants else 0

    def shape(self) -> tuple:
        return tuple(vp(x, 2) for x in self.invariants)


def _sqrt_mod_prime_power(D: int, l: int, e: int, root: int) -> int:
    """Hensel lift of a square root of D mod l (odd l) to mod l^e."""
    mod = l
    s = root % l
    while mod < l ** e:
        mod = min(mod * mod, l ** e)
        s = (s - (s * s - D) * pow(2 * s, -1, mod)) % mod
    assert (s * s - D) % (l ** e) == 0
    return s


def _two_part_log(x: int, l: int, g2: int, a: int) -> int:
    """t mod 2^a with the 2-part of x equal to g2^t in F_l^*."""
    y = pow(x, (l - 1) >> a, l)
    cur = 1
    for t in range(1 << a):
        if cur == y:
            return t
        cur = cur * g2 % l
    raise CertificationError("discrete logarithm not found")


def _two_sylow_generator(l: int) -> tuple:
    a = vp(l - 1, 2)
    for h in range(2, l):
        if pow(h, (l - 1) // 2, l) == l - 1:
            return pow(h, (l - 1) >> a, l), a
    raise AssertionError(l)


def _generator_of_power(l: int, b: int, D: int, e: int) -> tuple:
    """(u, v) with alpha = (u + v sqrt D)/2 generating P^e, where
    P = [l, (-b + sqrt D)/2]; None when P^e is not principal."""
    N = l ** e
    B = _sqrt_mod_prime_power(D, l, e, b)
    if (B - D) % 2:
        B += N
    C = (B * B - D) // (4 * N)
    red, M = reduce_form((N, -B, C), with_transform=True)
    if red != identity_form(D):
        return None
    x, y = M[0][0], M[1][0]
    u, v = 2 * x * N - y * B, y
    if u * u - D * v * v != 4 * N:
        raise CertificationError("generator norm check failed")
    return u, v


def ray_class_sylow2(q: int, r: int) -> RayClass2:
    """Sylow 2-subgroup of the ray class group of modulus (qr) of Q(sqrt(-qr)).

    Generators: a split prime ideal P whose class generates the 2-part of
    the class group, and 2-Sylow generators of (O/q)^* and (O/r)^* (the
    residue fields of the ramified primes; the kernels of
    (O/p^2)^* -> (O/p)^* have odd order and do not affect the 2-part).
    Relations: P^h = (alpha) with alpha found by lattice reduction and
    re-verified by its norm, the orders of the unit generators and -1.
    """
    for l in (q, r):
        if not isprime(l) or l == 2:
            raise PreconditionError(f"{l} is not an odd prime")
    if q == r or (q * r) % 4 != 3:
        raise PreconditionError("need distinct odd primes with qr = 3 mod 4")
    D = -q * r
    h = class_number(D)
    k = vp(h, 2)
    P = None
    for l in primerange(3, 10 ** 6):
        if (q * r) % l == 0 or pow(D % l, (l - 1) // 2, l) != 1:
            continue
        root = next(s for s in range(l) if (s * s - D) % l == 0)
        b = root if (root - D) % 2 == 0 else root + l
        c = (b * b - D) // (4 * l)
        f = reduce_form((l, b, c))
        if k == 0 or form_power(f, h >> 1, D) != identity_form(D):
            P = (l, root)
            break
    if P is None:
        raise CertificationError("no generating prime ideal found")
    l, root = P
    gen = _generator_of_power(l, root, D, h)
    if gen is None:
        raise CertificationError("P^h is not principal")
    u, v = gen
    rows = []
    logs = []
    for ell in (q, r):
        g2, a = _two_sylow_generator(ell)
        x = u * pow(2, -1, ell) % ell             # sqrt(D) = 0 mod the ramified prime
        if x == 0:
            raise CertificationError("generator not coprime to the modulus")
        logs.append((g2, a, _two_part_log(x, ell, g2, a)))
    (gq, aq, tq), (gr, ar, tr) = logs
    rows.append([h, -tq, -tr])
    rows.append([0, 1 << aq, 0])
    rows.append([0, 0, 1 << ar])
    rows.append([0, 1 << (aq - 1), 1 << (ar - 1)])       # -1 is trivial
    inv = abelian_group_from_relations(rows, 3).invariants
    two = tuple(sorted(2 ** vp(d, 2) for d in inv if d and vp(d, 2)))
    if any(d == 0 for d in inv):
        raise CertificationError("relation lattice not of full rank")
    expected = 2 ** (k + aq + ar - 1)
    if math.prod(two) != expected:
        raise CertificationError("order identity failed")
    return RayClass2(D, q * r, two, h, rows)


# ---------------------------------------------------------------------------
# resumable census of Q(sqrt(-5 r)), r = 19 mod 40
def ray_census(bound: int, q: int = 5, residue: int = 19, modulus: int = 40,
               ledger: str | Path | None = None, progress=None) -> dict:
    """n-histogram of Z/2 x Z/2^n over primes r = residue mod modulus below
    bound.  With ``ledger`` (JSONL) finished primes are appended and skipped
    when the run is resumed."""
    done = {}
    path = Path(ledger) if ledger else None
    if path and path.exists():
        for line in path.read_text().splitlines():
            if line.strip():
                rec = json.loads(line)
                if rec.get("q") == q:
                    done[rec["r"]] = tuple(rec["invariants"])
    results = {}
    fh = path.open("a") if path else None
    try:
        for r in primerange(3, bound):
            if r % modulus != residue:
                continue
            if r in done:
                results[r] = done[r]
                continue
            rc = ray_class_sylow2(r, q)
            results[r] = rc.invariants
            if fh:
                rec = {"q": q, "r": r, "invariants": list(rc.invariants),
                       "input_hash": hashlib.sha256(f"{q},{r}".encode()).hexdigest()[:16]}
                fh.write(json.dumps(rec) + "\n")
                fh.flush()
            if progress:
                progress(r)
    finally:
        if fh:
            fh.close()
    return results


def census_histogram(results: dict) -> dict:
    hist = {}
    for inv in results.values():
        n = vp(inv[-1], 2) if inv else 0
        hist[n] = hist.get(n, 0) + 1
    return dict(sorted(hist.items()))
