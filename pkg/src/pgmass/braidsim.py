"""Monte-Carlo model of the random group G(q, sigma).

F is the free pro-p group on x_1..x_N modulo x_1...x_N = 1, truncated at
p-class c (a finite group Q).  A braid-type automorphism alpha sends x_i to
a conjugate of x_{sigma(i)}^q; G(q, sigma) is F modulo alpha(x_i) = x_i.

Sampling model (at the finite truncation, not a theorem about Haar
measure): conjugators w_1..w_{N-1} are uniform; alpha(x_N) is forced by
the relator and the sample is accepted iff it is conjugate to
x_{sigma(N)}^q.  This is the uniform distribution on valid image tuples,
i.e. on the coset of pure automorphisms of Q, but liftability of a
finite-level automorphism to F is not checked.
"""
from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .homs import GroupMap, _generates, canonical_key
from .mass import TypeZ, mass, vp
from .pcgroup.classes import class_data
from .pcgroup.presentation import PcPresentation, format_pc
from .pcgroup.table import CapacityError
from .pcgroup.subgroups import (Quotient, abelianization, closure, lower_p_central_series,
                                 normal_closure, p_class)
from .pgen.autgroup import full_images, hom_array
from .pgen.pquotient import FpPresentation, p_quotient
from .pgen.tree import vertex_type

CAVEATS = [
    "conjugator-rejection model of Haar measure on the finite truncation",
    "liftability of sampled automorphisms to the pro-p group is not checked",
]
DEFAULT_REJECTION_CAP = 1_000_000
EXHAUSTIVE_BIJECTION_LIMIT = 3 ** 6


class BraidError(ValueError):
    """Invalid braid-simulation input."""


class RejectionCapError(RuntimeError):
    pass


def parse_permutation(text: str, N: int) -> tuple:
    """Cycle notation ``(1 2)(3 4)`` (1-based) to a 0-based image tuple."""
    perm = list(range(N))
    for cyc in re.findall(r"\(([^)]*)\)", text):
        pts = [int(t) - 1 for t in re.split(r"[\s,]+", cyc.strip()) if t]
        for a, b in zip(pts, pts[1:] + pts[:1]):
            if not 0 <= a < N:
                raise BraidError(f"point {a + 1} outside 1..{N}")
            perm[a] = b
    if sorted(perm) != list(range(N)):
        raise BraidError(f"{text!r} is not a permutation")
    return tuple(perm)


def cycles(sigma) -> list:
    """Cycles with minimal representatives first, sorted by representative."""
    seen, out = set(), []
    for i in range(len(sigma)):
        if i in seen:
            continue
        cyc = [i]
        seen.add(i)
        j = sigma[i]
        while j != i:
            cyc.append(j)
            seen.add(j)
            j = sigma[j]
        out.append(cyc)
    return out


def braid_type(p: int, q: int, sigma) -> TypeZ:
    """Type induced by (q, sigma): Z_j generated by q^{k_j}."""
    return TypeZ(p, tuple(pow(q, len(c), p ** 40) for c in cycles(sigma)))


def w_orders(p: int, q: int, sigma) -> tuple:
    return tuple(p ** vp(q ** len(c) - 1, p) if (q ** len(c) - 1) else 0 for c in cycles(sigma))


@dataclass
class PuncturedFree:
    N: int
    p: int
    c: int
    Q: PcPresentation
    marked: list                    # images of x_1..x_N in Q

    @property
    def table(self):
        return self.Q.table()


def build_punctured_free(N: int, p: int, c: int) -> PuncturedFree:
    if p == 2:
        raise BraidError("p = 2 is not supported: no q makes the cyclotomic character "
                         "surjective onto the 2-adic units")
    if N < 2 or c < 1:
        raise BraidError("need N >= 2 and c >= 1")
    fp = FpPresentation(N, [[(i, 1) for i in range(N)]])
    pq = p_quotient(fp, p, c, with_images=True)
    return PuncturedFree(N, p, c, pq.group, [tuple(v) for v in pq.images])


def truncate(Qf: PuncturedFree, c: int) -> PuncturedFree:
    """The class-c quotient of Qf, with projected marked generators."""
    if c >= Qf.c:
        return Qf
    Q = Qf.Q
    N = closure(Q, [Q.gen(k) for k in range(Q.n) if Q.weights[k] > c], normal=True)
    quo = Quotient(Q, N)
    # weights are nondecreasing, so the kept generators are a prefix and the
    # definitions remain valid
    Qc = quo.Q.with_bookkeeping(weights=[Q.weights[k] for k in quo.keep],
                                definitions=[Q.definitions[k] for k in quo.keep])
    return PuncturedFree(Qf.N, Qf.p, c, Qc, [quo.project(x) for x in Qf.marked])


def _check_unit(p: int, q: int):
    if q % p == 0:
        raise BraidError(f"q = {q} is not a unit mod {p}")


def _check_q(p: int, q: int):
    """q must generate (Z/p)^*; otherwise W(q, sigma) is not the
    abelianization (the relator is no longer implied by the cycle relations)."""
    _check_unit(p, q)
    for d in range(1, p - 1):
        if (p - 1) % d == 0 and pow(q, d, p) == 1:
            raise BraidError(f"q = {q} does not generate the units mod {p}")


@dataclass
class BraidSample:
    q: int
    sigma: tuple
    conjugators: list               # w_i as element indices of Q
    images: list                    # alpha(x_i) as element indices
    attempts: int = 1

    def alpha_images(self, Qf: PuncturedFree) -> list:
        T = Qf.table
        return [T.element(int(i)) for i in self.images]

    def alpha(self, Qf: PuncturedFree) -> GroupMap:
        """The induced endomorphism of Q on pc generators."""
        imgs = self.alpha_images(Qf)[:-1]
        return GroupMap(Qf.Q, Qf.Q, full_images(Qf.Q, Qf.Q, imgs))


class _Sampler:
    """Per-(Qf, q, sigma) precomputation shared by all samples."""

    def __init__(self, Qf: PuncturedFree, q: int, sigma):
        _check_unit(Qf.p, q)
        self.Qf, self.q, self.sigma = Qf, q, tuple(sigma)
        if len(self.sigma) != Qf.N:
            raise BraidError("sigma must permute 1..N")
        T = Qf.table
        self.T = T
        self.cd = class_data(Qf.Q)
        self.x = np.array([T.index(v) for v in Qf.marked], dtype=np.int64)
        self.xq = T.power_all(q, self.x)                 # x_i^q
        self.target = self.xq[list(self.sigma)]           # x_{sigma(i)}^q
        self.inv = T.inverse

    def conj(self, w, y):
        """w y w^-1 for index arrays."""
        T = self.T
        return T.mul(T.mul(w, y), self.inv[w])

    def draw(self, rng, cap: int) -> BraidSample:
        T, N = self.T, self.Qf.N
        want = self.cd.labels[self.target[N - 1]]
        attempts = 0
        while attempts < cap:
            batch = min(64, cap - attempts)
            W = rng.integers(0, T.size, size=(batch, N - 1))
            prod = np.zeros(batch, dtype=np.int64)
            imgs = []
            for i in range(N - 1):
                yi = self.conj(W[:, i], np.full(batch, self.target[i]))
                imgs.append(yi)
                prod = T.mul(prod, yi)
            last = self.inv[prod]
            ok = np.nonzero(self.cd.labels[last] == want)[0]
            if len(ok):
                k = int(ok[0])
                attempts += k + 1
                images = [int(y[k]) for y in imgs] + [int(last[k])]
                conj = [int(v) for v in W[k]] + [self._conjugator(int(last[k]))]
                return BraidSample(self.q, self.sigma, conj, images, attempts)
            attempts += batch
        raise RejectionCapError(f"no acceptance in {attempts} attempts")

    def _conjugator(self, y: int) -> int:
        """Least w with w x^q w^-1 = y for the last strand."""
        T = self.T
        t = self.target[-1]
        allw = np.arange(T.size, dtype=np.int64)
        hit = np.nonzero(self.conj(allw, np.full(T.size, t)) == y)[0]
        return int(hit[0])


def _rng_for(seed: int, index: int):
    # counter-based stream per (seed, sample index)
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), index]))


def sample_alpha(Qf: PuncturedFree, q: int, sigma, rng_seed: int, index: int = 0,
                 cap: int = DEFAULT_REJECTION_CAP, sampler=None) -> BraidSample:
    s = sampler or _Sampler(Qf, q, sigma)
    sample = s.draw(_rng_for(rng_seed, index), cap)
    assert_automorphism(Qf, sample)
    return sample


def assert_automorphism(Qf: PuncturedFree, s: BraidSample):
    """Relator killed and images generating modulo the Frattini subgroup."""
    T = Qf.table
    prod = 0
    for y in s.images:
        prod = T.mul1(prod, y)
    if prod != 0:
        raise AssertionError("sampled images do not satisfy the relator")
    if not _generates(Qf.Q, s.alpha_images(Qf)):
        raise AssertionError("sampled map is not surjective")
    if T.size <= EXHAUSTIVE_BIJECTION_LIMIT:
        phi = hom_array(T, T, s.alpha(Qf).images)
        if len(np.unique(phi)) != T.size:
            raise AssertionError("sampled map is not a bijection")


def fixed_quotient(Qf: PuncturedFree, s: BraidSample, with_map: bool = False):
    """Q modulo the normal closure of alpha(x_i) x_i^-1."""
    Q, T = Qf.Q, Qf.table
    rels = []
    for i, y in enumerate(s.images):
        r = T.mul1(y, int(T.inverse[T.index(Qf.marked[i])]))
        if r:
            rels.append(T.element(r))
    quo = Quotient(Q, normal_closure(Q, rels))
    return quo if with_map else quo.Q


# ---------------------------------------------------------------------------
@dataclass
class ExperimentReport:
    seed: int
    samples: int
    p: int
    q: int
    sigma: tuple
    truncation_class: int
    histogram: dict = field(default_factory=dict)      # key -> count
    groups: dict = field(default_factory=dict)         # key -> pc text of representative
    predicted: dict = field(default_factory=dict)      # key -> mass (Fraction)
    abelianizations: dict = field(default_factory=dict)
    acceptance_rate: float = 0.0
    attempts: int = 0
    caveats: list = field(default_factory=lambda: list(CAVEATS))

    def frequency(self, key) -> float:
        return self.histogram.get(key, 0) / self.samples if self.samples else 0.0

    def radius(self, key, z: float = 3.0) -> float:
        """z-sigma binomial radius around the predicted mass."""
        if not self.samples:
            return 0.0
        m = float(self.predicted.get(key, 0))
        return z * math.sqrt(max(m * (1 - m), 0.0) / self.samples)

    def to_json(self) -> dict:
        keys = sorted(self.histogram, key=lambda k: (-self.histogram[k], k))
        return {
            "seed": self.seed, "samples": self.samples, "p": self.p, "q": self.q,
            "sigma": [s + 1 for s in self.sigma], "class": self.truncation_class,
            "acceptance_rate": self.acceptance_rate, "attempts": self.attempts,
            "buckets": [{
                "key": k, "count": self.histogram[k],
                "frequency": self.frequency(k),
                "predicted": str(self.predicted.get(k, "")),
                "radius": self.radius(k),
                "abelianization": list(self.abelianizations.get(k, ())),
                "group": self.groups[k],
            } for k in keys],
            "caveats": self.caveats,
        }

    def to_csv(self) -> str:
        lines = ["key,count,frequency,predicted"]
        for k in sorted(self.histogram):
            lines.append(f"{k},{self.histogram[k]},{self.frequency(k):.6f},"
                         f"{self.predicted.get(k, '')}")
        return "\n".join(lines) + "\n"


def _short(key: str) -> str:
    return hashlib.sha256(key.encode()).hexdigest()[:12]


def run_distribution(Qf: PuncturedFree, q: int, sigma, samples: int, seed: int,
                     cap: int = DEFAULT_REJECTION_CAP, start: int = 0,
                     threads: int = 1) -> ExperimentReport:
    """Histogram of fixed quotients for sample indices ``start .. start+samples-1``.

    Sample i uses its own random stream derived from (seed, i), so splitting
    the index range across workers and merging gives the same report.
    """
    sigma = tuple(sigma)
    _check_q(Qf.p, q)
    if threads > 1 and samples > 1:
        from concurrent.futures import ProcessPoolExecutor
        bounds = np.linspace(0, samples, threads + 1).astype(int)
        with ProcessPoolExecutor(threads) as ex:
            parts = list(ex.map(_run_chunk, [
                (Qf, q, sigma, int(b - a), seed, cap, start + int(a))
                for a, b in zip(bounds, bounds[1:]) if b > a]))
        return merge_reports(parts)
    rep = ExperimentReport(seed, samples, Qf.p, q, sigma, Qf.c)
    if samples == 0:
        return rep
    sampler = _Sampler(Qf, q, sigma)
    Z = braid_type(Qf.p, q, sigma)
    cache = {}
    attempts = 0
    for i in range(start, start + samples):
        s = sample_alpha(Qf, q, sigma, seed, i, cap, sampler)
        attempts += s.attempts
        G = fixed_quotient(Qf, s)
        key = _bucket(G, cache, rep, Z)
        rep.histogram[key] = rep.histogram.get(key, 0) + 1
    rep.attempts = attempts
    rep.acceptance_rate = samples / attempts
    return rep


def _run_chunk(args):
    Qf, q, sigma, n, seed, cap, start = args
    return run_distribution(Qf, q, sigma, n, seed, cap, start)


def _bucket(G, cache, rep, Z) -> str:
    rk = G.rules_key()
    if rk not in cache:
        key = _short(canonical_key(G))
        cache[rk] = key
        if key not in rep.groups:
            rep.groups[key] = format_pc(G)
            rep.abelianizations[key] = tuple(abelianization(G).invariants)
            rep.predicted[key] = _predicted_mass(G, vertex_type(Z, p_class(G)))
    return cache[rk]


def merge_reports(parts) -> ExperimentReport:
    """Associative, commutative merge of reports over disjoint index ranges."""
    first = parts[0]
    rep = ExperimentReport(first.seed, 0, first.p, first.q, first.sigma, first.truncation_class)
    attempts = 0
    for r in parts:
        if (r.seed, r.p, r.q, r.sigma, r.truncation_class) != \
                (rep.seed, rep.p, rep.q, rep.sigma, rep.truncation_class):
            raise ValueError("cannot merge reports of different experiments")
        rep.samples += r.samples
        attempts += r.attempts
        for k, v in r.histogram.items():
            rep.histogram[k] = rep.histogram.get(k, 0) + v
        rep.groups.update(r.groups)
        rep.predicted.update(r.predicted)
        rep.abelianizations.update(r.abelianizations)
    rep.attempts = attempts
    rep.acceptance_rate = rep.samples / attempts if attempts else 0.0
    return rep


def stabilization_histograms(Qf: PuncturedFree, q: int, sigma, c: int, samples: int,
                             seed: int) -> tuple:
    """Bucket the same samples two ways at class c: the class-c quotient of
    the fixed quotient of Qf, and the fixed quotient of the class-c
    truncation under the projected automorphism.  The two must agree."""
    sigma = tuple(sigma)
    low = truncate(Qf, c)
    Tl = low.table
    quo_proj = _projector(Qf, c)
    sampler = _Sampler(Qf, q, sigma)
    h_high, h_low = {}, {}
    for i in range(samples):
        s = sample_alpha(Qf, q, sigma, seed, i, sampler=sampler)
        G = fixed_quotient(Qf, s)
        Gc = _class_quotient(G, c)
        k1 = _short(canonical_key(Gc))
        h_high[k1] = h_high.get(k1, 0) + 1
        imgs = [Tl.index(quo_proj(Qf.table.element(y))) for y in s.images]
        s_low = BraidSample(q, sigma, [], imgs)
        k2 = _short(canonical_key(fixed_quotient(low, s_low)))
        h_low[k2] = h_low.get(k2, 0) + 1
    return h_high, h_low


def _projector(Qf, c):
    Q = Qf.Q
    N = closure(Q, [Q.gen(k) for k in range(Q.n) if Q.weights[k] > c], normal=True)
    return Quotient(Q, N).project


def _class_quotient(G, c):
    series = lower_p_central_series(G)
    if c >= len(series) - 1:
        return G
    return Quotient(G, series[c]).Q


def _predicted_mass(G, Z: TypeZ) -> Fraction:
    if tuple(abelianization(G).invariants) != Z.w.invariants():
        return Fraction(0)
    return mass(G, Z)


# ---------------------------------------------------------------------------
@dataclass
class OracleResult:
    average_fixed: Fraction         # mean |Epi(G_alpha, (Gamma, c))| over the coset
    orbits: int                     # pure-automorphism orbits on Epi(Q, (Gamma, c))
    fixed_orbits: int               # orbits mapped to themselves by the coset
    n_alpha: int
    n_epi: int


def _class_tuples(Qf, Gamma, classes, q, sigma):
    """Required class label (in Gamma) of the image of every x_i."""
    cdG = class_data(Gamma)
    need = [None] * Qf.N
    for cyc, c in zip(cycles(sigma), classes):
        x = c.representative
        for m, i in enumerate(cyc):
            need[i] = cdG.label_of(Gamma.power(x, q ** m))
    return need


def _image_tuples(T, cd, targets):
    """All (y_1..y_N) with y_i in class targets[i] and y_1...y_N = 1."""
    N = len(targets)
    members = [np.nonzero(cd.labels == cd.labels[t])[0] for t in targets]
    cur = [(0, ())]
    for i in range(N - 1):
        nxt = []
        for prod, tup in cur:
            for y in members[i]:
                nxt.append((T.mul1(prod, int(y)), tup + (int(y),)))
        cur = nxt
    lastlab = cd.labels[targets[-1]]
    out = []
    inv = T.inverse
    for prod, tup in cur:
        y = int(inv[prod])
        if cd.labels[y] == lastlab:
            out.append(tup + (y,))
    return out


def tiny_burnside_oracle(Qf: PuncturedFree, q: int, sigma, target, limit: int = 200_000
                         ) -> OracleResult:
    """Exhaustive check of the Burnside identity behind the mass formula.

    ``target = (Gamma, classes)`` with one class per cycle of sigma.
    """
    Gamma, classes = target
    sigma = tuple(sigma)
    _check_q(Qf.p, q)
    if p_class(Gamma) > Qf.c and Gamma.n:
        raise BraidError("target class exceeds the truncation")
    T, Q = Qf.table, Qf.Q
    cd = class_data(Q)
    x = [T.index(v) for v in Qf.marked]
    xq = T.power_all(q, np.array(x, dtype=np.int64))
    coset = _image_tuples(T, cd, [int(xq[sigma[i]]) for i in range(Qf.N)])
    pure = _image_tuples(T, cd, x)
    TG = Gamma.table()
    need = _class_tuples(Qf, Gamma, classes, q, sigma)
    cdG = class_data(Gamma)
    # Epi(Q, (Gamma, c)): images of x_1..x_{N-1}, x_N forced
    cand = [np.nonzero(cdG.labels == need[i])[0] for i in range(Qf.N)]
    total = 1
    for cnd in cand[:-1]:
        total *= len(cnd)
    if total > limit or len(coset) > limit or len(pure) > limit:
        raise CapacityError("oracle enumeration too large")
    epis = []
    stack = [(0, ())]
    for i in range(Qf.N - 1):
        stack = [(TG.mul1(pr, int(g)), tup + (int(g),)) for pr, tup in stack for g in cand[i]]
    for pr, tup in stack:
        last = int(TG.inverse[pr])
        if cdG.labels[last] != need[-1]:
            continue
        if not _generates(Gamma, [TG.element(g) for g in tup]):
            continue
        epis.append(tup)
    index = {e: k for k, e in enumerate(epis)}
    # the defining generators of Q are the images of x_1..x_{N-1}
    maps = []
    for e in epis:
        imgs = full_images(Q, Gamma, [TG.element(g) for g in e])
        maps.append(hom_array(T, TG, imgs))

    def act(k, alpha):
        phi = maps[k]
        return index.get(tuple(int(phi[y]) for y in alpha[:-1]))

    parent = list(range(len(epis)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a
    for alpha in pure:
        for k in range(len(epis)):
            j = act(k, alpha)
            if j is None:
                raise AssertionError("pure automorphism left the Epi set")
            ra, rb = find(k), find(j)
            if ra != rb:
                parent[ra] = rb
    roots = {find(k) for k in range(len(epis))}
    fixed_total = 0
    for alpha in coset:
        fixed_total += sum(1 for k in range(len(epis)) if act(k, alpha) == k)
    a0 = coset[0] if coset else None
    fixed_orbits = 0
    if a0 is not None:
        for r in roots:
            members = [k for k in range(len(epis)) if find(k) == r]
            j = act(members[0], a0)
            if j is not None and find(j) == r:
                fixed_orbits += 1
    avg = Fraction(fixed_total, len(coset)) if coset else Fraction(0)
    return OracleResult(avg, len(roots), fixed_orbits, len(coset), len(epis))


def oracle_targets(Gamma: PcPresentation, q: int, sigma) -> list:
    """All class tuples (one per cycle of sigma) with c_j ~ c_j^{q^{k_j}}
    whose representatives generate Gamma."""
    cd = class_data(Gamma)
    cls = cd.classes()
    per_cycle = []
    for cyc in cycles(sigma):
        ok = [c for c in cls
              if cd.label_of(Gamma.power(c.representative, q ** len(cyc)))
              == cd.label_of(c.representative)]
        per_cycle.append(ok)
    out = []

    def rec(j, acc):
        if j == len(per_cycle):
            if _generates(Gamma, [c.representative for c in acc]):
                out.append(tuple(acc))
            return
        for c in per_cycle[j]:
            rec(j + 1, acc + [c])
    rec(0, [])
    return out
