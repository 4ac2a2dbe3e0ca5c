"""Power-commutator presentations with relative orders p, and the collector.

Generators are indexed from 0 internally.  A presentation stores, for each
generator ``g_i``, the normal word equal to ``g_i^p`` and, for each ``j < i``,
the normal word equal to the commutator ``[g_i, g_j] = g_i^-1 g_j^-1 g_i g_j``.
Right-hand sides only involve generators of index larger than ``i``, so the
subgroups ``G_i = <g_i, ..., g_n>`` form a central series with factors of
order p.  Elements are tuples of exponents in ``[0, p)``.
"""
from __future__ import annotations

import json
from typing import Iterable, Sequence

Vector = tuple

COLLECT_STEP_LIMIT = 10**9


class PresentationError(ValueError):
    """Malformed or inconsistent presentation."""


class InconsistentPresentationError(PresentationError):
    pass


class CollectionLimitError(RuntimeError):
    pass


def _vec(n: int, entries) -> Vector:
    if entries is None:
        return (0,) * n
    if isinstance(entries, dict):
        v = [0] * n
        for k, e in entries.items():
            v[k] = e
        return tuple(v)
    v = tuple(int(e) for e in entries)
    if len(v) != n:
        raise PresentationError(f"word has length {len(v)}, expected {n}")
    return v


class PcPresentation:
    """A consistent pc-presentation of a group of order ``p**n``.

    ``powers[i]`` is the exponent vector of ``g_i^p``; ``comms[(i, j)]`` (with
    ``i > j``) is the exponent vector of ``[g_i, g_j]``; absent commutators are
    trivial.  ``weights`` and ``definitions`` are optional bookkeeping used by
    the p-group generation machinery: a definition is ``None`` for a defining
    generator, ``("pow", i)`` or ``("comm", i, j)`` otherwise.
    """

    def __init__(self, p: int, n: int, powers=None, comms=None, weights=None,
                 definitions=None, check: bool = True):
        if p < 2:
            raise PresentationError("p must be a prime")
        self.p = int(p)
        self.n = int(n)
        powers = powers or {}
        if isinstance(powers, dict):
            self.powers = tuple(_vec(n, powers.get(i)) for i in range(n))
        else:
            self.powers = tuple(_vec(n, w) for w in powers)
        if len(self.powers) != n:
            raise PresentationError("need one power rule per generator")
        self.comms = {}
        for (i, j), w in (comms or {}).items():
            if not 0 <= j < i < n:
                raise PresentationError(f"commutator index ({i},{j}) invalid")
            v = _vec(n, w)
            if any(v):
                self.comms[(i, j)] = v
        self.weights = tuple(weights) if weights is not None else None
        self.definitions = tuple(
            None if d is None else tuple(d) for d in definitions
        ) if definitions is not None else None
        self._validate()
        self._prepare()
        if check and not self.is_consistent():
            raise InconsistentPresentationError("presentation fails the consistency test")
        self._table = None

    # ------------------------------------------------------------------
    def _validate(self):
        p, n = self.p, self.n
        for i, v in enumerate(self.powers):
            self._check_rhs(i, v)
        for (i, j), v in self.comms.items():
            self._check_rhs(i, v)
        if self.weights is not None and len(self.weights) != n:
            raise PresentationError("weights length mismatch")
        if self.definitions is not None and len(self.definitions) != n:
            raise PresentationError("definitions length mismatch")

    def _check_rhs(self, i, v):
        for k, e in enumerate(v):
            if not 0 <= e < self.p:
                raise PresentationError(f"exponent {e} out of range [0,{self.p})")
            if e and k <= i:
                raise PresentationError(
                    f"rule for generator {i + 1} involves generator {k + 1}")

    def _prepare(self):
        n = self.n
        self._pow_letters = [self.letters(v) for v in self.powers]
        # conj[i][k] = letters of g_k^{g_i} = g_k [g_k, g_i], for k > i
        self._conj = [dict() for _ in range(n)]
        self._commuting = [set() for _ in range(n)]
        for i in range(n):
            for k in range(i + 1, n):
                c = self.comms.get((k, i))
                if c is None:
                    self._commuting[i].add(k)
                    self._conj[i][k] = [(k, 1)]
                else:
                    self._conj[i][k] = [(k, 1)] + self.letters(c)
        self._central = [
            all((i, j) not in self.comms for j in range(i))
            and all((k, i) not in self.comms for k in range(i + 1, n))
            for i in range(n)
        ]

    # ------------------------------------------------------------------
    @property
    def order(self) -> int:
        return self.p ** self.n

    def identity(self) -> Vector:
        return (0,) * self.n

    def gen(self, i: int) -> Vector:
        v = [0] * self.n
        v[i] = 1
        return tuple(v)

    @staticmethod
    def letters(v) -> list:
        return [(k, e) for k, e in enumerate(v) if e]

    def power_word(self, i: int) -> Vector:
        return self.powers[i]

    def comm_word(self, i: int, j: int) -> Vector:
        """Normal word of ``[g_i, g_j]`` for ``i > j``."""
        return self.comms.get((i, j), self.identity())

    @property
    def class_bound(self):
        return max(self.weights) if self.weights else None

    # ------------------------------------------------------------------
    # collection
    def _collect(self, x: list, stack: list) -> list:
        """Multiply the normal word ``x`` (in place) by the letters on ``stack``.

        The stack holds ``(gen, exp)`` pairs with the next letter on top.
        """
        p, n = self.p, self.n
        powl, conj, central, commuting = (self._pow_letters, self._conj,
                                          self._central, self._commuting)
        steps = 0
        while stack:
            i, e = stack.pop()
            steps += 1
            if steps > COLLECT_STEP_LIMIT:
                raise CollectionLimitError("collection exceeded the step limit")
            if central[i]:
                s = x[i] + e
                if s >= p:
                    x[i] = s - p
                    stack.extend(reversed(powl[i]))
                else:
                    x[i] = s
                continue
            suffix = [k for k in range(i + 1, n) if x[k]]
            if not suffix:
                s = x[i] + e
                if s >= p:
                    x[i] = s - p
                    stack.extend(reversed(powl[i]))
                else:
                    x[i] = s
                continue
            com = commuting[i]
            if all(k in com for k in suffix):
                # g_i commutes with the tail: add directly, re-append the tail
                s = x[i] + e
                if s < p:
                    x[i] = s
                    continue
                x[i] = s - p
                for k in reversed(suffix):
                    stack.append((k, x[k]))
                    x[k] = 0
                stack.extend(reversed(powl[i]))
                continue
            # x = pre g_i^a suf ; x g_i = pre g_i^{a+1} suf^{g_i}
            if e > 1:
                stack.append((i, e - 1))
            ci = conj[i]
            for k in reversed(suffix):
                w = ci[k]
                for _ in range(x[k]):
                    stack.extend(reversed(w))
                x[k] = 0
            s = x[i] + 1
            if s == p:
                x[i] = 0
                stack.extend(reversed(powl[i]))
            else:
                x[i] = s
        return x

    def collect_word(self, word: Iterable) -> Vector:
        """Normal form of a word given as ``(gen, exp)`` pairs; exponents may be
        negative (inverses)."""
        x = [0] * self.n
        for g, e in word:
            if not 0 <= g < self.n:
                raise IndexError(f"generator index {g + 1} out of range")
            if e == 0:
                continue
            if e > 0:
                x = self._collect(x, self._exp_stack(g, e))
            else:
                y = self.inv(self.power(self.gen(g), -e))
                x = self._collect(x, list(reversed(self.letters(y))))
        return tuple(x)

    def _exp_stack(self, g, e):
        q, r = divmod(e, self.p)
        st = []
        if q:
            pw = self.power(self.gen(g), self.p * q)
            st.extend(reversed(self.letters(pw)))
        if r:
            st.append((g, r))
        return st

    def mul(self, x: Vector, y: Vector) -> Vector:
        if not any(y):
            return tuple(x)
        return tuple(self._collect(list(x), list(reversed(self.letters(y)))))

    def mul_letters(self, x: Vector, letters: Sequence) -> Vector:
        return tuple(self._collect(list(x), list(reversed(letters))))

    def inv(self, x: Vector) -> Vector:
        """Inverse by left-to-right elimination of the leading exponent."""
        p, n = self.p, self.n
        y = [0] * n
        z = list(x)
        for k in range(n):
            if z[k]:
                e = p - z[k]
                y[k] = e
                z = self._collect(z, [(k, e)])
        return tuple(y)

    def power(self, x: Vector, m: int) -> Vector:
        if m < 0:
            x, m = self.inv(x), -m
        result = self.identity()
        base = tuple(x)
        while m:
            if m & 1:
                result = self.mul(result, base)
            m >>= 1
            if m:
                base = self.mul(base, base)
        return result

    def comm(self, x: Vector, y: Vector) -> Vector:
        """``[x, y] = x^-1 y^-1 x y``."""
        return self.mul(self.inv(self.mul(y, x)), self.mul(x, y))

    def conj(self, x: Vector, y: Vector) -> Vector:
        """``x^y = y^-1 x y``."""
        return self.mul(self.inv(y), self.mul(x, y))

    def element_order(self, x: Vector) -> int:
        k = 1
        while any(x):
            x = self.power(x, self.p)
            k *= self.p
        return k

    # ------------------------------------------------------------------
    # consistency
    def consistency_pairs(self, weight_bound: int | None = None):
        """Yield pairs of normal words that must coincide in a consistent group.

        With ``weight_bound`` the tests are restricted to those whose weight
        sum does not exceed the bound (valid when the presentation is weighted
        and only the top layer is new).
        """
        p, n = self.p, self.n
        w = self.weights
        def ok(*ws):
            return weight_bound is None or w is None or sum(ws) <= weight_bound
        e = self.gen
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    if not ok(w[i] if w else 0, w[j] if w else 0, w[k] if w else 0):
                        continue
                    lhs = self.mul_letters(self.mul_letters(e(k), [(j, 1)]), [(i, 1)])
                    rhs = self.mul_letters(e(k), self.letters(self.mul_letters(e(j), [(i, 1)])))
                    yield ("assoc", k, j, i), lhs, rhs
        for i in range(n):
            for j in range(i + 1, n):
                wi, wj = (w[i], w[j]) if w else (0, 0)
                if ok(wj, 1, wi):
                    # (g_j^{p-1} g_j) g_i = g_j^{p-1} (g_j g_i)
                    lhs = self.mul_letters(self.powers[j], [(i, 1)])
                    gji = self.mul_letters(e(j), [(i, 1)])
                    start = tuple((p - 1) if t == j else 0 for t in range(n))
                    rhs = self.mul_letters(start, self.letters(gji))
                    yield ("pow-left", j, i), lhs, rhs
                if ok(wj, wi, 1):
                    # (g_j g_i) g_i^{p-1} = g_j (g_i^p)
                    gji = self.mul_letters(e(j), [(i, 1)])
                    lhs = self.mul_letters(gji, [(i, p - 1)])
                    rhs = self.mul_letters(e(j), self.letters(self.powers[i]))
                    yield ("pow-right", j, i), lhs, rhs
        for i in range(n):
            if ok(w[i] if w else 0, w[i] if w else 0, 1):
                lhs = self.mul_letters(self.powers[i], [(i, 1)])
                rhs = self.mul_letters(e(i), self.letters(self.powers[i]))
                yield ("pow-pow", i), lhs, rhs

    def is_consistent(self) -> bool:
        return all(lhs == rhs for _, lhs, rhs in self.consistency_pairs())

    def failing_overlaps(self) -> list:
        return [(t, lhs, rhs) for t, lhs, rhs in self.consistency_pairs() if lhs != rhs]

    # ------------------------------------------------------------------
    def table(self):
        """Multiplication tables (built lazily; only for small orders)."""
        if self._table is None:
            from .table import PcTable
            self._table = PcTable(self)
        return self._table

    def with_bookkeeping(self, weights=None, definitions=None) -> "PcPresentation":
        G = PcPresentation.__new__(PcPresentation)
        G.__dict__.update(self.__dict__)
        G.weights = tuple(weights) if weights is not None else None
        G.definitions = tuple(None if d is None else tuple(d) for d in definitions) \
            if definitions is not None else None
        G._validate()
        return G

    def rules_key(self):
        return (self.p, self.n, self.powers, tuple(sorted(self.comms.items())))

    def __eq__(self, other):
        if not isinstance(other, PcPresentation):
            return NotImplemented
        return (self.rules_key() == other.rules_key()
                and self.weights == other.weights
                and self.definitions == other.definitions)

    def __hash__(self):
        return hash(self.rules_key())

    def __repr__(self):
        return f"PcPresentation(p={self.p}, n={self.n})"

    # ------------------------------------------------------------------
    # serialization
    def to_text(self) -> str:
        return format_pc(self)

    def to_json(self) -> dict:
        def word(v):
            return [[k + 1, e] for k, e in enumerate(v) if e]
        d = {
            "p": self.p,
            "n": self.n,
            "powers": {str(i + 1): word(v) for i, v in enumerate(self.powers) if any(v)},
            "commutators": {f"{i + 1},{j + 1}": word(v)
                            for (i, j), v in sorted(self.comms.items())},
            "weights": list(self.weights) if self.weights is not None else None,
            "definitions": None if self.definitions is None else [
                None if dd is None else [dd[0]] + [t + 1 for t in dd[1:]]
                for dd in self.definitions],
        }
        return d

    @classmethod
    def from_json(cls, d) -> "PcPresentation":
        if isinstance(d, str):
            d = json.loads(d)
        p, n = int(d["p"]), int(d["n"])
        def vec(word):
            v = [0] * n
            for k, e in word:
                v[int(k) - 1] = int(e) % p
            return tuple(v)
        powers = {int(i) - 1: vec(w) for i, w in d.get("powers", {}).items()}
        comms = {}
        for key, w in d.get("commutators", {}).items():
            i, j = (int(t) - 1 for t in key.split(","))
            comms[(i, j)] = vec(w)
        defs = d.get("definitions")
        if defs is not None:
            defs = [None if dd is None else (dd[0],) + tuple(int(t) - 1 for t in dd[1:])
                    for dd in defs]
        return cls(p, n, powers, comms, d.get("weights"), defs)


def _word_text(v) -> str:
    return " ".join(f"{k + 1}^{e}" for k, e in enumerate(v) if e)


def format_pc(G: PcPresentation) -> str:
    """Text format: header ``p n`` then rule lines; trivial rules omitted."""
    lines = [f"{G.p} {G.n}"]
    for i, v in enumerate(G.powers):
        if any(v):
            lines.append(f"pow {i + 1} = {_word_text(v)}")
    for (i, j), v in sorted(G.comms.items()):
        lines.append(f"comm {i + 1} {j + 1} = {_word_text(v)}")
    if G.weights is not None:
        lines.append("weights " + " ".join(str(w) for w in G.weights))
    if G.definitions is not None:
        for k, d in enumerate(G.definitions):
            if d is None:
                lines.append(f"def {k + 1} = gen")
            elif d[0] == "pow":
                lines.append(f"def {k + 1} = pow {d[1] + 1}")
            else:
                lines.append(f"def {k + 1} = comm {d[1] + 1} {d[2] + 1}")
    return "\n".join(lines) + "\n"


class ParseError(PresentationError):
    def __init__(self, msg, line=None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


def parse_pc(text: str) -> PcPresentation:
    """Parse the text format produced by :func:`format_pc`."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        s = raw.split("#", 1)[0].strip()
        if s:
            rows.append((lineno, s))
    if not rows:
        raise ParseError("empty group file")
    lineno, head = rows[0]
    try:
        p, n = (int(t) for t in head.split())
    except ValueError:
        raise ParseError("header must be 'p n'", lineno) from None

    def word(rhs, ln):
        v = [0] * n
        for tok in rhs.split():
            try:
                g, e = tok.split("^") if "^" in tok else (tok, "1")
                g, e = int(g), int(e)
            except ValueError:
                raise ParseError(f"bad word token {tok!r}", ln) from None
            if not 1 <= g <= n:
                raise ParseError(f"generator {g} out of range", ln)
            if not 0 <= e < p:
                raise ParseError(f"exponent {e} out of range [0,{p})", ln)
            v[g - 1] = e
        return tuple(v)

    powers, comms = {}, {}
    weights, defs = None, None
    for ln, s in rows[1:]:
        head, _, rhs = s.partition("=")
        toks = head.split()
        try:
            if toks[0] == "pow" and len(toks) == 2:
                powers[int(toks[1]) - 1] = word(rhs, ln)
            elif toks[0] == "comm" and len(toks) == 3:
                i, j = int(toks[1]) - 1, int(toks[2]) - 1
                if not 0 <= j < i < n:
                    raise ParseError("commutator needs i > j", ln)
                comms[(i, j)] = word(rhs, ln)
            elif toks[0] == "weights":
                weights = [int(t) for t in toks[1:]]
            elif toks[0] == "def" and len(toks) == 2:
                defs = defs or [None] * n
                r = rhs.split()
                k = int(toks[1]) - 1
                if r[0] == "gen":
                    defs[k] = None
                elif r[0] == "pow":
                    defs[k] = ("pow", int(r[1]) - 1)
                elif r[0] == "comm":
                    defs[k] = ("comm", int(r[1]) - 1, int(r[2]) - 1)
                else:
                    raise ParseError(f"bad definition {rhs!r}", ln)
            else:
                raise ParseError(f"unrecognised rule {s!r}", ln)
        except (ValueError, IndexError):
            raise ParseError(f"malformed rule {s!r}", ln) from None
    try:
        return PcPresentation(p, n, powers, comms, weights, defs)
    except ParseError:
        raise
    except PresentationError as exc:
        raise ParseError(str(exc)) from None
