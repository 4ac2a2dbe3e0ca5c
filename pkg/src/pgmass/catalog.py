"""Small named p-groups in pc form.

Most of them are metacyclic, ``<a, b | a^(p^m), b^p = a^s, a^b = a^r>``, with
pc generators ``a, b, a^p, a^(p^2), ...``.
"""
from __future__ import annotations

from .pcgroup.presentation import PcPresentation


def trivial(p: int = 2) -> PcPresentation:
    return PcPresentation(p, 0)


def elementary_abelian(p: int, d: int) -> PcPresentation:
    return PcPresentation(p, d, weights=[1] * d, definitions=[None] * d)


def cyclic(p: int, k: int) -> PcPresentation:
    powers = {i: {i + 1: 1} for i in range(k - 1)}
    return PcPresentation(p, k, powers)


def abelian(p: int, exps) -> PcPresentation:
    """Direct product of cyclic groups of orders ``p**e`` for ``e`` in ``exps``.

    Generators are ordered by layer so that the series is central:
    the ``p^j``-th powers of the cyclic generators come in block ``j``.
    """
    exps = list(exps)
    gens = [(c, j) for j in range(max(exps, default=0)) for c, e in enumerate(exps) if j < e]
    pos = {g: t for t, g in enumerate(gens)}
    powers = {}
    for (c, j), t in pos.items():
        if (c, j + 1) in pos:
            powers[t] = {pos[(c, j + 1)]: 1}
    return PcPresentation(p, len(gens), powers)


def metacyclic(p: int, m: int, r: int, s: int = 0) -> PcPresentation:
    """``<a, b | a^(p^m) = 1, b^p = a^s, a^b = a^r>`` (requires r = 1 mod p)."""
    n = m + 1
    N = p ** m
    # positions: a -> 0, b -> 1, a^(p^j) -> j + 1 for j >= 1
    def a_pow(t: int):
        t %= N
        v = [0] * n
        for j in range(m):
            d = t % p
            t //= p
            v[0 if j == 0 else j + 1] = d
        return v
    def below_a(t):
        v = a_pow(t)
        assert v[0] == 0
        return {k: e for k, e in enumerate(v) if e}
    powers = {0: below_a(p), 1: below_a(s)}
    for j in range(1, m):
        powers[j + 1] = below_a(p ** (j + 1))
    comms = {(1, 0): below_a(1 - r)}
    for j in range(1, m):
        e = p ** j
        comms[(j + 1, 1)] = below_a(e * (r - 1))
    return PcPresentation(p, n, powers, comms)


def modular(p: int, m: int) -> PcPresentation:
    """Modular group of order ``p^(m+1)``: ``a^(p^m)``, ``b^p``, ``a^b = a^(1+p^(m-1))``."""
    return metacyclic(p, m, 1 + p ** (m - 1))


def m16() -> PcPresentation:
    return modular(2, 3)


def m27() -> PcPresentation:
    return modular(3, 2)


def heisenberg(p: int) -> PcPresentation:
    """Extraspecial group of order p^3 and exponent p (p odd)."""
    return PcPresentation(p, 3, {}, {(1, 0): {2: 1}})


def dihedral(k: int) -> PcPresentation:
    """Dihedral group of order ``2^k``."""
    return metacyclic(2, k - 1, -1)


def quaternion(k: int = 3) -> PcPresentation:
    """Generalised quaternion group of order ``2^k``."""
    return metacyclic(2, k - 1, -1, 2 ** (k - 2))


def semidihedral(k: int) -> PcPresentation:
    """Semidihedral group of order ``2^k`` (k >= 4): ``a^b = a^(2^(k-2) - 1)``."""
    return metacyclic(2, k - 1, 2 ** (k - 2) - 1)


CATALOG = {
    "trivial": lambda: trivial(2),
    "c2xc2": lambda: elementary_abelian(2, 2),
    "c3xc3": lambda: elementary_abelian(3, 2),
    "c2xc4": lambda: abelian(2, [1, 2]),
    "c4xc4": lambda: abelian(2, [2, 2]),
    "m16": m16,
    "m27": m27,
    "heis27": lambda: heisenberg(3),
    "q8": quaternion,
    "d8": lambda: dihedral(3),
    "sd16": lambda: semidihedral(4),
    "sd32": lambda: semidihedral(5),
}
