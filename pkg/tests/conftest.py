import itertools

import numpy as np
import pytest

from pgmass.catalog import CATALOG, m16
from pgmass.pcgroup import PcPresentation


def m16_oracle_product(x, y, r=5):
    """Multiply (i, j) = a^i b^j in <a, b | a^8, b^2, a^b = a^r>."""
    i, j = x
    k, l = y
    return ((i + k * pow(r, j, 8)) % 8, (j + l) % 2)


def m16_pc_to_oracle(v):
    # g1 = a, g2 = b, g3 = a^2, g4 = a^4
    e1, e2, e3, e4 = v
    return ((e1 + pow(5, e2, 8) * (2 * e3 + 4 * e4)) % 8, e2)


def all_elements(G):
    return [tuple(v) for v in itertools.product(range(G.p), repeat=G.n)]


def brute_classes(G):
    """Conjugacy classes by explicit orbit enumeration."""
    elems = all_elements(G)
    seen, sizes = set(), []
    for x in elems:
        if x in seen:
            continue
        orbit = {G.conj(x, g) for g in elems}
        seen |= orbit
        sizes.append(len(orbit))
    return sorted(sizes)


def rebase(G, rng):
    """A different pc-presentation of G: standardize from random generators."""
    from pgmass.homs import minimal_generators, _generates
    from pgmass.pgen.standard import standardize
    elems = all_elements(G)
    d = len(minimal_generators(G))
    while True:
        gens = [elems[int(i)] for i in rng.integers(len(elems), size=d)]
        if _generates(G, gens):
            return standardize(G, gens=gens, with_aut=False).group


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=sorted(CATALOG))
def catalog_group(request):
    return CATALOG[request.param]()


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
