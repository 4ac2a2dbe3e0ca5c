from fractions import Fraction

import numpy as np
import pytest

from pgmass.braidsim import (BraidError, BraidSample, RejectionCapError, _Sampler,
                             assert_automorphism, braid_type, build_punctured_free, cycles,
                             fixed_quotient, merge_reports, oracle_targets, parse_permutation,
                             run_distribution, sample_alpha, stabilization_histograms,
                             tiny_burnside_oracle, truncate, w_orders)
from pgmass.catalog import cyclic, heisenberg, m27, trivial
from pgmass.homs import is_isomorphic
from pgmass.pcgroup.classes import class_data
from pgmass.pcgroup.subgroups import abelianization

SIGMA = parse_permutation("(1 2)(3 4)", 4)


@pytest.fixture(scope="module")
def q4():
    return build_punctured_free(4, 3, 2)


def test_permutations():
    assert SIGMA == (1, 0, 3, 2)
    assert parse_permutation("", 3) == (0, 1, 2)
    assert parse_permutation("(1 3 2)", 3) == (2, 0, 1)
    assert cycles(SIGMA) == [[0, 1], [2, 3]]
    with pytest.raises(BraidError):
        parse_permutation("(1 5)", 4)
    with pytest.raises(BraidError):
        parse_permutation("(1 2)(2 3)", 3)


def test_braid_type():
    assert braid_type(3, 2, SIGMA).entries == (4, 4)
    assert w_orders(3, 2, SIGMA) == (3, 3)
    assert w_orders(3, 2, (1, 2, 0)) == (1,)          # 2^3 - 1 = 7


def test_punctured_free_orders():
    # rank N-1 free group: class 1 gives (Z/3)^(N-1)
    assert build_punctured_free(2, 3, 1).Q.order == 3
    assert build_punctured_free(2, 3, 3).Q.order == 27   # cyclic Z/27
    assert build_punctured_free(4, 3, 1).Q.order == 27
    assert build_punctured_free(4, 3, 2).Q.order == 3 ** 9    # 3 + 3 + C(3,2)


def test_punctured_free_relator(q4):
    Q = q4.Q
    prod = Q.identity()
    for x in q4.marked:
        prod = Q.mul(prod, x)
    assert prod == Q.identity()


def test_rejects_p2_and_bad_sizes():
    with pytest.raises(BraidError, match="cyclotomic"):
        build_punctured_free(4, 2, 2)
    with pytest.raises(BraidError):
        build_punctured_free(1, 3, 2)


def test_sample_seed_42(q4):
    s = sample_alpha(q4, 2, SIGMA, 42)
    assert_automorphism(q4, s)
    assert s.alpha(q4).is_bijective()
    T = q4.table
    prod = 0
    for y in s.images:
        prod = T.mul1(prod, y)
    assert prod == 0
    cd = class_data(q4.Q)
    for i, y in enumerate(s.images):
        target = q4.Q.power(q4.marked[SIGMA[i]], 2)
        assert cd.labels[y] == cd.labels[T.index(target)]
    # reproducible
    assert sample_alpha(q4, 2, SIGMA, 42).images == s.images
    assert sample_alpha(q4, 2, SIGMA, 42, index=1).images != s.images


def test_identity_braid(q4):
    T = q4.table
    s = BraidSample(1, tuple(range(4)), [0] * 4, [T.index(x) for x in q4.marked])
    assert_automorphism(q4, s)
    phi = s.alpha(q4)
    assert phi.images == [q4.Q.gen(k) for k in range(q4.Q.n)]
    assert fixed_quotient(q4, s).order == q4.Q.order


def test_rejection_cap(q4):
    with pytest.raises(RejectionCapError):
        _Sampler(q4, 2, SIGMA).draw(np.random.default_rng(1), cap=1)


def test_fixed_quotients(q4):
    for i in range(10):
        s = sample_alpha(q4, 2, SIGMA, 3, index=i)
        quo = fixed_quotient(q4, s, with_map=True)
        G = quo.Q
        assert abelianization(G).invariants == (3, 3)
        assert is_isomorphic(G, m27()) or is_isomorphic(G, heisenberg(3))
        cd = class_data(G)
        # the image of each x_j is conjugate to its q^k-th power (k = cycle length)
        for cyc in cycles(SIGMA):
            g = quo.project(q4.marked[cyc[0]])
            assert cd.label_of(G.power(g, 2 ** len(cyc))) == cd.label_of(g)


def test_n_cycle_gives_cyclic_quotients():
    Q2 = build_punctured_free(2, 3, 3)
    r = run_distribution(Q2, 2, (1, 0), 40, seed=5)
    assert list(r.abelianizations.values()) == [(3,)]
    assert list(r.predicted.values()) == [1]
    Q4 = build_punctured_free(4, 3, 2)
    r = run_distribution(Q4, 2, parse_permutation("(1 2 3 4)", 4), 40, seed=5)
    assert list(r.abelianizations.values()) == [(3,)]


def test_q_must_generate_units():
    Q = build_punctured_free(2, 3, 1)
    with pytest.raises(BraidError):
        run_distribution(Q, 4, (1, 0), 5, seed=1)
    with pytest.raises(BraidError):
        run_distribution(Q, 3, (1, 0), 5, seed=1)


def test_distribution_determinism(q4):
    a = run_distribution(q4, 2, SIGMA, 60, seed=11)
    b = run_distribution(q4, 2, SIGMA, 60, seed=11)
    assert a.to_json() == b.to_json()
    c = merge_reports([run_distribution(q4, 2, SIGMA, 30, seed=11),
                       run_distribution(q4, 2, SIGMA, 30, seed=11, start=30)])
    assert c.histogram == a.histogram
    d = run_distribution(q4, 2, SIGMA, 60, seed=11, threads=2)
    assert d.histogram == a.histogram
    assert sum(a.histogram.values()) == 60
    assert set(map(str, a.predicted.values())) <= {"8/9", "1/9"}


def test_empty_run(q4):
    r = run_distribution(q4, 2, SIGMA, 0, seed=1)
    assert r.histogram == {} and r.samples == 0


def test_truncate(q4):
    low = truncate(q4, 1)
    assert low.Q.order == 27
    assert truncate(q4, 5) is q4


def test_stabilization():
    Q = build_punctured_free(3, 3, 3)
    h_high, h_low = stabilization_histograms(Q, 2, parse_permutation("(1 2)", 3), 2, 15, seed=9)
    assert h_high == h_low
    assert sum(h_high.values()) == 15


def test_oracle_trivial_target():
    Q = build_punctured_free(2, 3, 1)
    T = trivial(3)
    res = tiny_burnside_oracle(Q, 2, (1, 0), (T, (class_data(T).classes()[0],)))
    assert res.average_fixed == 1 and res.orbits == 1


def test_oracle_cyclic_target():
    Q = build_punctured_free(2, 3, 1)
    C = cyclic(3, 1)
    targets = oracle_targets(C, 2, (1, 0))
    assert len(targets) == 2
    for t in targets:
        res = tiny_burnside_oracle(Q, 2, (1, 0), (C, t))
        assert res.orbits == 1 and res.average_fixed == 1


def test_oracle_modular27_targets(q4):
    G = m27()
    targets = oracle_targets(G, 2, SIGMA)
    assert len(targets) == 48
    for t in targets[:4]:
        res = tiny_burnside_oracle(q4, 2, SIGMA, (G, t))
        assert res.orbits == 1
        assert res.average_fixed == Fraction(1)
