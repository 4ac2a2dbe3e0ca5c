import itertools

import pytest

from pgmass.catalog import CATALOG, abelian, elementary_abelian, heisenberg, m16, m27, quaternion
from pgmass.pcgroup import (InconsistentPresentationError, ParseError, PcPresentation,
                            format_pc, parse_pc)
from pgmass.pcgroup.classes import (centralizer_order, class_data, conjugacy_classes,
                                    element_order, exponent, is_conjugate, power_class_map)
from pgmass.pcgroup.subgroups import (Quotient, abelianization, lower_p_central_series,
                                      maximal_subgroups_abelianizations, normal_closure, p_class,
                                      quotient)

from conftest import all_elements, brute_classes, m16_oracle_product, m16_pc_to_oracle


def _m16_with_r3(check):
    G = m16()
    comms = dict(G.comms)
    comms[(1, 0)] = (0, 0, 1, 1)             # [b, a] = a^-2, i.e. a^b = a^3
    return PcPresentation(2, 4, G.powers, comms, check=check)


def test_collect_matches_m16_table():
    G = m16()
    for x in all_elements(G):
        for y in all_elements(G):
            got = m16_pc_to_oracle(G.mul(x, y))
            assert got == m16_oracle_product(m16_pc_to_oracle(x), m16_pc_to_oracle(y))


def test_collect_ba_equals_a5b():
    G = m16()
    ba = G.collect_word([(1, 1), (0, 1)])
    a5b = G.collect_word([(0, 5), (1, 1)])
    assert ba == a5b


def test_empty_word_and_inverses(rng):
    G = m16()
    assert G.collect_word([]) == G.identity()
    elems = all_elements(G)
    for i in rng.integers(len(elems), size=100):
        g = elems[int(i)]
        assert G.mul(g, G.inv(g)) == G.identity()


def test_consistency():
    assert elementary_abelian(3, 2).is_consistent()
    assert m16().is_consistent()
    bad = _m16_with_r3(check=False)
    assert not bad.is_consistent()
    assert bad.failing_overlaps()
    with pytest.raises(InconsistentPresentationError):
        _m16_with_r3(check=True)


def test_r3_variant_contradicts_table_oracle():
    # in <a, b | a^8, b^2, a^b = a^3>, a^2 and b do not commute; the pc rules
    # above claim they do, which is the overlap that fails
    a2, b = (2, 0), (0, 1)
    lhs = m16_oracle_product(m16_oracle_product(a2, b, r=3), (0, 0), r=3)
    rhs = m16_oracle_product(b, a2, r=3)
    assert lhs != rhs


def test_element_orders():
    G = m16()
    assert element_order(G, G.identity()) == 1
    assert element_order(G, G.gen(0)) == 8
    E = elementary_abelian(3, 2)
    assert all(element_order(E, x) == 3 for x in all_elements(E) if any(x))
    assert exponent(m27()) == 9
    assert exponent(heisenberg(3)) == 3


def test_conjugacy_classes():
    assert [c.size for c in conjugacy_classes(elementary_abelian(3, 2))] == [1] * 9
    assert sorted(c.size for c in conjugacy_classes(m16())) == [1, 1, 1, 1, 2, 2, 2, 2, 2, 2]
    assert sorted(c.size for c in conjugacy_classes(quaternion())) == [1, 1, 2, 2, 2]


def test_classes_match_orbit_oracle(catalog_group):
    G = catalog_group
    if G.n == 0:
        assert [c.size for c in conjugacy_classes(G)] == [1]
        return
    assert sorted(c.size for c in conjugacy_classes(G)) == brute_classes(G)


def test_class_representatives_are_least():
    G = m16()
    cd = class_data(G)
    for c in cd.classes():
        members = [x for x in all_elements(G) if is_conjugate(G, x, c.representative)]
        assert min(members) == c.representative or \
            cd.T.index(c.representative) == min(cd.T.index(x) for x in members)
        assert len(members) == c.size


def test_abelianization():
    assert abelianization(m27()).invariants == (3, 3)
    assert abelianization(m16()).invariants == (2, 4)
    assert abelianization(elementary_abelian(2, 2)).invariants == (2, 2)
    assert abelianization(CATALOG["trivial"]()).invariants == ()


def test_p_class():
    assert p_class(elementary_abelian(2, 2)) == 1
    assert len(lower_p_central_series(elementary_abelian(2, 2))) == 2
    assert p_class(m16()) == 3
    assert p_class(m27()) == 2


def test_quotients():
    G = m16()
    Q = quotient(G, []).Q
    assert Q.n == G.n
    E = elementary_abelian(3, 2)
    assert quotient(E, [(1, 2)]).Q.n == 1
    # M16 / <a^4>: order 8, abelianization computed against the table oracle
    Q = quotient(G, [(0, 0, 0, 1)]).Q
    assert Q.order == 8
    # the image of a has order 4 and b acts by a -> a^5 = a, so the quotient
    # is abelian Z/4 x Z/2
    assert abelianization(Q).invariants == (2, 4)


def test_quotient_map_is_homomorphism(rng):
    G = m16()
    quo = Quotient(G, normal_closure(G, [(0, 0, 1, 0)]))
    elems = all_elements(G)
    for _ in range(500):
        x, y = (elems[int(i)] for i in rng.integers(len(elems), size=2))
        assert quo.project(G.mul(x, y)) == quo.Q.mul(quo.project(x), quo.project(y))


def test_maximal_subgroups():
    abs_ = maximal_subgroups_abelianizations(elementary_abelian(2, 2))
    assert sorted(a.invariants for a in abs_) == [(2,), (2,), (2,)]
    # M16 = <a, b>: maximal subgroups <a>, <a b>, <a^2, b>
    abs_ = sorted(a.invariants for a in maximal_subgroups_abelianizations(m16()))
    assert abs_ == [(2, 4), (8,), (8,)]


def test_power_class_map_and_centralizers():
    G = m27()
    cd = class_data(G)
    ident = cd.conj_class(cd.label_of(G.identity()))
    assert power_class_map(G, ident, 7).representative == G.identity()
    # a^4 ~ a in M27: a^b = a^4
    a = G.gen(0)
    assert is_conjugate(G, G.power(a, 4), a)
    assert centralizer_order(G, G.identity()) == 27
    for c in cd.classes():
        assert centralizer_order(G, c.representative) * c.size == 27


def test_text_round_trip(catalog_group):
    text = format_pc(catalog_group)
    assert parse_pc(text) == catalog_group
    assert PcPresentation.from_json(catalog_group.to_json()) == catalog_group


def test_parse_errors_report_line():
    with pytest.raises(ParseError) as exc:
        parse_pc("2 2\npow 1 = 2^1\nbogus 3\n")
    assert "line" in str(exc.value)


def test_trivial_group_everywhere():
    T = CATALOG["trivial"]()
    assert T.order == 1
    assert exponent(T) == 1
    assert [c.size for c in conjugacy_classes(T)] == [1]
    assert maximal_subgroups_abelianizations(T) == []


def test_abelian_catalog():
    G = abelian(2, [1, 2, 3])
    assert abelianization(G).invariants == (2, 4, 8)
    assert G.order == 64
