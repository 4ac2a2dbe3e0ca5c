"""Acceptance criteria, one test each; every test prints a single
``criterion N: PASS|FAIL`` line (collected in the terminal summary)."""
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

from pgmass.arith import census, census_histogram, ray_census
from pgmass.braidsim import (build_punctured_free, oracle_targets, parse_permutation,
                             run_distribution, tiny_burnside_oracle)
from pgmass.catalog import elementary_abelian, heisenberg, m16, m27, semidihedral
from pgmass.homs import automorphism_group, is_isomorphic
from pgmass.mass import TypeZ, count_A_Z, mass, parse_type
from pgmass.pcgroup import parse_pc
from pgmass.pcgroup.subgroups import abelianization, maximal_subgroups_abelianizations
from pgmass.pgen.tree import explore_tree

REPORT = []


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    REPORT.append(line)
    return ok


# ---------------------------------------------------------------------------
def test_criterion_1_modular27_mass():
    t = time.perf_counter()
    G = m27()
    Z = parse_type("3:1+3Z,1+3Z")
    A, aut = count_A_Z(G, Z), automorphism_group(G).order
    m = mass(G, Z)
    dt = time.perf_counter() - t
    ok = (A, aut, m) == (48, 54, Fraction(8, 9)) and dt < 5
    assert record(1, ok, f"A={A} |Aut|={aut} mass={m} ({dt:.2f}s)")


def test_criterion_2_order_3_5():
    t = time.perf_counter()
    res = explore_tree(None, parse_type("3:1+3Z,1+3Z"), max_order_exponent=5)
    dt = time.perf_counter() - t
    top = [n for n in res.nodes() if n.order_exponent == 5]
    balanced = [n for n in top if n.mult_rank == 2]
    listing = ", ".join(f"{n.name}:{n.mass}(h2={n.mult_rank})" for n in top)
    ok = [n.mass for n in balanced] == [Fraction(2, 81)] and balanced[0].terminal and dt < 600
    assert record(2, ok, f"2-relator order-3^5 vertex masses {[str(n.mass) for n in balanced]}; "
                         f"all order-3^5 vertices: {listing} ({dt:.1f}s)")


def test_criterion_3_semidihedral_and_z2z4():
    t = time.perf_counter()
    # each semidihedral group under its matching type (3 mod 4)^2
    sd = {k: mass(semidihedral(k), TypeZ(2, (l, l))) for k, l in [(4, 3), (5, 7), (6, 47)]}
    res = explore_tree(None, parse_type("2:3mod8,5mod8"), max_order_exponent=7)
    terms = sorted((n.order_exponent, n.mass) for n in res.nodes() if n.terminal)
    m16_node = next((n for n in res.nodes() if n.terminal and n.order_exponent == 4), None)
    dt = time.perf_counter() - t
    ok = (all(v == 1 for v in sd.values())
          and terms == [(4, Fraction(1, 2)), (7, Fraction(1, 4))]
          and m16_node is not None and is_isomorphic(m16_node.group, m16())
          and dt < 600)
    assert record(3, ok, f"SD masses {{{', '.join(f'SD{2 ** k}: {v}' for k, v in sd.items())}}}; "
                         f"type (3,5) terminals {[(f'2^{e}', str(m)) for e, m in terms]} "
                         f"({dt:.1f}s)")


# ---------------------------------------------------------------------------
@pytest.fixture(scope="module")
def z4z4_trees():
    t = time.perf_counter()
    Z = parse_type("2:5mod8,5mod8")
    base = explore_tree(None, Z, max_order_exponent=8)
    order256 = [n for n in base.nodes() if n.order_exponent == 8 and n.p_class == 3]
    gamma1 = next((n for n in order256 if n.mass == Fraction(1, 4)), None)
    sub = explore_tree(gamma1.group, Z, max_order_exponent=14) if gamma1 else None
    return base, order256, gamma1, sub, time.perf_counter() - t


def test_criterion_4_z4z4_tree(z4z4_trees):
    base, order256, gamma1, sub, dt = z4z4_trees
    nodes = base.nodes()
    t64 = [n for n in nodes if n.order_exponent == 6 and n.terminal]
    masses = sorted(n.mass for n in order256)
    pattern = {n.name: sorted(tuple(a.invariants) for a in maximal_subgroups_abelianizations(n.group))
               for n in order256}
    others = [n for n in order256 if n is not gamma1]
    ok_pattern = (gamma1 is not None and pattern[gamma1.name] == [(2, 4, 4)] * 3
                  and all(sorted(pattern[n.name]) == [(2, 2, 8), (2, 4, 4), (2, 4, 4)]
                          for n in others))
    ok_ab = all(abelianization(n.group).invariants == (4, 4) for n in order256)
    kids = [c for c in sub.root.children if c.order_exponent == 11] if sub else []
    grandkids = [[g for g in c.children if g.order_exponent == 14] for c in kids]
    ok_sub = (len(kids) == 2 and all(c.mass == Fraction(1, 8) for c in kids)
              and sorted(len(g) for g in grandkids) == [0, 2]
              and all(g.mass == Fraction(1, 16) for gs in grandkids for g in gs))
    ok = (len(t64) == 1 and t64[0].mass == Fraction(1, 2)
          and len(order256) == 3 and gamma1 is not None
          and sum(n.mass for n in others) == Fraction(1, 4)
          and ok_pattern and ok_ab and ok_sub and dt < 1800)
    assert record(4, ok,
                  f"order-64 terminal masses {[str(n.mass) for n in t64]}; class-3 order-256 "
                  f"masses {[str(m) for m in masses]}; index-2 abelianizations "
                  f"{ {k: v for k, v in pattern.items()} }; Gamma_1 children "
                  f"{[str(c.mass) for c in kids]}, grandchildren "
                  f"{[[str(g.mass) for g in gs] for gs in grandkids]} ({dt:.0f}s)")


def test_criterion_5_conservation(z4z4_trees):
    base, _, _, sub, _ = z4z4_trees
    checks = base.conservation + (sub.conservation if sub else [])
    anomalies = [a for a in base.anomalies if a["status"] == "anomaly"]
    strict = [(n, a, b) for n, a, b, _ in checks if a == b]
    flagged = [(n, str(a), str(b)) for n, a, b, ok in checks if a != b]
    ok = bool(checks) and all(ok for *_, ok in checks)
    assert record(5, ok, f"{len(strict)} vertices with exact sum, {len(flagged)} anomaly-flagged "
                         f"{flagged}; {len(anomalies)} equal-class quotient anomalies")


# ---------------------------------------------------------------------------
def test_criterion_6_braid_monte_carlo():
    t = time.perf_counter()
    sigma = parse_permutation("(1 2)(3 4)", 4)
    Qf = build_punctured_free(4, 3, 2)
    rep = run_distribution(Qf, 2, sigma, 10_000, seed=42)
    key = next(k for k, txt in rep.groups.items() if is_isomorphic(parse_pc(txt), m27()))
    freq = rep.frequency(key)
    ab_ok = all(inv == (3, 3) for inv in rep.abelianizations.values())
    orbits = []
    for G in (m27(), heisenberg(3), elementary_abelian(3, 2)):
        for tgt in oracle_targets(G, 2, sigma):
            orbits.append(tiny_burnside_oracle(Qf, 2, sigma, (G, tgt)).orbits)
    dt = time.perf_counter() - t
    ok = (abs(freq - 8 / 9) <= 0.01 and ab_ok and rep.predicted[key] == Fraction(8, 9)
          and set(orbits) == {1} and dt < 1800)
    assert record(6, ok, f"modular-27 frequency {freq:.4f} (target 0.8889 +- 0.01, 3-sigma "
                         f"{rep.radius(key):.4f}); abelianizations all (3,3): {ab_ok}; "
                         f"acceptance rate {rep.acceptance_rate:.3f}; oracle orbit counts on "
                         f"{len(orbits)} targets: {sorted(set(orbits))} ({dt:.0f}s)")


def test_criterion_7_koch_census():
    t = time.perf_counter()
    rep, _ = census("koch", (10 ** 4, 10 ** 5), 5000, seed=7)
    x = rep.proportion("Gamma_27")
    dt = time.perf_counter() - t
    ok = rep.total >= 5000 and abs(x - 8 / 9) <= 0.02 and dt < 300
    assert record(7, ok, f"Gamma_27 proportion {x:.4f} over {rep.total} pairs "
                         f"(target 0.8889 +- 0.02) ({dt:.1f}s)")


def test_criterion_8_ray_class_census():
    t = time.perf_counter()
    results = ray_census(100_000)
    hist = census_histogram(results)
    shapes = all(len(v) == 2 and v[0] == 2 and v[1] >= 16 for v in results.values())
    dt = time.perf_counter() - t
    got = [hist.get(n, 0) for n in (4, 5, 6, 7)]
    ok = got == [301, 151, 74, 42] and shapes and dt < 7200
    assert record(8, ok, f"n=4..7 counts {got} (full histogram {hist}); "
                         f"all Z/2 x Z/2^n, n >= 4: {shapes} ({dt:.1f}s)")


def test_criterion_9_property_suites():
    t = time.perf_counter()
    here = Path(__file__).resolve().parent
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           str(here / "test_properties.py")],
                          capture_output=True, text=True, cwd=here.parent)
    dt = time.perf_counter() - t
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    ok = proc.returncode == 0 and dt < 600
    assert record(9, ok, f"{tail} ({dt:.0f}s)")
