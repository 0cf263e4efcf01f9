from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bnreduce.errors import MismatchedSystems, SizeLimit
from bnreduce.induced import conjugacy
from bnreduce.landscape import (
    TransitionDiagram,
    analyze,
    check_bounds,
    de_bruijn_sequence,
    extremal_chain_network,
    extremal_cycle_network,
    extremal_debruijn_network,
    landscape_of,
    transition_diagram,
)
from bnreduce.netcore import encode

from conftest import load, random_cases


def union_find_components(succ):
    parent = list(range(len(succ)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for x, y in enumerate(succ):
        ra, rb = find(x), find(int(y))
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    return [find(x) for x in range(len(succ))]


def naive_transients(succ):
    out = []
    for x in range(len(succ)):
        seen, path, y = {}, [], x
        while y not in seen:
            seen[y] = len(path)
            path.append(y)
            y = int(succ[y])
        out.append(seen[y])  # steps until the first state on the cycle
    return out


functional_graphs = st.integers(1, 60).flatmap(
    lambda size: st.lists(st.integers(0, size - 1), min_size=size, max_size=size)
)


@settings(max_examples=150, deadline=None)
@given(functional_graphs)
def test_analysis_matches_naive_oracles(succ):
    land = analyze(TransitionDiagram(np.array(succ)))
    roots = union_find_components(succ)
    # same partition as union-find over the undirected links
    pairs = set(zip(roots, land.component.tolist()))
    assert len(pairs) == len(set(roots)) == land.n_attractors
    assert land.transient.tolist() == naive_transients(succ)
    assert sum(b.basin_size for b in land.basins) == len(succ)
    for b in land.basins:
        assert 1 <= b.period <= b.basin_size
        assert b.max_transient >= b.mean_transient >= 0
        assert b.cycle_states[0] == min(b.cycle_states)
    # basins are numbered by their smallest cycle state
    firsts = [b.cycle_states[0] for b in land.basins]
    assert firsts == sorted(firsts)


@settings(max_examples=60, deadline=None)
@given(functional_graphs, st.randoms(use_true_random=False))
def test_relabelling_states_preserves_the_landscape(succ, rnd):
    perm = list(range(len(succ)))
    rnd.shuffle(perm)
    relabelled = [0] * len(succ)
    for x, y in enumerate(succ):
        relabelled[perm[x]] = perm[y]
    a = analyze(TransitionDiagram(np.array(succ)))
    b = analyze(TransitionDiagram(np.array(relabelled)))
    summary = lambda land: Counter((r.period, r.basin_size, r.mean_transient, r.max_transient) for r in land.basins)
    assert summary(a) == summary(b)


def test_fig1_landscape(fig1):
    land = landscape_of(fig1)
    assert land.n_attractors == 2
    assert [(b.period, b.basin_size) for b in land.basins] == [(8, 16), (8, 16)]


def test_fig4_landscape():
    land = landscape_of(load("fig4.bn"))
    assert [(b.period, b.basin_size) for b in land.basins] == [(4, 32)]


def test_chain_of_three_has_two_fixed_points():
    land = landscape_of(extremal_chain_network(3))
    assert [(b.period, b.basin_size) for b in land.basins] == [(1, 4), (1, 4)]
    assert set(land.basins[0].cycle_states + land.basins[1].cycle_states) == {0, 7}


def test_csv_formats(fig1):
    land = landscape_of(fig1)
    assert land.to_csv().splitlines()[0] == "component,period,basin_size,mean_transient,max_transient"
    assert land.to_csv().splitlines()[1] == "0,8,16,0.500000,1"
    conj = conjugacy(fig1, {1, 2})
    report = check_bounds(conj.network_landscape(), conj.induced_landscape(), conj.h, 2, conj.depth, conj.ell)
    assert report.to_csv().splitlines()[0] == "clause,observed,bound,satisfied"
    assert report.all_satisfied


def test_transition_diagram_inputs(fig1):
    assert transition_diagram(fig1).size == 32
    assert transition_diagram(lambda s: (s + 1) % 5, size=5).size == 5
    with pytest.raises(ValueError):
        TransitionDiagram(np.array([0, 3]))
    with pytest.raises(SizeLimit):
        transition_diagram(lambda s: s, size=1 << 30)


def test_bounds_reject_mismatched_pairs(fig1):
    conj = conjugacy(fig1, {1, 2})
    F, G = conj.network_landscape(), conj.induced_landscape()
    with pytest.raises(MismatchedSystems):
        check_bounds(F, G, conj.h[:-1], 2, conj.depth, conj.ell)
    with pytest.raises(MismatchedSystems):
        check_bounds(F, G, conj.h + G.size, 2, conj.depth, conj.ell)


CASES = random_cases(60, seed=5)


@pytest.mark.parametrize("case", range(len(CASES)))
def test_proven_bounds_hold_on_random_networks(case):
    net, U = CASES[case]
    conj = conjugacy(net, U)
    report = check_bounds(conj.network_landscape(), conj.induced_landscape(), conj.h,
                          len(U), conj.depth, conj.ell)
    for clause in ("a", "b", "c", "d.lower", "d.upper", "e.image.lower", "e.image.upper",
                   "components", "periods"):
        assert report[clause].satisfied, report.to_text()


def test_full_basin_can_outgrow_the_network_basin():
    """The induced basin of h(x) may contain histories that no configuration
    produces, so comparing basin sizes needs the image h(C_F(x))."""
    net = load("basin_counterexample.bn")
    conj = conjugacy(net, {2})
    F, G = conj.network_landscape(), conj.induced_landscape()
    report = check_bounds(F, G, conj.h, 1, conj.depth, conj.ell)
    assert report["e.lower"].observed == 2 and not report["e.lower"].satisfied
    assert report["e.image.lower"].satisfied and report["e.image.upper"].satisfied
    assert [c.clause for c in report.failures()] == ["e.lower"]


def test_cycle_network_attains_the_periodic_point_bound():
    conj = conjugacy(extremal_cycle_network(3), [1])
    land = conj.network_landscape()
    assert int(land.periodic.sum()) == 8 == 2 ** (3 * 1)
    report = check_bounds(land, conj.induced_landscape(), conj.h, 1, conj.depth, conj.ell)
    # every period divides 3, and both P = 1 and P = 3 meet 2^(P|U|) exactly
    assert [(P, count, bound) for P, count, _, bound in report.per_period] == [(1, 2, 2), (2, 2, 4), (3, 8, 8)]
    assert report["a"].observed == report["a"].bound


@pytest.mark.parametrize("ell", [1, 2, 3, 4, 5])
def test_de_bruijn_network_is_one_full_orbit(ell):
    conj = conjugacy(extremal_debruijn_network(ell), [1])
    assert conj.ell == ell
    land = conj.induced_landscape()
    assert [b.period for b in land.basins] == [2**ell]


@pytest.mark.parametrize("order", range(1, 9))
def test_de_bruijn_sequences_contain_every_word_once(order):
    seq = de_bruijn_sequence(order)
    assert len(seq) == 2**order
    words = {tuple(seq[(i + j) % len(seq)] for j in range(order)) for i in range(len(seq))}
    assert len(words) == 2**order


def test_small_de_bruijn_sequences():
    assert de_bruijn_sequence(1) == [0, 1]
    assert de_bruijn_sequence(2) == [0, 1, 1, 0]
    assert de_bruijn_sequence(3) == [0, 1, 0, 1, 1, 1, 0, 0]


def test_chain_network_attains_transient_and_size_bounds():
    n = 5
    conj = conjugacy(extremal_chain_network(n), [1])
    F, G = conj.network_landscape(), conj.induced_landscape()
    x = encode([-1] + [1] * (n - 1))
    assert conj.depth == n - 1
    assert F.transient[x] == G.transient[conj.h[x]] + conj.depth
    assert F.basin_size_array()[x] == G.basin_size_array()[conj.h[x]] * 2 ** (n - 1)


def test_mean_transient_is_exact(fig1):
    land = landscape_of(fig1)
    assert land.basins[0].mean_transient == Fraction(1, 2)
