import math

import pytest
from hypothesis import given, settings, strategies as st
from oracles import biclique_by_subsets, clique_by_subsets, pset_by_subsets

from qtsieve.errors import ResourceError, UsageError
from qtsieve.extremal import (INV_GOLDEN, TWO_THIRDS, _balanced_biclique, _shifted_graph,
                              _sqfree_graph, exponent_trajectory, is_pset,
                              is_shifted_product_pair, is_sqfree_sum_family, max_clique,
                              max_pset, max_shifted_product_family, max_sqfree_sum_family,
                              monic_up_to, trajectory_csv)
from qtsieve.field import field_of_order, get_field
from qtsieve.poly import Poly


def P(q, text):
    return Poly.parse(field_of_order(q), text)


def test_reference_constants():
    assert INV_GOLDEN == pytest.approx(0.6180339887)
    assert TWO_THIRDS == pytest.approx(0.6666666667)


def test_is_pset_examples():
    ok, witness = is_pset([P(2, "t"), P(2, "t^2+1")])
    assert not ok and witness[0] == "divides"
    assert is_pset([P(3, "t"), P(3, "t^2+1")]) == (True, None)
    ok, witness = is_pset([P(3, "t"), P(3, "t^2+t")], require_coprime=True)
    assert not ok and witness[0] == "not-coprime"
    with pytest.raises(UsageError):
        is_pset([Poly.parse(get_field(3), "2*t")])


@pytest.mark.parametrize("q,N,coprime,expected", [
    (2, 0, False, 1), (2, 1, False, 2), (2, 2, False, 4), (2, 3, False, 8),
    (2, 1, True, 2), (2, 2, True, 3), (2, 3, True, 4),
    (3, 1, False, 3), (3, 2, False, 9), (3, 2, True, 6),
])
def test_max_pset_values(q, N, coprime, expected):
    rep = max_pset(q, N, coprime)
    assert rep.max_size == expected
    assert is_pset(rep.witness[0], coprime)[0]


@pytest.mark.parametrize("q,N", [(2, 2), (2, 3), (3, 1), (3, 2)])
@pytest.mark.parametrize("coprime", [False, True])
def test_max_pset_matches_subset_scan(q, N, coprime):
    polys = monic_up_to(field_of_order(q), N)
    expected = pset_by_subsets(polys, lambda S: is_pset(S, coprime)[0])
    assert max_pset(q, N, coprime).max_size == expected


def test_pset_witness_is_lex_least():
    import itertools

    polys = monic_up_to(field_of_order(3), 1)
    rep = max_pset(3, 1)
    size = rep.max_size
    first = next(c for c in itertools.combinations(polys, size) if is_pset(c)[0])
    assert rep.witness[0] == first


def test_char2_degree_slices_are_psets():
    # in characteristic 2, f + f = 0 is divisible by everything, but two
    # distinct monics of equal degree sum to a lower-degree polynomial; the
    # monics of one exact degree form a P-set because no member has larger degree
    for N in (1, 2, 3):
        layer = [f for f in monic_up_to(field_of_order(2), N) if f.degree == N]
        assert is_pset(layer)[0]
        assert max_pset(2, N).max_size >= len(layer)


def _graphs():
    cases = []
    for q, N in [(2, 2), (2, 3), (3, 1), (3, 2), (4, 1), (5, 1), (7, 1)]:
        for flag in (True, False):
            verts, adj = _sqfree_graph(field_of_order(q), N, flag)
            if len(verts) <= 20:
                cases.append(pytest.param(adj, id=f"q{q}-N{N}-{flag}"))
    return cases


@pytest.mark.parametrize("adj", _graphs())
def test_clique_matches_subset_scan(adj):
    clique = max_clique(adj)
    assert len(clique) == clique_by_subsets(adj)
    for i in clique:
        for j in clique:
            assert i == j or adj[i] >> j & 1


@st.composite
def random_graph(draw):
    n = draw(st.integers(0, 14))
    adj = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if draw(st.booleans()):
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    return adj


@given(random_graph())
def test_clique_on_random_graphs(adj):
    clique = max_clique(adj)
    assert len(clique) == clique_by_subsets(adj)
    assert clique == sorted(clique)


@pytest.mark.parametrize("q,N,self_pairs,expected", [
    (2, 2, True, 0), (2, 2, False, 4),
    (3, 0, True, 1), (3, 1, True, 4), (3, 2, True, 4), (3, 3, True, 7), (3, 3, False, 9),
])
def test_sqfree_values(q, N, self_pairs, expected):
    rep = max_sqfree_sum_family(q, N, self_pairs)
    assert rep.max_size == expected
    assert is_sqfree_sum_family(rep.witness[0], self_pairs)


def test_char2_self_pairs_are_never_squarefree():
    # f + f = 0 in characteristic 2, so with self pairs every family is empty
    for N in range(4):
        assert max_sqfree_sum_family(2, N, True).max_size == 0
        assert max_sqfree_sum_family(4, min(N, 1), True).max_size == 0


@pytest.mark.parametrize("q,N,expected", [
    (2, 0, 0), (3, 0, 1), (2, 2, 3), (3, 1, 2), (3, 2, 5), (2, 3, 6),
])
def test_shifted_values(q, N, expected):
    rep = max_shifted_product_family(q, N)
    assert rep.exact and rep.max_size == expected
    F, G = rep.witness
    assert len(F) == len(G) == expected
    assert is_shifted_product_pair(F, G)


@pytest.mark.parametrize("q,N", [(2, 2), (2, 3), (3, 1), (3, 2)])
@pytest.mark.parametrize("all_pairs", [True, False])
def test_biclique_matches_subset_scan(q, N, all_pairs):
    verts, adj = _shifted_graph(field_of_order(q), N, all_pairs)
    value, *_ = _balanced_biclique(adj, len(verts), 10 ** 7)
    assert value == biclique_by_subsets(adj, len(verts))


@given(st.integers(1, 10), st.randoms(use_true_random=False))
@settings(max_examples=40)
def test_biclique_on_random_bipartite_adjacency(n, rnd):
    adj = [rnd.getrandbits(n) for _ in range(n)]
    value, A, common, finished = _balanced_biclique(adj, n, 10 ** 7)
    assert finished and value == biclique_by_subsets(adj, n)


def test_biclique_budget_gives_bounds():
    rep = max_shifted_product_family(3, 2, budget=5)
    assert not rep.exact and rep.bound_method == "degree-count"
    assert rep.upper_bound >= 5 >= rep.max_size


@pytest.mark.parametrize("search,flag", [
    (max_pset, False), (max_pset, True), (max_sqfree_sum_family, False),
    (max_shifted_product_family, True),
])
def test_monotone_in_N(search, flag):
    sizes = [search(3, N, flag).max_size for N in range(3)]
    assert sizes == sorted(sizes)


def test_empirical_exponent():
    rep = max_pset(3, 2)
    assert rep.empirical_exponent == pytest.approx(math.log(9, 3) / 2)
    assert max_pset(3, 0).empirical_exponent is None
    assert max_sqfree_sum_family(2, 2).empirical_exponent is None


def test_trajectory_consistency():
    rows = exponent_trajectory("pset", 2, range(4))
    assert [r["max_size"] for r in rows] == [max_pset(2, N).max_size for N in range(4)]
    assert rows[0]["empirical_exponent"] is None
    assert all(r["reference_exponent"] == pytest.approx(INV_GOLDEN) for r in rows)
    text = trajectory_csv(rows)
    assert text.splitlines()[0] == "N,max_size,exact,empirical_exponent,reference_exponent"
    assert len(text.splitlines()) == 5


def test_trajectory_edge_cases():
    assert exponent_trajectory("sqfree-sum", 3, []) == []
    with pytest.raises(UsageError):
        exponent_trajectory("nope", 3, [1])


def test_trajectory_stops_at_cap(monkeypatch):
    import qtsieve.extremal as ex

    def boom(q, N, flag):
        if N >= 2:
            raise ResourceError("cap")
        return ex.max_pset(q, N, flag)

    monkeypatch.setitem(ex.SEARCHES, "pset", boom)
    assert [r["N"] for r in exponent_trajectory("pset", 2, range(5))] == [0, 1]


def test_report_json():
    d = max_shifted_product_family(3, 1).to_dict()
    assert d["kind"] == "shifted-product" and len(d["witness"]) == 2
    assert d["reference_exponent"] == round(TWO_THIRDS, 12)
