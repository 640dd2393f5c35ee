import itertools

import pytest

from qtsieve.characters import (additive_char, additive_exponent, char_E, enumerate_characters,
                                gauss_sum, is_primitive, orthogonality_suite, residue_map,
                                top_trace_table, unit_group)
from qtsieve.cyclotomic import CyclotomicValue
from qtsieve.errors import DomainError, IdentityFailure
from qtsieve.field import enumerate_field, get_field
from qtsieve.poly import Poly, euler_phi, is_irreducible, iter_monic
from oracles import coeffs_of, laurent_additive_exponent

F2, F3, F4 = get_field(2), get_field(3), get_field(2, 2)


def P(F, text):
    return Poly.parse(F, text)


def test_E_examples():
    assert char_E(F2.zero()) == 1
    assert char_E(F2.one()) == -1
    assert char_E(F4.element(2)) == -1


def test_E_is_additive():
    for F in (F3, F4, get_field(3, 2)):
        elems = enumerate_field(F)
        for x, y in itertools.product(elems, repeat=2):
            assert char_E(x + y) == char_E(x) * char_E(y)


def test_additive_char_examples():
    one = P(F2, "1")
    assert additive_char(one, one, P(F2, "t")) == -1
    assert additive_char(P(F3, "1"), P(F3, "1"), P(F3, "t^2")) == 1
    f = P(F3, "t^2+1")
    assert additive_char(f, P(F3, "t"), f) == 1


def test_additive_char_rejects_bad_modulus():
    with pytest.raises(DomainError):
        additive_char(P(F3, "1"), P(F3, "1"), P(F3, "2*t"))
    with pytest.raises(DomainError):
        additive_char(P(F3, "1"), P(F3, "1"), Poly(F3))


@pytest.mark.parametrize("F", [F2, F3, F4])
def test_shortcut_matches_laurent_oracle(F):
    q = F.q
    for f in (m for d in (1, 2) for m in iter_monic(F, d)):
        for gi in range(q ** 3):
            g = Poly.from_index(F, gi)
            for ri in range(q ** f.degree):
                r = Poly.from_index(F, ri)
                expected = laurent_additive_exponent(F, coeffs_of(g), coeffs_of(r), coeffs_of(f))
                assert additive_exponent(g, r, f) == expected


@pytest.mark.parametrize("F", [F2, F3])
def test_well_defined_and_multiplicative(F):
    q = F.q
    for f in (m for d in (1, 2) for m in iter_monic(F, d)):
        for gi, hi in itertools.product(range(q ** 2), range(q)):
            g, h = Poly.from_index(F, gi), Poly.from_index(F, hi)
            for ri in range(q ** f.degree):
                r = Poly.from_index(F, ri)
                base = additive_char(g, r, f)
                assert additive_char(g, r + h * f, f) == base
                assert additive_char(g + h * f, r, f) == base
                assert additive_char(g + h, r, f) == base * additive_char(h, r, f)


def test_tables_match_scalar_evaluation():
    f = P(F3, "t^2+2*t+2")
    T = top_trace_table(f)
    rmap = residue_map(f, 3)
    for ri in range(9):
        for gi in range(81):
            g = Poly.from_index(F3, gi)
            assert T[ri, rmap[gi]] == additive_exponent(g, Poly.from_index(F3, ri), f)
            assert rmap[gi] == (g % f).index


@pytest.mark.parametrize("F,text,orders", [(F3, "t", (2,)), (F2, "t^2", (2,)),
                                           (F3, "t^3", (3, 6)), (F2, "t^3+t+1", (7,)),
                                           (F3, "t^2+1", (8,))])
def test_unit_group_examples(F, text, orders):
    G = unit_group(P(F, text))
    assert G.orders == orders
    assert G.size == euler_phi(P(F, text))


@pytest.mark.parametrize("F", [F2, F3, F4])
def test_unit_group_logs_are_consistent(F):
    for f in (m for d in (1, 2, 3) for m in iter_monic(F, d)):
        G = unit_group(f)
        seen = set()
        for u in G.units:
            vec = G.log(Poly.from_index(F, u))
            assert all(0 <= e < d for e, d in zip(vec, G.orders))
            assert G.element(vec) == Poly.from_index(F, u)
            seen.add(vec)
        assert len(seen) == G.size == euler_phi(f)
        for a, b in itertools.islice(itertools.product(G.units, repeat=2), 200):
            la, lb = G.log(Poly.from_index(F, a)), G.log(Poly.from_index(F, b))
            prod = (Poly.from_index(F, a) * Poly.from_index(F, b)) % f
            assert G.log(prod) == tuple((x + y) % d for x, y, d in zip(la, lb, G.orders))


def test_character_counts():
    assert len(enumerate_characters(P(F3, "1"))) == 1
    chars = enumerate_characters(P(F3, "t"))
    assert len(chars) == 2 and chars[0].is_principal()
    assert len(enumerate_characters(P(F3, "t^2"))) == 6


@pytest.mark.parametrize("F", [F2, F3])
def test_character_axioms(F):
    for f in (m for d in (1, 2) for m in iter_monic(F, d)):
        for chi in enumerate_characters(f):
            for ai, bi in itertools.product(range(F.q ** 2), repeat=2):
                a, b = Poly.from_index(F, ai), Poly.from_index(F, bi)
                assert chi(a * b) == chi(a) * chi(b)
                assert chi(a + f * b) == chi(a)
                assert (chi(a) == 0) == (gcd_deg(a, f) > 0)


def gcd_deg(a, f):
    from qtsieve.poly import gcd
    return gcd(a, f).degree if not a.is_zero() else f.degree


@pytest.mark.parametrize("F", [F2, F3, F4])
def test_primitive_counts_mod_irreducibles(F):
    for f in (m for d in (1, 2) for m in iter_monic(F, d) if is_irreducible(m)):
        chars = enumerate_characters(f)
        assert sum(is_primitive(c) for c in chars) == euler_phi(f) - 1
        assert not is_primitive(chars[0])


def test_induced_character_is_not_primitive():
    f = P(F3, "t^2")
    G = unit_group(f)
    kernel = [u for u in G.units if Poly.from_index(F3, u) % P(F3, "t") == P(F3, "1")]
    induced = [c for c in enumerate_characters(f)
               if not c.is_principal() and all(c.exponent(Poly.from_index(F3, u)) == 0
                                                for u in kernel)]
    assert induced and not any(is_primitive(c) for c in induced)
    assert sum(is_primitive(c) for c in enumerate_characters(f)) == 6 - 2


def test_gauss_sum_examples():
    chi0 = enumerate_characters(P(F2, "t"))[0]
    assert gauss_sum(chi0) == -1
    quad = enumerate_characters(P(F3, "t"))[1]
    assert gauss_sum(quad).abs2() == 3


@pytest.mark.parametrize("F", [F2, F3])
def test_gauss_sums_of_primitive_characters(F):
    for f in (m for d in (1, 2) for m in iter_monic(F, d)):
        for chi in enumerate_characters(f):
            tau = gauss_sum(chi)
            if is_primitive(chi):
                assert tau.abs2() == F.q ** f.degree
                assert abs(abs(tau.to_complex()) ** 2 - F.q ** f.degree) < 1e-9


def test_character_sums_vanish():
    f = P(F3, "t^2+1")
    for chi in enumerate_characters(f)[1:]:
        total = sum((chi(Poly.from_index(F3, i)) for i in range(9)), CyclotomicValue.integer(0))
        assert total == 0


@pytest.mark.parametrize("F", [F2, F3, F4])
def test_orthogonality_suite(F):
    for f in (m for d in (0, 1, 2) for m in iter_monic(F, d)):
        report = orthogonality_suite(f)
        assert report["additive_checked"] > 0


def test_orthogonality_suite_reports_witness(monkeypatch):
    import qtsieve.characters as ch

    f = P(F2, "t")
    real = ch.top_trace_table.__wrapped__(f)
    broken = real.copy()
    broken[1, 1] ^= 1
    monkeypatch.setattr(ch, "top_trace_table", lambda _f: broken)
    with pytest.raises(IdentityFailure) as info:
        orthogonality_suite(f)
    assert info.value.witness is not None
