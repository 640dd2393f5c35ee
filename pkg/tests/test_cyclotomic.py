import cmath

import pytest
from hypothesis import given, strategies as st

from qtsieve.cyclotomic import CyclotomicValue, cyclotomic_poly, totient


@pytest.mark.parametrize("m,expected", [(1, (-1, 1)), (2, (1, 1)), (3, (1, 1, 1)),
                                        (4, (1, 0, 1)), (6, (1, -1, 1)),
                                        (12, (1, 0, -1, 0, 1))])
def test_cyclotomic_polynomials(m, expected):
    assert cyclotomic_poly(m) == expected


def test_roots_sum_to_zero():
    for m in range(2, 13):
        total = sum((CyclotomicValue.root(m, k) for k in range(m)), CyclotomicValue.integer(0))
        assert total == 0


def test_mixed_orders():
    i = CyclotomicValue.root(4, 1)
    w = CyclotomicValue.root(3, 1)
    assert i * i == -1
    assert w * w * w == 1
    assert (i * w).m == 12
    assert abs((i + w).to_complex() - (1j + cmath.exp(2j * cmath.pi / 3))) < 1e-12


def test_to_int_rejects_irrational():
    with pytest.raises(ValueError):
        CyclotomicValue.root(3, 1).to_int()


vals = st.tuples(st.sampled_from([1, 2, 3, 4, 5, 6, 8, 12]),
                 st.lists(st.integers(-3, 3), min_size=1, max_size=12)).map(
    lambda mc: CyclotomicValue.from_counts(mc[0], mc[1]))


@given(vals, vals)
def test_embedding_is_a_ring_map(a, b):
    assert abs((a + b).to_complex() - (a.to_complex() + b.to_complex())) < 1e-9
    assert abs((a * b).to_complex() - a.to_complex() * b.to_complex()) < 1e-8


@given(vals)
def test_abs2_is_real_and_nonnegative(a):
    z = a.abs2().to_complex()
    assert abs(z.imag) < 1e-9 and z.real > -1e-9
    assert len(a.coeffs) == totient(a.m)
