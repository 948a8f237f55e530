import pytest
from hypothesis import given, strategies as st

from toymodel.errors import FieldError
from toymodel.field import FieldElement, elements, fp_add, fp_inv, fp_mul, is_prime

PRIMES = [2, 3, 5, 7, 11, 13]


def test_is_prime_small():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


@pytest.mark.parametrize("m", [0, 1, 4, 9, 15, -3])
def test_non_prime_modulus_rejected(m):
    with pytest.raises(FieldError):
        FieldElement(1, m)


def test_value_reduced():
    assert FieldElement(-1, 5).value == 4
    assert FieldElement(12, 5) == FieldElement(2, 5)


def test_mixed_modulus_raises():
    with pytest.raises(FieldError):
        FieldElement(1, 3) + FieldElement(1, 5)


def test_zero_has_no_inverse():
    with pytest.raises(FieldError):
        FieldElement(0, 7).inverse()
    with pytest.raises(FieldError):
        fp_inv(FieldElement(0, 7))


@given(st.sampled_from(PRIMES), st.integers(-50, 50), st.integers(-50, 50))
def test_ops_match_integer_arithmetic(p, a, b):
    x, y = FieldElement(a, p), FieldElement(b, p)
    assert (x + y).value == (a + b) % p
    assert (x - y).value == (a - b) % p
    assert (x * y).value == (a * b) % p
    assert (-x).value == (-a) % p
    assert fp_add(x, y).value == (a + b) % p
    assert fp_mul(x, y).value == (a * b) % p


@given(st.sampled_from(PRIMES), st.integers(1, 10_000))
def test_inverse_by_search(p, a):
    if a % p == 0:
        return
    brute = next(k for k in range(1, p) if (k * a) % p == 1)
    assert FieldElement(a, p).inverse().value == brute
    assert (FieldElement(1, p) / FieldElement(a, p)).value == brute


def test_elements_enumerates_field():
    assert [e.value for e in elements(7)] == list(range(7))
