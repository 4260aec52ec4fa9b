"""Finite fields: construction, axioms, and the operation wrapper."""

import pytest

from qica.gf import Field, FieldError, field_op, make_field


PRIME_POWERS = (2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27)


@pytest.mark.parametrize("q", PRIME_POWERS)
def test_field_axioms_exhaustive(q):
    f = make_field(q)
    assert f.q == q
    elems = range(q)
    for a in elems:
        assert f.add(a, 0) == a
        assert f.mul(a, 1) == a
        assert f.add(a, f.neg(a)) == 0
        if a:
            assert f.mul(a, f.inv(a)) == 1
    for a in elems:
        for b in elems:
            assert f.add(a, b) == f.add(b, a)
            assert f.mul(a, b) == f.mul(b, a)
            for c in elems:
                assert f.add(f.add(a, b), c) == f.add(a, f.add(b, c))
                assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
                assert f.mul(a, f.add(b, c)) == \
                    f.add(f.mul(a, b), f.mul(a, c))


@pytest.mark.parametrize("q", PRIME_POWERS)
def test_multiplicative_group_is_cyclic_of_order_q_minus_1(q):
    f = make_field(q)
    # every nonzero element has order dividing q-1
    for a in range(1, q):
        x, order = a, 1
        while x != 1:
            x = f.mul(x, a)
            order += 1
            assert order <= q - 1
        assert (q - 1) % order == 0


@pytest.mark.parametrize("q", (1, 6, 10, 12, 15, 100))
def test_non_prime_powers_rejected(q):
    with pytest.raises(FieldError):
        make_field(q)


def test_field_op_wrapper():
    assert field_op(9, "add", 1, 2) == make_field(9).add(1, 2)
    assert field_op(8, "mul", 3, 5) == make_field(8).mul(3, 5)
    assert field_op(7, "neg", 3) == 4
    assert field_op(7, "inv", 3) == 5
    with pytest.raises(FieldError):
        field_op(7, "pow", 2, 3)
    with pytest.raises(ZeroDivisionError):
        field_op(7, "inv", 0)
    with pytest.raises(FieldError):
        field_op(7, "add", 3, 9)


def test_prime_field_is_modular_arithmetic():
    f = make_field(11)
    for a in range(11):
        for b in range(11):
            assert f.add(a, b) == (a + b) % 11
            assert f.mul(a, b) == (a * b) % 11
