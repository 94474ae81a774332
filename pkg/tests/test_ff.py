import itertools

import pytest
from hypothesis import given, settings, strategies as st

from smrank.ff import (BINARY_MODULI, GF2, GF65521, FieldDescriptor, FieldElement, FieldError,
                       FieldMismatchError, UniPoly, enumerate_polys, interpolate,
                       is_irreducible_gf2)

from oracles import gf2k_mul, is_irreducible_bruteforce

SMALL_FIELDS = ([FieldDescriptor.prime(p) for p in (2, 3, 5, 7, 11, 13)]
                + [FieldDescriptor.binary(k) for k in (1, 2, 3, 4)])


def test_prime_addition_example():
    F = FieldDescriptor.prime(5)
    assert F(3) + F(4) == F(2)


def test_gf4_example():
    F = FieldDescriptor.binary(2)
    assert F.modulus == 0b111
    z = F(0b10)
    assert z * (z + 1) == F.one


@pytest.mark.parametrize("F", SMALL_FIELDS, ids=str)
def test_field_axioms_exhaustive(F):
    els = list(range(F.order))
    for a, b in itertools.product(els, repeat=2):
        assert F.add(a, b) == F.add(b, a)
        assert F.mul(a, b) == F.mul(b, a)
        assert F.sub(F.add(a, b), b) == a
    for a, b, c in itertools.product(els, repeat=3):
        assert F.add(F.add(a, b), c) == F.add(a, F.add(b, c))
        assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    for a in els:
        assert F.add(a, F.neg(a)) == 0
        assert F.mul(a, 1) == a
        if a:
            inverses = [b for b in els if F.mul(a, b) == 1]
            assert inverses == [F.inv(a)]


@pytest.mark.parametrize("k", sorted(BINARY_MODULI))
def test_builtin_moduli_irreducible(k):
    m = BINARY_MODULI[k]
    assert m.bit_length() - 1 == k
    assert is_irreducible_gf2(m)
    assert is_irreducible_bruteforce(m)


def test_irreducibility_rejects_reducible():
    # z^2 + 1 = (z + 1)^2, z^4 + z^2 + 1 = (z^2 + z + 1)^2
    for m in (0b101, 0b10101, 0b110):
        assert not is_irreducible_gf2(m)
        assert not is_irreducible_bruteforce(m)
    with pytest.raises(FieldError):
        FieldDescriptor.binary(2, 0b101)


@pytest.mark.parametrize("k", range(1, 9))
def test_binary_mul_matches_shift_and_add(k):
    F = FieldDescriptor.binary(k)
    vals = range(F.order) if k <= 5 else range(0, F.order, 7)
    for a in vals:
        for b in vals:
            assert F.mul(a, b) == gf2k_mul(a, b, F.modulus)


@pytest.mark.parametrize("k", range(1, 11))
def test_binary_multiplicative_group_order(k):
    F = FieldDescriptor.binary(k)
    for a in range(1, F.order, max(1, F.order // 64)):
        x = FieldElement(F, a)
        acc = F.one
        e, base = F.order - 1, x
        while e:
            if e & 1:
                acc = acc * base
            base = base * base
            e >>= 1
        assert acc == F.one


def test_inverse_of_zero_and_mismatch():
    with pytest.raises(ZeroDivisionError):
        GF65521.inv(0)
    with pytest.raises(ZeroDivisionError):
        GF65521.zero.inv()
    with pytest.raises(FieldMismatchError):
        GF65521(1) + FieldDescriptor.prime(7)(1)


@pytest.mark.parametrize("bad", [4, 1, 65520, 2**31 + 11])
def test_prime_validation(bad):
    with pytest.raises(FieldError):
        FieldDescriptor.prime(bad)


def test_parse_specs():
    assert FieldDescriptor.parse("gf2") == GF2
    assert FieldDescriptor.parse("p:65521") == GF65521
    assert FieldDescriptor.parse("prime:7") == FieldDescriptor.prime(7)
    F = FieldDescriptor.parse("gf2k:3")
    assert F.order == 8 and F.kind == "binary" and F.spec() == "gf2k:3"
    for bad in ("gf3", "p:x", "gf2k:", "q:5"):
        with pytest.raises(FieldError):
            FieldDescriptor.parse(bad)


def test_element_coercion_and_canonical_values():
    F = FieldDescriptor.prime(7)
    assert F(10).value == 3
    assert (F(3) + 5).value == 1
    assert (2 - F(3)).value == 6
    assert F(-1).value == 6
    assert (F(3) / F(3)) == F.one
    G = FieldDescriptor.binary(3)
    assert G(3) + G(3) == G.zero
    assert -G(5) == G(5)


def test_index_element_bijection():
    F = FieldDescriptor.binary(3)
    vals = [F.index_element(i).value for i in range(1, 9)]
    assert vals == list(range(8))
    with pytest.raises(FieldError):
        F.index_element(0)


def test_interpolate_examples():
    F = FieldDescriptor.binary(2)
    line = interpolate([(F(0), F(0)), (F(1), F(1))])
    assert line.coeffs == (0, 1)
    w = F(0b10)
    const = interpolate([(F(0), w), (F(1), w)])
    assert const.coeffs == (w.value,) and const.degree == 0


def test_interpolate_errors():
    F = FieldDescriptor.binary(3)
    with pytest.raises(FieldError):
        interpolate([])
    with pytest.raises(FieldError):
        interpolate([(F(1), F(2)), (F(1), F(3))])
    with pytest.raises(FieldMismatchError):
        interpolate([(F(1), GF65521(2))])


def test_interpolate_three_points_gf8():
    F = FieldDescriptor.binary(3)
    pts = [(F(1), F(5)), (F(4), F(2)), (F(6), F(7))]
    g = interpolate(pts)
    assert g.degree < 3
    for x, y in pts:
        assert g(x) == y


FIELD_CHOICES = [GF65521, FieldDescriptor.prime(13), FieldDescriptor.binary(3),
                 FieldDescriptor.binary(8)]


@settings(max_examples=80, deadline=None)
@given(data=st.data(), F=st.sampled_from(FIELD_CHOICES), m=st.integers(1, 6))
def test_interpolate_evaluate_round_trip(data, F, m):
    coeffs = data.draw(st.lists(st.integers(0, F.order - 1), min_size=m, max_size=m))
    g = UniPoly.make(F, coeffs)
    xs = data.draw(st.lists(st.integers(0, F.order - 1), min_size=m, max_size=m, unique=True))
    pts = [(F(x), g(F(x))) for x in xs]
    assert interpolate(pts) == g


def test_unipoly_invariants():
    F = FieldDescriptor.prime(5)
    assert UniPoly.make(F, [1, 2, 0, 0]).coeffs == (1, 2)
    assert UniPoly.make(F, [0, 0]).degree == -1
    with pytest.raises(FieldError):
        UniPoly(F, (1, 0))
    assert UniPoly.make(F, [1, 1])(3) == F(4)


def test_enumerate_polys_counts():
    assert [p.coeffs for p in enumerate_polys(GF2, 1)] == [(), (1,)]
    assert len(list(enumerate_polys(FieldDescriptor.binary(2), 2))) == 16
    polys = list(enumerate_polys(FieldDescriptor.binary(3), 3))
    assert len(polys) == 512 and len(set(polys)) == 512
    assert all(p.degree < 3 for p in polys)
    assert list(enumerate_polys(GF2, 0)) == [UniPoly(GF2, ())]
    with pytest.raises(ValueError):
        list(enumerate_polys(GF2, -1))


def test_enumerate_polys_lexicographic():
    seq = [p.eval_raw(1) for p in enumerate_polys(FieldDescriptor.prime(3), 2)]
    # c0 + c1 at z = 1 for (c0, c1) in lexicographic order
    assert seq == [(a + b) % 3 for a in range(3) for b in range(3)]
