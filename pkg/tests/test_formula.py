import random

import pytest
from hypothesis import given, settings, strategies as st

from smrank.families import imm, word_poly
from smrank.ff import GF2, GF65521
from smrank.formula import (BudgetError, Const, FormulaError, Product, Sum, Var, add,
                            build_imm_formula, build_word_poly_formula, expand,
                            imm_formula_size, integer_root_ceil, mul, random_formula,
                            term_bound, validate)
from smrank.measure import Word, balanced_words, relrank
from smrank.serialize import formula_from_json, formula_to_json
from smrank.smpoly import PartitionProfile, poly_add, poly_mul

from oracles import dict_expand, poly_as_dict


def test_validate_leaf_and_sum_mismatch():
    assert validate(Var(1, 1)) == frozenset({1})
    with pytest.raises(FormulaError) as e:
        validate(add(Var(1, 1), Var(2, 1)))
    assert "root" in str(e.value) and e.value.path == ()


def test_validate_locates_nested_errors():
    bad = mul(Var(1, 1), add(Var(2, 1), mul(Var(2, 2), Var(3, 1))))
    with pytest.raises(FormulaError) as e:
        validate(bad)
    assert e.value.path == (1,)
    clash = mul(Var(1, 1), add(Var(2, 1), Var(2, 2)), mul(Var(3, 1), Var(1, 2)))
    with pytest.raises(FormulaError) as e:
        validate(clash)
    assert "overlap" in str(e.value)


def test_validate_against_profile():
    prof = PartitionProfile.symmetric(2, 2)
    with pytest.raises(FormulaError):
        validate(mul(Var(1, 3), Var(2, 1)), prof)
    with pytest.raises(FormulaError):
        validate(mul(Var(1, 1), Var(3, 1)), prof)
    with pytest.raises(FormulaError):
        validate(Var(0, 1))
    with pytest.raises(FormulaError):
        Sum(())


def test_structural_attributes():
    F = add(mul(Var(1, 1), Var(2, 1), Const(3)), mul(Var(1, 2), Var(2, 2)))
    assert F.degree == 2 and F.product_depth == 1
    assert F.leaf_count == 5 and F.node_count == 8 and F.gate_count == 3
    assert [p for p, _ in F.walk()][:3] == [(), (0,), (0, 0)]
    assert F.at((1, 0)) == Var(1, 2)


def test_expand_product_of_leaves():
    prof = PartitionProfile.symmetric(3, 2)
    f = expand(mul(Var(1, 2), Var(2, 1), Var(3, 2)), prof, GF65521)
    assert f.terms == {(2, 1, 2): 1}


def test_expand_constants_read_into_field():
    prof = PartitionProfile.symmetric(1, 2)
    F = mul(Const(3), Var(1, 1))
    assert expand(F, prof, GF65521).terms == {(1,): 3}
    assert expand(F, prof, GF2).terms == {(1,): 1}
    assert expand(mul(Const(2), Var(1, 1)), prof, GF2).is_zero()


def _random_tree(rng, sets, depth):
    if len(sets) == 1:
        j = sets[0]
        if rng.random() < 0.5:
            return Var(j, rng.randint(1, 3))
        return Sum(tuple(Var(j, i) for i in rng.sample(range(1, 4), rng.randint(1, 3))))
    if depth > 0 and rng.random() < 0.3:
        kids = [_random_tree(rng, sets, depth - 1) for _ in range(rng.randint(1, 2))]
        return Sum(tuple(kids))
    cut = rng.randint(1, len(sets) - 1)
    return Product((_random_tree(rng, sets[:cut], depth - 1),
                    _random_tree(rng, sets[cut:], depth - 1)) +
                   ((Const(rng.randint(1, 9)),) if rng.random() < 0.3 else ()))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32))
def test_expand_homomorphism(seed):
    rng = random.Random(seed)
    d = rng.randint(1, 5)
    prof = PartitionProfile.symmetric(d, 3)
    sets = list(range(1, d + 1))
    F = _random_tree(rng, sets, 3)
    for field in (GF2, GF65521):
        f = expand(F, prof, field)
        assert poly_as_dict(f) == dict_expand(F, field.order)
        if isinstance(F, Sum):
            acc = expand(F.children[0], prof, field)
            for c in F.children[1:]:
                acc = poly_add(acc, expand(c, prof, field))
            assert acc == f
        elif isinstance(F, Product) and all(c.support for c in F.children):
            acc = expand(F.children[0], prof, field)
            for c in F.children[1:]:
                acc = poly_mul(acc, expand(c, prof, field))
            assert acc == f


def test_term_bound_dominates_expansion():
    rng = random.Random(1)
    prof = PartitionProfile.symmetric(5, 3)
    for _ in range(50):
        F = _random_tree(rng, [1, 2, 3, 4, 5], 4)
        assert len(expand(F, prof, GF65521)) <= term_bound(F)


def test_integer_root_ceil():
    for x in range(1, 300):
        for k in (1, 2, 3, 4):
            t = integer_root_ceil(x, k)
            assert t**k >= x and (t == 1 or (t - 1) ** k < x)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("depth", [1, 2, 3])
def test_imm_formula_expands_to_imm(n, d, depth):
    F = build_imm_formula(n, d, depth)
    prof = PartitionProfile.symmetric(d, n * n)
    assert validate(F, prof) == frozenset(range(1, d + 1))
    assert F.product_depth <= depth
    assert expand(F, prof, GF65521) == imm(n, d)
    assert F.node_count == imm_formula_size(n, d, depth)


def test_imm_formula_examples():
    F = build_imm_formula(2, 3, 1)
    assert isinstance(F, Sum) and len(F.children) == 4
    assert all(isinstance(c, Product) and len(c.children) == 3 for c in F.children)
    G = build_imm_formula(2, 4, 2)
    assert len(expand(G, PartitionProfile.symmetric(4, 4), GF65521)) == 8
    with pytest.raises(ValueError):
        build_imm_formula(2, 4, 0)


def test_word_poly_formula_shape():
    w = Word.parse("+1,-1")
    F = build_word_poly_formula(w)
    assert isinstance(F, Product) and len(F.children) == 1
    assert F.children[0] == Sum((Product((Var(1, 1), Var(2, 1))),
                                 Product((Var(1, 2), Var(2, 2)))))
    for text in ["+2,-2,+2,-2", "+1,+1,-1,-1,+1,-1"]:
        w = Word.parse(text)
        F = build_word_poly_formula(w)
        n, d = w.sizes[0], len(w)
        assert F.product_depth == 2
        assert F.gate_count == n * d // 2 + d // 2 + 1
        f = expand(F, PartitionProfile(w.sizes), GF65521)
        assert len(f) == n ** (d // 2)
        assert f == word_poly(w)
        assert relrank(f, w).log2_relrank == 0


def test_word_poly_formula_rejects_unbalanced():
    with pytest.raises(ValueError):
        build_word_poly_formula(Word.parse("+1,+1,-1"))
    with pytest.raises(ValueError):
        build_word_poly_formula(Word.parse("+1,-2"))


def test_random_formula_contract():
    prof = PartitionProfile.symmetric(6, 3)
    F = random_formula(prof, 3, 20, seed=4)
    assert random_formula(prof, 3, 20, seed=4) == F
    assert F.leaf_count <= 20 and F.product_depth <= 3
    with pytest.raises(BudgetError):
        random_formula(prof, 2, 5)
    with pytest.raises(BudgetError):
        random_formula(prof, 0, 20)


def test_random_formula_depth_one_is_sum_of_full_products():
    prof = PartitionProfile.symmetric(5, 2)
    for seed in range(20):
        F = random_formula(prof, 1, 15, seed=seed)
        summands = F.children if isinstance(F, Sum) else (F,)
        for s in summands:
            assert isinstance(s, Product)
            assert all(not isinstance(c, Product) for c in s.children)


def test_random_formula_sweep_validates():
    for seed in range(1000):
        rng = random.Random(seed)
        d = rng.randint(1, 12)
        prof = PartitionProfile.symmetric(d, rng.randint(1, 3))
        depth = rng.randint(1, 4)
        size = d + rng.randint(0, 3 * d)
        F = random_formula(prof, depth, size, seed=seed)
        assert validate(F, prof) == frozenset(range(1, d + 1))
        assert F.leaf_count <= size and F.product_depth <= depth


def test_formula_json_round_trip():
    prof = PartitionProfile.symmetric(6, 3)
    for seed in range(20):
        F = random_formula(prof, 3, 30, seed=seed)
        G, p2 = formula_from_json(formula_to_json(F, prof))
        assert G == F and p2 == prof
