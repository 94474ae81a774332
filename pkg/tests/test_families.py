import itertools
import random

import pytest

from smrank.ff import BINARY_MODULI, GF2, GF65521
from smrank.families import (WordPolySpec, default_labels, dense_linear_product, imm,
                             imm_variable, nw, word_poly)
from smrank.measure import Word, WordError, is_permutation, pdm
from smrank.smpoly import evaluate

from oracles import gf2k_mul, imm_entry, word_poly_bruteforce


def nw_oracle(n, d):
    k = n.bit_length() - 1
    mod = BINARY_MODULI[k]
    out = set()
    for coeffs in itertools.product(range(n), repeat=(d + 1) // 2):
        mono = []
        for x in range(d):
            acc = 0
            for c in reversed(coeffs):
                acc = gf2k_mul(acc, x, mod) ^ c
            mono.append(acc + 1)
        out.add(tuple(mono))
    return out


def test_nw_2_2():
    f = nw(2, 2)
    assert f.terms == {(1, 1): 1, (2, 2): 1}


@pytest.mark.parametrize("n,d", [(2, 1), (2, 2), (4, 3), (4, 4), (8, 5), (8, 6), (16, 4)])
def test_nw_matches_oracle(n, d):
    f = nw(n, d)
    assert set(f.terms) == nw_oracle(n, d)
    assert len(f) == n ** ((d + 1) // 2)
    assert set(f.terms.values()) == {1}
    assert f.support == tuple(range(1, d + 1))


def test_nw_errors():
    with pytest.raises(ValueError):
        nw(6, 2)
    with pytest.raises(ValueError):
        nw(4, 5)
    with pytest.raises(ValueError):
        nw(1, 1)


def test_nw_rows_and_columns_unique():
    f = nw(8, 4)
    for signs in [(1, 1, -1, -1), (1, -1, 1, -1), (-1, 1, 1, -1)]:
        M = pdm(f, Word.symmetric(signs, 3))
        assert is_permutation(M)


def test_imm_small_cases():
    assert imm(1, 5).terms == {(1,) * 5: 1}
    f = imm(2, 3)
    want = {(imm_variable(2, 1, a), imm_variable(2, a, b), imm_variable(2, b, 1))
            for a in (1, 2) for b in (1, 2)}
    assert set(f.terms) == want
    assert len(imm(3, 4)) == 27
    assert imm(3, 4).profile.sizes == (9,) * 4
    with pytest.raises(ValueError):
        imm(2, 1)


@pytest.mark.parametrize("n,d", [(n, d) for n in (1, 2, 3) for d in (2, 3, 4)])
def test_imm_evaluates_to_matrix_product(n, d):
    rng = random.Random(n * 10 + d)
    f = imm(n, d)
    for _ in range(10):
        mats = [[[rng.randrange(65521) for _ in range(n)] for _ in range(n)] for _ in range(d)]
        point = {(j + 1, imm_variable(n, r + 1, c + 1)): mats[j][r][c]
                 for j in range(d) for r in range(n) for c in range(n)}
        assert evaluate(f, point) == imm_entry(mats, 65521)


def test_default_labels():
    assert default_labels(4) == ("00", "01", "10", "11")
    assert default_labels(1) == ("",)
    with pytest.raises(WordError):
        default_labels(3)


def test_word_poly_two_sets():
    f = word_poly(Word.parse("+1,-1"))
    assert f.terms == {(1, 1): 1, (2, 2): 1}


def test_word_poly_all_positive_is_everything():
    f = word_poly(Word.parse("+1,+2"))
    assert len(f) == 8


@pytest.mark.parametrize("text", ["+2,-2", "+2,+2,-2,-2", "+1,-2,+1", "-1,+2,-3,+1",
                                  "+2,-1,-1,+2,-2", "+1,+1,+1,-1"])
def test_word_poly_matches_prefix_oracle(text):
    w = Word.parse(text)
    f = word_poly(w)
    sizes = set(w.sizes)
    if len(sizes) == 1:
        k = next(iter(sizes)).bit_length() - 1
        assert set(f.terms) == word_poly_bruteforce(list(w.signs), k)
    # general check by brute force over the labelled monomial space
    labs = [default_labels(m) for m in w.sizes]
    want = set()
    for mono in itertools.product(*[range(1, m + 1) for m in w.sizes]):
        pos = "".join(labs[j][mono[j] - 1] for j in range(len(w)) if w.signs[j] > 0)
        neg = "".join(labs[j][mono[j] - 1] for j in range(len(w)) if w.signs[j] < 0)
        if pos.startswith(neg) or neg.startswith(pos):
            want.add(mono)
    assert set(f.terms) == want


def test_word_poly_balanced_symmetric_term_count():
    for text in ["+2,-2,+2,-2", "+3,+3,-3,-3"]:
        w = Word.parse(text)
        f = word_poly(w)
        assert len(f) == w.sizes[0] ** (len(w) // 2)


def test_word_poly_custom_labels():
    w = Word.parse("+1,-1")
    spec = WordPolySpec(w, (("1", "0"), ("0", "1")))
    assert word_poly(spec).terms == {(1, 2): 1, (2, 1): 1}
    with pytest.raises(WordError):
        WordPolySpec(w, (("1", "1"), ("0", "1")))
    with pytest.raises(WordError):
        WordPolySpec(w, (("1", "0"),))


def test_word_poly_on_larger_profile():
    from smrank.smpoly import PartitionProfile
    w = Word.parse("+1,-1")
    f = word_poly(w, GF2, PartitionProfile.symmetric(2, 4))
    assert f.profile.sizes == (4, 4) and f.terms == {(1, 1): 1, (2, 2): 1}


def test_dense_linear_product():
    f = dense_linear_product(4, 3, GF65521, seed=1)
    assert len(f) == 64 and all(c for c in f.terms.values())
    assert dense_linear_product(4, 3, GF65521, seed=1) == f
