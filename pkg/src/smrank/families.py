"""Constructors for the explicit polynomial families.

* :func:`nw` -- Nisan-Wigderson design polynomial over the index field GF(2^k).
* :func:`imm` -- (1,1) entry of a product of d generic n x n matrices.
* :func:`word_poly` -- the prefix-matching word polynomial of a word.
* :func:`dense_linear_product` -- a product of one dense linear form per set.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from math import ceil

from .ff import GF65521, FieldDescriptor, enumerate_polys
from .measure import Word, WordError, _exact_log2
from .smpoly import PartitionProfile, SetMLPoly, poly_prod, random_linear_form


def nw(n: int, d: int, coeff_field: FieldDescriptor = GF65521) -> SetMLPoly:
    """``sum_{deg f < d/2} prod_j x_{f(j), j}`` over the index field of size n.

    Evaluation goes through the fixed bijection ``i -> value i-1`` in both
    directions, so set j is the field point ``j-1`` and variable index
    ``f(j-1) + 1``.
    """
    k = _exact_log2(n)
    if k is None or k < 1:
        raise ValueError(f"n must be a power of two >= 2, got {n}")
    if not 1 <= d <= n:
        raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
    index_field = FieldDescriptor.binary(k)
    profile = PartitionProfile.symmetric(d, n)
    points = range(d)
    terms = {}
    for f in enumerate_polys(index_field, ceil(d / 2)):
        terms[tuple(f.eval_raw(x) + 1 for x in points)] = 1
    return SetMLPoly(profile, coeff_field, profile.full_support(), terms)


def imm_variable(n: int, row: int, col: int) -> int:
    """Variable index of matrix entry (row, col) within its set (row-major, 1-based)."""
    return (row - 1) * n + col


def imm(n: int, d: int, coeff_field: FieldDescriptor = GF65521) -> SetMLPoly:
    if n < 1 or d < 2:
        raise ValueError(f"imm needs n >= 1 and d >= 2, got n={n}, d={d}")
    profile = PartitionProfile.symmetric(d, n * n)
    terms = {}
    for inner in itertools.product(range(1, n + 1), repeat=d - 1):
        path = (1,) + inner + (1,)
        terms[tuple(imm_variable(n, path[j], path[j + 1]) for j in range(d))] = 1
    return SetMLPoly(profile, coeff_field, profile.full_support(), terms)


def default_labels(size: int) -> tuple[str, ...]:
    """Binary expansion of index-1, MSB first, padded to log2(size) bits."""
    bits = _exact_log2(size)
    if bits is None:
        raise WordError(f"set size {size} is not a power of two; no Boolean labeling")
    if bits == 0:
        return ("",)
    return tuple(format(i, f"0{bits}b") for i in range(size))


@dataclass(frozen=True)
class WordPolySpec:
    """A word plus, per set, the label string of each variable (index order)."""

    word: Word
    labels: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if len(self.labels) != len(self.word):
            raise WordError("need one labeling per variable set")
        for (_, m), labs in zip(self.word.entries, self.labels):
            bits = _exact_log2(m)
            if bits is None or len(labs) != m:
                raise WordError(f"labeling for a set of size {m} must list {m} strings")
            if len(set(labs)) != m or any(len(s) != bits or set(s) - {"0", "1"} for s in labs):
                raise WordError(f"labels must be distinct Boolean strings of length {bits}")

    @classmethod
    def default(cls, word: Word) -> "WordPolySpec":
        return cls(word, tuple(default_labels(m) for m in word.sizes))


def _side_assignments(spec: WordPolySpec, sets: tuple[int, ...]):
    """Yield (label string, variable choice) for all monomials over ``sets``."""
    per_set = [list(enumerate(spec.labels[j - 1], 1)) for j in sets]
    for combo in itertools.product(*per_set):
        yield "".join(lab for _, lab in combo), tuple(i for i, _ in combo)


def word_poly(spec: WordPolySpec | Word, coeff_field: FieldDescriptor = GF65521,
              profile: PartitionProfile | None = None) -> SetMLPoly:
    """Sum of monomials whose positive and negative label strings are prefix-comparable.

    The result lives over ``profile`` (default: sizes taken from the word),
    using the first ``m_i`` variables of each set.
    """
    if isinstance(spec, Word):
        spec = WordPolySpec.default(spec)
    w = spec.word
    profile = profile or PartitionProfile(w.sizes)
    w.check_profile(profile)
    pos, neg = w.positive, w.negative

    # the longer side determines the shorter one through its prefix
    pos_bits = sum(_exact_log2(w.entries[j - 1][1]) for j in pos)
    neg_bits = sum(_exact_log2(w.entries[j - 1][1]) for j in neg)
    long_sets, short_sets = (pos, neg) if pos_bits >= neg_bits else (neg, pos)
    short_bits = min(pos_bits, neg_bits)
    short_lookup = {s: choice for s, choice in _side_assignments(spec, short_sets)}

    terms = {}
    for label, choice in _side_assignments(spec, long_sets):
        other = short_lookup[label[:short_bits]]
        mono = [0] * len(w)
        for j, i in zip(long_sets, choice):
            mono[j - 1] = i
        for j, i in zip(short_sets, other):
            mono[j - 1] = i
        terms[tuple(mono)] = 1
    return SetMLPoly(profile, coeff_field, profile.full_support(), terms)


def dense_linear_product(n: int, d: int, coeff_field: FieldDescriptor = GF65521,
                         seed: int = 0) -> SetMLPoly:
    """Product over j of a linear form in set j with all n coefficients nonzero."""
    profile = PartitionProfile.symmetric(d, n)
    rng = random.Random(seed)
    return poly_prod(random_linear_form(profile, j, coeff_field, rng) for j in range(1, d + 1))
