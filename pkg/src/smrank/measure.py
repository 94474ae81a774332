"""Words, partial derivative matrices and the relative rank measure.

A word assigns each variable set a sign and an effective size ``m_i``
(so ``|w_i| = log2 m_i``).  Positive sets index the rows of the partial
derivative matrix, negative sets its columns; both index spaces are
mixed-radix over the truncated sets in ascending set order, first set most
significant.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import comb, prod
from typing import Iterable, Iterator, Sequence

from .ff import FieldDescriptor
from .smpoly import PartitionProfile, SetMLPoly, SetMultilinearError


class WordError(ValueError):
    pass


def _exact_log2(x: int) -> int | None:
    if x > 0 and x & (x - 1) == 0:
        return x.bit_length() - 1
    return None


def _log2(x: int) -> int | float:
    e = _exact_log2(x)
    return e if e is not None else math.log2(x)


@dataclass(frozen=True)
class Word:
    """Sequence of ``(sign, size)`` pairs, sign in {+1, -1}, size >= 1."""

    entries: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for sign, size in self.entries:
            if sign not in (1, -1):
                raise WordError(f"sign must be +1 or -1, got {sign}")
            if size < 1:
                raise WordError(f"set size must be >= 1, got {size}")

    @classmethod
    def symmetric(cls, signs: Sequence[int], k: int) -> "Word":
        """The word in {k, -k}^d with the given signs (sizes 2^k)."""
        return cls(tuple((s, 1 << k) for s in signs))

    @classmethod
    def parse(cls, text: str) -> "Word":
        """``"+3,+3,-3,-3"``: each entry is a signed exponent ``|w_i|``."""
        entries = []
        for tok in text.replace(" ", "").split(","):
            if not tok or tok[0] not in "+-":
                raise WordError(f"word entries need an explicit sign: {tok!r}")
            e = int(tok[1:])
            if e < 0:
                raise WordError(f"bad exponent in {tok!r}")
            entries.append((1 if tok[0] == "+" else -1, 1 << e))
        return cls(tuple(entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __str__(self) -> str:
        parts = []
        for sign, size in self.entries:
            e = _exact_log2(size)
            mag = str(e) if e is not None else f"log2({size})"
            parts.append(("+" if sign > 0 else "-") + mag)
        return ",".join(parts)

    @property
    def signs(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.entries)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(m for _, m in self.entries)

    @property
    def positive(self) -> tuple[int, ...]:
        return tuple(i for i, (s, _) in enumerate(self.entries, 1) if s > 0)

    @property
    def negative(self) -> tuple[int, ...]:
        return tuple(i for i, (s, _) in enumerate(self.entries, 1) if s < 0)

    @property
    def n_rows(self) -> int:
        return prod(self.entries[i - 1][1] for i in self.positive)

    @property
    def n_cols(self) -> int:
        return prod(self.entries[i - 1][1] for i in self.negative)

    @property
    def is_balanced(self) -> bool:
        return self.n_rows == self.n_cols

    def imbalance(self) -> int | float:
        """``w_[d] = sum sign_i log2 m_i``; exact integer when all sizes are powers of two."""
        r, c = self.n_rows, self.n_cols
        er, ec = _exact_log2(r), _exact_log2(c)
        if er is not None and ec is not None:
            return er - ec
        return math.log2(r) - math.log2(c)

    def restrict(self, sets: Iterable[int]) -> "Word":
        """``w|_S`` with the sets renumbered in ascending order."""
        return Word(tuple(self.entries[j - 1] for j in sorted(sets)))

    def check_profile(self, profile: PartitionProfile) -> None:
        if len(self) != profile.d:
            raise WordError(f"word has length {len(self)} but profile has d={profile.d}")
        for j, (_, m) in enumerate(self.entries, 1):
            if m > profile.size(j):
                raise WordError(f"set {j}: word size {m} exceeds {profile.size(j)} variables")

    def to_json(self) -> list[int]:
        return [s * m for s, m in self.entries]


def all_words(d: int, k: int) -> Iterator[Word]:
    for signs in itertools.product((1, -1), repeat=d):
        yield Word.symmetric(signs, k)


def balanced_words(d: int, k: int) -> Iterator[Word]:
    """Every word in {k, -k}^d with d/2 positive entries, in combination order."""
    if d % 2:
        raise WordError("balanced words need even d")
    for pos in itertools.combinations(range(d), d // 2):
        pos = set(pos)
        yield Word.symmetric([1 if i in pos else -1 for i in range(d)], k)


def sample_word(d: int, k: int, mode: str = "uniform", seed: int = 0) -> Word:
    rng = random.Random(seed)
    if mode == "uniform":
        return Word.symmetric([rng.choice((1, -1)) for _ in range(d)], k)
    if mode == "balanced":
        if d % 2:
            raise WordError("balanced sampling needs even d")
        pos = set(rng.sample(range(d), d // 2))
        return Word.symmetric([1 if i in pos else -1 for i in range(d)], k)
    raise WordError(f"unknown word mode {mode!r}")


def truncate(f: SetMLPoly, w: Word, keep: str = "low") -> SetMLPoly:
    """Restrict set ``i`` to ``m_i`` variables and drop terms using any other variable.

    ``keep="low"`` keeps indices ``1..m_i``; ``keep="high"`` keeps the top ``m_i``
    indices and renumbers them ``1..m_i``.  The result lives over the truncated
    profile.
    """
    w.check_profile(f.profile)
    if keep not in ("low", "high"):
        raise ValueError(f"unknown truncation policy {keep!r}")
    new_profile = PartitionProfile(w.sizes)
    limits = [w.entries[j - 1][1] for j in f.support]
    if keep == "low":
        terms = {m: c for m, c in f.terms.items()
                 if all(i <= lim for i, lim in zip(m, limits))}
    else:
        shifts = [f.profile.size(j) - w.entries[j - 1][1] for j in f.support]
        terms = {}
        for m, c in f.terms.items():
            moved = tuple(i - s for i, s in zip(m, shifts))
            if all(i >= 1 for i in moved):
                terms[moved] = c
    return SetMLPoly(new_profile, f.field, f.support, terms)


@dataclass(frozen=True)
class PDMatrix:
    n_rows: int
    n_cols: int
    field: FieldDescriptor
    entries: dict = dc_field(default_factory=dict)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def to_dense(self) -> list[list[int]]:
        rows = [[0] * self.n_cols for _ in range(self.n_rows)]
        for (r, c), v in self.entries.items():
            rows[r][c] = v
        return rows

    def to_matrix_market(self) -> str:
        lines = ["%%MatrixMarket matrix coordinate integer general",
                 f"% entries are canonical representatives in {self.field}",
                 f"{self.n_rows} {self.n_cols} {len(self.entries)}"]
        for (r, c) in sorted(self.entries):
            lines.append(f"{r + 1} {c + 1} {self.entries[(r, c)]}")
        return "\n".join(lines) + "\n"


def _radix_index(digits: Iterable[int], radices: Iterable[int]) -> int:
    idx = 0
    for dgt, r in zip(digits, radices):
        idx = idx * r + (dgt - 1)
    return idx


def pdm(f: SetMLPoly, w: Word, keep: str = "low") -> PDMatrix:
    """The partial derivative matrix ``M_w(f)``."""
    if f.support != f.profile.full_support():
        raise SetMultilinearError(
            f"partial derivative matrix needs support [d]; got {f.support} (use localize)")
    t = truncate(f, w, keep)
    pos_slots = [j - 1 for j in w.positive]
    neg_slots = [j - 1 for j in w.negative]
    pos_radix = [w.entries[s][1] for s in pos_slots]
    neg_radix = [w.entries[s][1] for s in neg_slots]
    entries = {}
    for mono, c in t.terms.items():
        r = _radix_index((mono[s] for s in pos_slots), pos_radix)
        col = _radix_index((mono[s] for s in neg_slots), neg_radix)
        entries[(r, col)] = c
    return PDMatrix(w.n_rows, w.n_cols, f.field, entries)


# -- rank ---------------------------------------------------------------------

DENSE_GF2_LIMIT = 2**26


def _rank_gf2_bitpacked(n_rows: int, entries: Iterable[tuple[int, int]]) -> int:
    rows = [0] * n_rows
    for r, c in entries:
        rows[r] |= 1 << c
    pivots: dict[int, int] = {}
    for v in rows:
        while v:
            low = v & -v
            p = pivots.get(low)
            if p is None:
                pivots[low] = v
                break
            v ^= p
    return len(pivots)


def _rank_gf2_sparse(n_rows: int, entries: Iterable[tuple[int, int]]) -> int:
    rows: list[set[int]] = [set() for _ in range(n_rows)]
    for r, c in entries:
        rows[r].add(c)
    pivots: dict[int, set[int]] = {}
    for row in sorted(rows, key=len):
        row = set(row)
        while row:
            lead = min(row)
            p = pivots.get(lead)
            if p is None:
                pivots[lead] = row
                break
            row ^= p
    return len(pivots)


def _rank_sparse(field: FieldDescriptor, n_rows: int,
                 entries: Iterable[tuple[tuple[int, int], int]]) -> int:
    rows: list[dict[int, int]] = [dict() for _ in range(n_rows)]
    for (r, c), v in entries:
        rows[r][c] = v
    pivots: dict[int, dict[int, int]] = {}
    # sparsest rows first keeps fill-in low on near-permutation inputs
    for row in sorted(rows, key=len):
        row = dict(row)
        while row:
            lead = min(row)
            p = pivots.get(lead)
            if p is None:
                s = field.inv(row[lead])
                pivots[lead] = {c: field.mul(v, s) for c, v in row.items()}
                break
            factor = row[lead]
            for c, v in p.items():
                nv = field.sub(row.get(c, 0), field.mul(factor, v))
                if nv:
                    row[c] = nv
                else:
                    row.pop(c, None)
    return len(pivots)


def rank(M: PDMatrix, field: FieldDescriptor | None = None) -> int:
    """Exact rank of ``M`` over ``field`` (default: the matrix's own field).

    When ``field`` differs, each entry's canonical integer is mapped with
    ``field.from_int``.
    """
    if field is None or field == M.field:
        field = M.field
        items = list(M.entries.items())
    else:
        items = [(k, field.from_int(v)) for k, v in M.entries.items()]
        items = [(k, v) for k, v in items if v]
    if field.order == 2:
        coords = [k for k, _ in items]
        if M.n_rows * M.n_cols <= DENSE_GF2_LIMIT:
            return _rank_gf2_bitpacked(M.n_rows, coords)
        return _rank_gf2_sparse(M.n_rows, coords)
    return _rank_sparse(field, M.n_rows, items)


def is_permutation(M: PDMatrix) -> bool:
    if M.n_rows != M.n_cols or len(M.entries) != M.n_rows:
        return False
    rows, cols = set(), set()
    for (r, c), v in M.entries.items():
        if v != 1:
            return False
        rows.add(r)
        cols.add(c)
    return len(rows) == M.n_rows and len(cols) == M.n_cols


@dataclass(frozen=True)
class LogRank:
    """``rk_w = rank / sqrt(n_rows * n_cols)`` kept in log2 space.

    Logarithms are exact (``int``/``Fraction``) whenever the quantities are
    powers of two, floats otherwise.
    """

    rank: int
    n_rows: int
    n_cols: int

    @property
    def log2_denominator(self) -> Fraction | float:
        v = _log2(self.n_rows * self.n_cols)
        return Fraction(v, 2) if isinstance(v, int) else v / 2

    @property
    def log2_relrank(self) -> Fraction | float:
        if self.rank == 0:
            return -math.inf
        num = _log2(self.rank)
        den = self.log2_denominator
        if isinstance(num, int) and isinstance(den, Fraction):
            return num - den
        return float(num) - float(den)

    @property
    def is_full(self) -> bool:
        return self.rank == min(self.n_rows, self.n_cols)

    def within_imbalance_bound(self) -> bool:
        """``rk_w <= 2^{-|w_[d]|/2}``, i.e. ``rank <= min(rows, cols)``, compared exactly."""
        return self.rank <= min(self.n_rows, self.n_cols)


def relrank(f: SetMLPoly, w: Word, field: FieldDescriptor | None = None,
            keep: str = "low") -> LogRank:
    M = pdm(f, w, keep)
    return LogRank(rank(M, field), M.n_rows, M.n_cols)


def balanced_probability(d: int) -> Fraction:
    """Pr[w_[d] = 0] for a uniform sign vector of length d."""
    if d % 2:
        return Fraction(0)
    return Fraction(comb(d, d // 2), 2**d)
