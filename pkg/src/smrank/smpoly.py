"""Sparse set-multilinear polynomials.

A polynomial lives over a :class:`PartitionProfile` (d variable sets, set j
holding variables ``x_{1,j} .. x_{n_j,j}``) and has a fixed *support*: the
ascending tuple of set indices every monomial touches.  A monomial is stored
as the tuple of chosen variable indices, aligned with the support, so
``{(2, 1): 5}`` over support ``(1, 3)`` is ``5 * x_{2,1} x_{1,3}``.

Sets and variable indices are 1-based throughout.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from math import prod
from typing import Iterable, Iterator, Mapping

from .ff import GF65521, FieldDescriptor, FieldElement, FieldMismatchError


class SetMultilinearError(ValueError):
    """A polynomial or operation violates set-multilinearity."""


@dataclass(frozen=True)
class PartitionProfile:
    sizes: tuple[int, ...]

    def __post_init__(self):
        if len(self.sizes) < 1:
            raise ValueError("a profile needs at least one variable set")
        if any(n < 1 for n in self.sizes):
            raise ValueError("every variable set needs at least one variable")

    @classmethod
    def symmetric(cls, d: int, n: int) -> "PartitionProfile":
        return cls((n,) * d)

    @property
    def d(self) -> int:
        return len(self.sizes)

    @property
    def is_symmetric(self) -> bool:
        return len(set(self.sizes)) == 1

    def size(self, j: int) -> int:
        return self.sizes[j - 1]

    def full_support(self) -> tuple[int, ...]:
        return tuple(range(1, self.d + 1))

    def monomial_count(self, support: Iterable[int]) -> int:
        return prod(self.size(j) for j in support)


def _check_support(profile: PartitionProfile, support: Iterable[int]) -> tuple[int, ...]:
    sup = tuple(sorted(support))
    if len(set(sup)) != len(sup):
        raise SetMultilinearError(f"support {sup} repeats a set index")
    for j in sup:
        if not 1 <= j <= profile.d:
            raise SetMultilinearError(f"set index {j} outside profile with d={profile.d}")
    return sup


@dataclass(frozen=True)
class SetMLPoly:
    profile: PartitionProfile
    field: FieldDescriptor
    support: tuple[int, ...]
    terms: dict = dc_field(default_factory=dict)

    @classmethod
    def zero(cls, profile, field, support) -> "SetMLPoly":
        return cls(profile, field, _check_support(profile, support), {})

    @classmethod
    def monomial(cls, profile, field, choice: Mapping[int, int], coeff: int = 1) -> "SetMLPoly":
        """Single term; ``choice`` maps set index -> variable index."""
        sup = _check_support(profile, choice)
        c = field.from_int(coeff)
        mono = tuple(choice[j] for j in sup)
        f = cls(profile, field, sup, {mono: c} if c else {})
        validate_poly(f)
        return f

    @classmethod
    def from_terms(cls, profile, field, support, terms: Mapping) -> "SetMLPoly":
        """Build from ``{monomial tuple: coefficient}``; coefficients are reduced, zeros dropped."""
        sup = _check_support(profile, support)
        clean = {}
        for mono, c in terms.items():
            if isinstance(c, FieldElement):
                if c.field != field:
                    raise FieldMismatchError(f"{c.field} vs {field}")
                c = c.value
            else:
                c = field.from_int(c)
            if c:
                clean[tuple(mono)] = c
        f = cls(profile, field, sup, clean)
        validate_poly(f)
        return f

    @property
    def degree(self) -> int:
        return len(self.support)

    def __len__(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, mono: tuple[int, ...]) -> FieldElement:
        return FieldElement(self.field, self.terms.get(tuple(mono), 0))

    def monomials(self) -> Iterator[tuple[tuple[tuple[int, int], ...], int]]:
        """Terms in canonical order as ``(((set, index), ...), coeff)``."""
        for mono in sorted(self.terms):
            yield tuple(zip(self.support, mono)), self.terms[mono]

    def __add__(self, other: "SetMLPoly") -> "SetMLPoly":
        return poly_add(self, other)

    def __mul__(self, other: "SetMLPoly") -> "SetMLPoly":
        return poly_mul(self, other)

    def __repr__(self) -> str:
        return (f"SetMLPoly(d={self.profile.d}, support={self.support}, "
                f"terms={len(self.terms)}, field={self.field})")


def validate_poly(f: SetMLPoly) -> None:
    """Raise unless every monomial picks exactly one in-range variable per supported set."""
    sizes = [f.profile.size(j) for j in f.support]
    width = len(sizes)
    for mono, c in f.terms.items():
        if len(mono) != width:
            raise SetMultilinearError(f"monomial {mono} does not match support {f.support}")
        for idx, n in zip(mono, sizes):
            if not 1 <= idx <= n:
                raise SetMultilinearError(f"monomial {mono} uses a variable outside the profile")
        if not 0 < c < f.field.order:
            raise SetMultilinearError(f"monomial {mono} stores non-canonical coefficient {c}")


def _same_space(f: SetMLPoly, g: SetMLPoly) -> None:
    if f.profile != g.profile:
        raise SetMultilinearError("polynomials live over different profiles")
    if f.field != g.field:
        raise FieldMismatchError(f"{f.field} vs {g.field}")


def poly_add(f: SetMLPoly, g: SetMLPoly) -> SetMLPoly:
    _same_space(f, g)
    if f.support != g.support:
        raise SetMultilinearError(f"cannot add supports {f.support} and {g.support}")
    field = f.field
    out = dict(f.terms)
    for mono, c in g.terms.items():
        s = field.add(out.get(mono, 0), c)
        if s:
            out[mono] = s
        else:
            out.pop(mono, None)
    return SetMLPoly(f.profile, field, f.support, out)


def poly_scale(f: SetMLPoly, c: int) -> SetMLPoly:
    c = f.field.from_int(c)
    if c == 0:
        return SetMLPoly(f.profile, f.field, f.support, {})
    return SetMLPoly(f.profile, f.field, f.support,
                     {m: f.field.mul(v, c) for m, v in f.terms.items()})


def poly_sum(polys: Iterable[SetMLPoly]) -> SetMLPoly:
    polys = list(polys)
    if not polys:
        raise ValueError("empty sum has no support")
    acc = polys[0]
    for p in polys[1:]:
        acc = poly_add(acc, p)
    return acc


def poly_mul(f: SetMLPoly, g: SetMLPoly) -> SetMLPoly:
    _same_space(f, g)
    overlap = set(f.support) & set(g.support)
    if overlap:
        raise SetMultilinearError(f"product of overlapping supports (sets {sorted(overlap)})")
    field = f.field
    support = tuple(sorted(f.support + g.support))
    out: dict[tuple[int, ...], int] = {}
    if not f.support or not g.support or f.support[-1] < g.support[0]:
        join = lambda a, b: a + b  # noqa: E731
    elif g.support[-1] < f.support[0]:
        join = lambda a, b: b + a  # noqa: E731
    else:
        fpos = {j: i for i, j in enumerate(f.support)}
        gpos = {j: i for i, j in enumerate(g.support)}
        picks = [(0, fpos[j]) if j in fpos else (1, gpos[j]) for j in support]

        def join(a, b):
            src = (a, b)
            return tuple(src[s][i] for s, i in picks)

    for m1, c1 in f.terms.items():
        for m2, c2 in g.terms.items():
            out[join(m1, m2)] = field.mul(c1, c2)
    return SetMLPoly(f.profile, field, support, out)


def poly_prod(polys: Iterable[SetMLPoly]) -> SetMLPoly:
    polys = list(polys)
    if not polys:
        raise ValueError("empty product")
    acc = polys[0]
    for p in polys[1:]:
        acc = poly_mul(acc, p)
    return acc


def localize(f: SetMLPoly) -> SetMLPoly:
    """Re-express ``f`` over the sub-profile of its own support (sets renumbered 1..|S|)."""
    if not f.support:
        raise SetMultilinearError("a constant has no variable sets to localize onto")
    profile = PartitionProfile(tuple(f.profile.size(j) for j in f.support))
    return SetMLPoly(profile, f.field, profile.full_support(), dict(f.terms))


def embed(f: SetMLPoly, profile: PartitionProfile, sets: Iterable[int]) -> SetMLPoly:
    """Inverse of :func:`localize`: place f's sets at the given (ascending) set indices."""
    sets = _check_support(profile, sets)
    if len(sets) != len(f.support):
        raise SetMultilinearError("target sets do not match the polynomial's support size")
    out = SetMLPoly(profile, f.field, sets, dict(f.terms))
    validate_poly(out)
    return out


def decode_mixed_radix(code: int, radices: list[int]) -> tuple[int, ...]:
    """1-based digits of ``code``; the first radix is most significant."""
    digits = []
    for r in reversed(radices):
        code, rem = divmod(code, r)
        digits.append(rem + 1)
    return tuple(reversed(digits))


def random_poly(profile: PartitionProfile, support: Iterable[int], num_terms: int,
                field: FieldDescriptor = GF65521, seed: int = 0) -> SetMLPoly:
    """``num_terms`` distinct monomials with uniform nonzero coefficients; seeded."""
    sup = _check_support(profile, support)
    radices = [profile.size(j) for j in sup]
    space = prod(radices)
    if num_terms > space:
        raise ValueError(f"{num_terms} terms requested but only {space} monomials exist")
    rng = random.Random(seed)
    codes = rng.sample(range(space), num_terms)
    terms = {decode_mixed_radix(c, radices): rng.randrange(1, field.order) for c in codes}
    return SetMLPoly(profile, field, sup, terms)


def random_linear_form(profile: PartitionProfile, j: int, field: FieldDescriptor,
                       rng: random.Random, dense: bool = True) -> SetMLPoly:
    """A linear form in set ``j``; dense means every variable has a nonzero coefficient."""
    n = profile.size(j)
    if dense:
        terms = {(i,): rng.randrange(1, field.order) for i in range(1, n + 1)}
    else:
        terms = {(i,): rng.randrange(field.order) for i in range(1, n + 1)}
    return SetMLPoly.from_terms(profile, field, (j,), terms)


def evaluate(f: SetMLPoly, point: Mapping[tuple[int, int], int]) -> int:
    """Evaluate at ``point[(set, index)]`` (raw field integers); missing variables are 0."""
    field = f.field
    total = 0
    for mono, c in f.terms.items():
        acc = c
        for j, i in zip(f.support, mono):
            acc = field.mul(acc, point.get((j, i), 0))
            if not acc:
                break
        total = field.add(total, acc)
    return total
