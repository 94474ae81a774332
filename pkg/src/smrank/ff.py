"""Exact arithmetic in GF(p) and GF(2^k), plus univariate polynomials.

Field elements are canonical integers: residues ``0..p-1`` for prime fields,
and k-bit coefficient vectors (bit ``i`` is the coefficient of ``z^i``) for
binary extension fields.  :class:`FieldElement` wraps one of those integers
together with its :class:`FieldDescriptor`; bulk code (polynomials, matrices)
works on the raw integers and calls the descriptor's methods directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

# One canonical irreducible modulus per k (bit i = coefficient of z^i).
BINARY_MODULI = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0x11B,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1002B,
}

MAX_PRIME = 2**31


class FieldError(ValueError):
    """Invalid field construction or an illegal operation."""


class FieldMismatchError(FieldError):
    """Operands belong to different fields."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def _clmul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _gf2_polymod(a: int, m: int) -> int:
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def is_irreducible_gf2(m: int) -> bool:
    """Trial division of a GF(2)[z] polynomial by every polynomial of degree <= deg/2."""
    k = m.bit_length() - 1
    if k < 1:
        return False
    if k == 1:
        return True
    if m & 1 == 0:
        return False
    for g in range(2, 1 << (k // 2 + 1)):
        if _gf2_polymod(m, g) == 0:
            return False
    return True


@dataclass(frozen=True)
class FieldDescriptor:
    """A finite field: ``kind`` is ``"prime"`` (GF(p)) or ``"binary"`` (GF(2^k))."""

    kind: str
    order: int
    modulus: int = 0

    def __post_init__(self):
        if self.kind == "prime":
            if not (2 <= self.order < MAX_PRIME) or not _is_prime(self.order):
                raise FieldError(f"GF(p) needs a prime p < 2^31, got {self.order}")
        elif self.kind == "binary":
            k = self.modulus.bit_length() - 1
            if self.order != 1 << k:
                raise FieldError("order must equal 2^deg(modulus)")
            if not is_irreducible_gf2(self.modulus):
                raise FieldError(f"modulus {self.modulus:#x} is reducible over GF(2)")
        else:
            raise FieldError(f"unknown field kind {self.kind!r}")

    # -- constructors -----------------------------------------------------

    @classmethod
    def prime(cls, p: int) -> "FieldDescriptor":
        return cls("prime", p)

    @classmethod
    def binary(cls, k: int, modulus: int | None = None) -> "FieldDescriptor":
        if modulus is None:
            if k not in BINARY_MODULI:
                raise FieldError(f"no built-in modulus for k={k}; pass one explicitly")
            modulus = BINARY_MODULI[k]
        if modulus.bit_length() - 1 != k:
            raise FieldError(f"modulus degree must be {k}")
        return cls("binary", 1 << k, modulus)

    @classmethod
    def parse(cls, text: str) -> "FieldDescriptor":
        """Parse ``gf2``, ``p:65521`` / ``prime:65521`` or ``gf2k:3``."""
        text = text.strip().lower()
        if text == "gf2":
            return cls.prime(2)
        head, _, tail = text.partition(":")
        try:
            value = int(tail)
        except ValueError:
            raise FieldError(f"cannot parse field {text!r}") from None
        if head in ("p", "prime", "gfp"):
            return cls.prime(value)
        if head == "gf2k":
            return cls.binary(value)
        raise FieldError(f"cannot parse field {text!r}")

    # -- metadata ---------------------------------------------------------

    @property
    def degree(self) -> int:
        """Extension degree over the prime field."""
        return 1 if self.kind == "prime" else self.modulus.bit_length() - 1

    @property
    def characteristic(self) -> int:
        return self.order if self.kind == "prime" else 2

    def spec(self) -> str:
        return f"p:{self.order}" if self.kind == "prime" else f"gf2k:{self.degree}"

    def __str__(self) -> str:
        if self.kind == "prime":
            return f"GF({self.order})"
        return f"GF(2^{self.degree})"

    # -- raw integer arithmetic -------------------------------------------

    def from_int(self, v: int) -> int:
        """Canonical representative of an integer (binary: reduce the bit polynomial)."""
        if self.kind == "prime":
            return v % self.order
        if v < 0:
            raise FieldError("binary-field representatives are non-negative")
        return _gf2_polymod(v, self.modulus)

    def add(self, a: int, b: int) -> int:
        if self.kind == "prime":
            s = a + b
            return s - self.order if s >= self.order else s
        return a ^ b

    def sub(self, a: int, b: int) -> int:
        if self.kind == "prime":
            s = a - b
            return s + self.order if s < 0 else s
        return a ^ b

    def neg(self, a: int) -> int:
        if self.kind == "prime":
            return (self.order - a) % self.order
        return a

    def mul(self, a: int, b: int) -> int:
        if self.kind == "prime":
            return (a * b) % self.order
        return _gf2_polymod(_clmul(a, b), self.modulus)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError(f"inverse of zero in {self}")
        if self.kind == "prime":
            return pow(a, self.order - 2, self.order)
        # a^(2^k - 2) by square-and-multiply
        result, base, e = 1, a, self.order - 2
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    # -- element helpers --------------------------------------------------

    def __call__(self, v: int) -> "FieldElement":
        return FieldElement(self, self.from_int(v))

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    def elements(self) -> Iterator["FieldElement"]:
        for v in range(self.order):
            yield FieldElement(self, v)

    def index_element(self, i: int) -> "FieldElement":
        """The canonical bijection [order] -> field: ``i`` maps to the value ``i - 1``."""
        if not 1 <= i <= self.order:
            raise FieldError(f"index {i} outside [1, {self.order}]")
        return FieldElement(self, i - 1)


GF2 = FieldDescriptor.prime(2)
GF65521 = FieldDescriptor.prime(65521)


@dataclass(frozen=True)
class FieldElement:
    field: FieldDescriptor
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.field.order:
            raise FieldError(f"{self.value} is not a canonical element of {self.field}")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatchError(f"{self.field} vs {other.field}")
            return other.value
        if isinstance(other, int):
            return self.field.from_int(other)
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.field, self.field.add(self.value, b))

    __radd__ = __add__

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.field, self.field.sub(self.value, b))

    def __rsub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.field, self.field.sub(b, self.value))

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.field, self.field.mul(self.value, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.field, self.field.mul(self.value, self.field.inv(b)))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def inv(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.value))

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.field}({self.value})"


@dataclass(frozen=True)
class UniPoly:
    """Univariate polynomial, coefficients lowest degree first, no trailing zeros."""

    field: FieldDescriptor
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if self.coeffs and self.coeffs[-1] == 0:
            raise FieldError("UniPoly coefficients must not end in zero; use UniPoly.make")

    @classmethod
    def make(cls, field: FieldDescriptor, coeffs: Iterable[int | FieldElement]) -> "UniPoly":
        raw = [c.value if isinstance(c, FieldElement) else field.from_int(c) for c in coeffs]
        while raw and raw[-1] == 0:
            raw.pop()
        return cls(field, tuple(raw))

    @property
    def degree(self) -> int:
        """``len(coeffs) - 1``; the zero polynomial has degree -1."""
        return len(self.coeffs) - 1

    @property
    def coefficients(self) -> tuple[FieldElement, ...]:
        return tuple(FieldElement(self.field, c) for c in self.coeffs)

    def eval_raw(self, x: int) -> int:
        f = self.field
        acc = 0
        for c in reversed(self.coeffs):
            acc = f.add(f.mul(acc, x), c)
        return acc

    def __call__(self, x: FieldElement | int) -> FieldElement:
        if isinstance(x, FieldElement):
            if x.field != self.field:
                raise FieldMismatchError(f"{self.field} vs {x.field}")
            x = x.value
        else:
            x = self.field.from_int(x)
        return FieldElement(self.field, self.eval_raw(x))


def _poly_mul_linear(field: FieldDescriptor, poly: list[int], root: int) -> list[int]:
    # poly * (z - root)
    out = [0] * (len(poly) + 1)
    nr = field.neg(root)
    for i, c in enumerate(poly):
        out[i + 1] = field.add(out[i + 1], c)
        out[i] = field.add(out[i], field.mul(c, nr))
    return out


def interpolate(points: Sequence[tuple[FieldElement, FieldElement]]) -> UniPoly:
    """Lagrange interpolation: the unique polynomial of degree < len(points)."""
    if not points:
        raise FieldError("interpolation needs at least one point")
    field = points[0][0].field
    xs, ys = [], []
    for x, y in points:
        if x.field != field or y.field != field:
            raise FieldMismatchError("all points must share one field")
        xs.append(x.value)
        ys.append(y.value)
    if len(set(xs)) != len(xs):
        raise FieldError("interpolation points must have distinct x values")

    result = [0] * len(xs)
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        if yi == 0:
            continue
        basis = [1]
        denom = 1
        for j, xj in enumerate(xs):
            if j != i:
                basis = _poly_mul_linear(field, basis, xj)
                denom = field.mul(denom, field.sub(xi, xj))
        scale = field.mul(yi, field.inv(denom))
        for t, c in enumerate(basis):
            result[t] = field.add(result[t], field.mul(c, scale))
    return UniPoly.make(field, result)


def enumerate_polys(field: FieldDescriptor, num_coeffs: int) -> Iterator[UniPoly]:
    """All polynomials with ``num_coeffs`` coefficients, lexicographic in (c0, c1, ...)."""
    if num_coeffs < 0:
        raise ValueError("num_coeffs must be >= 0")
    for vec in itertools.product(range(field.order), repeat=num_coeffs):
        yield UniPoly.make(field, vec)
