"""Tree IR for set-multilinear formulas.

Nodes are immutable: :class:`Var` and :class:`Const` leaves, :class:`Sum` and
:class:`Product` gates.  Constants carry a plain integer that is read into
whatever coefficient field the formula is expanded over, so one tree can be
expanded over GF(2) and GF(65521) alike.

Structural attributes (``support``, ``degree``, ``product_depth``,
``node_count``, ``gate_count``, ``leaf_count``) are cached per node and assume
the tree is well formed; :func:`validate` is the checked entry point.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, Union

from .ff import FieldDescriptor
from .measure import Word
from .smpoly import PartitionProfile, SetMLPoly, poly_add, poly_mul


class FormulaError(ValueError):
    """A node breaks the set-multilinear typing rules; ``path`` locates it."""

    def __init__(self, message: str, path: tuple[int, ...] = ()):
        loc = "root" if not path else "root" + "".join(f".{i}" for i in path)
        super().__init__(f"{loc}: {message}")
        self.path = path


class _Node:
    @cached_property
    def node_count(self) -> int:
        return 1 + sum(c.node_count for c in self.children)

    @cached_property
    def leaf_count(self) -> int:
        if not self.children:
            return 1
        return sum(c.leaf_count for c in self.children)

    @property
    def gate_count(self) -> int:
        return self.node_count - self.leaf_count

    @property
    def degree(self) -> int:
        return len(self.support)

    def walk(self, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], "Formula"]]:
        """Pre-order traversal yielding ``(path, node)``."""
        yield path, self
        for i, c in enumerate(self.children):
            yield from c.walk(path + (i,))

    def at(self, path: tuple[int, ...]) -> "Formula":
        node = self
        for i in path:
            node = node.children[i]
        return node


@dataclass(frozen=True, eq=True)
class Var(_Node):
    set: int
    index: int

    children = ()

    @cached_property
    def support(self) -> frozenset[int]:
        return frozenset((self.set,))

    @property
    def product_depth(self) -> int:
        return 0

    def __str__(self) -> str:
        return f"x[{self.index},{self.set}]"


@dataclass(frozen=True, eq=True)
class Const(_Node):
    value: int

    children = ()

    @property
    def support(self) -> frozenset[int]:
        return frozenset()

    @property
    def product_depth(self) -> int:
        return 0

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, eq=True)
class Sum(_Node):
    children: tuple

    def __post_init__(self):
        if len(self.children) < 1:
            raise FormulaError("sum gate needs at least one child")

    @cached_property
    def support(self) -> frozenset[int]:
        return self.children[0].support

    @cached_property
    def product_depth(self) -> int:
        return max(c.product_depth for c in self.children)

    def __str__(self) -> str:
        return "(" + " + ".join(map(str, self.children)) + ")"


@dataclass(frozen=True, eq=True)
class Product(_Node):
    children: tuple

    def __post_init__(self):
        if len(self.children) < 1:
            raise FormulaError("product gate needs at least one child")

    @cached_property
    def support(self) -> frozenset[int]:
        return frozenset().union(*(c.support for c in self.children))

    @cached_property
    def product_depth(self) -> int:
        return 1 + max(c.product_depth for c in self.children)

    def __str__(self) -> str:
        return "*".join(map(str, self.children))


Formula = Union[Var, Const, Sum, Product]


def add(*children: Formula) -> Sum:
    return Sum(tuple(children))


def mul(*children: Formula) -> Product:
    return Product(tuple(children))


def validate(F: Formula, profile: PartitionProfile | None = None) -> frozenset[int]:
    """Check every node's typing rule; return the root support."""

    def visit(node, path):
        if isinstance(node, Var):
            if profile is not None:
                if not 1 <= node.set <= profile.d:
                    raise FormulaError(f"variable set {node.set} outside profile d={profile.d}",
                                       path)
                if not 1 <= node.index <= profile.size(node.set):
                    raise FormulaError(f"variable index {node.index} exceeds set {node.set} "
                                       f"of size {profile.size(node.set)}", path)
            elif node.set < 1 or node.index < 1:
                raise FormulaError("variable indices are 1-based", path)
            return node.support
        if isinstance(node, Const):
            return frozenset()
        sups = [visit(c, path + (i,)) for i, c in enumerate(node.children)]
        if isinstance(node, Sum):
            for i, s in enumerate(sups[1:], 1):
                if s != sups[0]:
                    raise FormulaError(f"sum children supports differ: child 0 has "
                                       f"{sorted(sups[0])}, child {i} has {sorted(s)}", path)
            return sups[0]
        if isinstance(node, Product):
            seen: set[int] = set()
            for i, s in enumerate(sups):
                clash = seen & s
                if clash:
                    raise FormulaError(f"product children overlap on sets {sorted(clash)} "
                                       f"(child {i})", path)
                seen |= s
            return frozenset(seen)
        raise FormulaError(f"unknown node type {type(node).__name__}", path)

    return visit(F, ())


def expand(F: Formula, profile: PartitionProfile, field: FieldDescriptor) -> SetMLPoly:
    """The polynomial computed by ``F``."""
    validate(F, profile)
    cache: dict[int, SetMLPoly] = {}

    def go(node):
        key = id(node)
        if key in cache:
            return cache[key]
        if isinstance(node, Var):
            out = SetMLPoly(profile, field, (node.set,), {(node.index,): 1})
        elif isinstance(node, Const):
            c = field.from_int(node.value)
            out = SetMLPoly(profile, field, (), {(): c} if c else {})
        elif isinstance(node, Sum):
            out = go(node.children[0])
            for c in node.children[1:]:
                out = poly_add(out, go(c))
        else:
            out = go(node.children[0])
            for c in node.children[1:]:
                out = poly_mul(out, go(c))
        cache[key] = out
        return out

    return go(F)


def term_bound(F: Formula) -> int:
    """Upper bound on the expanded term count (sums add, products multiply)."""
    if isinstance(F, (Var, Const)):
        return 1
    vals = [term_bound(c) for c in F.children]
    if isinstance(F, Sum):
        return sum(vals)
    out = 1
    for v in vals:
        out *= v
    return out


# -- builders ------------------------------------------------------------------

def integer_root_ceil(x: int, k: int) -> int:
    """Smallest t with t**k >= x."""
    t = max(1, round(x ** (1.0 / k)))
    while t**k < x:
        t += 1
    while t > 1 and (t - 1) ** k >= x:
        t -= 1
    return t


def _split_blocks(length: int, parts: int) -> list[int]:
    q, r = divmod(length, parts)
    return [q + 1] * r + [q] * (parts - r)


def _imm_blocks(length: int, depth: int) -> list[int]:
    if depth == 1:
        return [1] * length
    return _split_blocks(length, min(length, integer_root_ceil(length, depth)))


def build_imm_formula(n: int, d: int, depth: int) -> Formula:
    """Divide-and-conquer formula for IMM_{n,d} of product-depth <= ``depth``.

    Entry (a, b) of the chain X_l ... X_r splits into about r-l+1 ^ (1/depth)
    contiguous blocks, summing over the n choices at each block boundary.
    """
    from .families import imm_variable

    if depth < 1:
        raise ValueError("product-depth must be >= 1")
    if d < 2 or n < 1:
        raise ValueError("imm formula needs d >= 2 and n >= 1")

    def entry(lo: int, length: int, a: int, b: int, delta: int) -> Formula:
        if length == 1:
            return Var(lo, imm_variable(n, a, b))
        blocks = _imm_blocks(length, delta)
        starts = [lo]
        for size in blocks[:-1]:
            starts.append(starts[-1] + size)
        summands = []
        for inner in itertools.product(range(1, n + 1), repeat=len(blocks) - 1):
            ends = (a,) + inner + (b,)
            summands.append(Product(tuple(
                entry(s, size, ends[t], ends[t + 1], delta - 1)
                for t, (s, size) in enumerate(zip(starts, blocks)))))
        return Sum(tuple(summands))

    return entry(1, d, 1, 1, depth)


@lru_cache(maxsize=None)
def _imm_count(n: int, length: int, depth: int) -> int:
    if length == 1:
        return 1
    blocks = _imm_blocks(length, depth)
    per_product = 1 + sum(_imm_count(n, b, depth - 1) for b in blocks)
    return 1 + n ** (len(blocks) - 1) * per_product


def imm_formula_size(n: int, d: int, depth: int) -> int:
    """Node count of :func:`build_imm_formula` from its recursion, without building it."""
    return _imm_count(n, d, depth)


def build_word_poly_formula(w: Word) -> Formula:
    """``prod_{j in P} sum_i x_{i,j} x_{i,phi(j)}`` pairing positive and negative sets by rank."""
    pos, neg = w.positive, w.negative
    if len(pos) != len(neg) or len(set(w.sizes)) != 1:
        raise ValueError("word polynomial formula needs a balanced symmetric word")
    n = w.sizes[0]
    factors = []
    for j, jp in zip(pos, neg):
        factors.append(Sum(tuple(Product((Var(j, i), Var(jp, i))) for i in range(1, n + 1))))
    return Product(tuple(factors))


# -- random formulas -----------------------------------------------------------

class BudgetError(ValueError):
    pass


def random_formula(profile: PartitionProfile, depth_budget: int, size_budget: int,
                   seed: int = 0, max_terms: int = 2048, constants: bool = True) -> Formula:
    """Seeded random set-multilinear formula with support [d].

    ``size_budget`` bounds the leaf count and ``depth_budget`` the
    product-depth; ``max_terms`` caps :func:`term_bound` so expansion stays
    cheap.
    """
    d = profile.d
    if depth_budget < 1 and d > 1:
        raise BudgetError("degree > 1 needs product-depth >= 1")
    if size_budget < d:
        raise BudgetError(f"{size_budget} leaves cannot cover {d} variable sets")
    rng = random.Random(seed)

    def linear(j: int, leaves: int, terms: int) -> Formula:
        width = max(1, min(profile.size(j), leaves, terms, rng.randint(1, 3)))
        idx = sorted(rng.sample(range(1, profile.size(j) + 1), width))
        if width == 1:
            return Var(j, idx[0])
        return Sum(tuple(Var(j, i) for i in idx))

    def gen(sets: list[int], delta: int, leaves: int, terms: int) -> Formula:
        if len(sets) == 1:
            return linear(sets[0], leaves, terms)
        # summands: each needs at least len(sets) leaves
        max_r = max(1, min(3, leaves // len(sets), terms))
        r = rng.randint(1, max_r)
        summands = []
        for t in range(r):
            share = leaves // r
            summands.append(product(sets, delta, share, max(1, terms // r)))
        return summands[0] if r == 1 else Sum(tuple(summands))

    def product(sets: list[int], delta: int, leaves: int, terms: int) -> Formula:
        if delta == 1:
            blocks = [[j] for j in sets]
        else:
            shuffled = sets[:]
            rng.shuffle(shuffled)
            t = rng.randint(2, len(sets))
            cuts = sorted(rng.sample(range(1, len(sets)), t - 1))
            blocks = [sorted(shuffled[a:b]) for a, b in zip([0] + cuts, cuts + [len(sets)])]
        spare = leaves - len(sets)
        children = []
        remaining_terms = terms
        for blk in blocks:
            extra = rng.randint(0, spare) if spare > 0 else 0
            spare -= extra
            child_terms = max(1, int(remaining_terms ** (1 / max(1, len(blocks) - len(children)))))
            child = gen(blk, delta - 1, len(blk) + extra, child_terms)
            remaining_terms = max(1, remaining_terms // term_bound(child))
            children.append(child)
        if constants and spare > 0 and rng.random() < 0.2:
            children.insert(rng.randrange(len(children) + 1), Const(rng.choice((1, 3, 5, 7))))
        return Product(tuple(children))

    return gen(list(profile.full_support()), depth_budget, size_budget, max_terms)
