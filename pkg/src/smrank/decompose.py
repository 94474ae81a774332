"""Product decomposition of set-multilinear formulas, and partition clubbing.

:func:`product_decompose` writes a degree-d formula with s leaves as a sum of
at most s products ``F_{i,1} ... F_{i,l}`` whose factor degrees decay
geometrically: ``(1/3)^j d <= deg F_{i,j} <= (2/3)^j d`` and the last factor
is linear.

Each step picks a gate v with ``D/3 < deg v <= 2D/3`` and uses that the
formula is affine in the value at v::

    F = F_v * G + F|_{v := 0}

where G is the product of the siblings met at product gates on the
root-to-v path.  One of ``F_v`` / ``G`` becomes the next factor and the
other is decomposed further; ``F|_{v:=0}`` is decomposed from scratch.
Recursing into ``F_v`` keeps the term count within the leaf count
unconditionally; recursing into ``G`` is taken only when it also does
and leaves a smaller residual.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .formula import Const, Formula, Product, Sum, Var, validate


class DecompositionError(ValueError):
    pass


class DegenerateClubbingError(ValueError):
    pass


# -- normalization -------------------------------------------------------------

def normalize(F: Formula) -> Formula:
    """Fan-in-2 products (balanced split), unary products removed."""
    if isinstance(F, (Var, Const)):
        return F
    kids = [normalize(c) for c in F.children]
    if isinstance(F, Sum):
        return Sum(tuple(kids))
    return _binary_product(kids)


def _binary_product(kids: list[Formula]) -> Formula:
    if len(kids) == 1:
        return kids[0]
    mid = len(kids) // 2
    return Product((_binary_product(kids[:mid]), _binary_product(kids[mid:])))


def _prune(F: Formula, path: tuple[int, ...]) -> Formula | None:
    """``F`` with the node at ``path`` set to zero; ``None`` when that kills F."""
    if not path:
        return None
    i, rest = path[0], path[1:]
    child = _prune(F.children[i], rest)
    if isinstance(F, Product):
        if child is None:
            return None
        return Product(F.children[:i] + (child,) + F.children[i + 1:])
    kids = F.children[:i] + ((child,) if child is not None else ()) + F.children[i + 1:]
    return Sum(kids) if kids else None


def _pruned_leaves(F: Formula, path: tuple[int, ...]) -> int:
    if not path:
        return 0
    i, rest = path[0], path[1:]
    child = _pruned_leaves(F.children[i], rest)
    others = F.leaf_count - F.children[i].leaf_count
    if isinstance(F, Product):
        return 0 if child == 0 else others + child
    return others + child


def _siblings(F: Formula, path: tuple[int, ...]) -> list[Formula]:
    out = []
    node = F
    for i in path:
        if isinstance(node, Product):
            out.extend(c for t, c in enumerate(node.children) if t != i)
        node = node.children[i]
    return out


# -- decomposition -------------------------------------------------------------

@dataclass(frozen=True)
class DecompTerm:
    factors: tuple[Formula, ...]

    @property
    def length(self) -> int:
        return len(self.factors)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(f.degree for f in self.factors)

    @property
    def supports(self) -> tuple[frozenset[int], ...]:
        return tuple(f.support for f in self.factors)

    def as_formula(self) -> Formula:
        return self.factors[0] if len(self.factors) == 1 else Product(self.factors)


def _window_ok(j: int, deg: int, d: int) -> bool:
    lo = Fraction(d, 3**j)
    hi = Fraction(2**j * d, 3**j)
    return lo <= deg <= hi


def term_violations(term: DecompTerm, d: int) -> list[str]:
    """Everything wrong with one term against the degree-window contract."""
    problems = []
    seen: set[int] = set()
    for j, sup in enumerate(term.supports, 1):
        if seen & sup:
            problems.append(f"factor {j} overlaps earlier factors")
        seen |= sup
    if seen != set(range(1, d + 1)):
        problems.append("factor supports do not cover [d]")
    for j, deg in enumerate(term.degrees, 1):
        if not _window_ok(j, deg, d):
            problems.append(f"factor {j} has degree {deg} outside "
                            f"[{Fraction(d, 3**j)}, {Fraction(2**j * d, 3**j)}]")
    if term.degrees[-1] != 1:
        problems.append(f"last factor has degree {term.degrees[-1]}, not 1")
    if 3**term.length < d:
        problems.append(f"length {term.length} < log_3 {d}")
    return problems


def _choose_split(F: Formula):
    D = F.degree
    best = None
    for path, node in F.walk():
        dv = node.degree
        if not (3 * dv > D and 3 * dv <= 2 * D):
            continue
        # recurse into F_v: always within the leaf budget
        options = [(dv, 0, path, "into_gate")]
        sib = _siblings(F, path)
        sib_leaves = sum(s.leaf_count for s in sib)
        if sib_leaves + _pruned_leaves(F, path) <= F.leaf_count:
            options.append((D - dv, 1, path, "into_siblings"))
        for opt in options:
            if best is None or opt[:2] < best[:2]:
                best = opt
    if best is None:
        raise DecompositionError("no gate in the degree window; formula not set-multilinear?")
    return best


def _decompose(F: Formula) -> list[list[Formula]]:
    if F.degree == 1:
        return [[F]]
    _, _, path, mode = _choose_split(F)
    v = F.at(path)
    sib = _siblings(F, path)
    G = sib[0] if len(sib) == 1 else _binary_product(sib)
    rest = _prune(F, path)
    if mode == "into_gate":
        terms = [[G] + t for t in _decompose(v)]
    else:
        terms = [[v] + t for t in _decompose(G)]
    if rest is not None:
        terms.extend(_decompose(rest))
    return terms


def product_decompose(F: Formula) -> list[DecompTerm]:
    """Geometric-decay product decomposition; see the module docstring.

    Raises :class:`DecompositionError` if some term misses the degree windows,
    which cannot be reached for d = 2 and is possible only for d in {3, 5}.
    """
    support = validate(F)
    d = len(support)
    if d < 3:
        raise DecompositionError(f"degree {d}: the windows admit no decomposition below d = 3")
    if support != frozenset(range(1, d + 1)):
        raise DecompositionError(f"support must be [d], got {sorted(support)}")
    terms = [DecompTerm(tuple(t)) for t in _decompose(normalize(F))]
    for t in terms:
        bad = term_violations(t, d)
        if bad:
            raise DecompositionError("; ".join(bad))
    return terms


# -- partitions ------------------------------------------------------------------

@dataclass(frozen=True)
class DegreePartition:
    blocks: tuple[frozenset[int], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for b in self.blocks:
            if not b:
                raise ValueError("partition blocks must be nonempty")
            if seen & b:
                raise ValueError("partition blocks must be disjoint")
            seen |= b
        if seen != set(range(1, len(seen) + 1)):
            raise ValueError("blocks must cover [d] exactly")

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]]) -> "DegreePartition":
        return cls(tuple(frozenset(b) for b in blocks))

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "DegreePartition":
        """Contiguous blocks of the given sizes."""
        blocks, start = [], 1
        for s in sizes:
            blocks.append(frozenset(range(start, start + s)))
            start += s
        return cls(tuple(blocks))

    @property
    def d(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def to_json(self) -> list[list[int]]:
        return [sorted(b) for b in self.blocks]


def _block_key(b: frozenset[int]):
    return (len(b), min(b))


def club_partition(P: DegreePartition, T: Fraction | int, strict: bool = True
                   ) -> DegreePartition:
    """Merge undersized blocks until every block size lies in [T/2, 3T/2].

    Two blocks of size < T/2 are merged while possible (always the two
    smallest); a single leftover undersized block is merged into the
    smallest other block.  ``strict`` enforces the precondition that every
    input block is smaller than T; without it the same merges run and only
    the undersized blocks are guaranteed to be fixed.
    """
    T = Fraction(T)
    if strict and any(len(b) >= T for b in P.blocks):
        raise ValueError(f"every block must be smaller than T={T}")
    half = T / 2
    blocks = sorted(P.blocks, key=_block_key)
    while True:
        small = [b for b in blocks if len(b) < half]
        if len(small) >= 2:
            a, b = small[0], small[1]
            blocks.remove(a)
            blocks.remove(b)
            blocks.append(a | b)
            blocks.sort(key=_block_key)
            continue
        if len(small) == 1:
            others = [b for b in blocks if b is not small[0]]
            if not others:
                raise DegenerateClubbingError(
                    f"total size {P.d} < T/2 = {half}; no block can reach the window")
            target = others[0]
            blocks.remove(small[0])
            blocks.remove(target)
            blocks.append(small[0] | target)
            blocks.sort(key=_block_key)
        break
    blocks.sort(key=min)
    return DegreePartition(tuple(blocks))


def geometric_decay_partition(d: int) -> DegreePartition:
    """Contiguous blocks of sizes ceil(R/2) for the remaining R, ending in a singleton.

    Checked against ``(1/3)^j d <= |S_j| <= (2/3)^j d`` and ``|S_l| = 1``.
    """
    sizes, rem = [], d
    while rem > 1:
        s = (rem + 1) // 2
        sizes.append(s)
        rem -= s
    sizes.append(1)
    for j, s in enumerate(sizes, 1):
        if not _window_ok(j, s, d):
            raise ValueError(f"d={d}: block {j} of size {s} misses its geometric window")
    return DegreePartition.from_sizes(sizes)


def factor_partition(term: Formula | DecompTerm) -> DegreePartition:
    """Partition of [d] induced by the factors of a product (or a decomposition term)."""
    if isinstance(term, DecompTerm):
        blocks = term.supports
    elif isinstance(term, Product):
        blocks = tuple(c.support for c in term.children if c.support)
    else:
        raise ValueError("need a product gate or a decomposition term")
    return DegreePartition(tuple(blocks))


def summand_types(F: Formula) -> list[int]:
    """1/2 classification of the product summands of a top-level sum.

    With product-depth Delta+1 and degree d, a summand is type 1 when some
    factor has degree >= d^(Delta/(Delta+1)), compared exactly as
    deg^(Delta+1) >= d^Delta.
    """
    summands = F.children if isinstance(F, Sum) else (F,)
    depth = F.product_depth
    if depth < 2:
        raise ValueError("type split needs product-depth >= 2")
    delta = depth - 1
    d = F.degree
    out = []
    for s in summands:
        factors = s.children if isinstance(s, Product) else (s,)
        big = any(c.degree ** (delta + 1) >= d**delta for c in factors)
        out.append(1 if big else 2)
    return out
