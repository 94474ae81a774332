"""Slow, independent reference implementations used only by the tests."""

from __future__ import annotations

import itertools
from fractions import Fraction


def dense_rank(rows: list[list[int]], p: int) -> int:
    """Rank over GF(p) by textbook row reduction on a dense copy."""
    m = [[v % p for v in r] for r in rows]
    if not m:
        return 0
    n_cols = len(m[0])
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], p - 2, p)
        m[r] = [(v * inv) % p for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def gf2k_mul(a: int, b: int, modulus: int) -> int:
    """Shift-and-add multiplication in GF(2)[z]/(modulus)."""
    k = modulus.bit_length() - 1
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> k & 1:
            a ^= modulus
    return out


def gf2_poly_divides(g: int, f: int) -> bool:
    while f and f.bit_length() >= g.bit_length():
        f ^= g << (f.bit_length() - g.bit_length())
    return f == 0


def is_irreducible_bruteforce(f: int) -> bool:
    k = f.bit_length() - 1
    for g in range(2, 1 << (k // 2 + 1)):
        if g.bit_length() - 1 >= 1 and g.bit_length() - 1 <= k // 2 and gf2_poly_divides(g, f):
            return False
    return True


def brute_partition_count(blocks: list[list[int]], threshold) -> int:
    """Words w in {-1,1}^d with sum_j |w_{S_j}| < threshold, by enumeration."""
    d = sum(len(b) for b in blocks)
    t = Fraction(threshold)
    count = 0
    for w in itertools.product((1, -1), repeat=d):
        s = sum(abs(sum(w[i - 1] for i in b)) for b in blocks)
        if s < t:
            count += 1
    return count


def imm_entry(mats: list[list[list[int]]], p: int) -> int:
    """(1,1) entry of the matrix product mod p."""
    acc = mats[0]
    for M in mats[1:]:
        n = len(acc)
        acc = [[sum(acc[i][t] * M[t][j] for t in range(n)) % p for j in range(n)]
               for i in range(n)]
    return acc[0][0]


def word_poly_bruteforce(signs: list[int], k: int) -> set[tuple[int, ...]]:
    """Monomials (variable index per set) whose positive/negative label strings
    are prefix-comparable; labels are the k-bit binary expansion of index-1."""
    d = len(signs)
    label = lambda i: format(i - 1, f"0{k}b") if k else ""
    out = set()
    for mono in itertools.product(range(1, 2**k + 1), repeat=d):
        pos = "".join(label(mono[j]) for j in range(d) if signs[j] > 0)
        neg = "".join(label(mono[j]) for j in range(d) if signs[j] < 0)
        if pos.startswith(neg) or neg.startswith(pos):
            out.add(mono)
    return out


def dict_expand(F, p: int) -> dict[frozenset, int]:
    """Expand a formula into {frozenset of (set, index): coeff mod p}."""
    from smrank.formula import Const, Sum, Var

    if isinstance(F, Var):
        return {frozenset({(F.set, F.index)}): 1}
    if isinstance(F, Const):
        c = F.value % p
        return {frozenset(): c} if c else {}
    parts = [dict_expand(c, p) for c in F.children]
    if isinstance(F, Sum):
        out: dict[frozenset, int] = {}
        for part in parts:
            for m, c in part.items():
                out[m] = (out.get(m, 0) + c) % p
        return {m: c for m, c in out.items() if c}
    out = {frozenset(): 1}
    for part in parts:
        nxt: dict[frozenset, int] = {}
        for m1, c1 in out.items():
            for m2, c2 in part.items():
                m = m1 | m2
                nxt[m] = (nxt.get(m, 0) + c1 * c2) % p
        out = {m: c for m, c in nxt.items() if c}
    return out


def poly_as_dict(f) -> dict[frozenset, int]:
    return {frozenset(zip(f.support, mono)): c for mono, c in f.terms.items()}
