"""JSON file formats for polynomials and formulas (``format_version`` 1)."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .ff import FieldDescriptor
from .formula import Const, Formula, Product, Sum, Var
from .smpoly import PartitionProfile, SetMLPoly, validate_poly

FORMAT_VERSION = 1


class FormatError(ValueError):
    pass


def field_to_json(field: FieldDescriptor) -> dict:
    if field.kind == "prime":
        return {"kind": "prime", "order": field.order}
    return {"kind": "binary", "order": field.order, "modulus": field.modulus}


def field_from_json(obj: dict) -> FieldDescriptor:
    kind = obj.get("kind")
    if kind == "prime":
        return FieldDescriptor.prime(int(obj["order"]))
    if kind == "binary":
        k = int(obj["order"]).bit_length() - 1
        return FieldDescriptor.binary(k, int(obj["modulus"]) if "modulus" in obj else None)
    raise FormatError(f"unknown field kind {kind!r}")


def profile_to_json(profile: PartitionProfile) -> dict:
    return {"d": profile.d, "sizes": list(profile.sizes)}


def profile_from_json(obj: dict) -> PartitionProfile:
    sizes = tuple(int(s) for s in obj["sizes"])
    if "d" in obj and int(obj["d"]) != len(sizes):
        raise FormatError(f"profile d={obj['d']} disagrees with {len(sizes)} sizes")
    return PartitionProfile(sizes)


def _check_version(obj: dict) -> None:
    v = obj.get("format_version", FORMAT_VERSION)
    if v != FORMAT_VERSION:
        raise FormatError(f"unsupported format_version {v}")


def poly_to_json(f: SetMLPoly) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "profile": profile_to_json(f.profile),
        "field": field_to_json(f.field),
        "support": list(f.support),
        "terms": [{"vars": [list(p) for p in pairs], "coeff": c}
                  for pairs, c in f.monomials()],
    }


def poly_from_json(obj: dict) -> SetMLPoly:
    _check_version(obj)
    profile = profile_from_json(obj["profile"])
    field = field_from_json(obj["field"])
    support = tuple(sorted(int(j) for j in obj["support"]))
    terms: dict[tuple[int, ...], int] = {}
    for t in obj["terms"]:
        choice = {int(j): int(i) for j, i in t["vars"]}
        if tuple(sorted(choice)) != support or len(t["vars"]) != len(support):
            raise FormatError(f"term {t['vars']} does not match support {list(support)}")
        mono = tuple(choice[j] for j in support)
        if mono in terms:
            raise FormatError(f"duplicate monomial {t['vars']}")
        c = int(t["coeff"])
        if not 0 <= c < field.order:
            raise FormatError(f"coefficient {c} is not canonical in {field}")
        if c:
            terms[mono] = c
    f = SetMLPoly(profile, field, support, terms)
    validate_poly(f)
    return f


def formula_tree_to_json(F: Formula) -> dict:
    if isinstance(F, Var):
        return {"kind": "var", "set": F.set, "index": F.index}
    if isinstance(F, Const):
        return {"kind": "const", "value": F.value}
    kind = "sum" if isinstance(F, Sum) else "product"
    return {"kind": kind, "children": [formula_tree_to_json(c) for c in F.children]}


def formula_tree_from_json(obj: dict) -> Formula:
    kind = obj.get("kind")
    if kind == "var":
        return Var(int(obj["set"]), int(obj["index"]))
    if kind == "const":
        return Const(int(obj["value"]))
    if kind in ("sum", "product"):
        kids = tuple(formula_tree_from_json(c) for c in obj["children"])
        return Sum(kids) if kind == "sum" else Product(kids)
    raise FormatError(f"unknown node kind {kind!r}")


def formula_to_json(F: Formula, profile: PartitionProfile) -> dict:
    return {"format_version": FORMAT_VERSION, "profile": profile_to_json(profile),
            "formula": formula_tree_to_json(F)}


def formula_from_json(obj: dict) -> tuple[Formula, PartitionProfile]:
    _check_version(obj)
    return formula_tree_from_json(obj["formula"]), profile_from_json(obj["profile"])


def dumps(obj: Any) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def load_json(path: str | Path) -> Any:
    with open(path) as fh:
        return json.load(fh)
