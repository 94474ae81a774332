"""The ``smrank`` command line.

Data goes to standard output (or ``--out``), logs to standard error.
Exit codes: 0 success, 1 an asserted property failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from fractions import Fraction

from . import __version__
from .decompose import (DecompositionError, DegreePartition, club_partition,
                        geometric_decay_partition, product_decompose)
from .experiments import (ExperimentConfig, ExperimentError, ExperimentReport, club_monotonicity,
                          default_jobs, partition_report, pipeline_text, rank_survey,
                          stirling_bound_check, theorem_pipeline, verify_nw_permutation)
from .families import imm, nw, word_poly
from .ff import FieldDescriptor, FieldError
from .formula import (BudgetError, FormulaError, build_imm_formula, build_word_poly_formula,
                      expand, random_formula)
from .measure import Word, WordError, pdm, rank
from .serialize import (FormatError, dumps, formula_from_json, formula_to_json, load_json,
                        poly_from_json, poly_to_json)
from .smpoly import PartitionProfile, SetMultilinearError

log = logging.getLogger("smrank")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _env_seed() -> int:
    raw = os.environ.get("SMRANK_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SMRANK_SEED must be an integer, got {raw!r}")


def _field(text: str) -> FieldDescriptor:
    try:
        return FieldDescriptor.parse(text)
    except (FieldError, ValueError) as e:
        raise argparse.ArgumentTypeError(str(e))


def _word(text: str) -> Word:
    try:
        return Word.parse(text)
    except (WordError, ValueError) as e:
        raise argparse.ArgumentTypeError(str(e))


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a rational number, got {text!r}")


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


# -- output ------------------------------------------------------------------------

def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(text)


def _emit_report(args, report: ExperimentReport, text: str | None = None) -> int:
    if args.format == "csv":
        _emit(args, report.to_csv())
    elif args.format == "text":
        _emit(args, text if text is not None else _report_text(report))
    else:
        _emit(args, report.to_json())
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report.to_csv())
    for msg in report.failures:
        log.error("property failure: %s", msg)
    return 0 if report.ok else 1


def _report_text(report: ExperimentReport) -> str:
    lines = [f"{report.kind}: {'ok' if report.ok else 'FAILED'}"]
    for key, val in sorted(report.aggregates.items()):
        lines.append(f"  {key}: {val}")
    for key, val in sorted(report.bounds.items()):
        lines.append(f"  bound {key}: {val}")
    lines.extend(f"  failure: {m}" for m in report.failures)
    return "\n".join(lines) + "\n"


# -- handlers ------------------------------------------------------------------------

def cmd_families(args) -> int:
    if args.family == "nw":
        f = nw(args.n, args.d, args.field)
    elif args.family == "imm":
        f = imm(args.n, args.d, args.field)
    else:
        f = word_poly(args.word, args.field)
    log.info("%s: %d terms over %s", args.family, len(f), f.field)
    if args.format == "text":
        _emit(args, f"{args.family}: d={f.profile.d} sizes={list(f.profile.sizes)} "
                    f"terms={len(f)} field={f.field.spec()}\n")
    else:
        _emit(args, dumps(poly_to_json(f)))
    return 0


def _load_poly(path):
    return poly_from_json(load_json(path))


def cmd_relrank(args) -> int:
    f = _load_poly(args.poly)
    M = pdm(f, args.word, args.keep)
    field = args.field or f.field
    r = rank(M, field)
    from .measure import LogRank
    lr = LogRank(r, M.n_rows, M.n_cols)
    v = lr.log2_relrank
    out = {"word": str(args.word), "rank": r, "rows": M.n_rows, "cols": M.n_cols,
           "field": field.spec(), "keep": args.keep,
           "log2_relrank": None if v == float("-inf") else float(v),
           "log2_relrank_exact": None if v == float("-inf") else str(v)}
    if args.format == "text":
        _emit(args, f"rank {r} of {M.n_rows}x{M.n_cols} over {field.spec()}, "
                    f"log2 rk_w = {out['log2_relrank_exact']}\n")
    else:
        _emit(args, dumps(out))
    return 0


def cmd_pdm(args) -> int:
    f = _load_poly(args.poly)
    M = pdm(f, args.word, args.keep)
    _emit(args, M.to_matrix_market())
    return 0


def _load_formula(path):
    return formula_from_json(load_json(path))


def cmd_formula_expand(args) -> int:
    F, profile = _load_formula(args.formula)
    f = expand(F, profile, args.field)
    log.info("expanded %d nodes (%d leaves) into %d terms", F.node_count, F.leaf_count, len(f))
    _emit(args, dumps(poly_to_json(f)))
    return 0


def cmd_formula_decompose(args) -> int:
    F, profile = _load_formula(args.formula)
    try:
        terms = product_decompose(F)
    except DecompositionError as e:
        log.error("property failure: %s", e)
        return 1
    ok = True
    checks = {}
    if args.check:
        for spec in ("gf2", "p:65521"):
            fld = FieldDescriptor.parse(spec)
            total = expand(F, profile, fld)
            acc = None
            for t in terms:
                part = expand(t.as_formula(), profile, fld)
                acc = part if acc is None else acc + part
            checks[f"equal_{spec}"] = acc == total
            ok &= acc == total
        checks["term_bound"] = len(terms) <= F.leaf_count
        ok &= checks["term_bound"]
    out = {"terms": len(terms), "leaves": F.leaf_count, "nodes": F.node_count,
           "degree": F.degree,
           "lengths": [t.length for t in terms],
           "degrees": [list(t.degrees) for t in terms],
           "checks": checks}
    _emit(args, dumps(out))
    if not ok:
        log.error("property failure: decomposition check failed: %s", checks)
    return 0 if ok else 1


def cmd_formula_imm(args) -> int:
    F = build_imm_formula(args.n, args.d, args.depth)
    profile = PartitionProfile.symmetric(args.d, args.n * args.n)
    log.info("imm formula: %d nodes, %d leaves, product-depth %d",
             F.node_count, F.leaf_count, F.product_depth)
    _emit(args, dumps(formula_to_json(F, profile)))
    return 0


def cmd_formula_wordpoly(args) -> int:
    F = build_word_poly_formula(args.word)
    _emit(args, dumps(formula_to_json(F, PartitionProfile(args.word.sizes))))
    return 0


def cmd_formula_random(args) -> int:
    profile = PartitionProfile.symmetric(args.d, args.n)
    F = random_formula(profile, args.depth, args.size, args.seed)
    _emit(args, dumps(formula_to_json(F, profile)))
    return 0


def cmd_nw_perm(args) -> int:
    if not args.all and args.samples is None:
        raise UsageError("nw-perm: give --all or --samples M")
    words = "all" if args.all else args.samples
    report = verify_nw_permutation(args.n, args.d, words, args.seed, args.jobs)
    a = report.aggregates
    text = (f"{a['permutation']}/{a['words']} permutation, all "
            f"{a['dimension']}x{a['dimension']}\n")
    return _emit_report(args, report, text)


def cmd_rank_survey(args) -> int:
    try:
        cfg = load_json(args.config)
        if args.seed_given:
            cfg["seed"] = args.seed
        elif "seed" not in cfg:
            cfg["seed"] = args.seed
        config = ExperimentConfig.from_dict(cfg)
    except (KeyError, TypeError) as e:
        raise UsageError(f"rank-survey: bad config: {e}")
    return _emit_report(args, rank_survey(config, args.jobs))


def cmd_partition(args) -> int:
    if args.geometric is not None:
        P = geometric_decay_partition(args.geometric)
    elif args.blocks:
        P = DegreePartition.from_sizes(args.blocks)
    else:
        raise UsageError("partition: give --blocks or --geometric D")
    mode = "exhaustive" if args.exhaustive else "mc"
    report = partition_report(P, args.threshold, mode, args.samples, args.seed, args.jobs,
                              args.depth)
    return _emit_report(args, report)


def cmd_club(args) -> int:
    P = DegreePartition.from_sizes(args.blocks)
    Q = club_partition(P, args.T)
    holds, strict = club_monotonicity(P, Q)
    lo, hi = args.T / 2, 3 * args.T / 2
    in_window = all(lo <= s <= hi for s in Q.sizes)
    report = ExperimentReport(
        "club", [], {"input_sizes": list(P.sizes), "output_sizes": list(Q.sizes),
                     "output_blocks": Q.to_json(), "monotone": holds,
                     "strict_words": strict, "in_window": in_window},
        {"T": str(args.T)}, {"smrank_version": __version__},
        [] if holds and in_window else ["clubbing check failed"])
    return _emit_report(args, report)


def cmd_stirling(args) -> int:
    sizes = args.sizes or list(range(2, args.max + 1, 2))
    return _emit_report(args, stirling_bound_check(sizes))


def cmd_pipeline(args) -> int:
    report = theorem_pipeline(args.n, args.d, args.depth)
    return _emit_report(args, report, pipeline_text(report))


# -- parser ---------------------------------------------------------------------------

def _common(fmt_default: str = "json") -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: $SMRANK_SEED or 0)")
    p.add_argument("--jobs", type=_positive, default=None,
                   help="worker processes (default: available cores)")
    p.add_argument("--out", help="write data here instead of standard output")
    p.add_argument("--format", choices=("json", "csv", "text"), default=fmt_default)
    p.add_argument("--csv", help="also write per-word records as CSV to this path")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _add_experiments(sub, common) -> None:
    p = sub.add_parser("nw-perm", parents=[common], help="NW permutation-matrix check")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--all", action="store_true", help="every balanced word")
    p.add_argument("--samples", type=_positive, help="sample this many balanced words")
    p.set_defaults(func=cmd_nw_perm)

    p = sub.add_parser("rank-survey", parents=[common], help="relative-rank survey")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.set_defaults(func=cmd_rank_survey)

    p = sub.add_parser("partition", parents=[common], help="partition event probability")
    p.add_argument("--blocks", type=_int_list, help="contiguous block sizes, e.g. 2,2,8")
    p.add_argument("--geometric", type=int, metavar="D", help="geometric-decay partition of [D]")
    p.add_argument("--threshold", type=_fraction, required=True)
    p.add_argument("--exhaustive", action="store_true", help="exact count (default: MC)")
    p.add_argument("--samples", type=_positive, default=100000)
    p.add_argument("--depth", type=int, help="product-depth for the reference bound")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("club", parents=[common], help="clubbing plus exhaustive monotonicity")
    p.add_argument("--blocks", type=_int_list, required=True)
    p.add_argument("--T", type=_fraction, required=True)
    p.set_defaults(func=cmd_club)

    p = sub.add_parser("stirling", parents=[common], help="central binomial bound check")
    p.add_argument("--max", type=int, default=40)
    p.add_argument("--sizes", type=_int_list)
    p.set_defaults(func=cmd_stirling)

    p = sub.add_parser("pipeline", parents=[common], help="numeric trace of the bound chain")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.set_defaults(func=cmd_pipeline, format_default="text")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="smrank", description="Set-multilinear polynomials, relative rank and formula tools.")
    parser.add_argument("--version", action="version", version=f"smrank {__version__}")
    top = parser.add_subparsers(dest="command", metavar="COMMAND")

    fam = top.add_parser("families", help="build polynomial families")
    fsub = fam.add_subparsers(dest="family", metavar="FAMILY", required=True)
    for name in ("nw", "imm"):
        p = fsub.add_parser(name, parents=[common])
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--field", type=_field, default="p:65521")
        p.set_defaults(func=cmd_families)
    p = fsub.add_parser("wordpoly", parents=[common])
    p.add_argument("--word", type=_word, required=True)
    p.add_argument("--field", type=_field, default="p:65521")
    p.set_defaults(func=cmd_families, family="wordpoly")

    meas = top.add_parser("measure", help="partial derivative matrices and relative rank")
    msub = meas.add_subparsers(dest="action", metavar="ACTION", required=True)
    for name, fn in (("relrank", cmd_relrank), ("pdm", cmd_pdm)):
        p = msub.add_parser(name, parents=[common])
        p.add_argument("--poly", required=True, help="polynomial JSON file")
        p.add_argument("--word", type=_word, required=True)
        p.add_argument("--keep", choices=("low", "high"), default="low")
        if name == "relrank":
            p.add_argument("--field", type=_field, default=None,
                           help="rank field (default: the polynomial's)")
        p.set_defaults(func=fn)

    form = top.add_parser("formula", help="formula tools")
    fo = form.add_subparsers(dest="action", metavar="ACTION", required=True)
    p = fo.add_parser("expand", parents=[common])
    p.add_argument("--formula", required=True)
    p.add_argument("--field", type=_field, default="p:65521")
    p.set_defaults(func=cmd_formula_expand)
    p = fo.add_parser("decompose", parents=[common])
    p.add_argument("--formula", required=True)
    p.add_argument("--check", action="store_true",
                   help="verify expansion equality over GF(2) and GF(65521)")
    p.set_defaults(func=cmd_formula_decompose)
    p = fo.add_parser("imm", parents=[common])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.set_defaults(func=cmd_formula_imm)
    p = fo.add_parser("wordpoly", parents=[common])
    p.add_argument("--word", type=_word, required=True)
    p.set_defaults(func=cmd_formula_wordpoly)
    p = fo.add_parser("random", parents=[common])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--size", type=int, required=True, help="leaf budget")
    p.set_defaults(func=cmd_formula_random)

    exp = top.add_parser("exp", help="experiments")
    esub = exp.add_subparsers(dest="experiment", metavar="EXPERIMENT", required=True)
    _add_experiments(esub, common)
    # experiments are also reachable without the ``exp`` prefix
    _add_experiments(top, common)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_help()
            return 2
        logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                            stream=sys.stderr, format="smrank: %(levelname)s: %(message)s",
                            force=True)
        args.seed_given = args.seed is not None
        if args.seed is None:
            args.seed = _env_seed()
        if args.jobs is None:
            args.jobs = default_jobs()
        if getattr(args, "format_default", None) and "--format" not in (argv or sys.argv):
            args.format = args.format_default
        return args.func(args)
    except SystemExit as e:
        # --help and --version
        return e.code if isinstance(e.code, int) else 0
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return 2
    except (ExperimentError, WordError, FieldError, FormatError, FormulaError, BudgetError,
            SetMultilinearError, ValueError, OSError) as e:
        print(f"smrank: error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
