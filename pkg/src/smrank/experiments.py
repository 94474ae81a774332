"""Exhaustive and Monte-Carlo harnesses with reproducible JSON/CSV reports.

Randomness is always derived per work item as ``derive_seed(master, index)``,
so results do not depend on how work is scheduled across processes.
Probabilities are exact rationals in exhaustive mode; Monte-Carlo estimates
carry Wilson intervals.  Logarithms in bound formulas are base 2.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import comb
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .decompose import DegreePartition
from .families import dense_linear_product, imm, nw, word_poly
from .ff import GF65521, FieldDescriptor
from .formula import Formula, build_imm_formula, expand
from .measure import (Word, all_words, balanced_probability, balanced_words, is_permutation,
                      pdm, rank, relrank, sample_word, _exact_log2)
from .serialize import dumps, formula_from_json, load_json, poly_from_json
from .smpoly import SetMLPoly

MAX_EXHAUSTIVE_D = 24
MAX_TERMS = 10**6
MC_CHUNK = 8192

# pi < PI_UPPER and pi > PI_LOWER
PI_UPPER = Fraction(3141592653589793239, 10**18)
PI_LOWER = Fraction(3141592653589793238, 10**18)


class ExperimentError(ValueError):
    pass


def derive_seed(master: int, index: int) -> int:
    digest = hashlib.sha256(f"smrank:{master}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def default_jobs() -> int:
    return os.cpu_count() or 1


_WORKER_STATE: dict[str, Any] = {}


def _init_worker(state: dict) -> None:
    _WORKER_STATE.clear()
    _WORKER_STATE.update(state)


def parallel_map(fn: Callable, items: Sequence, jobs: int = 1, state: dict | None = None,
                 chunksize: int = 1) -> list:
    """Ordered map; ``state`` is installed in each worker before ``fn`` runs."""
    state = state or {}
    if jobs <= 1 or len(items) <= 1:
        _init_worker(state)
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                             initargs=(state,)) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))


def _num(x) -> float | None:
    """JSON-friendly number; -inf becomes null."""
    if x == -math.inf:
        return None
    return float(x)


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass
class ExperimentReport:
    kind: str
    records: list[dict] = dc_field(default_factory=list)
    aggregates: dict = dc_field(default_factory=dict)
    bounds: dict = dc_field(default_factory=dict)
    provenance: dict = dc_field(default_factory=dict)
    failures: list[str] = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"kind": self.kind, "records": self.records, "aggregates": self.aggregates,
                "bounds": self.bounds, "provenance": self.provenance,
                "failures": self.failures}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        buf = io.StringIO()
        if self.records:
            cols = list(self.records[0])
            writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
            writer.writeheader()
            for r in self.records:
                writer.writerow(r)
        return buf.getvalue()


def _provenance(**config) -> dict:
    return {"smrank_version": __version__, "config": config}


# -- NW permutation structure ---------------------------------------------------

def _nw_word_record(args) -> dict:
    idx, signs, k = args
    f = _WORKER_STATE["poly"]
    w = Word.symmetric(signs, k)
    M = pdm(f, w)
    lr = relrank(f, w)
    return {"index": idx, "word": str(w), "rows": M.n_rows, "cols": M.n_cols,
            "nnz": M.nnz, "permutation": is_permutation(M), "rank": lr.rank,
            "log2_relrank": _num(lr.log2_relrank)}


def verify_nw_permutation(n: int, d: int, words: str | int = "all", seed: int = 0,
                          jobs: int = 1, coeff_field: FieldDescriptor = GF65521
                          ) -> ExperimentReport:
    """Check that M_w(NW_{n,d}) is a permutation matrix for balanced words."""
    k = _exact_log2(n)
    if k is None or k < 1:
        raise ExperimentError(f"n must be a power of two >= 2, got {n}")
    if d % 2:
        raise ExperimentError("d must be even")
    if d > n:
        raise ExperimentError(f"d must be <= n (got d={d}, n={n})")
    f = nw(n, d, coeff_field)
    if words == "all":
        wlist = [w.signs for w in balanced_words(d, k)]
    else:
        m = int(words)
        if m < 1:
            raise ExperimentError("sample count must be >= 1")
        wlist = [sample_word(d, k, "balanced", derive_seed(seed, i)).signs for i in range(m)]
    items = [(i, s, k) for i, s in enumerate(wlist)]
    records = parallel_map(_nw_word_record, items, jobs, {"poly": f})
    perm = sum(r["permutation"] for r in records)
    failures = [f"word {r['word']}: not a permutation matrix or rk_w != 1"
                for r in records if not r["permutation"] or r["log2_relrank"] != 0.0]
    return ExperimentReport(
        kind="nw-perm",
        records=records,
        aggregates={"words": len(records), "permutation": perm,
                    "full_rank": sum(r["log2_relrank"] == 0.0 for r in records),
                    "dimension": n ** (d // 2), "terms": len(f)},
        bounds={"expected_log2_relrank": 0},
        provenance=_provenance(n=n, d=d, words=words, seed=seed,
                               coeff_field=coeff_field.spec()),
        failures=failures)


# -- rank survey -----------------------------------------------------------------

@dataclass
class ExperimentConfig:
    target: dict
    word_mode: str = "uniform"
    samples: int = 100
    seed: int = 0
    coeff_field: str = "p:65521"
    rank_field: str | None = None
    depth: int | None = None
    size: int | None = None

    def __post_init__(self):
        if self.word_mode not in ("uniform", "balanced", "exhaustive", "exhaustive-balanced"):
            raise ExperimentError(f"unknown word mode {self.word_mode!r}")
        if self.samples < 1:
            raise ExperimentError("sample count must be >= 1")

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        words = obj.get("words", {})
        return cls(target=obj["target"], word_mode=words.get("mode", "uniform"),
                   samples=int(words.get("samples", 100)), seed=int(obj.get("seed", 0)),
                   coeff_field=obj.get("coeff_field", "p:65521"),
                   rank_field=obj.get("rank_field"), depth=obj.get("depth"),
                   size=obj.get("size"))

    def to_dict(self) -> dict:
        return {"target": self.target, "words": {"mode": self.word_mode,
                                                 "samples": self.samples},
                "seed": self.seed, "coeff_field": self.coeff_field,
                "rank_field": self.rank_field, "depth": self.depth, "size": self.size}


def resolve_target(target: dict, field: FieldDescriptor
                   ) -> tuple[SetMLPoly, Formula | None]:
    """Build the polynomial (and formula, when there is one) named by a target spec."""
    fam = target.get("family")
    if "poly" in target:
        return poly_from_json(load_json(target["poly"])), None
    if "formula" in target:
        F, profile = formula_from_json(load_json(target["formula"]))
        return expand(F, profile, field), F
    if fam == "nw":
        return nw(int(target["n"]), int(target["d"]), field), None
    if fam == "imm":
        n, d = int(target["n"]), int(target["d"])
        if "depth" in target:
            F = build_imm_formula(n, d, int(target["depth"]))
            from .smpoly import PartitionProfile
            return expand(F, PartitionProfile.symmetric(d, n * n), field), F
        return imm(n, d, field), None
    if fam == "dense-product":
        return dense_linear_product(int(target["n"]), int(target["d"]), field,
                                    int(target.get("seed", 0))), None
    if fam == "wordpoly":
        return word_poly(Word.parse(target["word"]), field), None
    raise ExperimentError(f"cannot resolve target {target!r}")


def _survey_record(args) -> dict:
    idx, signs, k = args
    f = _WORKER_STATE["poly"]
    rank_field = _WORKER_STATE["rank_field"]
    w = Word.symmetric(signs, k)
    lr = relrank(f, w, rank_field)
    return {"index": idx, "word": str(w), "imbalance": w.imbalance(), "rank": lr.rank,
            "rows": lr.n_rows, "cols": lr.n_cols, "log2_relrank": _num(lr.log2_relrank),
            "imbalance_ok": lr.within_imbalance_bound()}


def survey_words(d: int, k: int, mode: str, samples: int, seed: int) -> list[tuple[int, ...]]:
    if mode in ("exhaustive", "exhaustive-balanced") and d > MAX_EXHAUSTIVE_D:
        raise ExperimentError(f"exhaustive mode needs d <= {MAX_EXHAUSTIVE_D}")
    if mode == "exhaustive":
        return [w.signs for w in all_words(d, k)]
    if mode == "exhaustive-balanced":
        return [w.signs for w in balanced_words(d, k)]
    return [sample_word(d, k, mode, derive_seed(seed, i)).signs for i in range(samples)]


def rank_survey(config: ExperimentConfig, jobs: int = 1) -> ExperimentReport:
    field = FieldDescriptor.parse(config.coeff_field)
    rank_field = FieldDescriptor.parse(config.rank_field) if config.rank_field else None
    f, F = resolve_target(config.target, field)
    if len(f) > MAX_TERMS:
        raise ExperimentError(f"target has {len(f)} terms, above the {MAX_TERMS} budget")
    sizes = set(f.profile.sizes)
    k = _exact_log2(next(iter(sizes))) if len(sizes) == 1 else None
    if k is None or k < 1:
        raise ExperimentError("rank survey needs a symmetric profile with set size 2^k, k >= 1")
    d = f.profile.d
    items = [(i, s, k) for i, s in
             enumerate(survey_words(d, k, config.word_mode, config.samples, config.seed))]
    records = parallel_map(_survey_record, items, jobs,
                           {"poly": f, "rank_field": rank_field}, chunksize=8)

    size = config.size
    size_metric = "given"
    leaves = None
    if F is not None:
        leaves = F.leaf_count
        if size is None:
            size, size_metric = F.node_count, "nodes"
    depth = config.depth if config.depth is not None else (F.product_depth if F else None)

    bounds: dict[str, Any] = {"k": k, "d": d, "s": size, "size_metric": size_metric,
                              "leaves": leaves, "depth": depth}
    exceed_bd = exceed_gen = 0
    if size is not None:
        log_s = math.log2(size)
        gen_bound = log_s - k * math.log2(d) / 20
        bounds["log2_bound_unbounded"] = gen_bound
        bounds["failure_prob_unbounded"] = size * d ** (-math.log2(d) / 60)
        if depth:
            root = d ** (1 / depth)
            bd_bound = log_s - k * root / 20
            bounds["log2_bound_bounded"] = bd_bound
            bounds["failure_prob_bounded"] = size * d ** (-root / (12 * depth))
        for r in records:
            v = r["log2_relrank"]
            if v is None:
                continue
            if depth and v > bounds["log2_bound_bounded"]:
                exceed_bd += 1
            if v > gen_bound:
                exceed_gen += 1

    finite = [r["log2_relrank"] for r in records if r["log2_relrank"] is not None]
    aggregates = {
        "records": len(records),
        "zero_rank": len(records) - len(finite),
        "min_log2_relrank": min(finite) if finite else None,
        "max_log2_relrank": max(finite) if finite else None,
        "mean_log2_relrank": (math.fsum(finite) / len(finite)) if finite else None,
        "balanced_words": sum(r["imbalance"] == 0 for r in records),
    }
    if size is not None:
        aggregates["exceed_unbounded"] = exceed_gen
        aggregates["exceed_unbounded_freq"] = exceed_gen / len(records)
        if depth:
            aggregates["exceed_bounded"] = exceed_bd
            aggregates["exceed_bounded_freq"] = exceed_bd / len(records)
    failures = [f"word {r['word']}: rank {r['rank']} breaks the imbalance bound"
                for r in records if not r["imbalance_ok"]]
    return ExperimentReport("rank-survey", records, aggregates, bounds,
                            _provenance(**config.to_dict()), failures)


# -- partition probabilities ----------------------------------------------------------

def _event_cutoff(threshold: Fraction) -> int:
    """Integer sums s satisfy s < threshold iff s < this cutoff."""
    return math.ceil(Fraction(threshold))


def sum_distribution(P: DegreePartition) -> dict[int, int]:
    """Number of words in {-1,1}^d giving each value of sum_j |w_{S_j}|."""
    dist = {0: 1}
    for size in P.sizes:
        block: dict[int, int] = {}
        for a in range(size + 1):
            v = abs(2 * a - size)
            block[v] = block.get(v, 0) + comb(size, a)
        nxt: dict[int, int] = {}
        for s, c in dist.items():
            for v, cb in block.items():
                nxt[s + v] = nxt.get(s + v, 0) + c * cb
        dist = nxt
    return dist


def wilson_interval(hits: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    p = hits / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def _indicator(P: DegreePartition) -> np.ndarray:
    M = np.zeros((P.d, len(P.blocks)), dtype=np.int64)
    for j, b in enumerate(P.blocks):
        for i in b:
            M[i - 1, j] = 1
    return M


def _mc_chunk(args) -> int:
    chunk, count = args
    P, cutoff, seed = _WORKER_STATE["P"], _WORKER_STATE["cutoff"], _WORKER_STATE["seed"]
    rng = np.random.default_rng(derive_seed(seed, chunk))
    signs = rng.integers(0, 2, size=(count, P.d), dtype=np.int64) * 2 - 1
    sums = np.abs(signs @ _indicator(P)).sum(axis=1)
    return int((sums < cutoff).sum())


@dataclass
class PartitionProbability:
    mode: str
    d: int
    threshold: Fraction
    exact: Fraction | None = None
    hits: int | None = None
    samples: int | None = None

    @property
    def value(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        return self.hits / self.samples

    def interval(self, z: float = 1.96) -> tuple[float, float]:
        if self.exact is not None:
            return (float(self.exact), float(self.exact))
        return wilson_interval(self.hits, self.samples, z)


def partition_probability(P: DegreePartition, threshold, mode: str = "exhaustive",
                          samples: int = 10**5, seed: int = 0, jobs: int = 1
                          ) -> PartitionProbability:
    """Pr over uniform w in {-1,1}^d that sum_j |w_{S_j}| < threshold."""
    threshold = Fraction(threshold)
    cutoff = _event_cutoff(threshold)
    if mode == "exhaustive":
        if P.d > MAX_EXHAUSTIVE_D:
            raise ExperimentError(f"exhaustive mode needs d <= {MAX_EXHAUSTIVE_D}")
        dist = sum_distribution(P)
        hits = sum(c for v, c in dist.items() if v < cutoff)
        return PartitionProbability(mode, P.d, threshold, exact=Fraction(hits, 2**P.d))
    if mode == "mc":
        if samples < 1:
            raise ExperimentError("sample count must be >= 1")
        chunks = [(c, min(MC_CHUNK, samples - c * MC_CHUNK))
                  for c in range((samples + MC_CHUNK - 1) // MC_CHUNK)]
        hits = sum(parallel_map(_mc_chunk, chunks, jobs,
                                {"P": P, "cutoff": cutoff, "seed": seed}))
        return PartitionProbability(mode, P.d, threshold, hits=hits, samples=samples)
    raise ExperimentError(f"unknown mode {mode!r}")


def partition_bounds(d: int, depth: int | None = None) -> dict:
    """Reference bounds: d^{-d^{1/(Delta+1)}/12} (clubbed partitions) and d^{-log d/60}."""
    out = {"geometric_decay": d ** (-math.log2(d) / 60)}
    if depth is not None:
        out["clubbed"] = d ** (-(d ** (1 / (depth + 1))) / 12)
        out["clubbed_threshold"] = d ** (1 / (depth + 1)) / 10
    out["geometric_threshold"] = math.log2(d) / 10
    return out


def partition_report(P: DegreePartition, threshold, mode: str = "exhaustive",
                     samples: int = 10**5, seed: int = 0, jobs: int = 1,
                     depth: int | None = None) -> ExperimentReport:
    res = partition_probability(P, threshold, mode, samples, seed, jobs)
    lo, hi = res.interval()
    agg: dict[str, Any] = {"mode": mode, "d": P.d, "threshold": _frac(res.threshold),
                           "probability": res.value, "interval_low": lo, "interval_high": hi}
    if res.exact is not None:
        agg["exact"] = _frac(res.exact)
    else:
        agg["hits"], agg["samples"] = res.hits, res.samples
    return ExperimentReport(
        "partition", [], agg, partition_bounds(P.d, depth),
        _provenance(blocks=P.to_json(), threshold=_frac(res.threshold), mode=mode,
                    samples=samples if mode == "mc" else None, seed=seed, depth=depth))


def _all_sign_chunks(d: int, chunk: int = 1 << 16):
    total = 1 << d
    shifts = np.arange(d, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        yield ((idx[:, None] >> shifts) & 1) * 2 - 1


def club_monotonicity(P: DegreePartition, Q: DegreePartition) -> tuple[bool, int]:
    """Check sum_j |w_{Q_j}| <= sum_j |w_{P_j}| for every w in {-1,1}^d.

    Returns (holds for all words, number of words where it is strict).
    """
    if P.d != Q.d:
        raise ExperimentError("partitions cover different ground sets")
    if P.d > MAX_EXHAUSTIVE_D:
        raise ExperimentError(f"exhaustive mode needs d <= {MAX_EXHAUSTIVE_D}")
    IP, IQ = _indicator(P), _indicator(Q)
    ok, strict = True, 0
    for signs in _all_sign_chunks(P.d):
        sp = np.abs(signs @ IP).sum(axis=1)
        sq = np.abs(signs @ IQ).sum(axis=1)
        ok &= bool((sq <= sp).all())
        strict += int((sq < sp).sum())
    return ok, strict


# -- Stirling bound --------------------------------------------------------------------

def stirling_bound_check(sizes: Iterable[int]) -> ExperimentReport:
    """Exactly check C(s, s/2) / 2^s <= sqrt(2 / (pi s)) for each even s."""
    records, failures = [], []
    for s in sizes:
        if s <= 0 or s % 2:
            raise ExperimentError(f"sizes must be positive and even, got {s}")
        c = comb(s, s // 2)
        # squared: pi * s * C^2 <= 2 * 4^s
        lhs_hi = PI_UPPER * s * c * c
        lhs_lo = PI_LOWER * s * c * c
        rhs = 2 * 4**s
        if lhs_hi <= rhs:
            holds = True
        elif lhs_lo > rhs:
            holds = False
        else:
            raise ExperimentError(f"s={s}: pi bounds too loose to decide")
        exact = Fraction(c, 2**s)
        records.append({"s": s, "exact": _frac(exact), "value": float(exact),
                        "bound": math.sqrt(2 / (math.pi * s)), "holds": holds})
        if not holds:
            failures.append(f"s={s}: central binomial probability exceeds the bound")
    return ExperimentReport("stirling", records, {"checked": len(records),
                                                  "holds": len(records) - len(failures)},
                            {}, _provenance(sizes=[r["s"] for r in records]), failures)


# -- bound pipeline --------------------------------------------------------------------

def theorem_pipeline(n: int, d: int, depth: int) -> ExperimentReport:
    """Evaluate the closed-form quantities of both lower-bound arguments.

    A numeric illustration only: values are reported, nothing is asserted.
    """
    k = _exact_log2(n)
    if k is None or k < 1:
        raise ExperimentError(f"n must be a power of two >= 2, got {n}")
    if not 1 <= d <= n:
        raise ExperimentError("need 1 <= d <= n")
    if depth < 1:
        raise ExperimentError("depth must be >= 1")
    ld = math.log2(d)
    root = d ** (1 / depth)
    bd_exp = root / (24 * depth)
    bd = {
        "root": root,
        "log2_size_threshold": bd_exp * ld,
        "size_threshold": 2 ** (bd_exp * ld),
        "log2_rank_gain": k * root / 20,
        "rank_gain": 2 ** (k * root / 20),
        "failure_probability": d ** (-bd_exp),
        "sampling_failure_exponent": root / (12 * depth),
        "trivial": bd_exp * ld < ld,
    }
    ge_exp = ld / 120
    ge = {
        "log2_size_threshold": ge_exp * ld,
        "size_threshold": 2 ** (ge_exp * ld),
        "log2_rank_gain": k * ld / 20,
        "rank_gain": 2 ** (k * ld / 20),
        "failure_probability": d ** (-ge_exp),
        "trivial": ge_exp * ld < ld,
    }
    inv_sqrt = 1 / math.sqrt(d)
    bd["gap_holds"] = inv_sqrt > bd["failure_probability"]
    ge["gap_holds"] = inv_sqrt > ge["failure_probability"]
    agg = {"n": n, "d": d, "k": k, "depth": depth, "inv_sqrt_d": inv_sqrt,
           "balanced_probability": float(balanced_probability(d)),
           "bounded_depth": bd, "unbounded_depth": ge}
    return ExperimentReport("pipeline", [], agg, {}, _provenance(n=n, d=d, depth=depth))


def pipeline_text(report: ExperimentReport) -> str:
    a = report.aggregates
    bd, ge = a["bounded_depth"], a["unbounded_depth"]
    lines = [
        f"n={a['n']} (k={a['k']}), d={a['d']}, depth={a['depth']}",
        f"d^(1/depth) = {bd['root']:.6g}",
        "bounded depth:",
        f"  size threshold d^(d^(1/depth)/(24 depth)) = {bd['size_threshold']:.6g}"
        f" (log2 {bd['log2_size_threshold']:.6g})",
        f"  rank gain 2^(k d^(1/depth)/20) = {bd['rank_gain']:.6g}",
        f"  need 1/sqrt(d) = {a['inv_sqrt_d']:.6g} > d^(-d^(1/depth)/(24 depth)) = "
        f"{bd['failure_probability']:.6g}: {'holds' if bd['gap_holds'] else 'fails at this size'}",
        f"  trivial regime (threshold below d): {bd['trivial']}",
        "unbounded depth:",
        f"  size threshold d^(log d/120) = {ge['size_threshold']:.6g}",
        f"  rank gain n^(log d/20) = {ge['rank_gain']:.6g}",
        f"  need 1/sqrt(d) > d^(-log d/120) = {ge['failure_probability']:.6g}: "
        f"{'holds' if ge['gap_holds'] else 'fails at this size'}",
        f"  trivial regime (threshold below d): {ge['trivial']}",
        f"Pr[w balanced] = {a['balanced_probability']:.6g}",
    ]
    return "\n".join(lines) + "\n"
