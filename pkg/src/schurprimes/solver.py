"""Witness search, the end-to-end transference pipeline, and the l = 3 explorer."""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterator

import numpy as np

from . import __version__
from .bohr_transfer import (
    TransferReport,
    beta_lemma,
    bohr_size_lemma,
    build_bohr_set,
    degenerate_remark,
    difference_lemma,
    extract_dense_model,
    mass_report,
    pigeonhole_box_witness,
    positivity_chain,
    smooth,
    support_report,
    triple_sum,
    upper_lemma,
    c3_constant,
)
from .coloring import (
    Coloring,
    Domain,
    DomainKind,
    constant_coloring,
    load_coloring,
    random_coloring,
    residue_coloring,
)
from .fourier import (
    EmpiricalC2,
    build_a_functions,
    dft,
    lambda_mass_reports,
    lambda_weight,
    large_spectrum,
    restriction_sum,
    spectrum_size_report,
    sup_offzero_lambda,
)
from .primes import (
    PrimeTable,
    WTrickParams,
    build_w_trick,
    is_prime,
    residue_class_elements,
    siegel_walfisz_mass,
    sieve_primes,
)
from .report import LemmaReport
from .schur_count import schur_constants

log = logging.getLogger(__name__)

SCOPE_NOTE = ("Results cover only the colorings actually tested, truncated to the "
              "stated n; nothing here verifies the statement for all colorings.")

# comparisons every pipeline report must carry, whether or not they pass
REQUIRED_LEMMAS = frozenset({
    "lambda-sup-offzero", "upper-hypothesis", "upper-conclusion",
    "siegel-walfisz-mass", "lambda-mass-vs-(1-kappa)M/N", "difference",
})


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        super().__init__(f"stage {stage!r} failed: {cause}")


@dataclass(frozen=True, order=True)
class Witness:
    p3: int
    p1: int
    p2: int
    color: int
    distinct: bool

    def __post_init__(self):
        if self.p1 + self.p2 != self.p3 + 1:
            raise ValueError(f"{self.p1} + {self.p2} != {self.p3} + 1")
        if self.p1 > self.p2:
            raise ValueError("witnesses are listed with p1 <= p2")
        if self.distinct != (len({self.p1, self.p2, self.p3}) == 3):
            raise ValueError("distinct flag inconsistent")

    def to_dict(self) -> dict[str, Any]:
        return {"p1": self.p1, "p2": self.p2, "p3": self.p3,
                "color": self.color, "distinct": self.distinct}


def _classes(c: Coloring) -> list[np.ndarray]:
    if c.domain.kind is not DomainKind.PRIMES:
        raise ValueError("witness search needs a coloring of primes")
    return c.classes()


def iter_witnesses(pt: PrimeTable | None, c: Coloring) -> Iterator[Witness]:
    """All monochromatic p1 + p2 = p3 + 1 with p3 <= n, by (p3, p1)."""
    classes = _classes(c)
    table = c.table
    for p3, col in zip(c.elements.tolist(), c.colors.tolist()):
        target = p3 + 1
        cls = classes[col - 1]
        p1s = cls[: np.searchsorted(cls, target // 2, side="right")]
        p2s = target - p1s
        hit = table[p2s] == col
        for p1, p2 in zip(p1s[hit].tolist(), p2s[hit].tolist()):
            yield Witness(p3, p1, p2, col, p1 != p2)


def search_witnesses(pt: PrimeTable | None, c: Coloring, limit: int | None = None,
                     distinct_only: bool = False) -> list[Witness]:
    out = []
    for wit in iter_witnesses(pt, c):
        if distinct_only and not wit.distinct:
            continue
        out.append(wit)
        if limit is not None and len(out) >= limit:
            break
    return out


@dataclass(frozen=True)
class WitnessCount:
    total: int
    distinct: int
    per_color: tuple[int, ...]


def count_witnesses(c: Coloring, mask: np.ndarray | None = None) -> WitnessCount:
    """Number of witnesses (p1 <= p2) per color, from pair-sum convolutions.

    ``mask`` optionally restricts all three primes to a subset of the domain.
    """
    _classes(c)
    n = c.n
    size = 1 << (2 * n + 2).bit_length()
    per_color, diag_total = [], 0
    for col in range(1, c.k + 1):
        ind = (c.table == col)
        if mask is not None:
            ind = ind & mask[: n + 1]
        ind_f = ind.astype(np.float64)
        spec = np.fft.rfft(ind_f, size)
        ordered = np.fft.irfft(spec * spec, size)[: n + 2]
        ordered_i = np.rint(ordered).astype(np.int64)
        if np.max(np.abs(ordered - ordered_i)) > 1e-3:
            raise ArithmeticError("pair-sum convolution lost integrality")
        ps = np.flatnonzero(ind)
        diag = np.zeros(n + 2, dtype=np.int64)
        half = ps[2 * ps <= n + 1]
        diag[2 * half] = 1
        targets = ps + 1
        unordered = (ordered_i[targets] + diag[targets]) // 2
        per_color.append(int(unordered.sum()))
        diag_total += int(diag[targets].sum())
    total = sum(per_color)
    return WitnessCount(total, total - diag_total, tuple(per_color))


def conjecture_iter_l3(pt: PrimeTable | None, c: Coloring) -> Iterator[tuple[int, int, int, int]]:
    """Monochromatic (p0, p1, p2, p3) with p1, p2, p3 in progression of step p0 - 1."""
    classes = _classes(c)
    table = c.table
    n = c.n
    for p0, col in zip(c.elements.tolist(), c.colors.tolist()):
        d = p0 - 1
        if 2 * d >= n:
            break
        cls = classes[col - 1]
        p1s = cls[: np.searchsorted(cls, n - 2 * d, side="right")]
        hit = (table[p1s + d] == col) & (table[p1s + 2 * d] == col)
        for p1 in p1s[hit].tolist():
            yield (p0, p1, p1 + d, p1 + 2 * d)


def conjecture_search_l3(pt: PrimeTable | None, c: Coloring,
                         limit: int | None = None) -> list[tuple[int, int, int, int]]:
    out = []
    for quad in conjecture_iter_l3(pt, c):
        out.append(quad)
        if limit is not None and len(out) >= limit:
            break
    return out


class Mode(enum.Enum):
    SEARCH = "search"
    PIPELINE = "pipeline"
    BOTH = "both"
    CONJECTURE = "conjecture"


@dataclass
class RunConfig:
    n: int
    w: int = 2
    k: int = 1
    kappa: float = 0.1
    delta: float = 0.05
    epsilon: float = 0.1
    coloring_spec: str = "const"
    output_path: str | None = None
    mode: Mode = Mode.PIPELINE
    c1_variant: str = "recursion"
    max_witnesses: int = 100

    def validate(self) -> None:
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not 0 < self.kappa < 0.5:
            raise ValueError("kappa must lie in (0, 1/2)")
        if not 0 < self.delta < 0.5 or not 0 < self.epsilon < 0.5:
            raise ValueError("delta and epsilon must lie in (0, 1/2)")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.c1_variant not in ("recursion", "rz-claim"):
            raise ValueError("c1_variant must be 'recursion' or 'rz-claim'")

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["mode"] = self.mode.value
        d.pop("output_path")
        return d


def make_coloring(spec: str, domain: Domain, k: int) -> Coloring:
    """Build a coloring from ``const``, ``random:SEED``, ``residue:M:r=c,...`` or a path."""
    if spec == "const":
        return constant_coloring(domain, k)
    if spec.startswith("random:"):
        return random_coloring(domain, k, int(spec.split(":", 1)[1]))
    if spec.startswith("residue:"):
        _, m, mapping = spec.split(":", 2)
        table = {}
        for item in mapping.split(","):
            r, col = item.split("=")
            table[int(r)] = int(col)
        return residue_coloring(domain, int(m), table, k=max(k, max(table.values())))
    c = load_coloring(Path(spec))
    if c.domain.kind is not domain.kind or c.n < domain.n:
        raise ValueError(f"coloring file covers {c.domain.kind.value}<={c.n}, "
                         f"need {domain.kind.value}<={domain.n}")
    if c.n > domain.n:
        keep = c.elements <= domain.n
        c = Coloring(c.k, domain, c.elements[keep], c.colors[keep])
    return c


@dataclass
class PipelineResult:
    config: RunConfig
    params: WTrickParams
    transfer: TransferReport
    lifted: list[Witness]
    lifted_count: int
    lifted_distinct: int
    lifting_failures: int
    search_count_restricted: int
    triple_sums: dict[str, float | None]
    constants: dict[str, Any]
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def reports(self) -> list[LemmaReport]:
        return self.transfer.reports


class _Stages:
    def __init__(self):
        self.timings: dict[str, float] = {}

    def run(self, name, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            out = fn(*args, **kwargs)
        except StageError:
            raise
        except Exception as exc:  # noqa: BLE001 - re-raised with the stage name
            raise StageError(name, exc) from exc
        self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - t0
        return out


def _lift(classes: list[np.ndarray], params: WTrickParams, coloring: Coloring,
          max_keep: int) -> tuple[list[Witness], int, int, int]:
    """Map every Z_N solution x + y = z (x <= y) in one class to primes W x + 1.

    Each distinct prime is re-checked by Miller-Rabin, the colors by lookup
    and the identity p1 + p2 = p3 + 1 by integer arithmetic.
    """
    W, N = params.W, params.N
    kept = np.zeros((0, 4), dtype=np.int64)  # rows (p3, p1, p2, color)
    total = distinct = failures = 0
    for col, cls in enumerate(classes, start=1):
        if len(cls) == 0:
            continue
        member = np.zeros(N, dtype=bool)
        member[cls] = True
        verified = np.zeros(N, dtype=bool)
        for x in cls.tolist():
            p = W * x + 1
            verified[x] = is_prime(p) and coloring.color(p) == col
        chunks = [kept]
        for x in cls.tolist():
            ys = cls[cls >= x]
            zs = (x + ys) % N
            hit = member[zs]
            if not hit.any():
                continue
            ys, zs = ys[hit], zs[hit]
            p1 = W * x + 1
            p2 = W * ys + 1
            p3 = W * zs + 1
            ok = (zs == x + ys) & (p1 + p2 == p3 + 1) & verified[zs] & verified[ys]
            ok &= verified[x]
            failures += int(np.count_nonzero(~ok))
            total += len(zs)
            distinct += int(np.count_nonzero(ys != x))
            rows = np.column_stack([p3, np.full_like(p3, p1), p2, np.full_like(p3, col)])
            chunks.append(rows[:max_keep])
            if len(chunks) > 64:
                chunks = [_smallest(np.vstack(chunks), max_keep)]
        kept = _smallest(np.vstack(chunks), max_keep)
    wits = [Witness(int(a), int(b), int(c), int(d), int(b) != int(c)) for a, b, c, d in kept]
    return wits, total, distinct, failures


def _smallest(rows: np.ndarray, keep: int) -> np.ndarray:
    order = np.lexsort((rows[:, 1], rows[:, 0]))
    return rows[order[:keep]]


def run_pipeline(cfg: RunConfig, coloring: Coloring | None = None) -> PipelineResult:
    cfg.validate()
    st = _Stages()
    params = st.run("primes", build_w_trick, cfg.n, cfg.w, cfg.kappa)
    W, M, N, kappa = params.W, params.M, params.N, params.kappa
    if M < 10:
        raise StageError("primes", ValueError(f"M = {M} < 10; increase n"))
    if not 2 * M < N:
        raise StageError("primes", AssertionError("M < N/2 violated"))
    pt = st.run("primes", sieve_primes, max(cfg.n, W * N + 1))
    domain = Domain.primes(W * M + 1)
    if coloring is None:
        coloring = st.run("coloring", make_coloring, cfg.coloring_spec, domain, cfg.k)
    elif coloring.n != domain.n:
        coloring = st.run("coloring", _restrict, coloring, domain)
    k = max(cfg.k, coloring.k)
    A0 = st.run("primes", residue_class_elements, pt, params, 1)
    A0_arr = np.array(sorted(A0), dtype=np.int64)
    lift_colors = coloring.table[W * A0_arr + 1]
    classes = [A0_arr[lift_colors == i] for i in range(1, k + 1)]
    reports: list[LemmaReport] = []

    lam = st.run("fourier", lambda_weight, params, 1, pt)
    _, sw = st.run("primes", siegel_walfisz_mass, pt, params, 1)
    reports.append(sw)
    reports += lambda_mass_reports(lam, params)
    a0, a = st.run("fourier", build_a_functions, classes, lam, M)
    tables = [st.run("fourier", dft, f) for f in a]
    lam_table = st.run("fourier", dft, lam)
    spec = st.run("fourier", large_spectrum, a, cfg.delta, tables)
    c2 = EmpiricalC2()
    for f, tab in zip(a, tables):
        for rho in (2.5, 3.0):
            c2.observe(rho, restriction_sum(f, rho, tab))
    reports.append(spectrum_size_report(spec, c2[3.0], k))
    _, lam_rep = sup_offzero_lambda(lam, cfg.w, lam_table)
    reports.append(lam_rep)

    bohr = st.run("bohr", build_bohr_set, spec, kappa, cfg.epsilon, N)
    reports.append(bohr_size_lemma(bohr))
    box = st.run("bohr", pigeonhole_box_witness, spec, kappa, cfg.epsilon, N, bohr)
    reports.append(LemmaReport.compare(
        "bohr-box-translation", int(not box.verified), "<=", 0,
        details={"box": list(box.box), "x0": box.x0, "occupancy": box.occupancy}))
    reports.append(LemmaReport.compare(
        "bohr-box-occupancy", box.occupancy, ">=", box.interval_size / box.d ** len(spec),
        details={"d": box.d, "interval_size": box.interval_size,
                 "volume_bound": box.volume_bound}))
    reports += beta_lemma(bohr)

    a_prime = [st.run("smoothing", smooth, f, bohr) for f in a]
    a0_prime = st.run("smoothing", smooth, a0, bohr)
    reports.append(mass_report("smoothing-mass-a0", a0, a0_prime))
    for i, (f, fp) in enumerate(zip(a, a_prime), start=1):
        reports.append(mass_report(f"smoothing-mass-a{i}", f, fp))
        reports.append(support_report(f"smoothing-support-a{i}", fp, M, kappa))
    reports.append(support_report("smoothing-support-a0", a0_prime, M, kappa))
    gap = float(np.abs(a0_prime.values - sum(fp.values for fp in a_prime)).max())
    reports.append(LemmaReport.compare("smoothing-additivity", gap, "<=",
                                       1e-9 * float(a0_prime.values.max(initial=0.0)) + 1e-300))
    reports += upper_lemma(a0_prime, params, cfg.w, bohr, lam_table)

    c2_3, c2_52 = c2[3.0], c2[2.5]
    diff_rep, _, _ = st.run("transfer", difference_lemma, a, a_prime, cfg.delta, cfg.epsilon,
                            k, c2_3, c2_52)
    reports.append(diff_rep)
    model = st.run("transfer", extract_dense_model, a0_prime, a_prime, params)
    reports += model.reports
    reports.append(degenerate_remark(a, params))

    consts = schur_constants(min(k, 20))
    c1 = float(consts.c1 if cfg.c1_variant == "recursion" else consts.rz_claim)
    transfer = st.run("transfer", positivity_chain, a=a, a_prime=a_prime, model=model,
                      params=params, classes=classes, delta=cfg.delta, epsilon=cfg.epsilon,
                      c1=c1, c1_variant=cfg.c1_variant, c2_3=c2_3, c2_52=c2_52, w=cfg.w,
                      R_size=len(spec), reports=reports)

    lifted, lifted_count, lifted_distinct, failures = st.run(
        "lifting", _lift, classes, params, coloring, cfg.max_witnesses)
    mask = np.zeros(coloring.n + 1, dtype=bool)
    mask[W * A0_arr + 1] = True
    restricted = st.run("lifting", count_witnesses, coloring, mask)
    transfer.reports.append(LemmaReport.compare(
        "lifting-failures", failures, "<=", 0, details={"lifted": lifted_count}))
    transfer.reports.append(LemmaReport.compare(
        "lifting-cross-check", abs(lifted_count - restricted.total), "<=", 0,
        details={"lifted": lifted_count, "search_restricted": restricted.total}))
    transfer.reports.append(LemmaReport.compare(
        "remark-distinct-witnesses", lifted_distinct, ">", 0, asymptotic=True,
        details={"lifted": lifted_count}))

    direct_parts = [triple_sum(f, f, f).direct for f in a]
    triple_sums = {
        "fourier": transfer.final_lhs,
        "direct": math.fsum(direct_parts) if all(d is not None for d in direct_parts) else None,
        "smoothed_fourier": transfer.final_rhs_terms["sum_T_a_prime"],
    }
    constants = {
        "c2_empirical": c2.to_dict(),
        "c3": c3_constant(c2_3, c2_52),
        "c1": c1,
        "c1_variant": cfg.c1_variant,
        "c1_prime_exact": str(consts.c1_prime),
        "rz_claim_exact": str(consts.rz_claim),
    }
    return PipelineResult(cfg, params, transfer, lifted, lifted_count, lifted_distinct,
                          failures, restricted.total, triple_sums, constants, st.timings)


def _restrict(c: Coloring, domain: Domain) -> Coloring:
    if c.domain.kind is not domain.kind or c.n < domain.n:
        raise ValueError(f"coloring covers {c.domain.kind.value}<={c.n}, "
                         f"need {domain.kind.value}<={domain.n}")
    keep = c.elements <= domain.n
    return Coloring(c.k, domain, c.elements[keep], c.colors[keep])


def pipeline_report(res: PipelineResult, *, timings: bool = False) -> dict[str, Any]:
    p = res.params
    t = res.transfer
    return {
        "version": __version__,
        "scope": SCOPE_NOTE,
        "config": res.config.to_dict(),
        "params": {"n": p.n, "w": p.w, "W": p.W, "M": p.M, "N": p.N,
                   "kappa": p.kappa, "phiW": p.phiW},
        "witnesses": [w.to_dict() for w in res.lifted],
        "witness_summary": {
            "lifted": res.lifted_count,
            "lifted_distinct": res.lifted_distinct,
            "lifting_failures": res.lifting_failures,
            "search_restricted": res.search_count_restricted,
            "listed": len(res.lifted),
        },
        "lemma_reports": [r.to_dict() for r in t.reports],
        "triple_sums": res.triple_sums,
        "constants": res.constants,
        "per_color_counts": {str(i): c for i, c in enumerate(t.solution_counts, start=1)},
        "dense_model": {"X": len(t.X), "A0prime": len(t.A0prime),
                        "partition": [len(s) for s in t.partition]},
        "final_rhs_terms": t.final_rhs_terms,
        "timings": dict(sorted(res.timings.items())) if timings else None,
    }


def search_report(cfg: RunConfig, coloring: Coloring, *, timings: bool = False) -> dict[str, Any]:
    t0 = time.perf_counter()
    listed = search_witnesses(None, coloring, limit=cfg.max_witnesses)
    first_distinct = search_witnesses(None, coloring, limit=1, distinct_only=True)
    count = count_witnesses(coloring)
    elapsed = time.perf_counter() - t0
    return {
        "version": __version__,
        "scope": SCOPE_NOTE,
        "config": cfg.to_dict(),
        "witnesses": [w.to_dict() for w in listed],
        "witness_summary": {
            "count": count.total,
            "distinct": count.distinct,
            "first_distinct": first_distinct[0].to_dict() if first_distinct else None,
            "listed": len(listed),
        },
        "per_color_counts": {str(i): c for i, c in enumerate(count.per_color, start=1)},
        "lemma_reports": [],
        "triple_sums": {"direct": None, "fourier": None},
        "constants": {},
        "timings": {"search": elapsed} if timings else None,
    }


def conjecture_report(cfg: RunConfig, coloring: Coloring, *,
                      timings: bool = False) -> dict[str, Any]:
    t0 = time.perf_counter()
    quads = list(conjecture_iter_l3(None, coloring))
    elapsed = time.perf_counter() - t0
    return {
        "version": __version__,
        "scope": SCOPE_NOTE,
        "config": cfg.to_dict(),
        "witnesses": [],
        "quadruples": [list(q) for q in quads[: cfg.max_witnesses]],
        "quadruple_count": len(quads),
        "lemma_reports": [],
        "triple_sums": {"direct": None, "fourier": None},
        "constants": {},
        "timings": {"conjecture": elapsed} if timings else None,
    }
