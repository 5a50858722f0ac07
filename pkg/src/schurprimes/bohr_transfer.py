"""Bohr sets, smoothing by beta * beta, and the transference inequalities.

Membership tests are done in exact integer arithmetic: kappa and epsilon
are read as decimal rationals (see ``primes.as_fraction``), and
``||x r / N||`` is compared through ``min(x r mod N, N - x r mod N)``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .fourier import FourierTable, Spectrum, WeightVector, convolve, dft, loglog_over_w
from .primes import WTrickParams, as_fraction
from .report import LemmaReport

TRIPLE_SUM_RTOL = 1e-9
# absolute floor, relative to the trivial bound |f1|_1 |f2|_1 |f3|_inf, for sums that vanish
TRIPLE_SUM_ATOL = 1e-12
MASS_TOL = 1e-9
DIRECT_MAX_N = 2048
_SPARSE_DIRECT_BUDGET = 2 * 10**8


class NumericalError(ArithmeticError):
    pass


def _freqs(R) -> tuple[int, ...]:
    if isinstance(R, Spectrum):
        return R.frequencies
    return tuple(sorted(int(r) for r in R))


def _int_array(values, N: int, frac: Fraction | None = None) -> np.ndarray:
    # object dtype keeps Python-int exactness once products could pass 2**62
    big = N * N
    if frac is not None:
        big = max(big, 4 * N * (abs(frac.numerator) + frac.denominator))
    return np.asarray(values, dtype=np.int64 if big < 1 << 62 else object)


def symmetric_rep(x: np.ndarray, N: int) -> np.ndarray:
    """Representative of x mod N in (-N/2, N/2]."""
    x = np.asarray(x) % N
    return np.where(2 * x > N, x - N, x)


def in_interval_mask(N: int, radius: Fraction) -> np.ndarray:
    """Residues whose symmetric representative lies in [-radius N, radius N]."""
    rep = np.abs(symmetric_rep(np.arange(N, dtype=np.int64), N))
    rep = _int_array(rep, N, radius)
    return np.asarray(rep * radius.denominator <= radius.numerator * N, dtype=bool)


def near_zero_mask(xs: np.ndarray, r: int, N: int, eps: Fraction) -> np.ndarray:
    """``||x r / N|| <= 2 eps`` for each x, exactly."""
    m = _int_array(xs, N, eps) * (r % N) % N
    dist = np.minimum(m, N - m)
    return np.asarray(dist * eps.denominator <= 2 * eps.numerator * N, dtype=bool)


@dataclass(frozen=True)
class BohrSet:
    N: int
    kappa: float
    epsilon: float
    frequencies: tuple[int, ...]
    elements: np.ndarray
    beta: WeightVector

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x: int) -> bool:
        return self.beta.values[int(x) % self.N] > 0

    @property
    def mask(self) -> np.ndarray:
        return self.beta.values > 0


def build_bohr_set(R, kappa: float, epsilon: float, N: int) -> BohrSet:
    """Scan all residues for the interval and the near-zero conditions."""
    if not 0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    if not 0 < kappa < 0.5:
        raise ValueError("kappa must lie in (0, 1/2)")
    freqs = _freqs(R)
    eps = as_fraction(epsilon)
    mask = in_interval_mask(N, as_fraction(kappa))
    xs = np.arange(N, dtype=np.int64)
    for r in freqs:
        mask &= near_zero_mask(xs, r, N, eps)
    elements = np.flatnonzero(mask)
    beta = np.zeros(N)
    beta[elements] = 1.0 / len(elements)
    out = BohrSet(N, kappa, epsilon, freqs, elements, WeightVector(beta))
    if 0 not in out or not np.array_equal(mask, mask[(-xs) % N]):
        raise AssertionError("Bohr set must contain 0 and be symmetric")
    return out


def bohr_size_lemma(b: BohrSet) -> LemmaReport:
    bound = b.epsilon ** len(b.frequencies) * b.kappa * b.N
    return LemmaReport.compare("bohr-size", len(b), ">=", bound,
                               details={"N": b.N, "R_size": len(b.frequencies),
                                        "epsilon": b.epsilon, "kappa": b.kappa})


@dataclass(frozen=True)
class BoxWitness:
    box: tuple[int, ...]
    elements: np.ndarray
    x0: int
    d: int
    interval_size: int
    volume_bound: float
    verified: bool

    @property
    def occupancy(self) -> int:
        return len(self.elements)


def pigeonhole_box_witness(R, kappa: float, epsilon: float, N: int,
                           bohr: BohrSet | None = None) -> BoxWitness:
    """Largest cell of the fractional-part grid over [-kappa N/2, kappa N/2].

    x falls in cell (t_1..t_m) when t_j <= d {x r_j / N} < t_j + 1 with
    d = floor(1/epsilon).  Translating the cell by its least element lands
    inside the Bohr set, which is checked element by element.
    """
    freqs = _freqs(R)
    eps, kap = as_fraction(epsilon), as_fraction(kappa)
    d = math.floor(1 / eps)
    if d < 2:
        raise ValueError("need floor(1/epsilon) >= 2")
    half = math.floor(kap * N / 2)
    xs = np.arange(-half, half + 1, dtype=np.int64)
    cells = np.zeros((len(xs), len(freqs)), dtype=np.int64)
    for j, r in enumerate(freqs):
        cells[:, j] = (d * (_int_array(xs, N) * r % N)) // N
    hist = Counter(map(tuple, cells.tolist()))
    best = min(hist, key=lambda t: (-hist[t], t)) if freqs else ()
    members = xs[np.all(cells == np.array(best, dtype=np.int64), axis=1)] if freqs else xs
    x0 = int(members.min())
    if bohr is None:
        bohr = build_bohr_set(freqs, kappa, epsilon, N)
    shifted = (members - x0) % N
    verified = bool(bohr.mask[shifted].all())
    return BoxWitness(tuple(best), members, x0, d, len(xs),
                      float(d ** -len(freqs) * kap * N), verified)


def _support(v: np.ndarray) -> np.ndarray:
    return (v != 0).astype(np.float64)


def smooth(a, beta) -> WeightVector:
    """``a * beta * beta``, with exact zeros off the true support.

    The support of a convolution of nonnegative vectors is the sumset of the
    supports; it is computed from 0/1 indicators and everything outside it
    (transform roundoff only) is set to zero.
    """
    av = a.values if isinstance(a, WeightVector) else np.asarray(a)
    bv = beta.beta.values if isinstance(beta, BohrSet) else (
        beta.values if isinstance(beta, WeightVector) else np.asarray(beta))
    if len(av) != len(bv):
        from .fourier import DimensionError

        raise DimensionError("a and beta differ in length")
    out = convolve(convolve(av, bv), bv).values
    ind_b = _support(bv)
    supp = convolve(_support(av), ind_b).values > 0.5
    supp = convolve(supp.astype(np.float64), ind_b).values > 0.5
    stray = float(np.abs(out[~supp]).max(initial=0.0))
    scale = float(np.abs(av).sum())
    if stray > 1e-9 * max(scale, 1e-300):
        raise NumericalError(f"smoothing leaked {stray:.3g} outside the support")
    out = np.where(supp, out, 0.0)
    if np.any(out[supp] < 0) and (av >= 0).all() and (bv >= 0).all():
        out = np.where(supp, np.maximum(out, 0.0), 0.0)
    return WeightVector(out)


def mass_report(name: str, before: WeightVector, after: WeightVector) -> LemmaReport:
    diff = abs(after.mass() - before.mass())
    return LemmaReport.compare(name, diff, "<=", MASS_TOL,
                               details={"mass_before": before.mass(), "mass_after": after.mass()})


def support_report(name: str, a_prime: WeightVector, M: int, kappa: float) -> LemmaReport:
    """Checks supp(a') lies in [-2 kappa N, M + 2 kappa N] read mod N."""
    N = a_prime.N
    k2 = 2 * as_fraction(kappa)
    xs = _int_array(np.flatnonzero(a_prime.values), N, k2)
    upper_ok = xs * k2.denominator <= (M * k2.denominator + k2.numerator * N)
    lower_ok = (N - xs) * k2.denominator <= k2.numerator * N
    bad = np.flatnonzero(~(np.asarray(upper_ok, bool) | np.asarray(lower_ok, bool)))
    return LemmaReport.compare(
        name, len(bad), "<=", 0,
        details={"support_size": len(xs), "first_outside": [int(xs[i]) for i in bad[:5]]})


def upper_lemma(a0_prime: WeightVector, params: WTrickParams, w: int, bohr: BohrSet,
                lam_table: FourierTable | None = None) -> list[LemmaReport]:
    """Hypothesis, conclusion, and the exact intermediate bound.

    The intermediate ``lambda~(0)/N + sup_{r!=0} |lambda~(r)| / |B|`` bounds
    ``sup a_0'`` at every scale and is checked as a hard inequality.
    """
    N, kappa = params.N, params.kappa
    sup = float(a0_prime.values.max())
    lhs = bohr.epsilon ** len(bohr.frequencies)
    rhs = kappa**-2 * loglog_over_w(w)
    reports = [
        LemmaReport.compare("upper-hypothesis", lhs, ">=", rhs, asymptotic=True,
                            details={"R_size": len(bohr.frequencies), "w": w}),
        LemmaReport.compare("upper-conclusion", sup, "<=", (1 + 3 * kappa) / N,
                            asymptotic=True, details={"N": N}),
    ]
    if lam_table is not None:
        c = lam_table.coefficients
        off = float(np.abs(c[1:]).max(initial=0.0))
        bound = float(c[0].real) / N + off / len(bohr)
        reports.append(LemmaReport.compare(
            "upper-intermediate", sup, "<=", bound * (1 + 1e-9),
            details={"lambda0": float(c[0].real), "sup_offzero": off, "B_size": len(bohr)}))
    return reports


def beta_lemma(bohr: BohrSet, beta_table: FourierTable | None = None) -> list[LemmaReport]:
    """Both bounds over every r in R: |1 - beta~(r)| and |1 - beta~(r)^4 beta~(-r)^2|."""
    F = beta_table or dft(bohr.beta)
    coeffs = F.coefficients
    eps2 = bohr.epsilon**2
    worst1, worst6, worst_abs = 0.0, 0.0, 0.0
    for r in bohr.frequencies:
        br, bm = coeffs[r % bohr.N], coeffs[(-r) % bohr.N]
        worst1 = max(worst1, abs(1 - br))
        worst6 = max(worst6, abs(1 - br**4 * bm**2))
    worst_abs = float(np.abs(coeffs).max())
    details = {"R_size": len(bohr.frequencies), "epsilon": bohr.epsilon}
    return [
        LemmaReport.compare("beta-first-order", worst1, "<=", 64 * eps2, details=details),
        LemmaReport.compare("beta-sixth-power", worst6, "<=", 384 * eps2, details=details),
        LemmaReport.compare("beta-coefficient-bound", worst_abs, "<=", 1 + 1e-12,
                            details={"beta0": float(coeffs[0].real)}),
    ]


@dataclass(frozen=True)
class TripleSum:
    fourier: float
    direct: float | None


def triple_sum(f1, f2, f3, *, direct: bool | None = None) -> TripleSum:
    """``sum_{x+y=z in Z_N} f1(x) f2(y) f3(z)`` via transforms and, when
    affordable, by direct summation; the two routes must agree.
    """
    v1, v2, v3 = (np.asarray(f.values if isinstance(f, WeightVector) else f, dtype=np.float64)
                  for f in (f1, f2, f3))
    N = len(v1)
    if not len(v2) == len(v3) == N:
        from .fourier import DimensionError

        raise DimensionError("triple_sum arguments differ in length")
    F1, F2, F3 = dft(v1), dft(v2), dft(v3)
    four = float((F1.coefficients * F2.coefficients * F3.negated()).sum().real / N)
    s1, s2 = np.flatnonzero(v1), np.flatnonzero(v2)
    if direct is None:
        direct = N <= DIRECT_MAX_N or len(s1) * len(s2) <= _SPARSE_DIRECT_BUDGET
    if not direct:
        return TripleSum(four, None)
    terms = []
    for x in s1.tolist():
        z = (x + s2) % N
        terms.append(v1[x] * float(np.dot(v2[s2], v3[z])))
    total = math.fsum(terms)
    trivial = float(np.abs(v1).sum() * np.abs(v2).sum() * np.abs(v3).max(initial=0.0))
    tol = max(TRIPLE_SUM_RTOL * max(abs(total), abs(four)), TRIPLE_SUM_ATOL * trivial)
    if abs(total - four) > tol:
        raise NumericalError(f"triple sum routes disagree: direct={total!r} fourier={four!r}")
    return TripleSum(four, total)


def c3_constant(c2_3: float, c2_52: float) -> float:
    return 384 * c2_3 + 2 * c2_52 ** (2 / 3) * c2_3 ** (1 / 3)


def difference_bound(c3: float, k: int, N: int, delta: float, epsilon: float) -> float:
    return c3 * k * k / N * (epsilon**2 * delta**-3 + delta ** (1 / 3))


def difference_lemma(a: Sequence, a_prime: Sequence, delta: float, epsilon: float, k: int,
                     c2_3: float, c2_52: float) -> tuple[LemmaReport, float, float]:
    """|sum_i T(a_i) - sum_i T(a_i')| against C3 k^2/N (eps^2 delta^-3 + delta^(1/3))."""
    N = len(a[0].values if isinstance(a[0], WeightVector) else a[0])
    lhs = math.fsum(triple_sum(f, f, f, direct=False).fourier for f in a)
    rhs = math.fsum(triple_sum(f, f, f, direct=False).fourier for f in a_prime)
    c3 = c3_constant(c2_3, c2_52)
    bound = difference_bound(c3, k, N, delta, epsilon)
    rep = LemmaReport.compare("difference", abs(lhs - rhs), "<=", bound, asymptotic=True,
                              details={"sum_T_a": lhs, "sum_T_a_prime": rhs, "C3": c3,
                                       "c2_3": c2_3, "c2_5/2": c2_52, "delta": delta,
                                       "epsilon": epsilon, "k": k, "N": N})
    return rep, lhs, rhs


@dataclass(frozen=True)
class DenseModel:
    X: np.ndarray
    A0prime: np.ndarray
    partition: list[np.ndarray]
    reports: list[LemmaReport]
    offenders: list[int] = field(default_factory=list)


def extract_dense_model(a0_prime: WeightVector, a_prime: Sequence[WeightVector],
                        params: WTrickParams) -> DenseModel:
    """X where a_0' >= kappa/N; A_0' = X in [1, M]; argmax partition.

    Ties go to the lowest color, matching A_i' = X_i minus the earlier X_j.
    """
    N, M, kappa = params.N, params.M, params.kappa
    k = len(a_prime)
    v0 = a0_prime.values
    X = np.flatnonzero(v0 >= kappa / N)
    A0p = X[(X >= 1) & (X <= M)]
    stack = np.vstack([f.values for f in a_prime])
    owner = stack[:, A0p].argmax(axis=0) if A0p.size else np.zeros(0, dtype=np.int64)
    partition = [A0p[owner == i] for i in range(k)]
    covered = np.sort(np.concatenate(partition)) if partition else A0p
    if not np.array_equal(covered, A0p) or sum(map(len, partition)) != len(A0p):
        raise AssertionError("argmax classes do not partition A_0'")
    offenders = []
    floor = kappa / (k * N)
    for i, part in enumerate(partition):
        vals = stack[i, part]
        low = part[vals < floor * (1 - 1e-9)]
        offenders.extend(int(x) for x in low)
    reports = [
        LemmaReport.compare("dense-X-size", len(X), ">=", (0.5 - 6 * kappa) * N,
                            asymptotic=True, details={"N": N}),
        LemmaReport.compare("dense-A0prime-size", len(A0p), ">=", (1 - 20 * kappa) * M,
                            asymptotic=True, details={"M": M}),
        LemmaReport.compare("dense-partition-floor", len(offenders), "<=", 0,
                            details={"floor": floor, "offenders": offenders[:10]}),
    ]
    return DenseModel(X, A0p, partition, reports, offenders)


def zn_solution_counts(classes: Sequence[Iterable[int]], N: int) -> list[int]:
    """Ordered solutions x + y = z in Z_N with x, y, z in one class, per class."""
    counts = []
    for cls in classes:
        idx = np.fromiter(cls, dtype=np.int64)
        member = np.zeros(N, dtype=bool)
        member[idx % N] = True
        total = 0
        for x in idx.tolist():
            total += int(np.count_nonzero(member[(x + idx) % N]))
        counts.append(total)
    return counts


@dataclass
class TransferReport:
    reports: list[LemmaReport]
    X: np.ndarray
    A0prime: np.ndarray
    partition: list[np.ndarray]
    final_lhs: float
    final_rhs_terms: dict[str, float]
    solution_counts: list[int]

    def lemma(self, name: str) -> LemmaReport:
        for rep in self.reports:
            if rep.name == name:
                return rep
        raise KeyError(name)


def positivity_chain(*, a: Sequence[WeightVector], a_prime: Sequence[WeightVector],
                     model: DenseModel, params: WTrickParams, classes: Sequence[Iterable[int]],
                     delta: float, epsilon: float, c1: float, c1_variant: str,
                     c2_3: float, c2_52: float, w: int, R_size: int,
                     reports: Sequence[LemmaReport] = ()) -> TransferReport:
    """Evaluate each link of the closing chain of inequalities.

    The headline quantity ``sum_i T(a_i)`` is decided exactly: it is positive
    iff some class has a solution of x + y = z in Z_N, because every weight
    on a class is positive.
    """
    from .schur_count import count_schur_triples_fft

    k, N, M, kappa = len(a), params.N, params.M, params.kappa
    counts = zn_solution_counts(classes, N)
    T_a = [triple_sum(f, f, f) for f in a]
    T_ap = [triple_sum(f, f, f, direct=False) for f in a_prime]
    lhs = math.fsum(t.fourier for t in T_a)
    lhs_prime = math.fsum(t.fourier for t in T_ap)
    c3 = c3_constant(c2_3, c2_52)
    diff_bound = difference_bound(c3, k, N, delta, epsilon)
    floor3 = (kappa / (k * N)) ** 3
    part_colors = np.zeros(M + 1, dtype=np.int64)
    for i, part in enumerate(model.partition, start=1):
        part_colors[part] = i
    dense_count = count_schur_triples_fft(part_colors, k).total
    smooth_lower = dense_count * floor3
    corollary_rhs = c1 * M * M / 2
    chain_end = floor3 * corollary_rhs - diff_bound
    eps_sum = epsilon**2 * delta**-3 + delta ** (1 / 3)
    target = c1 * kappa**3 / (24 * c3 * k**5) if c3 > 0 else math.inf
    llw = kappa**-2 * loglog_over_w(w)
    printed_exponent = -c2_3 * delta**-3 * k
    out = list(reports)
    out += [
        LemmaReport.compare("positivity-exact-count", sum(counts), ">", 0,
                            details={"per_color": counts}),
        LemmaReport.compare("positivity-weighted-sum", lhs, ">", 0,
                            details={"per_color": [t.fourier for t in T_a]}),
        LemmaReport.compare("chain-difference-step", lhs, ">=", lhs_prime - diff_bound,
                            asymptotic=True, details={"sum_T_a_prime": lhs_prime,
                                                      "difference_bound": diff_bound}),
        LemmaReport.compare("chain-floor-step", lhs_prime, ">=", smooth_lower * (1 - 1e-9),
                            details={"dense_schur_count": dense_count, "floor_cubed": floor3}),
        LemmaReport.compare("chain-corollary-step", dense_count, ">=", corollary_rhs,
                            asymptotic=True, details={"c1": c1, "c1_variant": c1_variant, "M": M}),
        LemmaReport.compare("chain-final-lower-bound", chain_end, ">", 0, asymptotic=True,
                            details={"c3": c3}),
        LemmaReport.compare("chain-M-over-N", c1 * kappa**3 * M * M / (2 * k**3 * N**3), ">=",
                            c1 * kappa**3 / (12 * k**3 * N), details={"M": M, "N": N}),
        LemmaReport.compare("parameter-choice-delta-epsilon", eps_sum, "<=", target,
                            asymptotic=True, details={"c1": c1, "c3": c3}),
        LemmaReport.compare("parameter-choice-upper-form", epsilon ** R_size, ">=", llw,
                            asymptotic=True, details={"reading": "epsilon^|R|"}),
        LemmaReport.compare("parameter-choice-printed-form", _safe_pow(epsilon, printed_exponent),
                            ">=", llw, asymptotic=True,
                            details={"reading": "epsilon^(-C2(3) delta^-3 k)",
                                     "exponent": printed_exponent}),
    ]
    return TransferReport(
        reports=out, X=model.X, A0prime=model.A0prime, partition=model.partition,
        final_lhs=lhs,
        final_rhs_terms={"sum_T_a_prime": lhs_prime, "difference_bound": diff_bound,
                         "floor_cubed_times_count": smooth_lower,
                         "corollary_lower": floor3 * corollary_rhs,
                         "chain_end": chain_end},
        solution_counts=counts)


def _safe_pow(base: float, exponent: float) -> float:
    try:
        return base**exponent
    except OverflowError:
        return math.inf


def degenerate_remark(a: Sequence[WeightVector], params: WTrickParams) -> LemmaReport:
    """Weight of solutions with x = y against k phi(W)^3 log(WN+1)^3 / (W^3 N^2)."""
    N, W = params.N, params.W
    x = np.arange(N)
    total = math.fsum(float(np.dot(f.values**2, f.values[(2 * x) % N])) for f in a)
    bound = len(a) * params.phiW**3 * math.log(W * N + 1) ** 3 / (W**3 * N**2)
    return LemmaReport.compare("remark-degenerate", total, "<=", bound, asymptotic=True,
                               details={"one_over_N": 1 / N})
