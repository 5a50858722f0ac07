"""Counting monochromatic Schur triples x + y = z in colored sets of integers.

All counts are of ordered triples, so (1, 2, 3) and (2, 1, 3) are distinct;
triples with x = y are included and reported separately as ``degenerate``.
Internally a coloring of a subset of [1, n] is a color array of length n + 1
with 0 marking uncolored positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .coloring import Coloring, DomainKind
from .report import LemmaReport

FFT_RESIDUAL_TOL = 1e-3


class NumericalInstabilityError(ArithmeticError):
    pass


@dataclass(frozen=True)
class TripleCount:
    per_color: tuple[int, ...]
    total: int
    n: int
    degenerate: int

    def __post_init__(self):
        assert self.total == sum(self.per_color)
        assert 0 <= self.degenerate <= self.total


@dataclass(frozen=True)
class SchurConstant:
    k: int
    c1_prime: Fraction
    c1: Fraction
    rz_claim: Fraction


def color_array(c: Coloring | Mapping[int, int] | np.ndarray, n: int | None = None) -> np.ndarray:
    """Normalize a coloring of (a subset of) [1, n] to a dense color array."""
    if isinstance(c, Coloring):
        if c.domain.kind is not DomainKind.INTERVAL:
            raise ValueError("Schur counting needs a coloring of an integer interval")
        return np.asarray(c.table)
    if isinstance(c, np.ndarray):
        return c
    if n is None:
        n = max(c, default=0)
    arr = np.zeros(n + 1, dtype=np.int64)
    for x, col in c.items():
        if not 1 <= x <= n:
            raise ValueError(f"element {x} outside [1, {n}]")
        arr[x] = col
    return arr


def _num_colors(colors: np.ndarray, k: int | None) -> int:
    return int(colors.max(initial=0)) if k is None else k


def _degenerate(colors: np.ndarray) -> int:
    n = len(colors) - 1
    x = np.arange(1, n // 2 + 1)
    cx = colors[x]
    return int(np.count_nonzero((cx > 0) & (cx == colors[2 * x])))


def count_schur_triples(c: Coloring | Mapping[int, int] | np.ndarray,
                        k: int | None = None) -> TripleCount:
    """Brute-force count, one vectorized row per first summand x."""
    colors = color_array(c)
    k = c.k if isinstance(c, Coloring) else _num_colors(colors, k)
    n = len(colors) - 1
    per_color = np.zeros(k + 1, dtype=np.int64)
    for x in range(1, n):
        cx = colors[x]
        if cx == 0:
            continue
        # y runs over 1..n-x, z = x + y over x+1..n
        hit = (colors[1:n - x + 1] == cx) & (colors[x + 1:n + 1] == cx)
        per_color[cx] += np.count_nonzero(hit)
    counts = tuple(int(v) for v in per_color[1:])
    return TripleCount(counts, sum(counts), n, _degenerate(colors))


def _next_pow2(m: int) -> int:
    return 1 << max(0, (m - 1).bit_length())


def count_schur_triples_fft(c: Coloring | Mapping[int, int] | np.ndarray,
                            k: int | None = None) -> TripleCount:
    """Same counts via the self-convolution of each color's indicator.

    The indicator is zero-padded to a power of two >= 2n + 1 so the cyclic
    convolution has no wraparound.
    """
    colors = color_array(c)
    k = c.k if isinstance(c, Coloring) else _num_colors(colors, k)
    n = len(colors) - 1
    size = _next_pow2(2 * n + 1)
    counts = []
    for i in range(1, k + 1):
        ind = (colors == i).astype(np.float64)
        if not ind.any():
            counts.append(0)
            continue
        spec = np.fft.rfft(ind, size)
        pairs = np.fft.irfft(spec * spec, size)[: n + 1]
        rounded = np.rint(pairs)
        residual = float(np.max(np.abs(pairs - rounded)))
        if residual >= FFT_RESIDUAL_TOL:
            raise NumericalInstabilityError(
                f"color {i}: FFT residual {residual:.3g} >= {FFT_RESIDUAL_TOL}")
        counts.append(int(rounded.astype(np.int64)[ind[: n + 1] > 0].sum()))
    return TripleCount(tuple(counts), sum(counts), n, _degenerate(colors))


def schur_constants(k: int) -> SchurConstant:
    """Exact constants from the triangle induction, plus the 2^(2k-3)*11 claim.

    ``c1`` equals ``c1_prime``: passing from triangles on n + 1 vertices to
    Schur triples divides by at most n, turning a C n^3 count into C n^2.
    """
    if not 1 <= k <= 20:
        raise ValueError(f"k must be in [1, 20], got {k}")
    c1p = Fraction(1, 6)
    for j in range(2, k + 1):
        c1p /= 6 * j**3
    rz = Fraction(1, 11) / Fraction(2) ** (2 * k - 3)
    return SchurConstant(k=k, c1_prime=c1p, c1=c1p, rz_claim=rz)


def check_corollary(c: Coloring | Mapping[int, int] | np.ndarray, n: int, k: int,
                    c1: float | Fraction, variant: str = "empirical") -> LemmaReport:
    """Monochromatic count over a colored A in [1, n] against (c1/2) n^2.

    The density hypothesis |A| >= (1 - c1/6) n is checked and, when unmet,
    the report is still computed but flagged ``precondition-unmet``.
    """
    colors = color_array(c, n)
    if len(colors) != n + 1:
        raise ValueError("coloring does not match n")
    size = int(np.count_nonzero(colors[1:]))
    count = count_schur_triples_fft(colors, k)
    c1f = float(c1)
    density_ok = size >= (1 - c1f / 6) * n
    report = LemmaReport.compare(
        "corollary-dense-schur", count.total, ">=", c1f / 2 * n * n, asymptotic=True,
        details={"n": n, "k": k, "size_A": size, "c1": c1f, "c1_variant": variant,
                 "density_precondition": density_ok,
                 "per_color": list(count.per_color)})
    if not density_ok:
        report = LemmaReport(**{**report.__dict__, "status": "precondition-unmet"})
    return report


def complement_inequality(c: Coloring | Mapping[int, int] | np.ndarray, n: int,
                          k: int, merge_into: int = 1) -> tuple[int, int, int]:
    """The counting step behind the dense corollary.

    Gives the uncolored elements of [1, n] color ``merge_into`` and returns
    ``(count over A, count after merging, 3 |complement| n)``; the first is
    always at least the second minus the third.
    """
    colors = np.array(color_array(c, n), copy=True)
    missing = int(np.count_nonzero(colors[1:] == 0))
    count_a = count_schur_triples_fft(colors, k).total
    colors[1:][colors[1:] == 0] = merge_into
    count_full = count_schur_triples_fft(colors, k).total
    return count_a, count_full, 3 * missing * n
