"""Fourier analysis on Z_N for the weighted prime indicators.

Transform convention: ``F(r) = sum_x f(x) e(-x r / N)`` with
``e(t) = exp(2 pi i t)``, which is numpy's forward FFT convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .primes import INT64_MAX, ParameterError, PrimeTable, WTrickParams, sieve_primes
from .report import LemmaReport


class DimensionError(ValueError):
    pass


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class WeightVector:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1:
            raise DimensionError("weight vector must be one-dimensional")
        if not np.all(np.isfinite(v)):
            raise ValueError("weight vector has non-finite entries")
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def mass(self) -> float:
        return math.fsum(self.values.tolist())


@dataclass(frozen=True)
class FourierTable:
    coefficients: np.ndarray

    @property
    def N(self) -> int:
        return len(self.coefficients)

    def __getitem__(self, r: int) -> complex:
        return complex(self.coefficients[r % self.N])

    def negated(self) -> np.ndarray:
        """Coefficients at -r, i.e. ``out[r] = F(-r)``."""
        return np.roll(self.coefficients[::-1], 1)


def _values(f) -> np.ndarray:
    if isinstance(f, WeightVector):
        return f.values
    if isinstance(f, FourierTable):
        return f.coefficients
    return np.asarray(f)


def _is_pow2(n: int) -> bool:
    return n & (n - 1) == 0


@lru_cache(maxsize=16)
def _chirp(N: int) -> tuple[np.ndarray, np.ndarray, int]:
    # n^2 reduced mod 2N keeps the phase exact for large n
    idx = np.arange(N, dtype=np.int64)
    sq = (idx * idx) % (2 * N)
    w = np.exp(-1j * np.pi * sq / N)
    L = 1 << (2 * N - 2).bit_length()
    b = np.zeros(L, dtype=np.complex128)
    b[:N] = np.conj(w)
    b[L - N + 1:] = np.conj(w[1:][::-1])
    return w, np.fft.fft(b), L


def _bluestein(x: np.ndarray) -> np.ndarray:
    N = len(x)
    w, B, L = _chirp(N)
    a = np.zeros(L, dtype=np.complex128)
    a[:N] = x * w
    return w * np.fft.ifft(np.fft.fft(a) * B)[:N]


def dft(f) -> FourierTable:
    """Forward transform; chirp-z for lengths that are not powers of two."""
    x = _values(f).astype(np.complex128)
    if len(x) == 0:
        raise DimensionError("N must be >= 1")
    if _is_pow2(len(x)):
        return FourierTable(np.fft.fft(x))
    return FourierTable(_bluestein(x))


def idft(F, real: bool = True) -> WeightVector | np.ndarray:
    X = _values(F).astype(np.complex128)
    out = np.conj(dft(np.conj(X)).coefficients) / len(X)
    return WeightVector(out.real) if real else out


def dft_direct(f) -> np.ndarray:
    """O(N^2) evaluation of the definition, with exact integer phases."""
    x = _values(f).astype(np.complex128)
    N = len(x)
    idx = np.arange(N, dtype=np.int64)
    phase = np.outer(idx, idx) % N
    return np.exp(-2j * np.pi * phase / N) @ x


def convolve(f, g) -> WeightVector:
    """Cyclic convolution ``(f*g)(x) = sum_y f(y) g(x - y)`` on Z_N."""
    a, b = _values(f), _values(g)
    if len(a) != len(b):
        raise DimensionError(f"length mismatch: {len(a)} vs {len(b)}")
    prod = dft(a).coefficients * dft(b).coefficients
    return idft(prod)


def convolve_direct(f, g) -> np.ndarray:
    a, b = _values(f), _values(g)
    if len(a) != len(b):
        raise DimensionError(f"length mismatch: {len(a)} vs {len(b)}")
    N = len(a)
    out = np.zeros(N, dtype=np.result_type(a, b, np.float64))
    for y in np.flatnonzero(a):
        out += a[y] * np.roll(b, y)
    return out


def lambda_weight(params: WTrickParams, b: int = 1, pt: PrimeTable | None = None) -> WeightVector:
    """``phi(W) log(W x + b) / (W N)`` when W x + b is prime, else 0.

    Indexed by residues 0..N-1 with the representative x itself; x = 0 gets 0.
    """
    if math.gcd(b, params.W) != 1:
        from .primes import InvalidResidueError

        raise InvalidResidueError(f"gcd({b}, {params.W}) != 1")
    top = params.W * params.N + b
    if top > INT64_MAX:
        raise ParameterError("W*N + b overflows 64 bits")
    if pt is None or pt.limit < top:
        pt = sieve_primes(top)
    x = np.arange(params.N, dtype=np.int64)
    vals = params.W * x + b
    prime = pt.mask[vals]
    prime[0] = False
    out = np.zeros(params.N)
    out[prime] = params.phiW * np.log(vals[prime].astype(np.float64)) / (params.W * params.N)
    return WeightVector(out)


def lambda_mass_reports(lam: WeightVector, params: WTrickParams) -> list[LemmaReport]:
    """Mass of lambda on [1, M] against (1-kappa) M/N and 1/2 - 3 kappa."""
    v = lam.values
    kappa = params.kappa
    head = math.fsum(v[1:params.M + 1].tolist())
    total = lam.mass()
    details = {"mass_1_to_M": head, "mass_all": total, "M": params.M, "N": params.N}
    return [
        LemmaReport.compare("lambda-mass-vs-(1-kappa)M/N", head, ">=",
                            (1 - kappa) * params.M / params.N, asymptotic=True,
                            details=details),
        LemmaReport.compare("lambda-mass-vs-half-minus-3kappa", head, ">=",
                            0.5 - 3 * kappa, asymptotic=True, details=details),
    ]


def build_a_functions(classes: Sequence[Iterable[int]], lam: WeightVector,
                      M: int | None = None) -> tuple[WeightVector, list[WeightVector]]:
    """``a_i = 1_{A_i} * lambda`` for each class, and ``a_0 = a_1 + ... + a_k``."""
    N = lam.N
    seen = np.zeros(N, dtype=bool)
    parts = []
    for i, cls in enumerate(classes, start=1):
        idx = np.fromiter(cls, dtype=np.int64)
        if idx.size and (idx.min() < 1 or (M is not None and idx.max() > M) or idx.max() >= N):
            raise PartitionError(f"class {i} leaves [1, M]")
        if seen[idx].any():
            raise PartitionError(f"class {i} overlaps an earlier class")
        seen[idx] = True
        a = np.zeros(N)
        a[idx] = lam.values[idx]
        parts.append(WeightVector(a))
    a0 = np.zeros(N)
    for a in parts:
        a0 = a0 + a.values
    direct = np.where(seen, lam.values, 0.0)
    if not np.array_equal(a0, direct):
        raise AssertionError("a_0 differs from the sum of the a_i")
    return WeightVector(a0), parts


@dataclass(frozen=True)
class Spectrum:
    delta: float
    frequencies: tuple[int, ...]
    witnesses: dict[int, tuple[int, float]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.frequencies)

    def __contains__(self, r: int) -> bool:
        return r in self.witnesses


def large_spectrum(a: Sequence, delta: float,
                   tables: Sequence[FourierTable] | None = None) -> Spectrum:
    """Frequencies where some |a_i~(r)| >= delta, with the maximizing color."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if tables is None:
        tables = [dft(f) for f in a]
    mags = np.abs(np.vstack([t.coefficients for t in tables]))
    best = mags.argmax(axis=0)
    top = mags.max(axis=0)
    freqs = np.flatnonzero(top >= delta)
    witnesses = {int(r): (int(best[r]) + 1, float(top[r])) for r in freqs}
    return Spectrum(delta, tuple(int(r) for r in freqs), witnesses)


def spectrum_size_report(spec: Spectrum, c2_3: float, k: int) -> LemmaReport:
    return LemmaReport.compare(
        "spectrum-size", len(spec), "<=", c2_3 * spec.delta**-3 * k,
        details={"delta": spec.delta, "c2_3": c2_3, "k": k})


def restriction_sum(a, rho: float, table: FourierTable | None = None) -> float:
    """``sum_r |a~(r)|^rho`` for rho > 2."""
    if rho <= 2:
        raise ValueError("rho must exceed 2")
    coeffs = (table or dft(a)).coefficients
    return math.fsum((np.abs(coeffs) ** rho).tolist())


@dataclass
class EmpiricalC2:
    """Running maxima of restriction sums, keyed by rho.

    Stands in for the restriction constant wherever an argument multiplies
    by it.
    """

    values: dict[float, float] = field(default_factory=dict)

    def observe(self, rho: float, value: float) -> None:
        self.values[rho] = max(self.values.get(rho, 0.0), value)

    def __getitem__(self, rho: float) -> float:
        return self.values[rho]

    def to_dict(self) -> dict[str, float]:
        return {repr(float(r)): v for r, v in sorted(self.values.items())}


def loglog_over_w(w: int) -> float:
    """``log log w / w``; NaN when undefined (w < 2)."""
    if w < 2:
        return math.nan
    return math.log(math.log(w)) / w


def sup_offzero_lambda(lam, w: int, table: FourierTable | None = None) -> tuple[float, LemmaReport]:
    """Largest |lambda~(r)| over r != 0, against 2 log log w / w."""
    coeffs = (table or dft(lam)).coefficients
    sup = float(np.abs(coeffs[1:]).max(initial=0.0))
    bound = 2 * loglog_over_w(w)
    return sup, LemmaReport.compare("lambda-sup-offzero", sup, "<=", bound,
                                    asymptotic=True, details={"w": w})
