"""Prime tables, primality, and the W-trick parameter chain."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

import numpy as np

from .report import LemmaReport

INT64_MAX = (1 << 63) - 1

# Deterministic for every n < 3.3 * 10**24, which covers all 64-bit inputs.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class ParameterError(ValueError):
    """Raised when W-trick parameters cannot be realized."""


class InvalidResidueError(ValueError):
    pass


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for 0 <= n < 2**64."""
    if n < 2:
        return False
    if n >= 1 << 64:
        raise ValueError("n exceeds the 64-bit range")
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _sieve_mask(limit: int) -> np.ndarray:
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    mask[4::2] = False
    for p in range(3, isqrt(limit) + 1, 2):
        if mask[p]:
            mask[p * p::2 * p] = False
    return mask


class PrimeTable:
    """All primes up to ``limit``, with O(1) membership."""

    def __init__(self, limit: int, mask: np.ndarray):
        self.limit = int(limit)
        self._mask = mask
        self._mask.flags.writeable = False
        self.primes = np.flatnonzero(mask).astype(np.int64)
        self.primes.flags.writeable = False

    @property
    def mask(self) -> np.ndarray:
        """Boolean array of length ``limit + 1``; ``mask[m]`` iff m is prime."""
        return self._mask

    def __contains__(self, m: object) -> bool:
        m = int(m)  # type: ignore[arg-type]
        if m < 0 or m > self.limit:
            raise ValueError(f"{m} outside table range [0, {self.limit}]")
        return bool(self._mask[m])

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes.tolist())

    def __repr__(self) -> str:
        return f"PrimeTable(limit={self.limit}, count={len(self)})"


def sieve_primes(limit: int) -> PrimeTable:
    """Sieve of Eratosthenes up to and including ``limit``."""
    if limit < 2:
        raise ValueError(f"empty range: no primes <= {limit}")
    return PrimeTable(limit, _sieve_mask(int(limit)))


def factorize(m: int) -> dict[int, int]:
    factors: dict[int, int] = {}
    d = 2
    while d * d <= m:
        while m % d == 0:
            factors[d] = factors.get(d, 0) + 1
            m //= d
        d += 1 if d == 2 else 2
    if m > 1:
        factors[m] = factors.get(m, 0) + 1
    return factors


def euler_phi(m: int) -> int:
    if m < 1:
        raise ValueError("euler_phi needs m >= 1")
    result = m
    for p in factorize(m):
        result -= result // p
    return result


def primorial(w: int) -> int:
    """Product of all primes <= w (1 when w < 2)."""
    W = 1
    for p in range(2, w + 1):
        if is_prime(p):
            W *= p
    return W


def as_fraction(value: float | Fraction | int) -> Fraction:
    """Exact rational for a user-facing real, read through its shortest repr.

    ``0.1`` becomes ``1/10`` rather than the binary double, so interval
    endpoints such as ``(2 + kappa) * M`` land where a reader expects.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(repr(float(value)))


@dataclass(frozen=True)
class WTrickParams:
    n: int
    w: int
    W: int
    M: int
    N: int
    kappa: float
    phiW: int

    @property
    def interval(self) -> tuple[Fraction, Fraction]:
        """The closed interval ``[(2+kappa)M, (2+2kappa)M]`` that contains N."""
        k = as_fraction(self.kappa)
        return (2 + k) * self.M, (2 + 2 * k) * self.M


def theoretical_w(n: int) -> int:
    """The slowly growing default ``floor(log(log(n)) / 4)``.

    It is at most 1 for every n a desk machine can handle, so callers
    normally pass ``w`` explicitly.
    """
    if n < 3:
        return 0
    return math.floor(math.log(math.log(n)) / 4)


def theoretical_kappa(k: int, c1: Fraction | float) -> float:
    """``C1(k) / (10000 k)``; astronomically small for the provable C1(k)."""
    return float(Fraction(c1) / (10000 * k)) if isinstance(c1, Fraction) else c1 / (10000 * k)


def build_w_trick(n: int, w: int, kappa: float) -> WTrickParams:
    """Choose W, M = floor(n/W) and the smallest prime N in the kappa-window."""
    if not 0 < kappa < 0.5:
        raise ParameterError(f"kappa must lie in (0, 1/2), got {kappa}")
    if n < 1 or w < 0:
        raise ParameterError("n must be positive and w non-negative")
    W = primorial(w)
    if W > n:
        raise ParameterError(f"W = {W} (primes <= {w}) exceeds n = {n}")
    M = n // W
    lo, hi = WTrickParams(n, w, W, M, 0, kappa, 0).interval
    N = next((m for m in range(math.ceil(lo), math.floor(hi) + 1) if is_prime(m)), None)
    if N is None:
        raise ParameterError(
            f"no prime in [{float(lo)}, {float(hi)}]; increase n or decrease kappa")
    return WTrickParams(n=n, w=w, W=W, M=M, N=N, kappa=kappa, phiW=euler_phi(W))


def _check_residue(W: int, b: int) -> None:
    if gcd(b, W) != 1:
        raise InvalidResidueError(f"gcd({b}, {W}) = {gcd(b, W)} != 1")


def residue_class_elements(pt: PrimeTable, params: WTrickParams, b: int) -> frozenset[int]:
    """``{1 <= x <= M : W x + b prime}``; with b = 1 this is the set A_0."""
    _check_residue(params.W, b)
    top = params.W * params.M + b
    if top > INT64_MAX:
        raise ParameterError("W*M + b overflows 64 bits")
    if pt.limit < top:
        raise ValueError(f"prime table limit {pt.limit} < W*M + b = {top}")
    x = np.arange(1, params.M + 1, dtype=np.int64)
    hits = x[pt.mask[params.W * x + b]]
    return frozenset(hits.tolist())


def siegel_walfisz_mass(pt: PrimeTable, params: WTrickParams, b: int) -> tuple[float, LemmaReport]:
    """Sum of log p over primes p <= n with p = b (mod W).

    The accompanying report compares against ``(1 - kappa) n / phi(W)``; this
    holds only for n large enough, so a failure is informational.
    """
    _check_residue(params.W, b)
    if pt.limit < params.n:
        raise ValueError(f"prime table limit {pt.limit} < n = {params.n}")
    ps = pt.primes[pt.primes <= params.n]
    ps = ps[ps % params.W == b % params.W]
    mass = math.fsum(np.log(ps.astype(np.float64)).tolist())
    bound = (1 - params.kappa) * params.n / params.phiW
    report = LemmaReport.compare(
        "siegel-walfisz-mass", mass, ">=", bound, asymptotic=True,
        details={"n": params.n, "W": params.W, "b": b, "primes_in_class": len(ps)})
    return mass, report
