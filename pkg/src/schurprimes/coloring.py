"""k-colorings of the primes up to n, or of the interval [1, n].

Colors are 1-based.  A coloring is stored as two aligned arrays, the sorted
domain elements and their colors, plus a dense lookup array indexed by the
element itself.

File format, one ``element color`` pair per line::

    k=2 domain=primes n=10
    # comment
    2 1
    3 1
    5 2
    7 2
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .primes import is_prime, sieve_primes


class ColoringError(ValueError):
    pass


class IncompleteColoringError(ColoringError):
    pass


class ColoringParseError(ColoringError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class DomainKind(enum.Enum):
    PRIMES = "primes"
    INTERVAL = "interval"


@dataclass(frozen=True)
class Domain:
    kind: DomainKind
    n: int

    @classmethod
    def primes(cls, n: int) -> "Domain":
        return cls(DomainKind.PRIMES, n)

    @classmethod
    def interval(cls, n: int) -> "Domain":
        return cls(DomainKind.INTERVAL, n)

    def elements(self) -> np.ndarray:
        if self.n < 1 or (self.kind is DomainKind.PRIMES and self.n < 2):
            return np.zeros(0, dtype=np.int64)
        if self.kind is DomainKind.INTERVAL:
            return np.arange(1, self.n + 1, dtype=np.int64)
        return sieve_primes(self.n).primes.copy()


class Coloring:
    """Total map from a finite domain to colors ``1..k``."""

    def __init__(self, k: int, domain: Domain, elements: np.ndarray, colors: np.ndarray):
        if k < 1:
            raise ColoringError("k must be >= 1")
        elements = np.asarray(elements, dtype=np.int64)
        colors = np.asarray(colors, dtype=np.int64)
        if elements.shape != colors.shape:
            raise ColoringError("elements and colors differ in length")
        if colors.size and (colors.min() < 1 or colors.max() > k):
            raise ColoringError(f"colors must lie in [1, {k}]")
        expected = domain.elements()
        if not np.array_equal(elements, expected):
            raise IncompleteColoringError(
                f"elements do not match the domain {domain.kind.value}<={domain.n}")
        self.k = k
        self.domain = domain
        self.elements = elements
        self.colors = colors
        self.elements.flags.writeable = False
        self.colors.flags.writeable = False
        table = np.zeros(domain.n + 1, dtype=np.int64)
        table[elements] = colors
        table.flags.writeable = False
        self._table = table

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def table(self) -> np.ndarray:
        """Dense lookup: ``table[x]`` is the color of x, or 0 outside the domain."""
        return self._table

    @property
    def unused_colors(self) -> frozenset[int]:
        return frozenset(range(1, self.k + 1)) - set(np.unique(self.colors).tolist())

    def color(self, x: int) -> int:
        if x < 0 or x > self.n or self._table[x] == 0:
            raise KeyError(f"{x} is not in the domain")
        return int(self._table[x])

    def __getitem__(self, x: int) -> int:
        return self.color(x)

    def classes(self) -> list[np.ndarray]:
        """Color classes in color order; ``classes()[i-1]`` holds color i."""
        return [self.elements[self.colors == i] for i in range(1, self.k + 1)]

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.elements.tolist(), self.colors.tolist()))

    def relabel(self, perm: Mapping[int, int]) -> "Coloring":
        lut = np.zeros(self.k + 1, dtype=np.int64)
        for old, new in perm.items():
            lut[old] = new
        return Coloring(self.k, self.domain, self.elements, lut[self.colors])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Coloring):
            return NotImplemented
        return (self.k == other.k and self.domain == other.domain
                and np.array_equal(self.colors, other.colors))

    def __hash__(self) -> int:
        return hash((self.k, self.domain, self.colors.tobytes()))

    def __repr__(self) -> str:
        return f"Coloring(k={self.k}, domain={self.domain.kind.value}<={self.n})"


def constant_coloring(domain: Domain, k: int = 1) -> Coloring:
    elements = domain.elements()
    return Coloring(k, domain, elements, np.ones_like(elements))


def residue_coloring(domain: Domain, m: int, class_to_color: Mapping[int, int],
                     k: int | None = None) -> Coloring:
    """Color x by ``class_to_color[x % m]``."""
    if m < 1:
        raise ColoringError("modulus must be >= 1")
    elements = domain.elements()
    residues = elements % m
    missing = sorted(set(np.unique(residues).tolist()) - {r % m for r in class_to_color})
    if missing:
        raise IncompleteColoringError(
            f"residues {missing} mod {m} occur in the domain but have no color")
    lut = np.zeros(m, dtype=np.int64)
    for r, c in class_to_color.items():
        lut[r % m] = c
    if k is None:
        k = max(class_to_color.values())
    return Coloring(k, domain, elements, lut[residues])


def random_coloring(domain: Domain, k: int, seed: int) -> Coloring:
    """Independent uniform colors from a seeded PCG64 stream, in element order."""
    if k < 1:
        raise ColoringError("k must be >= 1")
    elements = domain.elements()
    rng = np.random.Generator(np.random.PCG64(seed))
    colors = rng.integers(1, k + 1, size=elements.size, dtype=np.int64)
    return Coloring(k, domain, elements, colors)


def coloring_from_mapping(domain: Domain, assignment: Mapping[int, int],
                          k: int | None = None) -> Coloring:
    elements = domain.elements()
    try:
        colors = np.array([assignment[int(x)] for x in elements], dtype=np.int64)
    except KeyError as exc:
        raise IncompleteColoringError(f"element {exc.args[0]} has no color") from None
    extra = set(assignment) - set(elements.tolist())
    if extra:
        raise ColoringError(f"elements outside the domain: {sorted(extra)[:5]}")
    if k is None:
        k = int(colors.max()) if colors.size else 1
    return Coloring(k, domain, elements, colors)


_HEADER = re.compile(r"^k=(\d+)\s+domain=(primes|interval)\s+n=(\d+)$")


def load_coloring(path: str | Path) -> Coloring:
    """Parse a coloring file.

    Without a header line the domain is taken to be the primes up to the
    largest listed element and k the largest listed color.
    """
    header = None
    assignment: dict[int, int] = {}
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _HEADER.match(line)
        if m:
            if header is not None or assignment:
                raise ColoringParseError("header must come first", lineno)
            header = (int(m.group(1)), DomainKind(m.group(2)), int(m.group(3)))
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ColoringParseError(f"expected 'element color', got {raw!r}", lineno)
        try:
            x, c = int(parts[0]), int(parts[1])
        except ValueError:
            raise ColoringParseError(f"non-integer field in {raw!r}", lineno) from None
        if x in assignment:
            raise ColoringParseError(f"duplicate element {x}", lineno)
        if c < 1 or (header is not None and c > header[0]):
            raise ColoringParseError(f"color {c} out of range", lineno)
        if header is not None:
            _check_member(x, header[1], header[2], lineno)
        else:
            _check_member(x, DomainKind.PRIMES, x, lineno)
        assignment[x] = c
    if header is None:
        if not assignment:
            raise ColoringParseError("empty coloring file")
        k, kind, n = max(assignment.values()), DomainKind.PRIMES, max(assignment)
    else:
        k, kind, n = header
    return coloring_from_mapping(Domain(kind, n), assignment, k)


def _check_member(x: int, kind: DomainKind, n: int, lineno: int | None) -> None:
    if not 1 <= x <= n:
        raise ColoringParseError(f"element {x} outside [1, {n}]", lineno)
    if kind is DomainKind.PRIMES and not is_prime(x):
        raise ColoringParseError(f"element {x} is not prime", lineno)


def store_coloring(c: Coloring, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"k={c.k} domain={c.domain.kind.value} n={c.n}\n")
        for x, col in zip(c.elements.tolist(), c.colors.tolist()):
            fh.write(f"{x} {col}\n")
    return path
