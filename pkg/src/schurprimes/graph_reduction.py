"""Schur triples as monochromatic triangles of an edge-colored clique.

Vertices v_0..v_n, edge v_s v_t colored by c(t - s).  A triangle
v_r v_s v_t (r < s < t) is monochromatic iff (s-r, t-s, t-r) is a
monochromatic Schur triple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .coloring import Coloring
from .schur_count import color_array, schur_constants


@dataclass(frozen=True)
class EdgeColoredClique:
    n_vertices: int
    matrix: np.ndarray  # symmetric, diagonal 0, entries in 1..k

    def edge_color(self, s: int, t: int) -> int:
        if s == t:
            raise ValueError("no loops")
        return int(self.matrix[s, t])

    @property
    def k(self) -> int:
        return int(self.matrix.max(initial=0))

    def is_monochromatic(self, tri: tuple[int, int, int]) -> bool:
        a, b, c = tri
        m = self.matrix
        return len({a, b, c}) == 3 and m[a, b] == m[b, c] == m[a, c] != 0


def build_clique(c: Coloring | np.ndarray) -> EdgeColoredClique:
    colors = color_array(c)
    n = len(colors) - 1
    if n < 2:
        raise ValueError("need n >= 2")
    idx = np.arange(n + 1)
    diff = np.abs(idx[:, None] - idx[None, :])
    matrix = colors[diff]
    np.fill_diagonal(matrix, 0)
    # construction invariant
    s, t = np.triu_indices(n + 1, 1)
    if not np.array_equal(matrix[s, t], colors[t - s]):
        raise AssertionError("edge colors disagree with c(t - s)")
    return EdgeColoredClique(n + 1, matrix)


def clique_from_matrix(matrix: np.ndarray) -> EdgeColoredClique:
    matrix = np.asarray(matrix, dtype=np.int64)
    if not np.array_equal(matrix, matrix.T) or np.any(np.diag(matrix)):
        raise ValueError("edge color matrix must be symmetric with zero diagonal")
    return EdgeColoredClique(len(matrix), matrix)


def _neighbor_masks(matrix: np.ndarray, color: int) -> list[int]:
    packed = np.packbits(matrix == color, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def count_mono_triangles(g: EdgeColoredClique) -> dict[int, int]:
    """Exact per-color count of unordered monochromatic triangles.

    For each edge r < s of color c, counts the t > s adjacent to both in
    color c with bitset intersections.
    """
    V = g.n_vertices
    counts: dict[int, int] = {}
    for color in range(1, g.k + 1):
        masks = _neighbor_masks(g.matrix, color)
        total = 0
        for r in range(V):
            mr = masks[r]
            for s in range(r + 1, V):
                if (mr >> s) & 1:
                    total += (mr & masks[s] & (-1 << (s + 1))).bit_count()
        counts[color] = total
    return counts


def correspondence_count(c: Coloring | np.ndarray) -> int:
    """Sum over ordered monochromatic pairs (x, y), x + y <= n, of n + 1 - x - y.

    Each pair is one Schur triple (x, y, x + y); the weight counts its
    placements r, r + x, r + x + y inside {0..n}.
    """
    colors = color_array(c)
    n = len(colors) - 1
    total = 0
    for x in range(1, n):
        cx = colors[x]
        if cx == 0:
            continue
        y = np.arange(1, n - x + 1)
        hit = (colors[y] == cx) & (colors[x + y] == cx)
        total += int((n + 1 - x - y[hit]).sum())
    return total


@dataclass(frozen=True)
class TriangleExtraction:
    triangles: tuple[tuple[int, int, int], ...]
    bound: Fraction
    bound_vacuous: bool
    bound_met: bool
    branch: str


def triangle_bound(k: int, n_vertices: int) -> Fraction:
    return schur_constants(k).c1_prime * n_vertices**3


def extract_mono_triangles_pigeonhole(g: EdgeColoredClique, k: int | None = None) -> TriangleExtraction:
    """Run the pigeonhole induction on k as a search procedure.

    Every vertex s picks its majority color c_s and the neighborhood N_s in
    that color.  If N_s spans at most C1'(k-1) n^2 / (2 k^3) edges of color
    c_s (ties included), those edges are recolored and the search recurses
    on N_s with k - 1 colors; triangles using a recolored edge are dropped.
    Otherwise every vertex contributes the triangles {s, u, v} over the
    c_s-colored edges uv inside N_s.  Returned triangles are certified
    monochromatic in the original coloring.
    """
    k = g.k if k is None else k
    if k < 1:
        raise ValueError("k must be >= 1")
    V = g.n_vertices
    if V < 3 or math.ceil(V / k) < 2:
        raise ValueError("clique too small for the pigeonhole step")
    palette = tuple(range(1, k + 1))
    found, branch = _extract(g.matrix, np.arange(V), palette)
    tris = tuple(sorted(t for t in found if g.is_monochromatic(t)))
    if len(tris) != len(found):
        raise AssertionError("extraction produced a non-monochromatic triangle")
    bound = triangle_bound(k, V)
    return TriangleExtraction(tris, bound, bound < 1, len(tris) >= bound, branch)


def _extract(matrix: np.ndarray, verts: np.ndarray, palette: tuple[int, ...]
             ) -> tuple[set[tuple[int, int, int]], str]:
    """Triangles among ``verts`` whose edges in ``matrix`` share one color.

    ``matrix`` may carry recolored edges; the caller filters by the original.
    """
    sub = matrix[np.ix_(verts, verts)]
    m = len(verts)
    if len(palette) == 1 or m < 3:
        out = set()
        for a, b, c in combinations(range(m), 3):
            if sub[a, b] == sub[b, c] == sub[a, c]:
                out.add(tuple(sorted((int(verts[a]), int(verts[b]), int(verts[c])))))
        return out, "base"
    k = len(palette)
    threshold = schur_constants(k - 1).c1_prime / (2 * k**3) * m * m
    per_vertex = []
    for s in range(m):
        row = sub[s]
        counts = [(int(np.count_nonzero(row == col)), -col) for col in palette]
        _, neg = max(counts)
        cs = -neg
        nbrs = np.flatnonzero(row == cs)
        inner = sub[np.ix_(nbrs, nbrs)] == cs
        inner_edges = int(np.count_nonzero(np.triu(inner, 1)))
        if inner_edges <= threshold:
            rest = tuple(c for c in palette if c != cs)
            recolored = matrix.copy()
            block = recolored[np.ix_(verts[nbrs], verts[nbrs])]
            block[block == cs] = rest[0]
            recolored[np.ix_(verts[nbrs], verts[nbrs])] = block
            # restore the diagonal of the block
            recolored[verts[nbrs], verts[nbrs]] = 0
            found, _ = _extract(recolored, verts[nbrs], rest)
            original = [t for t in found
                        if matrix[t[0], t[1]] == matrix[t[1], t[2]] == matrix[t[0], t[2]]]
            return set(original), "recursion"
        per_vertex.append((s, cs, nbrs, inner))
    out = set()
    for s, cs, nbrs, inner in per_vertex:
        us, vs = np.nonzero(np.triu(inner, 1))
        for u, v in zip(nbrs[us].tolist(), nbrs[vs].tolist()):
            out.add(tuple(sorted((int(verts[s]), int(verts[u]), int(verts[v])))))
    return out, "star"
