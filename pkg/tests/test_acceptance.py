"""Acceptance criteria, one test per criterion, at the stated tolerances.

A summary line per criterion is printed at the end of every pytest run.
"""

import json
import math
import time

import numpy as np
import pytest

from conftest import trial_division_is_prime
from schurprimes.bohr_transfer import (
    beta_lemma,
    bohr_size_lemma,
    build_bohr_set,
    pigeonhole_box_witness,
    triple_sum,
)
from schurprimes.coloring import Domain, constant_coloring, residue_coloring
from schurprimes.fourier import dft
from schurprimes.graph_reduction import build_clique, count_mono_triangles
from schurprimes.report import emit_report
from schurprimes.schur_count import count_schur_triples, count_schur_triples_fft
from schurprimes.solver import (
    RunConfig,
    conjecture_report,
    count_witnesses,
    make_coloring,
    pipeline_report,
    run_pipeline,
    search_report,
    search_witnesses,
)

criterion = pytest.mark.criterion

PIPELINE_SUITE = {
    "k1-golden": RunConfig(n=200000, w=3, k=1, kappa=0.1, delta=0.05, epsilon=0.1),
    "k2-mod4": RunConfig(n=100000, w=2, k=2, coloring_spec="residue:4:1=1,3=2,2=1"),
    "k3-random": RunConfig(n=100000, w=3, k=3, coloring_spec="random:7"),
    "k2-random-rz": RunConfig(n=50000, w=2, k=2, coloring_spec="random:11", c1_variant="rz-claim",
                              delta=0.1, epsilon=0.2),
}

BOHR_GRID_N = (113, 1009, 10007)
BOHR_GRID_EPS = (0.05, 0.1, 0.2)
BOHR_GRID_KAPPA = (0.1, 0.25)


@pytest.fixture(scope="module")
def pipeline_runs():
    return {name: run_pipeline(cfg) for name, cfg in PIPELINE_SUITE.items()}


def bohr_grid():
    """Every (N, eps, kappa) with frequency sets of size 0..4, three draws each."""
    rng = np.random.default_rng(4)
    for N in BOHR_GRID_N:
        for eps in BOHR_GRID_EPS:
            for kappa in BOHR_GRID_KAPPA:
                for size in range(5):
                    for _ in range(3):
                        yield N, eps, kappa, tuple(rng.integers(0, N, size).tolist())


@criterion(1, "FFT Schur-triple counts equal brute force on 200 seeded colorings")
def test_oracle_equivalence():
    t0 = time.perf_counter()
    cases = [(n, k) for n in (64, 1000, 4096) for k in (1, 2, 3, 5)]
    mismatches = []
    for seed in range(200):
        n, k = cases[seed % len(cases)]
        colors = np.random.default_rng(seed).integers(1, k + 1, n + 1)
        colors[0] = 0
        brute, fast = count_schur_triples(colors, k), count_schur_triples_fft(colors, k)
        if brute.per_color != fast.per_color or brute.degenerate != fast.degenerate:
            mismatches.append((seed, n, k))
    elapsed = time.perf_counter() - t0
    assert mismatches == []
    assert elapsed < 60


@criterion(2, "k = 1 triple count equals n(n-1)/2 for every n <= 10^4")
def test_closed_form():
    def full(n):
        colors = np.ones(n + 1, dtype=np.int64)
        colors[0] = 0
        return colors

    bad = [n for n in range(1, 10**4 + 1)
           if count_schur_triples_fft(full(n), 1).total != n * (n - 1) // 2]
    assert bad == []
    for n in (1, 2, 17, 500, 4096):
        assert count_schur_triples(full(n), 1).total == n * (n - 1) // 2


@criterion(3, "triangle count of the clique equals the weighted pair sum on 100 colorings")
def test_correspondence_identity():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(2, 257))
        k = int(rng.integers(1, 5))
        colors = rng.integers(1, k + 1, n + 1)
        colors[0] = 0
        triangles = sum(count_mono_triangles(build_clique(colors)).values())
        weighted = sum(n + 1 - x - y
                       for x in range(1, n) for y in range(1, n - x + 1)
                       if colors[x] == colors[y] == colors[x + y])
        assert triangles == weighted
        assert triangles <= n * count_schur_triples(colors, k).total


@criterion(4, "Bohr size bound and box translation hold across the grid")
def test_bohr_lemma_grid():
    failures = []
    instances = 0
    for N, eps, kappa, R in bohr_grid():
        b = build_bohr_set(R, kappa, eps, N)
        box = pigeonhole_box_witness(R, kappa, eps, N, b)
        shifted = (box.elements - box.x0) % N
        elementwise = all(int(x) in b for x in shifted)
        instances += 1
        if not (bohr_size_lemma(b).passed and box.verified and elementwise):
            failures.append((N, eps, kappa, R))
    assert instances == len(BOHR_GRID_N) * len(BOHR_GRID_EPS) * len(BOHR_GRID_KAPPA) * 15
    assert failures == []


@criterion(5, "beta transform bounds 64 eps^2 and 384 eps^2 across the grid")
def test_beta_lemma_grid():
    failures = []
    for N, eps, kappa, R in bohr_grid():
        b = build_bohr_set(R, kappa, eps, N)
        F = dft(b.beta).coefficients
        for r in R:
            br, bm = F[r % N], F[(-r) % N]
            if abs(1 - br) > 64 * eps**2 or abs(1 - br**4 * bm**2) > 384 * eps**2:
                failures.append((N, eps, kappa, R, r))
        reps = beta_lemma(b)
        if not all(rep.passed for rep in reps[:2]):
            failures.append((N, eps, kappa, R, "report"))
    assert failures == []


@criterion(6, "Parseval and two-route triple sums agree within 1e-9 relative")
def test_fourier_identities():
    rng = np.random.default_rng(6)
    for N in (113, 1009, 2039, 2053, 10007):
        for _ in range(3):
            x = rng.standard_normal(N)
            X = dft(x).coefficients
            energy = math.fsum((x * x).tolist())
            assert abs(math.fsum((np.abs(X) ** 2).tolist()) / N - energy) <= 1e-9 * energy
            f1, f2, f3 = rng.random(N), rng.random(N), rng.random(N)
            t = triple_sum(f1, f2, f3, direct=True)
            assert abs(t.fourier - t.direct) <= 1e-9 * abs(t.direct)


@criterion(7, "search finds distinct witnesses at n = 10^6 for k = 1 and the mod-4 coloring")
def test_end_to_end_search():
    t0 = time.perf_counter()
    dom = Domain.primes(10**6)
    pinned = {
        "k1": (constant_coloring(dom, 1), (3, 5, 7, 1)),
        "mod4": (residue_coloring(dom, 4, {1: 1, 3: 2, 2: 1}), (5, 13, 17, 1)),
    }
    for name, (coloring, first) in pinned.items():
        found = search_witnesses(None, coloring, limit=1, distinct_only=True)
        assert found, name
        w = found[0]
        assert (w.p1, w.p2, w.p3, w.color) == first
        assert w.p1 + w.p2 == w.p3 + 1 and len({w.p1, w.p2, w.p3}) == 3
        assert all(trial_division_is_prime(p) for p in (w.p1, w.p2, w.p3))
        assert count_witnesses(coloring).distinct > 0
    assert time.perf_counter() - t0 < 30


@criterion(8, "every Z_N solution lifts to a certified integer witness")
def test_lifting_soundness(pipeline_runs):
    for name, res in pipeline_runs.items():
        assert res.lifting_failures == 0, name
        assert res.lifted_count == res.search_count_restricted > 0, name
        coloring = make_coloring(res.config.coloring_spec,
                                 Domain.primes(res.params.W * res.params.M + 1), res.config.k)
        for w in res.lifted:
            assert all(trial_division_is_prime(p) for p in (w.p1, w.p2, w.p3)), name
            assert w.p1 + w.p2 == w.p3 + 1
            assert coloring.color(w.p1) == coloring.color(w.p2) == coloring.color(w.p3) == w.color
            assert all(p % res.params.W == 1 for p in (w.p1, w.p2, w.p3))


@criterion(9, "smoothing keeps mass and support; the dense model partitions A_0'")
def test_smoothing_contracts(pipeline_runs):
    for name, res in pipeline_runs.items():
        t = res.transfer
        k = len(t.partition)
        for label in ["a0", *(f"a{i}" for i in range(1, k + 1))]:
            mass = t.lemma(f"smoothing-mass-{label}")
            assert mass.passed and mass.measured <= 1e-9, (name, label)
            assert t.lemma(f"smoothing-support-{label}").passed, (name, label)
        parts = [set(p.tolist()) for p in t.partition]
        assert sum(map(len, parts)) == len(t.A0prime)
        assert set().union(*parts) == set(t.A0prime.tolist())
        assert t.lemma("dense-partition-floor").passed, name


@criterion(10, "identical configurations give byte-identical JSON reports")
def test_determinism(tmp_path):
    cfg = PIPELINE_SUITE["k3-random"]
    blobs = []
    for i in range(2):
        path = emit_report(pipeline_report(run_pipeline(cfg)), tmp_path / f"p{i}.json")
        blobs.append(path.read_bytes())
    assert blobs[0] == blobs[1]
    search_cfg = RunConfig(n=10**5, k=2, coloring_spec="random:3")
    dom = Domain.primes(search_cfg.n)
    reports = [json.dumps(search_report(search_cfg, make_coloring("random:3", dom, 2)),
                          sort_keys=True) for _ in range(2)]
    assert reports[0] == reports[1]
    reports = [json.dumps(conjecture_report(search_cfg, make_coloring("random:3", dom, 2)),
                          sort_keys=True) for _ in range(2)]
    assert reports[0] == reports[1]


@criterion(11, "asymptotic comparisons are present with numeric margins in every report")
def test_asymptotic_margins_logged(pipeline_runs):
    required = ("lambda-sup-offzero", "lambda-mass-vs-(1-kappa)M/N", "upper-hypothesis",
                "upper-conclusion", "siegel-walfisz-mass", "difference")
    for name, res in pipeline_runs.items():
        entries = {r["name"]: r for r in pipeline_report(res)["lemma_reports"]}
        for lemma in required:
            assert lemma in entries, (name, lemma)
            margin = entries[lemma]["margin"]
            assert isinstance(margin, float) and math.isfinite(margin), (name, lemma, margin)
