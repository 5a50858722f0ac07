import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schurprimes.coloring import Domain, coloring_from_mapping, constant_coloring, random_coloring, residue_coloring
from schurprimes.primes import sieve_primes
from schurprimes.solver import (
    REQUIRED_LEMMAS,
    RunConfig,
    StageError,
    Witness,
    conjecture_iter_l3,
    count_witnesses,
    make_coloring,
    pipeline_report,
    run_pipeline,
    search_witnesses,
)

MOD4 = {1: 1, 3: 2, 2: 1}


def hash_set_witnesses(c):
    """Independent oracle: dict lookups over every prime pair."""
    color = c if isinstance(c, dict) else c.as_dict()
    ps = sorted(color)
    out = set()
    for i, p1 in enumerate(ps):
        for p2 in ps[i:]:
            p3 = p1 + p2 - 1
            if p3 in color and color[p1] == color[p2] == color[p3]:
                out.add((p1, p2, p3, color[p1]))
    return out


def as_tuples(wits):
    return {(w.p1, w.p2, w.p3, w.color) for w in wits}


def test_k1_n10_examples():
    wits = search_witnesses(None, constant_coloring(Domain.primes(10), 1))
    table = {(w.p1, w.p2, w.p3): w.distinct for w in wits}
    assert table[(2, 2, 3)] is False
    assert table[(3, 5, 7)] is True


def test_split_colors_drop_witness():
    c = coloring_from_mapping(Domain.primes(10), {2: 1, 3: 1, 5: 2, 7: 1})
    assert (3, 5, 7) not in {(w.p1, w.p2, w.p3) for w in search_witnesses(None, c)}


def test_witness_validation():
    with pytest.raises(ValueError):
        Witness(7, 3, 4, 1, True)
    with pytest.raises(ValueError):
        Witness(7, 5, 3, 1, True)
    with pytest.raises(ValueError):
        Witness(3, 2, 2, 1, True)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 3000), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_search_matches_hash_set_oracle(n, k, seed):
    c = random_coloring(Domain.primes(n), k, seed)
    wits = search_witnesses(None, c)
    assert as_tuples(wits) == hash_set_witnesses(c)
    assert wits == sorted(wits)
    cnt = count_witnesses(c)
    assert cnt.total == len(wits)
    assert cnt.distinct == sum(w.distinct for w in wits)
    assert list(cnt.per_color) == [sum(w.color == i for w in wits) for i in range(1, c.k + 1)]


@settings(max_examples=20, deadline=None)
@given(st.integers(3, 2000), st.integers(0, 2**32 - 1))
def test_relabeling_preserves_witness_multiset(n, seed):
    c = random_coloring(Domain.primes(n), 3, seed)
    perm = {1: 3, 2: 1, 3: 2}
    d = c.relabel(perm)
    a = {(p1, p2, p3) for p1, p2, p3, _ in hash_set_witnesses(c)}
    b = {(p1, p2, p3) for p1, p2, p3, _ in hash_set_witnesses(d)}
    assert a == b == {(w.p1, w.p2, w.p3) for w in search_witnesses(None, d)}


def test_mod4_first_distinct_witness():
    c = residue_coloring(Domain.primes(10**5), 4, MOD4)
    first = search_witnesses(None, c, limit=1, distinct_only=True)[0]
    assert (first.p1, first.p2, first.p3, first.color) == (5, 13, 17, 1)
    # p1 + p2 = p3 + 1 forces p1 + p2 = 2 mod 4 for odd primes in class 3 mod 4 only
    assert count_witnesses(c).per_color[1] == 0


def test_conjecture_examples():
    quads = set(conjecture_iter_l3(None, constant_coloring(Domain.primes(100), 1)))
    assert (3, 3, 5, 7) in quads and (7, 5, 11, 17) in quads


def _conjecture_oracle(c):
    color = c.as_dict()
    out = 0
    for p0, col in color.items():
        d = p0 - 1
        for p1 in color:
            if color[p1] == col and color.get(p1 + d) == col and color.get(p1 + 2 * d) == col:
                out += 1
    return out


def test_conjecture_count_pinned():
    c = random_coloring(Domain.primes(10**4), 2, 1)
    quads = list(conjecture_iter_l3(None, c))
    assert len(quads) == _conjecture_oracle(c) == 3223


def test_make_coloring_specs(tmp_path):
    dom = Domain.primes(50)
    assert make_coloring("const", dom, 1).k == 1
    assert make_coloring("random:3", dom, 2) == random_coloring(dom, 2, 3)
    r = make_coloring("residue:4:1=1,3=2,2=1", dom, 1)
    assert r.k == 2 and r.color(7) == 2 and r.color(13) == 1
    path = tmp_path / "c.txt"
    path.write_text("k=1 domain=primes n=20\n" + "".join(f"{p} 1\n" for p in sieve_primes(20)))
    with pytest.raises(ValueError):
        make_coloring(str(path), dom, 1)


@pytest.fixture(scope="module")
def small_run():
    return run_pipeline(RunConfig(n=20000, w=2, k=2, coloring_spec="random:5"))


def test_pipeline_small_run(small_run):
    res = small_run
    p = res.params
    assert 2 * p.M < p.N
    assert res.lifting_failures == 0
    assert res.lifted_count == res.search_count_restricted > 0
    names = {r.name for r in res.transfer.reports}
    assert REQUIRED_LEMMAS <= names
    for name in ("smoothing-mass-a0", "smoothing-support-a1", "smoothing-support-a2",
                 "dense-partition-floor", "bohr-size", "beta-first-order",
                 "upper-intermediate", "lifting-cross-check", "positivity-exact-count"):
        assert res.transfer.lemma(name).passed, name


def test_lifted_witnesses_within_search(small_run):
    res = small_run
    W = res.params.W
    c = make_coloring("random:5", Domain.primes(W * res.params.M + 1), 2)
    restricted = {p: col for p, col in c.as_dict().items() if p % W == 1}
    oracle = hash_set_witnesses(restricted)
    assert as_tuples(res.lifted) <= oracle
    assert len(res.lifted) == min(len(oracle), res.config.max_witnesses)
    assert res.lifted == sorted(res.lifted)


def test_pipeline_report_shape(small_run):
    rep = pipeline_report(small_run)
    assert rep["timings"] is None
    assert rep["witness_summary"]["lifting_failures"] == 0
    assert rep["dense_model"]["A0prime"] == sum(rep["dense_model"]["partition"])


def test_pipeline_stage_errors():
    with pytest.raises(StageError) as err:
        run_pipeline(RunConfig(n=50, w=3))
    assert err.value.stage == "primes"
    with pytest.raises(StageError) as err:
        run_pipeline(RunConfig(n=5000, coloring_spec="/nonexistent/file"))
    assert err.value.stage == "coloring"


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(n=100, kappa=0.7).validate()
    with pytest.raises(ValueError):
        RunConfig(n=100, c1_variant="other").validate()
