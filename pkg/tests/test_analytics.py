import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ustash.analytics import (RequestSet, SourceCounts, entropy_cdf, jaccard,
                              load_request_sets, similarity_matrix,
                              source_counts_by_content, source_entropy,
                              write_entropy_cdf_csv, write_similarity_csv)

ids = st.sets(st.integers(0, 30), max_size=12)
counts = st.lists(st.integers(0, 50), min_size=1, max_size=8).filter(lambda c: sum(c) > 0)


# ---------------------------------------------------------------------------
# jaccard

def test_jaccard_identity():
    a = RequestSet.of("a", {"x", "y"})
    assert jaccard(a, a) == 1.0


def test_jaccard_disjoint():
    assert jaccard(RequestSet.of("a", {"a", "b"}), RequestSet.of("b", {"c", "d"})) == 0.0


def test_jaccard_hand_count():
    a = RequestSet.of("a", {"a", "b", "c"})
    b = RequestSet.of("b", {"b", "c", "d"})
    assert jaccard(a, b) == pytest.approx(0.5)


def test_jaccard_empty_sets_warn():
    with pytest.warns(UserWarning):
        assert jaccard(RequestSet.of("a", set()), RequestSet.of("b", set())) == 1.0


@settings(settings.get_profile("invariants"))
@given(a=ids, b=ids)
def test_jaccard_axioms(a, b):
    ra, rb = RequestSet.of("a", a), RequestSet.of("b", b)
    if not (a | b):
        return
    v = jaccard(ra, rb)
    assert 0.0 <= v <= 1.0
    assert v == jaccard(rb, ra)
    if a:
        assert jaccard(ra, ra) == 1.0


# ---------------------------------------------------------------------------
# source_entropy

def test_entropy_single_source():
    assert source_entropy(SourceCounts((10, 0, 0), 3)) == 0.0


def test_entropy_uniform():
    assert source_entropy(SourceCounts((5, 5, 5, 5), 4)) == pytest.approx(1.0)


def test_entropy_hand_value():
    # -(0.75 ln 0.75 + 0.25 ln 0.25) / ln 2
    expected = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25)) / math.log(2)
    assert source_entropy(SourceCounts((3, 1), 2)) == pytest.approx(expected)
    assert expected == pytest.approx(0.8113, abs=1e-4)


def test_entropy_single_declared_source():
    assert source_entropy(SourceCounts((7,), 1)) == 0.0


def test_entropy_declared_vs_observed():
    # spread over 2 of 4 declared sources is not maximal entropy
    declared = source_entropy(SourceCounts((5, 5), 4))
    observed = source_entropy(SourceCounts.observed((5, 5)))
    assert observed == pytest.approx(1.0)
    assert declared == pytest.approx(math.log(2) / math.log(4))


def test_source_counts_validation():
    with pytest.raises(ValueError):
        SourceCounts((0, 0), 2)
    with pytest.raises(ValueError):
        SourceCounts((1, -1), 2)
    with pytest.raises(ValueError):
        SourceCounts((1,), 0)


@settings(settings.get_profile("invariants"))
@given(c=counts)
def test_entropy_axioms(c):
    n = len(c)
    base = source_entropy(SourceCounts(tuple(c), n))
    assert 0.0 <= base <= 1.0 + 1e-12
    # permutation invariance
    assert source_entropy(SourceCounts(tuple(reversed(c)), n)) == pytest.approx(base)
    # scaling invariance
    assert source_entropy(SourceCounts(tuple(7 * v for v in c), n)) == pytest.approx(base)


# ---------------------------------------------------------------------------
# similarity_matrix

def test_matrix_identical_groups():
    g = [RequestSet.of("a", {1, 2}), RequestSet.of("b", {1, 2})]
    assert np.allclose(similarity_matrix(g), 1.0)


def test_matrix_disjoint_groups():
    g = [RequestSet.of("a", {1}), RequestSet.of("b", {2})]
    mat = similarity_matrix(g)
    assert mat[0, 1] == mat[1, 0] == 0.0
    assert mat[0, 0] == mat[1, 1] == 1.0


def test_matrix_hand_computed():
    g = [RequestSet.of("a", {1, 2, 3}), RequestSet.of("b", {2, 3, 4}),
         RequestSet.of("c", {3, 4, 5, 6})]
    mat = similarity_matrix(g)
    assert mat[0, 1] == pytest.approx(2 / 4)
    assert mat[0, 2] == pytest.approx(1 / 6)
    assert mat[1, 2] == pytest.approx(2 / 5)


def test_matrix_needs_two_groups():
    with pytest.raises(ValueError):
        similarity_matrix([RequestSet.of("a", {1})])


@given(groups=st.lists(ids.filter(bool), min_size=2, max_size=5))
def test_matrix_matches_pairwise_jaccard(groups):
    sets = [RequestSet.of(str(i), g) for i, g in enumerate(groups)]
    mat = similarity_matrix(sets)
    for i in range(len(sets)):
        for j in range(len(sets)):
            assert mat[i, j] == pytest.approx(jaccard(sets[i], sets[j]))


# ---------------------------------------------------------------------------
# entropy_cdf

def test_cdf_all_single_source():
    cdf = entropy_cdf([SourceCounts((5, 0), 2) for _ in range(4)])
    assert cdf == [(0.0, 1.0)]


def test_cdf_all_uniform():
    cdf = entropy_cdf([SourceCounts((2, 2, 2), 3) for _ in range(3)])
    assert len(cdf) == 1
    assert cdf[0][0] == pytest.approx(1.0) and cdf[0][1] == 1.0


def test_cdf_matches_sorted_fraction_oracle(rng):
    collection = [
        SourceCounts(tuple(int(v) for v in rng.integers(0, 9, size=4) + [1, 0, 0, 0][:4]), 4)
        for _ in range(40)
    ]
    collection = [sc for sc in collection if sum(sc.counts) > 0]
    cdf = dict(entropy_cdf(collection))
    values = sorted(source_entropy(sc) for sc in collection)
    for v, frac in cdf.items():
        oracle = sum(1 for w in values if w <= v) / len(values)
        assert frac == pytest.approx(oracle)
    fracs = [f for _, f in sorted(cdf.items())]
    assert fracs == sorted(fracs) and fracs[-1] == 1.0


def test_cdf_empty_collection():
    with pytest.raises(ValueError):
        entropy_cdf([])


# ---------------------------------------------------------------------------
# CSV interfaces

def _write_requests(path):
    path.write_text(
        "label,content_id\n"
        "bus1,a\nbus1,b\nbus1,a\n"
        "bus2,b\nbus2,c\n"
        "bus3,a\n"
    )


def test_load_request_sets(tmp_path):
    path = tmp_path / "req.csv"
    _write_requests(path)
    groups = load_request_sets(path)
    assert [g.label for g in groups] == ["bus1", "bus2", "bus3"]
    assert groups[0].ids == frozenset({"a", "b"})


def test_load_request_sets_bad_header(tmp_path):
    path = tmp_path / "req.csv"
    path.write_text("foo,bar\nx,y\n")
    with pytest.raises(ValueError):
        load_request_sets(path)


def test_source_counts_by_content(tmp_path):
    path = tmp_path / "req.csv"
    _write_requests(path)
    by_content = source_counts_by_content(path)
    assert by_content["a"].n == 3
    assert sorted(by_content["a"].counts) == [1, 2]
    assert by_content["c"].counts == (1,)


def test_csv_writers_roundtrip(tmp_path):
    groups = [RequestSet.of("a", {1, 2}), RequestSet.of("b", {2, 3})]
    mat = similarity_matrix(groups)
    sim_path = tmp_path / "sim.csv"
    write_similarity_csv(sim_path, groups, mat)
    lines = sim_path.read_text().strip().splitlines()
    assert lines[0] == "label,a,b"
    assert lines[1].startswith("a,1,")

    cdf_path = tmp_path / "cdf.csv"
    write_entropy_cdf_csv(cdf_path, [(0.0, 0.5), (1.0, 1.0)])
    assert cdf_path.read_text().startswith("entropy,cumulative_fraction")
