"""Set-partition families: enumeration, counting, meets, chains, factors."""

import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qica.partitions import (
    Partition,
    PartitionError,
    baranyai_factorization,
    count_partitions,
    enumerate_partitions,
    is_qualitatively_independent,
    iter_labels,
    meet_cells,
    meet_value,
    stirling2,
    symmetric_chain_decomposition,
    symmetric_chain_masks,
    uniform_count,
    almost_uniform_count,
)


def brute_partitions(n: int, k: int) -> list[tuple[int, ...]]:
    """All normalized k-class label vectors, by direct filtering."""
    out = []
    for labs in itertools.product(range(k), repeat=n):
        if len(set(labs)) != k:
            continue
        seen: dict[int, int] = {}
        norm = []
        for x in labs:
            if x not in seen:
                seen[x] = len(seen)
            norm.append(seen[x])
        norm_t = tuple(norm)
        if norm_t == labs:
            out.append(norm_t)
    return out


# ---------------------------------------------------------------------------
# counting

def test_stirling_small_table():
    assert stirling2(0, 0) == 1
    assert stirling2(4, 2) == 7
    assert stirling2(5, 3) == 25
    assert stirling2(9, 3) == 3025
    assert stirling2(10, 10) == 1
    assert stirling2(3, 5) == 0


@pytest.mark.parametrize("n", range(2, 9))
@pytest.mark.parametrize("k", range(1, 5))
def test_counts_against_brute_force(n, k):
    if k > n:
        return
    all_parts = brute_partitions(n, k)
    assert count_partitions(n, k, "all") == len(all_parts)
    sizes = [tuple(sorted(labs.count(c) for c in range(k)))
             for labs in all_parts]
    if n % k == 0:
        want = sum(1 for s in sizes if set(s) == {n // k})
        assert count_partitions(n, k, "uniform") == want
    lo, hi = n // k, n // k + (1 if n % k else 0)
    want = sum(1 for s in sizes if all(lo <= x <= hi for x in s))
    assert count_partitions(n, k, "almost-uniform") == want
    for m in (2, 3):
        want = sum(1 for s in sizes if s[0] >= m)
        assert count_partitions(n, k, "min-class-size", min_size=m) == want


def test_closed_form_counts():
    assert uniform_count(9, 3) == 280
    assert uniform_count(12, 3) == 5775
    assert uniform_count(16, 4) == 2627625
    assert uniform_count(18, 3) == 2858856
    assert almost_uniform_count(5, 2) == 10


def test_bad_family_arguments():
    with pytest.raises(PartitionError):
        count_partitions(6, 3, "balanced")
    with pytest.raises(PartitionError):
        count_partitions(7, 3, "uniform")
    with pytest.raises(PartitionError):
        list(iter_labels(6, 3, "min-class-size"))
    with pytest.raises(PartitionError):
        count_partitions(3, 5, "all")


# ---------------------------------------------------------------------------
# enumeration order and membership

@pytest.mark.parametrize("n,k", [(6, 2), (6, 3), (7, 3), (8, 4)])
def test_iter_labels_is_sorted_normalized_complete(n, k):
    labs = list(iter_labels(n, k))
    assert labs == sorted(labs)
    assert len(labs) == len(set(labs)) == stirling2(n, k)
    assert [tuple(b) for b in labs] == brute_partitions(n, k)


def test_uniform_enumeration_class_sizes():
    for p in enumerate_partitions(8, 4, "uniform"):
        assert sorted(len(c) for c in p.classes) == [2, 2, 2, 2]
    got = sum(1 for _ in iter_labels(9, 3, "uniform"))
    assert got == 280


# ---------------------------------------------------------------------------
# Partition construction, parsing, formatting

def test_from_labels_normalizes_arbitrary_labels():
    p = Partition.from_labels([7, 7, 2, 9, 2, 9])
    q = Partition.from_labels([0, 0, 1, 2, 1, 2])
    assert p == q
    assert p.labels == bytes([0, 0, 1, 2, 1, 2])


def test_parse_format_round_trip():
    text = "1 2 5 | 3 4 | 6"
    p = Partition.parse(text)
    assert p.format() == text
    assert Partition.parse(p.format()) == p


def test_parse_rejects_bad_input():
    with pytest.raises(PartitionError):
        Partition.parse("1 2 | 2 3")
    with pytest.raises(PartitionError):
        Partition.parse("1 2 | 4")
    with pytest.raises(PartitionError):
        Partition.parse("")
    with pytest.raises(PartitionError):
        Partition.parse("1 2 | x 3")


@given(st.lists(st.integers(0, 5), min_size=1, max_size=12))
def test_from_labels_invariant_under_relabeling(labs):
    p = Partition.from_labels(labs)
    relabeled = [9 - x for x in labs]
    assert Partition.from_labels(relabeled) == p
    assert set().union(*p.classes) == set(range(len(labs)))


# ---------------------------------------------------------------------------
# meets and qualitative independence

def test_meet_cells_oracle():
    p = Partition.parse("1 2 3 | 4 5 6 | 7 8 9")
    q = Partition.parse("1 4 7 | 2 5 8 | 3 6 9")
    assert meet_cells(p, q) == ((1, 1, 1), (1, 1, 1), (1, 1, 1))
    assert meet_value(p, q) == 9
    assert is_qualitatively_independent(p, q)
    assert meet_value(p, p) == 3
    assert not is_qualitatively_independent(p, p)


@given(st.integers(2, 3), st.data())
@settings(max_examples=60)
def test_meet_symmetry_properties(k, data):
    n = data.draw(st.integers(k * 2, 8))
    labs_p = data.draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n)
                       .filter(lambda xs: len(set(xs)) == k))
    labs_q = data.draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n)
                       .filter(lambda xs: len(set(xs)) == k))
    p, q = Partition.from_labels(labs_p), Partition.from_labels(labs_q)
    # the meet table transposes under swapping arguments
    cells_pq = meet_cells(p, q)
    cells_qp = meet_cells(q, p)
    assert cells_pq == tuple(zip(*cells_qp))
    assert meet_value(p, q) == meet_value(q, p)
    assert is_qualitatively_independent(p, q) == \
        is_qualitatively_independent(q, p)
    assert sum(map(sum, cells_pq)) == n


# ---------------------------------------------------------------------------
# symmetric chain decomposition

@pytest.mark.parametrize("n", range(1, 11))
def test_chain_decomposition_invariants(n):
    chains = symmetric_chain_masks(n)
    seen = set()
    for chain in chains:
        sizes = [bin(m).count("1") for m in chain]
        # saturated: consecutive sizes step by one, and containment holds
        assert sizes == list(range(sizes[0], sizes[-1] + 1))
        # symmetric around the middle level
        assert sizes[0] + sizes[-1] == n
        for a, b in zip(chain, chain[1:]):
            assert a & b == a and a != b
        seen.update(chain)
    assert len(seen) == 2 ** n
    assert sum(len(c) for c in chains) == 2 ** n
    assert len(chains) == math.comb(n, n // 2)


def test_chain_decomposition_object():
    dec = symmetric_chain_decomposition(6)
    assert dec.n == 6
    assert len(dec.chains) == math.comb(6, 3)
    flat = [s for chain in dec.chains for s in chain]
    assert len(flat) == 64
    assert all(isinstance(s, frozenset) for s in flat)


# ---------------------------------------------------------------------------
# one-factorizations

@pytest.mark.parametrize("n,c", [(4, 2), (6, 2), (6, 3), (8, 2), (8, 4),
                                 (9, 3), (10, 2), (10, 5)])
def test_baranyai_covers_every_subset_once(n, c):
    fac = baranyai_factorization(n, c)
    assert len(fac.factors) == math.comb(n, c) * c // n
    seen = set()
    for p in fac.factors:
        assert all(len(cls) == c for cls in p.classes)
        for cls in p.classes:
            assert cls not in seen
            seen.add(cls)
    assert len(seen) == math.comb(n, c)


def test_baranyai_rejects_nondividing_class_size():
    with pytest.raises(PartitionError):
        baranyai_factorization(7, 3)
