"""Covering arrays: constructions, starter search, bounds, MOLS, text IO."""

import math

import numpy as np
import pytest

from qica.covering import (
    CoveringArray,
    CoveringError,
    LatinSquareSet,
    StarterVector,
    binary_can,
    block_recursive,
    ca_from_text,
    ca_to_mols,
    ca_to_text,
    construct_finite_field_ca,
    disjoint_columns,
    expand_starter,
    is_balanced,
    iterate_block_recursive,
    pbtc_max_rows,
    search_starter,
    size_bounds,
    starter_from_text,
    starter_to_text,
    strip_to_disjoint,
    tc_interval_from_pbtc,
    tc_log_lower,
    tc_quadratic_lower,
    verify,
    verify_starter,
    vt_clique_bound,
)
from fractions import Fraction

# Reference outcome of the exhaustive starter search on the full grid
# k = 3..6, k+1 <= r <= 2(k+1): (status, vector, candidates examined).
REFERENCE_GRID = {
    (3, 4): ("none", None, 8),
    (3, 5): ("found", (0, 1, 1, 1, 2), 2),
    (3, 6): ("found", (0, 1, 1, 1, 1, 2), 2),
    (3, 7): ("found", (0, 1, 1, 1, 1, 1, 2), 2),
    (3, 8): ("found", (0, 1, 1, 1, 1, 1, 1, 2), 2),
    (4, 5): ("found", (0, 1, 2, 2, 1), 13),
    (4, 6): ("found", (0, 1, 1, 2, 1, 2), 11),
    (4, 7): ("found", (0, 1, 1, 1, 2, 1, 2), 11),
    (4, 8): ("found", (0, 1, 1, 1, 1, 2, 1, 2), 11),
    (4, 9): ("found", (0, 1, 1, 1, 1, 1, 2, 1, 2), 11),
    (4, 10): ("found", (0, 1, 1, 1, 1, 1, 1, 2, 1, 2), 11),
    (5, 6): ("none", None, 1024),
    (5, 7): ("found", (0, 1, 1, 3, 2, 4, 1), 157),
    (5, 8): ("found", (0, 1, 1, 2, 2, 4, 1, 4), 372),
    (5, 9): ("found", (0, 1, 1, 1, 1, 1, 2, 4, 3), 31),
    (5, 10): ("found", (0, 1, 1, 1, 1, 1, 1, 2, 4, 3), 31),
    (5, 11): ("found", (0, 1, 1, 1, 1, 1, 1, 1, 2, 4, 3), 31),
    (5, 12): ("found", (0, 1, 1, 1, 1, 1, 1, 1, 1, 2, 4, 3), 31),
    (6, 7): ("none", None, 15625),
    (6, 8): ("none", None, 78125),
    (6, 9): ("found", (0, 1, 1, 2, 1, 1, 3, 5, 3), 3198),
    (6, 10): ("found", (0, 1, 1, 1, 1, 2, 4, 3, 1, 2), 1052),
    (6, 11): ("found", (0, 1, 1, 1, 1, 1, 2, 4, 3, 1, 2), 1052),
    (6, 12): ("found", (0, 1, 1, 1, 1, 1, 1, 2, 4, 3, 1, 2), 1052),
    (6, 13): ("found", (0, 1, 1, 1, 1, 1, 1, 1, 2, 3, 5, 3, 2), 987),
    (6, 14): ("found", (0, 1, 1, 1, 1, 1, 1, 1, 1, 2, 3, 5, 3, 2), 987),
}

# Reference expansion of the starter (0,1,1,1,2) over k = 3.
REFERENCE_CA_11_5_3 = np.array([
    [0, 0, 2, 1, 1, 1, 0, 1, 2, 2, 2],
    [0, 1, 0, 2, 1, 1, 2, 0, 1, 2, 2],
    [0, 1, 1, 0, 2, 1, 2, 2, 0, 1, 2],
    [0, 1, 1, 1, 0, 2, 2, 2, 2, 0, 1],
    [0, 2, 1, 1, 1, 0, 1, 2, 2, 2, 0],
])

REFERENCE_BINARY_CAN = [4, 4, 5, 6, 6, 6, 6, 6, 6, 7, 7, 7, 7, 7, 8, 8, 8, 8, 8]


def pair_counts(ca, i, j):
    k = ca.k
    rows = ca.entries.astype(np.int64)
    return np.bincount(k * rows[i] + rows[j], minlength=k * k)


# ---------------------------------------------------------------------------
# CoveringArray and verify

def test_covering_array_validation():
    with pytest.raises(CoveringError):
        CoveringArray(0, np.zeros((2, 2), dtype=int))
    with pytest.raises(CoveringError):
        CoveringArray(2, np.array([0, 1]))
    with pytest.raises(CoveringError):
        CoveringArray(2, np.zeros((2, 0), dtype=int))
    with pytest.raises(CoveringError):
        CoveringArray(2, np.array([[0, 2], [1, 0]]))
    ca = CoveringArray(3, [[0, 1], [2, 0]])
    assert (ca.r, ca.n) == (2, 2)
    assert not ca.entries.flags.writeable


def test_verify_reports_exact_misses():
    ca = construct_finite_field_ca(3)
    assert verify(ca).valid
    tampered = ca.entries.copy()
    tampered[2, 0] = (tampered[2, 0] + 1) % 3
    rep = verify(CoveringArray(3, tampered))
    assert not rep.valid
    assert rep.misses
    broken = CoveringArray(3, tampered)
    for (i, j), (a, b) in rep.misses:
        assert i < j
        assert pair_counts(broken, i, j)[3 * a + b] == 0


def test_verify_lists_every_miss():
    # Two constant rows miss all pairs but (0,0).
    ca = CoveringArray(2, np.zeros((2, 5), dtype=int))
    rep = verify(ca)
    assert rep.misses == (((0, 1), (0, 1)), ((0, 1), (1, 0)), ((0, 1), (1, 1)))


# ---------------------------------------------------------------------------
# finite-field construction and MOLS

@pytest.mark.parametrize("k", [2, 3, 4, 5, 7, 8, 9])
def test_finite_field_ca_is_orthogonal(k):
    ca = construct_finite_field_ca(k)
    assert (ca.n, ca.r, ca.k) == (k * k, k + 1, k)
    assert verify(ca).valid
    assert is_balanced(ca)
    for i in range(ca.r):
        for j in range(i + 1, ca.r):
            assert np.all(pair_counts(ca, i, j) == 1)


@pytest.mark.parametrize("k", [6, 10, 1])
def test_finite_field_ca_rejects_non_prime_powers(k):
    with pytest.raises(CoveringError):
        construct_finite_field_ca(k)


@pytest.mark.parametrize("k", [3, 4, 5, 7, 8, 9])
def test_ca_to_mols_from_finite_field(k):
    mols = ca_to_mols(construct_finite_field_ca(k))
    assert len(mols.squares) == k - 1


def test_ca_to_mols_rejects_duplicate_coverage():
    ca = construct_finite_field_ca(3)
    tampered = ca.entries.copy()
    tampered[2] = tampered[1]
    with pytest.raises(CoveringError, match="more than once"):
        ca_to_mols(CoveringArray(3, tampered))
    with pytest.raises(CoveringError, match="at least 3 rows"):
        ca_to_mols(CoveringArray(3, ca.entries[:2]))


def test_latin_square_set_validation():
    sq = np.array([[0, 1, 2], [1, 2, 0], [2, 0, 1]])
    LatinSquareSet(3, (sq,))
    bad = sq.copy()
    bad[0, 0] = 1
    with pytest.raises(CoveringError, match="not Latin"):
        LatinSquareSet(3, (bad,))
    with pytest.raises(CoveringError, match="not orthogonal"):
        LatinSquareSet(3, (sq, sq))


# ---------------------------------------------------------------------------
# disjoint columns and the block-recursive construction

def test_strip_to_disjoint_shape_and_validity():
    stripped = strip_to_disjoint(construct_finite_field_ca(4))
    assert (stripped.r, stripped.n) == (4, 16)
    assert verify(stripped).valid
    # The first k columns are the constant columns.
    assert np.array_equal(stripped.entries[:, :4],
                          np.tile(np.arange(4), (4, 1)))
    with pytest.raises(CoveringError):
        strip_to_disjoint(stripped)


def test_disjoint_columns_exact_on_stripped_array():
    stripped = strip_to_disjoint(construct_finite_field_ca(3))
    cols, exact = disjoint_columns(stripped)
    assert exact
    # No more than k columns can be pairwise disjoint over k symbols.
    assert len(cols) == 3
    sub = stripped.entries[:, cols]
    for row in sub:
        assert len(set(int(x) for x in row)) == 3


def test_block_recursive_plain():
    a = construct_finite_field_ca(3)
    out = block_recursive(a, a)
    assert (out.n, out.r, out.k) == (18, 16, 3)
    assert verify(out).valid
    with pytest.raises(CoveringError, match="alphabet mismatch"):
        block_recursive(a, construct_finite_field_ca(4))


def test_block_recursive_reduced():
    a = construct_finite_field_ca(3)
    b = strip_to_disjoint(a)
    out = block_recursive(a, b, reduce=True)
    assert (out.n, out.r, out.k) == (15, 12, 3)
    assert verify(out).valid


@pytest.mark.parametrize("k,i", [(3, 0), (3, 1), (3, 2), (4, 1), (5, 1)])
def test_iterate_block_recursive(k, i):
    out = iterate_block_recursive(k, i)
    assert out.n == k * k + i * (k * k - k)
    assert out.r == k**i * (k + 1)
    assert verify(out).valid
    assert is_balanced(out)
    with pytest.raises(CoveringError):
        iterate_block_recursive(k, -1)


# ---------------------------------------------------------------------------
# starter vectors

def test_starter_vector_validation():
    with pytest.raises(CoveringError):
        StarterVector(1, (0,))
    with pytest.raises(CoveringError):
        StarterVector(3, (1, 1))
    with pytest.raises(CoveringError):
        StarterVector(3, (0, 0))
    with pytest.raises(CoveringError):
        StarterVector(3, (0, 3))
    assert StarterVector(3, (0, 1, 2)).r == 3


def test_verify_starter_reports_misses():
    ok, misses = verify_starter(StarterVector(3, (0, 1, 1, 1, 2)))
    assert ok and misses == ()
    ok, misses = verify_starter(StarterVector(3, (0, 1, 1)))
    assert not ok
    assert misses == ((1, 1), (2, 1))


def test_expand_starter_matches_reference():
    ca = expand_starter(StarterVector(3, (0, 1, 1, 1, 2)))
    assert (ca.n, ca.r, ca.k) == (11, 5, 3)
    assert np.array_equal(ca.entries, REFERENCE_CA_11_5_3)
    assert verify(ca).valid
    # Column blocks: the zero column, then one circulant per group power.
    assert np.all(ca.entries[:, 0] == 0)
    for lo in (1, 6):
        block = ca.entries[:, lo:lo + 5]
        for col in range(1, 5):
            assert (sorted(block[:, col]) == sorted(block[:, 0]))


def test_expand_starter_rejects_invalid():
    with pytest.raises(CoveringError, match="invalid starter"):
        expand_starter(StarterVector(3, (0, 1, 1)))


def raw_expand(k, v):
    """Expansion without the validity gate, as an independent oracle."""
    r, g = len(v), k - 1
    vec = np.array(v, dtype=np.int64)
    m = vec[(np.arange(r)[:, None] - np.arange(r)[None, :]) % r]
    blocks = [np.zeros((r, 1), dtype=np.int64)]
    for t in range(g):
        act = np.zeros(k, dtype=np.int64)
        act[1:] = (np.arange(g) + t) % g + 1
        blocks.append(act[m])
    return CoveringArray(k, np.concatenate(blocks, axis=1))


def test_expand_verify_equivalence_on_random_vectors():
    # A starter passes verify_starter iff its raw expansion is a covering
    # array; checked on 1000 random vectors across several alphabets.
    rng = np.random.default_rng(20240811)
    valid_seen = 0
    for _ in range(1000):
        k = int(rng.integers(3, 6))
        r = int(rng.integers(k, k + 5))
        v = (0,) + tuple(int(x) for x in rng.integers(1, k, size=r - 1))
        sv = StarterVector(k, v)
        ok, _ = verify_starter(sv)
        assert ok == verify(raw_expand(k, v)).valid
        if ok:
            valid_seen += 1
            assert np.array_equal(expand_starter(sv).entries,
                                  raw_expand(k, v).entries)
        else:
            with pytest.raises(CoveringError):
                expand_starter(sv)
    assert valid_seen > 0


# ---------------------------------------------------------------------------
# starter search

def test_search_grid_matches_reference():
    for (k, r), (status, vec, steps) in REFERENCE_GRID.items():
        res = search_starter(k, r, mode="exhaustive")
        assert res.status == status, (k, r)
        assert res.steps == steps, (k, r)
        if status == "found":
            assert res.vector.v == vec, (k, r)
            assert verify(expand_starter(res.vector)).valid
        else:
            assert res.vector is None


def test_search_found_arrays_have_expected_size():
    res = search_starter(6, 9)
    assert res.found
    ca = expand_starter(res.vector)
    assert (ca.n, ca.r, ca.k) == (46, 9, 6)
    assert verify(ca).valid


def test_search_starter_argument_errors():
    with pytest.raises(CoveringError):
        search_starter(2, 5)
    with pytest.raises(CoveringError):
        search_starter(3, 2)
    with pytest.raises(CoveringError):
        search_starter(3, 5, mode="simulated-annealing")


def test_hillclimb_finds_and_is_deterministic():
    a = search_starter(4, 6, mode="hillclimb", seed=11, budget=50_000)
    b = search_starter(4, 6, mode="hillclimb", seed=11, budget=50_000)
    assert a.found
    assert (a.status, a.vector, a.steps) == (b.status, b.vector, b.steps)
    assert verify_starter(a.vector)[0]
    assert a.steps <= 50_000


def test_hillclimb_budget_exhaustion_is_unknown():
    # No valid starter exists at (6, 8); hill climbing cannot prove that.
    res = search_starter(6, 8, mode="hillclimb", seed=0, budget=300)
    assert res.status == "unknown"
    assert res.vector is None
    assert res.steps >= 300


# ---------------------------------------------------------------------------
# sizes and bounds

def test_binary_can_reference_values():
    assert [binary_can(r) for r in range(2, 21)] == REFERENCE_BINARY_CAN
    assert binary_can(5) == 6
    with pytest.raises(CoveringError):
        binary_can(0)


def test_binary_can_definition():
    for r in range(1, 200):
        n = binary_can(r)
        assert math.comb(n - 1, n // 2 - 1) >= r
        if n > 2:
            assert math.comb(n - 2, (n - 1) // 2 - 1) < r


def test_tc_interval_from_pbtc():
    assert tc_interval_from_pbtc(28, 3) == (Fraction(46, 3), 28)
    with pytest.raises(CoveringError):
        tc_interval_from_pbtc(0, 3)


def test_tc_log_lower():
    assert tc_log_lower(20, 3) == 7
    for r in (2, 5, 17, 100):
        for k in (2, 3, 5):
            m = tc_log_lower(r, k)
            assert 4**m >= r**k
            assert m == 0 or 4 ** (m - 1) < r**k


def test_tc_quadratic_lower():
    assert tc_quadratic_lower(20, 3) == 11
    assert tc_quadratic_lower(7, 5) == 27
    with pytest.raises(CoveringError):
        tc_quadratic_lower(4, 3)


def test_pbtc_max_rows():
    # floor(C(12,3) / (3 * C(4,1))) = floor(220/12).
    assert pbtc_max_rows(12, 3) == 18
    with pytest.raises(CoveringError):
        pbtc_max_rows(13, 3)


def test_vt_clique_bound():
    assert vt_clique_bound(9, 3) == 4
    assert vt_clique_bound(12, 3) == Fraction(55, 3)
    assert vt_clique_bound(10, 3) == Fraction(15, 2)
    assert vt_clique_bound(16, 4) == 5
    with pytest.raises(CoveringError):
        vt_clique_bound(12, 4)


def test_size_bounds_dispatch():
    out = size_bounds(r=20, k=3)
    assert out == {"tc_log_lower": 7, "tc_quadratic_lower": 11}
    out = size_bounds(k=3, pbtc=28, blocks=12)
    assert out["tc_from_pbtc_lower"] == Fraction(46, 3)
    assert out["tc_from_pbtc_upper"] == 28
    assert out["pbtc_max_rows"] == 18
    out = size_bounds(n=9, k=3)
    assert out == {"vt_clique": 4, "vt_clique_exact": Fraction(4, 1)}
    with pytest.raises(CoveringError):
        size_bounds()
    with pytest.raises(CoveringError):
        size_bounds(n=5)


# ---------------------------------------------------------------------------
# text round trips

def test_ca_text_round_trip():
    ca = construct_finite_field_ca(4)
    text = ca_to_text(ca)
    back = ca_from_text(text)
    assert back.k == ca.k
    assert np.array_equal(back.entries, ca.entries)
    assert ca_to_text(back) == text


def test_ca_from_text_accepts_comments_and_blanks():
    ca = ca_from_text("# made by hand\n\nca 2 2 2\n0 1\n1 0\n")
    assert (ca.n, ca.r, ca.k) == (2, 2, 2)


@pytest.mark.parametrize("text,fragment", [
    ("", "empty"),
    ("oa 4 3 2\n", "line 1: bad header"),
    ("ca 4 x 2\n", "line 1: non-integer header"),
    ("# c\nca 2 2 2\n0 1\n1 q\n", "line 4: non-integer entry"),
    ("ca 3 2 2\n0 1\n1 0 1\n", "line 2: expected 3 entries, got 2"),
    ("ca 2 3 2\n0 1\n1 0\n", "expected 3 rows, got 2"),
])
def test_ca_from_text_diagnostics(text, fragment):
    with pytest.raises(CoveringError, match=fragment):
        ca_from_text(text)


def test_starter_text_round_trip():
    v = StarterVector(3, (0, 1, 1, 1, 2))
    text = starter_to_text(v)
    assert text == "sv 3 5\n0 1 1 1 2\n"
    assert starter_from_text(text) == v


@pytest.mark.parametrize("text,fragment", [
    ("", "empty"),
    ("vs 3 5\n0 1 1 1 2\n", "line 1: bad header"),
    ("sv 3 q\n0 1 1\n", "line 1: non-integer header"),
    ("sv 3 3\n0 1 x\n", "line 2: non-integer entry"),
    ("sv 3 4\n0 1 1\n", "expected 4 entries, got 3"),
])
def test_starter_from_text_diagnostics(text, fragment):
    with pytest.raises(CoveringError, match=fragment):
        starter_from_text(text)
