"""Counting kernels: numba path and numpy fallback must agree exactly."""

import os
import subprocess
import sys

import numpy as np
import pytest

import qica._kernels as kernels
from qica.partitions import Partition, is_qualitatively_independent, meet_cells


RNG = np.random.default_rng(20240811)


def random_labels(rows: int, n: int, k: int) -> np.ndarray:
    """Uint8 label block where every row uses all k labels."""
    out = np.empty((rows, n), dtype=np.uint8)
    filled = 0
    while filled < rows:
        block = RNG.integers(0, k, size=(rows, n), dtype=np.uint8)
        good = np.array([len(set(row.tolist())) == k for row in block])
        take = min(rows - filled, int(good.sum()))
        out[filled:filled + take] = block[good][:take]
        filled += take
    return out


def unpack_code(code: int, k: int) -> list[list[int]]:
    return [[(code >> (4 * (i * k + j))) & 0xF for j in range(k)]
            for i in range(k)]


def both_backends(fn, *args):
    """Run a kernel entry under the active path and the forced numpy path."""
    primary = fn(*args)
    saved = kernels._ACTIVE
    kernels._ACTIVE = "numpy"
    try:
        fallback = fn(*args)
    finally:
        kernels._ACTIVE = saved
    return primary, fallback


def counted_cells(base: np.ndarray, row: np.ndarray, k: int) -> list[list[int]]:
    """Raw-label meet table by direct counting; kernel oracle."""
    out = [[0] * k for _ in range(k)]
    for a, b in zip(base.tolist(), row.tolist()):
        out[a][b] += 1
    return out


@pytest.mark.parametrize("k,n", [(2, 8), (3, 9), (3, 12), (4, 8), (4, 16)])
def test_meet_codes_matches_direct_counting(k, n):
    block = random_labels(40, n, k)
    base = np.repeat(np.arange(k, dtype=np.uint8), n // k)
    got, fallback = both_backends(kernels.meet_codes, block, base, k)
    assert np.array_equal(got, fallback)
    for row, code in zip(block, got):
        assert unpack_code(int(code), k) == counted_cells(base, row, k)


def test_meet_codes_agrees_with_meet_cells_on_normalized_labels():
    # on normalized label strings the raw table IS the partition meet table
    from qica.partitions import iter_labels
    k, n = 3, 9
    rows = [np.frombuffer(b, dtype=np.uint8) for b in
            list(iter_labels(n, k, "uniform"))[:50]]
    block = np.stack(rows)
    base = block[0]
    codes = kernels.meet_codes(block, base, k)
    p = Partition.from_labels(base.tobytes())
    for row, code in zip(block, codes):
        q = Partition.from_labels(row.tobytes())
        assert unpack_code(int(code), k) == [list(r) for r in meet_cells(p, q)]


@pytest.mark.parametrize("k,n", [(3, 9), (4, 12)])
def test_meet_codes_both_gives_table_and_transpose(k, n):
    block = random_labels(30, n, k)
    base = random_labels(1, n, k)[0]
    (codes, codes_t), (f_codes, f_codes_t) = both_backends(
        kernels.meet_codes_both, block, base, k)
    assert np.array_equal(codes, f_codes)
    assert np.array_equal(codes_t, f_codes_t)
    for code, code_t in zip(codes, codes_t):
        cells = unpack_code(int(code), k)
        cells_t = unpack_code(int(code_t), k)
        assert cells_t == [list(col) for col in zip(*cells)]


@pytest.mark.parametrize("k,n", [(2, 6), (3, 9), (4, 8), (5, 10), (8, 16)])
def test_qi_flags_matches_definition(k, n):
    block = random_labels(25, n, k)
    reps = random_labels(6, n, k)
    got, fallback = both_backends(kernels.qi_flags, block, reps, k)
    assert np.array_equal(got, fallback)
    for i, row in enumerate(block):
        p = Partition.from_labels(row.tobytes())
        for j, rep in enumerate(reps):
            q = Partition.from_labels(rep.tobytes())
            assert bool(got[i, j]) == is_qualitatively_independent(p, q)


def test_pair_class_matrix_matches_per_pair_codes():
    # real uniform family keeps the distinct-code count inside int8 ids
    from qica.partitions import iter_labels
    k, n = 3, 9
    labs = list(iter_labels(n, k, "uniform"))[:60]
    labels = np.stack([np.frombuffer(b, dtype=np.uint8) for b in labs])
    v = labels.shape[0]
    codes = set()
    for u in range(v):
        row_codes = kernels.meet_codes(labels, labels[u], k)
        codes.update(int(c) for c in row_codes)
    assert len(codes) <= 127
    sorted_codes = np.array(sorted(codes), dtype=np.uint64)
    ids = np.arange(len(sorted_codes), dtype=np.int8)
    got, fallback = both_backends(
        kernels.pair_class_matrix, labels, k, sorted_codes, ids)
    assert np.array_equal(got, fallback)
    for u in range(v):
        row_codes = kernels.meet_codes(labels, labels[u], k)
        pos = np.searchsorted(sorted_codes, row_codes)
        assert np.array_equal(got[u], ids[pos])


def test_pair_class_matrix_flags_unknown_codes():
    k, n = 3, 9
    labels = random_labels(10, n, k)
    sorted_codes = np.array([0], dtype=np.uint64)
    ids = np.array([0], dtype=np.int8)
    got = kernels.pair_class_matrix(labels, k, sorted_codes, ids)
    assert (got == -1).all()


@pytest.mark.parametrize("k,r", [(3, 4), (3, 5), (4, 5), (5, 6), (5, 7)])
def test_starter_exhaustive_backends_agree(k, r):
    (vec, tried), (f_vec, f_tried) = both_backends(
        kernels.starter_exhaustive, k, r)
    assert tried == f_tried
    if vec is None:
        assert f_vec is None
    else:
        assert np.array_equal(vec, f_vec)


def test_pack_domain_errors():
    with pytest.raises(ValueError):
        kernels.meet_codes(np.zeros((1, 5), dtype=np.uint8),
                           np.zeros(5, dtype=np.uint8), 5)
    with pytest.raises(ValueError):
        # class size 16 overflows a nibble
        kernels.meet_codes(np.zeros((1, 32), dtype=np.uint8),
                           np.zeros(32, dtype=np.uint8), 2)


def test_backend_env_selection():
    env = dict(os.environ, QICA_BACKEND="numpy")
    out = subprocess.run(
        [sys.executable, "-c",
         "import qica._kernels as k; print(k.backend())"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "numpy"
    env["QICA_BACKEND"] = "bogus"
    out = subprocess.run(
        [sys.executable, "-c", "import qica._kernels"],
        capture_output=True, text=True, env=env)
    assert out.returncode != 0


def test_backend_reports_active_path():
    assert kernels.backend() in ("numba", "numpy")
    if kernels.HAS_NUMBA and os.environ.get("QICA_BACKEND", "auto") == "auto":
        assert kernels.backend() == "numba"
