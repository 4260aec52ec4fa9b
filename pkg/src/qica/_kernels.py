"""Hot counting kernels: a compiled numba path and a pure-numpy fallback.

The active path is fixed at import time from the QICA_BACKEND environment
variable: "numba" demands the compiled kernels, "numpy" forces the fallback,
"auto" (the default) takes numba when it imports.  Both paths return
identical arrays for identical inputs.

Meet tables are packed into uint64 codes, one 4-bit nibble per cell in row
major order; that caps kernel use at k <= 4 and cell counts <= 15, which
covers every streaming family this package enumerates (larger k hits the
vertex cap long before the packing limit).
"""

from __future__ import annotations

import os
import sys

import numpy as np

_CHOICE = os.environ.get("QICA_BACKEND", "auto").lower()
if _CHOICE not in ("auto", "numba", "numpy"):
    raise ValueError(f"QICA_BACKEND must be auto, numba or numpy, not {_CHOICE!r}")

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False
    if _CHOICE == "numba":
        raise ImportError("QICA_BACKEND=numba but numba is not importable")
    if _CHOICE == "auto":
        print("numba unavailable, falling back to numpy kernels", file=sys.stderr)

_ACTIVE = "numpy" if _CHOICE == "numpy" else ("numba" if HAS_NUMBA else "numpy")


def backend() -> str:
    """The kernel path in use: "numba" or "numpy"."""
    return _ACTIVE


def _check_pack(k: int, n: int) -> None:
    if not 2 <= k <= 4:
        raise ValueError(f"packed meet kernels support 2 <= k <= 4, got {k}")
    if n // k > 15:
        raise ValueError("4-bit cells overflow: class size > 15")


# ---------------------------------------------------------------------------
# packed meet-table codes

def meet_codes(block: np.ndarray, base: np.ndarray, k: int) -> np.ndarray:
    """uint64 code of the meet table of base vs each row of block.

    Cell (i, j) counts positions p with base[p] = i and row[p] = j and lands
    in nibble i*k + j.
    """
    _check_pack(k, block.shape[1])
    if _ACTIVE == "numba":
        out = np.empty(block.shape[0], dtype=np.uint64)
        _meet_codes_nb(block, base, k, out)
        return out
    return _meet_codes_np(block, base, k)


def meet_codes_both(block: np.ndarray, base: np.ndarray,
                    k: int) -> tuple[np.ndarray, np.ndarray]:
    """Codes of the meet table and of its transpose, one pass."""
    _check_pack(k, block.shape[1])
    if _ACTIVE == "numba":
        out = np.empty(block.shape[0], dtype=np.uint64)
        out_t = np.empty(block.shape[0], dtype=np.uint64)
        _meet_codes_both_nb(block, base, k, out, out_t)
        return out, out_t
    return _meet_codes_both_np(block, base, k)


def _cell_counts_np(block: np.ndarray, base: np.ndarray, k: int) -> np.ndarray:
    rows = block.shape[0]
    idx = base.astype(np.int64) * k + block.astype(np.int64)
    idx += np.arange(rows, dtype=np.int64)[:, None] * (k * k)
    counts = np.bincount(idx.ravel(), minlength=rows * k * k)
    return counts.reshape(rows, k * k).astype(np.uint64)


def _meet_codes_np(block, base, k):
    counts = _cell_counts_np(block, base, k)
    shifts = (4 * np.arange(k * k)).astype(np.uint64)
    return (counts << shifts).sum(axis=1).astype(np.uint64)


def _meet_codes_both_np(block, base, k):
    counts = _cell_counts_np(block, base, k)
    shifts = (4 * np.arange(k * k)).astype(np.uint64)
    tshifts = (4 * np.arange(k * k).reshape(k, k).T.ravel()).astype(np.uint64)
    codes = (counts << shifts).sum(axis=1).astype(np.uint64)
    codes_t = (counts << tshifts).sum(axis=1).astype(np.uint64)
    return codes, codes_t


# ---------------------------------------------------------------------------
# qualitative-independence flags

def qi_flags(block: np.ndarray, reps: np.ndarray, k: int) -> np.ndarray:
    """uint8 matrix (rows, m): 1 where block row is qualitatively independent
    of reps row (all k*k meet cells nonzero).  reps is (m, n)."""
    if k * k > 64:
        raise ValueError("qi kernels support k <= 8")
    if _ACTIVE == "numba":
        out = np.empty((block.shape[0], reps.shape[0]), dtype=np.uint8)
        _qi_flags_nb(block, reps, k, out)
        return out
    return _qi_flags_np(block, reps, k)


def _qi_flags_np(block, reps, k):
    rows = block.shape[0]
    out = np.empty((rows, reps.shape[0]), dtype=np.uint8)
    full = k * k
    offs = np.arange(rows, dtype=np.int64)[:, None] * full
    for m in range(reps.shape[0]):
        idx = reps[m].astype(np.int64) * k + block.astype(np.int64) + offs
        counts = np.bincount(idx.ravel(), minlength=rows * full)
        hit = (counts.reshape(rows, full) > 0).sum(axis=1)
        out[:, m] = (hit == full).astype(np.uint8)
    return out


# ---------------------------------------------------------------------------
# all-pairs meet classification

def pair_class_matrix(labels: np.ndarray, k: int, sorted_codes: np.ndarray,
                      ids: np.ndarray) -> np.ndarray:
    """int8 matrix L with L[u, v] = class id of the meet table of rows u, v.

    sorted_codes is an ascending uint64 array of every raw meet-table code
    that can occur (all margin-valid tables), ids its parallel class ids.
    """
    _check_pack(k, labels.shape[1])
    if _ACTIVE == "numba":
        out = np.empty((labels.shape[0], labels.shape[0]), dtype=np.int8)
        _pair_class_nb(labels, k, sorted_codes, ids, out)
        return out
    return _pair_class_np(labels, k, sorted_codes, ids)


def _pair_class_np(labels, k, sorted_codes, ids):
    v, n = labels.shape
    out = np.empty((v, v), dtype=np.int8)
    kk = k * k
    shifts = (4 * np.arange(kk)).astype(np.uint64)
    step = max(1, (1 << 20) // v)
    lab64 = labels.astype(np.int64)
    for lo in range(0, v, step):
        hi = min(v, lo + step)
        idx = lab64[lo:hi, None, :] * k + lab64[None, :, :]
        rows = (hi - lo) * v
        flat = idx.reshape(rows, n)
        flat = flat + np.arange(rows, dtype=np.int64)[:, None] * kk
        counts = np.bincount(flat.ravel(), minlength=rows * kk)
        counts = counts.reshape(rows, kk).astype(np.uint64)
        codes = (counts << shifts).sum(axis=1).astype(np.uint64)
        pos = np.searchsorted(sorted_codes, codes)
        good = pos < len(sorted_codes)
        pos[~good] = 0
        good &= sorted_codes[pos] == codes
        cls = np.where(good, ids[pos], -1).astype(np.int8)
        out[lo:hi] = cls.reshape(hi - lo, v)
    return out


# ---------------------------------------------------------------------------
# starter-vector exhaustive search

def starter_exhaustive(k: int, r: int) -> tuple[np.ndarray | None, int]:
    """Lexicographically least valid starter vector over {1..k-1}^(r-1), or
    None; second value is the number of candidates examined."""
    if _ACTIVE == "numba":
        vec = np.zeros(r, dtype=np.uint8)
        tried = _starter_exhaustive_nb(k, r, vec)
        if tried < 0:
            return None, -tried
        return vec, tried
    return _starter_exhaustive_np(k, r)


def _starter_valid_batch(batch: np.ndarray, k: int, r: int) -> np.ndarray:
    """Boolean validity per row; batch rows are full vectors (v0 = 0)."""
    g = k - 1
    ok = np.ones(batch.shape[0], dtype=bool)
    diffs = np.empty(batch.shape[0], dtype=np.int64)
    for i in range(1, r):
        bits = np.zeros(batch.shape[0], dtype=np.uint64)
        for j in range(1, r):
            if (i + j) % r == 0:
                continue
            np.subtract(batch[:, j].astype(np.int64),
                        batch[:, (j + i) % r].astype(np.int64), out=diffs)
            np.mod(diffs, g, out=diffs)
            bits |= np.uint64(1) << diffs.astype(np.uint64)
        ok &= bits == np.uint64((1 << g) - 1)
    return ok


def _starter_exhaustive_np(k, r):
    import itertools

    g = k - 1
    tried = 0
    chunk = 8192
    it = itertools.product(range(1, k), repeat=r - 1)
    while True:
        rows = list(itertools.islice(it, chunk))
        if not rows:
            return None, tried
        batch = np.zeros((len(rows), r), dtype=np.uint8)
        batch[:, 1:] = np.asarray(rows, dtype=np.uint8)
        ok = _starter_valid_batch(batch, k, r)
        hit = np.flatnonzero(ok)
        if hit.size:
            tried += int(hit[0]) + 1
            return batch[hit[0]].copy(), tried
        tried += len(rows)


# ---------------------------------------------------------------------------
# compiled variants

if HAS_NUMBA:

    @njit(cache=True)
    def _meet_codes_nb(block, base, k, out):
        rows, n = block.shape
        counts = np.zeros(16, dtype=np.uint64)
        for row in range(rows):
            for c in range(k * k):
                counts[c] = 0
            for p in range(n):
                counts[base[p] * k + block[row, p]] += 1
            code = np.uint64(0)
            for c in range(k * k):
                code |= counts[c] << np.uint64(4 * c)
            out[row] = code

    @njit(cache=True)
    def _meet_codes_both_nb(block, base, k, out, out_t):
        rows, n = block.shape
        counts = np.zeros(16, dtype=np.uint64)
        for row in range(rows):
            for c in range(k * k):
                counts[c] = 0
            for p in range(n):
                counts[base[p] * k + block[row, p]] += 1
            code = np.uint64(0)
            code_t = np.uint64(0)
            for i in range(k):
                for j in range(k):
                    cell = counts[i * k + j]
                    code |= cell << np.uint64(4 * (i * k + j))
                    code_t |= cell << np.uint64(4 * (j * k + i))
            out[row] = code
            out_t[row] = code_t

    @njit(cache=True)
    def _qi_flags_nb(block, reps, k, out):
        rows, n = block.shape
        full = k * k
        want = (np.uint64(1) << np.uint64(full)) - np.uint64(1)
        for row in range(rows):
            for m in range(reps.shape[0]):
                seen = np.uint64(0)
                for p in range(n):
                    seen |= np.uint64(1) << np.uint64(
                        reps[m, p] * k + block[row, p])
                out[row, m] = np.uint8(1) if seen == want else np.uint8(0)

    @njit(cache=True)
    def _pair_class_nb(labels, k, sorted_codes, ids, out):
        # The (w, u) table is the transpose of the (u, w) table and its class
        # can differ, so both codes are looked up.
        v, n = labels.shape
        counts = np.zeros(16, dtype=np.uint64)
        for u in range(v):
            for w in range(u, v):
                for c in range(k * k):
                    counts[c] = 0
                for p in range(n):
                    counts[labels[u, p] * k + labels[w, p]] += 1
                code = np.uint64(0)
                code_t = np.uint64(0)
                for i in range(k):
                    for j in range(k):
                        cell = counts[i * k + j]
                        code |= cell << np.uint64(4 * (i * k + j))
                        code_t |= cell << np.uint64(4 * (j * k + i))
                lo, hi = 0, len(sorted_codes)
                while lo < hi:
                    mid = (lo + hi) // 2
                    if sorted_codes[mid] < code:
                        lo = mid + 1
                    else:
                        hi = mid
                cls = np.int8(-1)
                if lo < len(sorted_codes) and sorted_codes[lo] == code:
                    cls = ids[lo]
                out[u, w] = cls
                lo, hi = 0, len(sorted_codes)
                while lo < hi:
                    mid = (lo + hi) // 2
                    if sorted_codes[mid] < code_t:
                        lo = mid + 1
                    else:
                        hi = mid
                cls_t = np.int8(-1)
                if lo < len(sorted_codes) and sorted_codes[lo] == code_t:
                    cls_t = ids[lo]
                out[w, u] = cls_t

    @njit(cache=True)
    def _starter_exhaustive_nb(k, r, vec):
        g = k - 1
        digits = np.ones(r - 1, dtype=np.uint8)
        tried = 0
        want = (1 << g) - 1
        while True:
            tried += 1
            valid = True
            for i in range(1, r):
                bits = 0
                for j in range(1, r):
                    other = (j + i) % r
                    if other == 0:
                        continue
                    a = np.int64(digits[j - 1])
                    b = np.int64(digits[other - 1])
                    bits |= 1 << ((a - b) % g)
                if bits != want:
                    valid = False
                    break
            if valid:
                vec[0] = 0
                for j in range(r - 1):
                    vec[j + 1] = digits[j]
                return tried
            pos = r - 2
            while pos >= 0 and digits[pos] == g:
                digits[pos] = 1
                pos -= 1
            if pos < 0:
                return -tried
            digits[pos] += 1
