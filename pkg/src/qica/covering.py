"""Covering arrays of strength two.

Verification, the finite-field and block-size recursive constructions, the
cyclic-group expansion of starter vectors with exhaustive and hill-climbing
search, conversion to mutually orthogonal Latin squares, and exact size
bounds.  Arrays are r x n matrices over {0..k-1}: rows are factors, columns
are tests, and validity means every unordered row pair covers all k*k
ordered symbol pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .gf import FieldError, make_field


class CoveringError(ValueError):
    """Raised for malformed arrays, bad starters, or out-of-domain bounds."""


@dataclass(frozen=True, eq=False)
class CoveringArray:
    """Immutable r x n array over {0..k-1}; validity is checked on demand."""

    k: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if not 1 <= self.k <= 255:
            raise CoveringError(f"alphabet size {self.k} outside 1..255")
        arr = np.asarray(self.entries)
        if arr.ndim != 2 or arr.size == 0:
            raise CoveringError("entries must form a nonempty 2-D array")
        if arr.min() < 0 or arr.max() >= self.k:
            raise CoveringError(f"entries outside 0..{self.k - 1}")
        arr = arr.astype(np.uint8, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def r(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]

    def __repr__(self) -> str:
        return f"CoveringArray(n={self.n}, r={self.r}, k={self.k})"


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of a pair-coverage check; valid iff the miss list is empty.

    Each miss is ((i, j), (a, b)): rows i < j never cover the ordered
    symbol pair (a, b).
    """

    valid: bool
    misses: tuple[tuple[tuple[int, int], tuple[int, int]], ...]

    def __post_init__(self) -> None:
        if self.valid != (not self.misses):
            raise CoveringError("report validity contradicts its miss list")


def verify(ca: CoveringArray) -> VerificationReport:
    """Exhaustive coverage check over all C(r,2) row pairs, listing every miss."""
    k, rows = ca.k, ca.entries.astype(np.int64)
    misses: list[tuple[tuple[int, int], tuple[int, int]]] = []
    for i in range(ca.r):
        for j in range(i + 1, ca.r):
            counts = np.bincount(k * rows[i] + rows[j], minlength=k * k)
            for code in np.nonzero(counts == 0)[0]:
                misses.append(((i, j), divmod(int(code), k)))
    return VerificationReport(not misses, tuple(misses))


def construct_finite_field_ca(k: int) -> CoveringArray:
    """Build the CA(k^2, k+1, k) over the field of order k.

    Columns are indexed by pairs (l, j): row 0 carries the block label l,
    and row i+1 carries f_i * f_l + f_j.  The result is an orthogonal
    array: every row pair covers every symbol pair exactly once.
    """
    try:
        f = make_field(k)
    except FieldError as exc:
        raise CoveringError(f"k={k} is not a supported prime power") from exc
    l = np.repeat(np.arange(k), k)
    j = np.tile(np.arange(k), k)
    rows = [l] + [f.add_table[f.mul_table[i, l], j] for i in range(k)]
    return CoveringArray(k, np.stack(rows))


def strip_to_disjoint(ca: CoveringArray) -> CoveringArray:
    """Drop the block-constant first row, leaving a CA(k^2, k, k).

    Requires the finite-field shape (n = k^2, r = k+1, row 0 block
    constant).  The first k columns of the result are the constant columns
    0..k-1, hence pairwise disjoint.
    """
    k = ca.k
    if ca.n != k * k or ca.r != k + 1:
        raise CoveringError("expected the k^2-column, (k+1)-row finite-field shape")
    if not np.array_equal(ca.entries[0], np.repeat(np.arange(k), k)):
        raise CoveringError("first row is not the block-constant row")
    return CoveringArray(k, ca.entries[1:])


def disjoint_columns(ca: CoveringArray) -> tuple[tuple[int, ...], bool]:
    """Find a large set of pairwise disjoint columns (no common symbol per row).

    Exact (maximum, via clique search on the column-disjointness graph) for
    n <= 64; greedy beyond.  Returns (sorted column indices, exactness flag).
    """
    cols = ca.entries.T
    n = ca.n
    masks = [0] * n
    for a in range(n):
        for b in range(a + 1, n):
            if not np.any(cols[a] == cols[b]):
                masks[a] |= 1 << b
                masks[b] |= 1 << a
    if n <= 64:
        from .graphs import maximum_clique_masks

        best, _ = maximum_clique_masks(masks)
        return tuple(sorted(best)), True
    chosen: list[int] = []
    have = 0
    for a in range(n):
        if have & ~masks[a] == 0:
            chosen.append(a)
            have |= 1 << a
    return tuple(chosen), False


def block_recursive(a: CoveringArray, b: CoveringArray, reduce: bool = False) -> CoveringArray:
    """Combine CA(m,r,k) and CA(n,s,k) into CA(m+n, rs, k); row t is
    a-row floor(t/s) followed by b-row t mod s.

    With reduce, b must have k pairwise disjoint columns.  Each b-row is
    relabeled by the inverse of the permutation its entries form on those
    columns, which makes them constant; dropping them gives size m+n-k.
    The dropped columns lose only diagonal pairs, which the a-part restores
    because every row of a covering array with r >= 2 uses all k symbols.
    """
    if a.k != b.k:
        raise CoveringError(f"alphabet mismatch: {a.k} != {b.k}")
    k = a.k
    bpart = b.entries
    if reduce:
        found, _ = disjoint_columns(b)
        if len(found) < k:
            raise CoveringError(f"reduction needs {k} pairwise disjoint columns, found {len(found)}")
        sel = np.array(found[:k])
        inv = np.argsort(bpart[:, sel].astype(np.int64), axis=1)
        bpart = np.take_along_axis(inv, bpart.astype(np.intp), axis=1)
        keep = np.setdiff1d(np.arange(b.n), sel)
        bpart = bpart[:, keep]
    s = b.r
    ai = np.repeat(np.arange(a.r), s)
    bi = np.tile(np.arange(s), a.r)
    return CoveringArray(k, np.concatenate([a.entries[ai], bpart[bi]], axis=1))


def iterate_block_recursive(k: int, i: int) -> CoveringArray:
    """Iterate the reduced block construction from the finite-field array,
    giving a balanced CA(k^2 + i(k^2-k), k^i(k+1), k)."""
    if i < 0:
        raise CoveringError("iteration count must be nonnegative")
    out = construct_finite_field_ca(k)
    if i == 0:
        return out
    b = strip_to_disjoint(out)
    for _ in range(i):
        out = block_recursive(out, b, reduce=True)
    return out


def is_balanced(ca: CoveringArray) -> bool:
    """True iff every symbol occurs exactly n/k times in every row."""
    if ca.n % ca.k:
        return False
    want = ca.n // ca.k
    for row in ca.entries:
        if np.any(np.bincount(row, minlength=ca.k) != want):
            return False
    return True


@dataclass(frozen=True)
class StarterVector:
    """A vector in Z_k^r with v[0] = 0 and all other entries in 1..k-1.

    Valid starters expand to covering arrays under the order-(k-1) cyclic
    group fixing 0; validity is checked by verify_starter, not here.
    """

    k: int
    v: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.k < 2:
            raise CoveringError("starter vectors need k >= 2")
        if not self.v or self.v[0] != 0:
            raise CoveringError("starter vectors begin with 0")
        if any(not 1 <= x <= self.k - 1 for x in self.v[1:]):
            raise CoveringError("entries after the first must lie in 1..k-1")
        object.__setattr__(self, "v", tuple(int(x) for x in self.v))

    @property
    def r(self) -> int:
        return len(self.v)


def _starter_misses(v: Sequence[int], k: int) -> list[tuple[int, int]]:
    """Uncovered (shift, difference) requirements of a raw starter vector.

    For each shift i the pairs (v[j], v[j+i]) with 1 <= j <= r-1 and
    i+j != 0 (indices mod r) must realize every difference mod k-1.
    """
    r, g = len(v), k - 1
    out: list[tuple[int, int]] = []
    for i in range(1, r):
        seen = {(v[j] - v[(j + i) % r]) % g for j in range(1, r) if (i + j) % r}
        out.extend((i, d) for d in range(g) if d not in seen)
    return out


def verify_starter(v: StarterVector) -> tuple[bool, tuple[tuple[int, int], ...]]:
    """Check the difference-coverage condition for every shift.

    Returns (valid, misses) where each miss is (shift, difference mod k-1)
    for a requirement no index pair realizes.
    """
    misses = _starter_misses(v.v, v.k)
    return not misses, tuple(misses)


def expand_starter(v: StarterVector) -> CoveringArray:
    """Expand a valid starter into the CA(r(k-1)+1, r, k) it generates.

    Columns: the all-zero column C, then the circulant M with v as first
    column under each group power, in the order g^0, g^1, ..., g^(k-2).
    The group fixes 0 and rotates 1..k-1.
    """
    ok, misses = verify_starter(v)
    if not ok:
        raise CoveringError(f"invalid starter: {len(misses)} uncovered requirements")
    r, k, g = v.r, v.k, v.k - 1
    vec = np.array(v.v, dtype=np.int64)
    m = vec[(np.arange(r)[:, None] - np.arange(r)[None, :]) % r]
    act = np.zeros((g, k), dtype=np.int64)
    for t in range(g):
        act[t, 1:] = (np.arange(g) + t) % g + 1
    blocks = [np.zeros((r, 1), dtype=np.int64)] + [act[t][m] for t in range(g)]
    return CoveringArray(k, np.concatenate(blocks, axis=1))


@dataclass(frozen=True)
class SearchResult:
    """Starter-search outcome.

    status is "found" (vector set), "none" (search space exhausted, a
    definitive negative), or "unknown" (budget ran out first).  steps
    counts examined candidates.
    """

    status: str
    vector: StarterVector | None
    steps: int

    @property
    def found(self) -> bool:
        return self.status == "found"


def search_starter(
    k: int,
    r: int,
    mode: str = "exhaustive",
    seed: int = 0,
    budget: int = 100_000,
) -> SearchResult:
    """Search for a valid starter vector.

    Exhaustive mode enumerates all (k-1)^(r-1) candidates in lexicographic
    order and returns the least valid one, or a definitive "none".
    Hill-climbing minimizes the number of uncovered (shift, difference)
    requirements by single-coordinate moves, accepting ties, with a random
    restart after 50*r non-improving steps; it is deterministic for a fixed
    seed, and budget bounds the number of objective evaluations.
    """
    if k < 3 or r < k:
        raise CoveringError("search needs k >= 3 and r >= k")
    if mode == "exhaustive":
        vec, tried = _kernels.starter_exhaustive(k, r)
        if vec is None:
            return SearchResult("none", None, tried)
        return SearchResult("found", StarterVector(k, tuple(int(x) for x in vec)), tried)
    if mode != "hillclimb":
        raise CoveringError(f"unknown search mode {mode!r}")
    rng = np.random.default_rng(seed)
    g = k - 1
    steps = 0
    stale = 0
    v: list[int] = []
    cur = -1
    while steps < budget:
        if not v or stale >= 50 * r:
            v = [0] + [int(x) for x in rng.integers(1, k, size=r - 1)]
            cur = len(_starter_misses(v, k))
            stale = 0
            steps += 1
        if cur == 0:
            return SearchResult("found", StarterVector(k, tuple(v)), steps)
        idx = int(rng.integers(1, r))
        old = v[idx]
        v[idx] = 1 + (old - 1 + int(rng.integers(1, g))) % g
        nxt = len(_starter_misses(v, k))
        steps += 1
        if nxt <= cur:
            stale = 0 if nxt < cur else stale + 1
            cur = nxt
        else:
            v[idx] = old
            stale += 1
    return SearchResult("unknown", None, steps)


def binary_can(r: int) -> int:
    """Minimum size of a binary covering array with r rows:
    min{n : C(n-1, floor(n/2)-1) >= r}."""
    if r < 1:
        raise CoveringError("row count must be positive")
    n = 2
    while math.comb(n - 1, n // 2 - 1) < r:
        n += 1
    return n


def tc_interval_from_pbtc(pbtc_value: int, k: int) -> tuple[Fraction, int]:
    """Sandwich on the transversal-cover number from its partitioned variant:
    pbtc/k + k(k-1) <= tc <= pbtc."""
    if k < 2 or pbtc_value < 1:
        raise CoveringError("needs k >= 2 and a positive partitioned bound")
    return Fraction(pbtc_value, k) + k * (k - 1), pbtc_value


def tc_log_lower(r: int, k: int) -> int:
    """ceil(k*log2(r)/2), computed exactly as the least m with 4^m >= r^k."""
    if r < 1 or k < 1:
        raise CoveringError("needs positive r and k")
    target = r**k
    m, val = 0, 1
    while val < target:
        val *= 4
        m += 1
    return m


def tc_quadratic_lower(r: int, k: int) -> int:
    """k^2 + 2 lower bound, valid for r >= k+2 and k >= 3."""
    if k < 3 or r < k + 2:
        raise CoveringError("quadratic bound needs k >= 3 and r >= k+2")
    return k * k + 2


def pbtc_max_rows(b: int, k: int) -> int:
    """Row-count ceiling for a partitioned cover on b blocks:
    floor(C(b, b/k-(k-2)) / (k*C(b/k, k-2)))."""
    if k < 2 or b < 1 or b % k:
        raise CoveringError("needs k >= 2 and k | b")
    top = b // k - (k - 2)
    if top < 0 or b // k < k - 2:
        raise CoveringError("too few blocks per class for the binomials")
    return math.comb(b, top) // (k * math.comb(b // k, k - 2))


def vt_clique_bound(n: int, k: int) -> Fraction:
    """Vertex-transitivity clique bound n!(k-2)! / ((k-r)(n-c+k-2)!c!)
    where n = ck + r, 0 <= r < k <= c."""
    if k < 2:
        raise CoveringError("needs k >= 2")
    c, r = divmod(n, k)
    if c < k:
        raise CoveringError("bound needs n >= k^2")
    num = math.factorial(n) * math.factorial(k - 2)
    den = (k - r) * math.factorial(n - c + k - 2) * math.factorial(c)
    return Fraction(num, den)


def size_bounds(
    r: int | None = None,
    k: int | None = None,
    n: int | None = None,
    pbtc: int | None = None,
    blocks: int | None = None,
) -> dict[str, int | Fraction]:
    """Evaluate every size bound the given parameters support.

    Returns a name -> value dict; values are exact integers or fractions.
    Raises if the parameters support no bound at all.
    """
    out: dict[str, int | Fraction] = {}
    if k is not None and pbtc is not None:
        lo, hi = tc_interval_from_pbtc(pbtc, k)
        out["tc_from_pbtc_lower"] = lo
        out["tc_from_pbtc_upper"] = hi
    if k is not None and r is not None:
        out["tc_log_lower"] = tc_log_lower(r, k)
        if k >= 3 and r >= k + 2:
            out["tc_quadratic_lower"] = tc_quadratic_lower(r, k)
    if k is not None and blocks is not None:
        out["pbtc_max_rows"] = pbtc_max_rows(blocks, k)
    if k is not None and n is not None and n >= k * k:
        exact = vt_clique_bound(n, k)
        out["vt_clique"] = exact.numerator // exact.denominator
        out["vt_clique_exact"] = exact
    if not out:
        raise CoveringError("no bound is computable from the given parameters")
    return out


@dataclass(frozen=True)
class LatinSquareSet:
    """Mutually orthogonal Latin squares of one order; checked on construction."""

    k: int
    squares: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        k = self.k
        frozen = []
        rows_sorted = np.tile(np.arange(k, dtype=np.uint8), (k, 1))
        for idx, sq in enumerate(self.squares):
            arr = np.asarray(sq, dtype=np.uint8)
            if arr.shape != (k, k):
                raise CoveringError(f"square {idx} is not {k}x{k}")
            if not (np.array_equal(np.sort(arr, axis=1), rows_sorted)
                    and np.array_equal(np.sort(arr, axis=0), rows_sorted.T)):
                raise CoveringError(f"square {idx} is not Latin")
            arr.setflags(write=False)
            frozen.append(arr)
        for a in range(len(frozen)):
            for b in range(a + 1, len(frozen)):
                codes = frozen[a].astype(np.int64) * k + frozen[b]
                if np.unique(codes).size != k * k:
                    raise CoveringError(f"squares {a} and {b} are not orthogonal")
        object.__setattr__(self, "squares", tuple(frozen))


def ca_to_mols(ca: CoveringArray) -> LatinSquareSet:
    """Convert an orthogonal-array CA(k^2, r, k), r >= 3, into r-2 MOLS.

    Positions are indexed by the first two rows; square t-2 holds row t's
    symbol at cell (row0, row1).  Input where some row pair covers a pair
    more than once is rejected, naming one such pair.
    """
    k = ca.k
    if ca.n != k * k or ca.r < 3:
        raise CoveringError("expected k^2 columns and at least 3 rows")
    rows = ca.entries.astype(np.int64)
    for i in range(ca.r):
        for j in range(i + 1, ca.r):
            counts = np.bincount(k * rows[i] + rows[j], minlength=k * k)
            dup = np.nonzero(counts > 1)[0]
            if dup.size:
                a, b = divmod(int(dup[0]), k)
                raise CoveringError(
                    f"rows {i} and {j} cover pair ({a},{b}) more than once")
    pos = np.empty((k, k), dtype=np.intp)
    pos[rows[0], rows[1]] = np.arange(ca.n)
    return LatinSquareSet(k, tuple(ca.entries[t][pos] for t in range(2, ca.r)))


def ca_to_text(ca: CoveringArray) -> str:
    lines = [f"ca {ca.n} {ca.r} {ca.k}"]
    lines += [" ".join(str(int(x)) for x in row) for row in ca.entries]
    return "\n".join(lines) + "\n"


def ca_from_text(text: str) -> CoveringArray:
    """Parse the `ca <n> <r> <k>` format; `#` lines are comments."""
    lines = [(no, ln) for no, ln in enumerate(text.splitlines(), start=1)
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise CoveringError("empty covering-array text")
    headno, headln = lines[0]
    head = headln.split()
    if len(head) != 4 or head[0] != "ca":
        raise CoveringError(
            f"line {headno}: bad header {headln!r}, expected 'ca <n> <r> <k>'")
    try:
        n, r, k = (int(x) for x in head[1:])
    except ValueError as exc:
        raise CoveringError(f"line {headno}: non-integer header field") from exc
    rows = []
    for no, ln in lines[1:]:
        try:
            row = [int(x) for x in ln.split()]
        except ValueError as exc:
            raise CoveringError(f"line {no}: non-integer entry") from exc
        if len(row) != n:
            raise CoveringError(f"line {no}: expected {n} entries, got {len(row)}")
        rows.append(row)
    if len(rows) != r:
        raise CoveringError(f"expected {r} rows, got {len(rows)}")
    return CoveringArray(k, np.array(rows))


def starter_to_text(v: StarterVector) -> str:
    return f"sv {v.k} {v.r}\n" + " ".join(str(x) for x in v.v) + "\n"


def starter_from_text(text: str) -> StarterVector:
    """Parse the `sv <k> <r>` format; `#` lines are comments."""
    lines = [(no, ln) for no, ln in enumerate(text.splitlines(), start=1)
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise CoveringError("empty starter text")
    headno, headln = lines[0]
    head = headln.split()
    if len(head) != 3 or head[0] != "sv":
        raise CoveringError(
            f"line {headno}: bad header {headln!r}, expected 'sv <k> <r>'")
    try:
        k, r = int(head[1]), int(head[2])
    except ValueError as exc:
        raise CoveringError(f"line {headno}: non-integer header field") from exc
    vals = []
    for no, ln in lines[1:]:
        try:
            vals.extend(int(x) for x in ln.split())
        except ValueError as exc:
            raise CoveringError(f"line {no}: non-integer entry") from exc
    if len(vals) != r:
        raise CoveringError(f"expected {r} entries, got {len(vals)}")
    return StarterVector(k, tuple(vals))
