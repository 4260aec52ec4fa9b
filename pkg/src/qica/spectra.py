"""Exact spectra of partition graphs through equitable partitions.

Fixing one uniform partition P* and classifying every other partition by the
isomorphism type of its meet table with P* yields an equitable partition of
the whole family with {P*} as a singleton class.  The quotient matrices are
tiny (five classes for 280 vertices, 43 for 2.6 million), every eigenvalue
of the big graph appears in the quotient, and the multiplicities fall out of
the partial-fraction expansion of |V| phi(quotient minus the singleton) /
phi(quotient).  Everything is exact: characteristic polynomials over the
integers, eigenvalues as integers or quadratic surds, multiplicities as
residues computed in the matching quadratic field.  The same class data
drives association-scheme verification and the modified matrix of
eigenvalues.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np
import sympy

from . import _kernels
from .partitions import (
    Partition,
    count_partitions,
    iter_labels,
    meet_cells,
)


class SpectraError(ValueError):
    """Raised for unsupported parameters, caps, or inconsistent data."""


class StreamCapExceeded(SpectraError):
    """Raised when a family is too large for the streaming or full-check cap."""


DEFAULT_STREAM_CAP = 5_000_000
DEFAULT_FULL_CHECK_CAP = 10_000


def _stream_cap(cap: int | None) -> int:
    if cap is not None:
        return cap
    raw = os.environ.get("QICA_STREAM_CAP", "")
    if raw:
        try:
            return int(raw)
        except ValueError as exc:
            raise SpectraError(f"bad QICA_STREAM_CAP value {raw!r}") from exc
    return DEFAULT_STREAM_CAP


# ---------------------------------------------------------------------------
# quadratic surds


@dataclass(frozen=True)
class Surd:
    """a + b*sqrt(d) with rational a, b and a squarefree integer d > 1.

    Arithmetic stays inside one quadratic field; mixing different d raises.
    """

    a: Fraction
    b: Fraction
    d: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if self.d < 2:
            raise SpectraError("surd discriminant must be at least 2")

    def _coerce(self, other) -> "Surd":
        if isinstance(other, Surd):
            if other.d != self.d:
                raise SpectraError("mixed surd discriminants")
            return other
        return Surd(Fraction(other), Fraction(0), self.d)

    def __add__(self, other) -> "Surd":
        o = self._coerce(other)
        return Surd(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self) -> "Surd":
        return Surd(-self.a, -self.b, self.d)

    def __sub__(self, other) -> "Surd":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Surd":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "Surd":
        o = self._coerce(other)
        return Surd(self.a * o.a + self.b * o.b * self.d,
                    self.a * o.b + self.b * o.a, self.d)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Surd":
        o = self._coerce(other)
        norm = o.a * o.a - o.b * o.b * o.d
        if norm == 0:
            raise ZeroDivisionError("division by zero surd")
        inv = Surd(o.a / norm, -o.b / norm, self.d)
        return self * inv

    def conjugate(self) -> "Surd":
        return Surd(self.a, -self.b, self.d)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __eq__(self, other) -> bool:
        if isinstance(other, Surd):
            return (self.a, self.b, self.d) == (other.a, other.b, other.d)
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __repr__(self) -> str:
        return f"Surd({self.a}, {self.b}, {self.d})"


def _split_square(m: int) -> tuple[int, int]:
    """m = s*s*d with d squarefree; returns (s, d)."""
    if m <= 0:
        raise SpectraError("expected a positive discriminant")
    s, d = 1, 1
    for prime, exp in sympy.factorint(m).items():
        s *= prime ** (exp // 2)
        if exp % 2:
            d *= prime
    return s, d


# ---------------------------------------------------------------------------
# exact integer polynomials


@dataclass(frozen=True)
class Polynomial:
    """Integer polynomial, coefficients ascending by degree."""

    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        c = tuple(int(v) for v in self.coeffs)
        while len(c) > 1 and c[-1] == 0:
            c = c[:-1]
        if not c:
            c = (0,)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0,)

    def __call__(self, x):
        out = 0
        for c in reversed(self.coeffs):
            out = out * x + c
        return out

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial((0,))
        return Polynomial(tuple(i * self.coeffs[i]
                                for i in range(1, len(self.coeffs))))

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Polynomial(tuple(out))

    def __repr__(self) -> str:
        return f"Polynomial(degree={self.degree})"


def poly_divmod(num: Polynomial, den: Polynomial
                ) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Exact division over the rationals: (quotient, remainder) coefficient
    tuples, ascending."""
    if den.is_zero:
        raise ZeroDivisionError("polynomial division by zero")
    rem = [Fraction(c) for c in num.coeffs]
    dc = [Fraction(c) for c in den.coeffs]
    dn = len(dc) - 1
    lead = dc[-1]
    if len(rem) - 1 < dn:
        return (Fraction(0),), tuple(rem)
    quo = [Fraction(0)] * (len(rem) - dn)
    for shift in range(len(rem) - 1 - dn, -1, -1):
        f = rem[shift + dn] / lead
        quo[shift] = f
        if f:
            for i, c in enumerate(dc):
                rem[shift + i] -= f * c
    while len(rem) > 1 and rem[-1] == 0:
        rem.pop()
    return tuple(quo), tuple(rem)


def poly_divides(den: Polynomial, num: Polynomial) -> bool:
    """True when den divides num exactly over the rationals."""
    _, rem = poly_divmod(num, den)
    return all(c == 0 for c in rem)


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic-content-normalized gcd over the integers (primitive)."""
    x = sympy.Symbol("x")
    pa = sympy.Poly(list(reversed(a.coeffs)), x, domain="ZZ")
    pb = sympy.Poly(list(reversed(b.coeffs)), x, domain="ZZ")
    g = pa.gcd(pb)
    return Polynomial(tuple(int(c) for c in reversed(g.all_coeffs())))


def poly_exact_div(num: Polynomial, den: Polynomial) -> Polynomial:
    quo, rem = poly_divmod(num, den)
    if any(c != 0 for c in rem):
        raise SpectraError("inexact polynomial division")
    out = []
    for c in quo:
        if c.denominator != 1:
            raise SpectraError("non-integer quotient coefficients")
        out.append(int(c))
    return Polynomial(tuple(out))


def char_poly(mat) -> Polynomial:
    """det(xI - M) for a square integer matrix, exactly.

    Faddeev-LeVerrier over Python integers; the final closure step (the
    n-th iterate must vanish) doubles as a self-check.
    """
    arr = np.asarray(mat)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise SpectraError("characteristic polynomial needs a square matrix")
    n = arr.shape[0]
    if n == 0:
        return Polynomial((1,))
    a = [[int(v) for v in row] for row in arr]
    cur = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    for step in range(1, n + 1):
        am = [[sum(a[i][l] * cur[l][j] for l in range(n)) for j in range(n)]
              for i in range(n)]
        tr = sum(am[i][i] for i in range(n))
        if tr % step:
            raise SpectraError("internal error: trace not divisible")
        c = -(tr // step)
        coeffs[n - step] = c
        cur = am
        for i in range(n):
            cur[i][i] += c
    if any(v for row in cur for v in row):
        raise SpectraError("internal error: closure matrix nonzero")
    return Polynomial(tuple(coeffs))


def _primes_63bit(count: int) -> list[int]:
    out: list[int] = []
    p = (1 << 31) - 1
    while len(out) < count:
        p = int(sympy.prevprime(p))
        out.append(p)
    return out


def _charpoly_mod(a: np.ndarray, p: int) -> np.ndarray:
    """Characteristic polynomial mod p via Hessenberg reduction, coefficients
    ascending, length n+1."""
    h = (a.astype(np.int64) % p).copy()
    n = h.shape[0]
    for col in range(n - 2):
        piv = -1
        for r in range(col + 1, n):
            if h[r, col] % p:
                piv = r
                break
        if piv < 0:
            continue
        if piv != col + 1:
            h[[col + 1, piv]] = h[[piv, col + 1]]
            h[:, [col + 1, piv]] = h[:, [piv, col + 1]]
        inv = pow(int(h[col + 1, col]), p - 2, p)
        for r in range(col + 2, n):
            f = int(h[r, col]) * inv % p
            if f:
                h[r] = (h[r] - f * h[col + 1]) % p
                h[:, col + 1] = (h[:, col + 1] + f * h[:, r]) % p
    polys = [np.zeros(n + 1, dtype=np.int64) for _ in range(n + 1)]
    polys[0][0] = 1
    for i in range(1, n + 1):
        prev = polys[i - 1]
        cur = np.zeros(n + 1, dtype=np.int64)
        cur[1:i + 1] = prev[:i]
        cur[:i] = (cur[:i] - int(h[i - 1, i - 1]) * prev[:i]) % p
        run = 1
        for m in range(1, i):
            run = run * int(h[i - m, i - m - 1]) % p
            coef = int(h[i - 1 - m, i - 1]) * run % p
            if coef:
                cur[:i - m] = (cur[:i - m]
                               - coef * polys[i - 1 - m][:i - m]) % p
        polys[i] = cur % p
    return polys[n]


def char_poly_dense(mat: np.ndarray) -> Polynomial:
    """Exact characteristic polynomial of a large integer matrix.

    Hessenberg elimination modulo enough 31-bit primes to cover a Hadamard
    bound on the coefficients, then Chinese remaindering back to signed
    integers.  Linear in primes, cubic in size per prime.
    """
    arr = np.asarray(mat, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise SpectraError("characteristic polynomial needs a square matrix")
    n = arr.shape[0]
    if n == 0:
        return Polynomial((1,))
    if n <= 60:
        return char_poly(arr)
    norms = np.sqrt((arr.astype(np.float64) ** 2).sum(axis=1))
    log_norm = float(np.log2(np.maximum(norms, 1.0)).sum())
    bits = n + log_norm + 4
    primes = _primes_63bit(max(2, math.ceil(bits / 30)))
    residues = [_charpoly_mod(arr, p) for p in primes]
    modulus = 1
    for p in primes:
        modulus *= p
    coeffs: list[int] = []
    for i in range(n + 1):
        acc = 0
        for p, res in zip(primes, residues):
            rest = modulus // p
            acc = (acc + int(res[i]) * rest * pow(rest, -1, p)) % modulus
        if acc > modulus // 2:
            acc -= modulus
        coeffs.append(acc)
    return Polynomial(tuple(coeffs))


# ---------------------------------------------------------------------------
# meet tables


@dataclass(frozen=True)
class MeetTable:
    """k x k table of class intersection sizes between two partitions."""

    k: int
    cells: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.cells) != self.k or any(len(r) != self.k
                                            for r in self.cells):
            raise SpectraError("meet table must be k x k")
        if any(v < 0 for row in self.cells for v in row):
            raise SpectraError("negative intersection count")

    @property
    def n(self) -> int:
        return sum(v for row in self.cells for v in row)

    @property
    def row_sums(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.cells)

    @property
    def col_sums(self) -> tuple[int, ...]:
        return tuple(sum(row[j] for row in self.cells)
                     for j in range(self.k))

    @property
    def meet_value(self) -> int:
        return sum(1 for row in self.cells for v in row if v)

    @property
    def is_qi(self) -> bool:
        return self.meet_value == self.k * self.k

    def transpose(self) -> "MeetTable":
        return MeetTable(self.k, tuple(zip(*self.cells)))


def meet_table(p: Partition, q: Partition) -> MeetTable:
    """Intersection-size table; entry (i, j) is |P_i meet Q_j|."""
    if p.n != q.n or p.k != q.k:
        raise SpectraError("partitions must share ground set and class count")
    return MeetTable(p.k, meet_cells(p, q))


def _canonical_cells(cells: tuple[tuple[int, ...], ...]
                     ) -> tuple[tuple[int, ...], ...]:
    k = len(cells)
    best: tuple[tuple[int, ...], ...] | None = None
    for rp in itertools.permutations(range(k)):
        rows = tuple(cells[i] for i in rp)
        for cp in itertools.permutations(range(k)):
            cand = tuple(tuple(row[j] for j in cp) for row in rows)
            if best is None or cand < best:
                best = cand
    assert best is not None
    return best


def canonical_form(m: MeetTable) -> MeetTable:
    """Lexicographically least table over all row and column permutations.

    Transposition is NOT among the allowed moves, so a table and its
    transpose may have different canonical forms.
    """
    if m.k > 5:
        raise SpectraError("canonical form enumerates permutations; k <= 5")
    return MeetTable(m.k, _canonical_cells(m.cells))


# ---------------------------------------------------------------------------
# the meet-class equitable partition of a uniform family


@dataclass(frozen=True)
class MeetClass:
    table: MeetTable
    rep: Partition
    size: int


@dataclass(frozen=True)
class MeetClassPartition:
    """Classes of uniform k-partitions of an n-set by the isomorphism type
    of their meet table with the fixed block partition P*.

    Classes are numbered in order of first appearance in the canonical
    enumeration, so class 0 is always the singleton {P*} and each class
    representative is its least member.
    """

    n: int
    k: int
    base: Partition
    classes: tuple[MeetClass, ...]

    def __post_init__(self) -> None:
        if not self.classes or self.classes[0].size != 1:
            raise SpectraError("class of the base partition must come first "
                               "and be a singleton")
        total = sum(c.size for c in self.classes)
        if total != count_partitions(self.n, self.k, "uniform"):
            raise SpectraError("class sizes do not cover the family")

    @property
    def m(self) -> int:
        return len(self.classes)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(c.size for c in self.classes)

    @property
    def meet_order(self) -> tuple[int, ...]:
        """Class indices sorted by (meet value, table); at (9,3) this is the
        identity-then-meet-5-6-7-9 order."""
        key = [(c.table.meet_value, c.table.cells, i)
               for i, c in enumerate(self.classes)]
        return tuple(i for _, _, i in sorted(key))

    @property
    def qi_class_indices(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.classes) if c.table.is_qi)

    def class_of(self, q: Partition) -> int:
        cells = _canonical_cells(meet_table(self.base, q).cells)
        for i, c in enumerate(self.classes):
            if c.table.cells == cells:
                return i
        raise SpectraError("partition is outside every class")


def _base_labels(n: int, k: int) -> np.ndarray:
    return np.repeat(np.arange(k, dtype=np.uint8), n // k)


def _check_kernel_domain(n: int, k: int) -> None:
    if not 2 <= k <= 4:
        raise SpectraError("meet-class streaming supports 2 <= k <= 4")
    if n // k > 15:
        raise SpectraError("meet-class streaming needs class size <= 15")


def _label_chunks(n: int, k: int, size: int = 65536) -> Iterator[np.ndarray]:
    it = iter_labels(n, k, "uniform")
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield np.frombuffer(b"".join(block), dtype=np.uint8).reshape(-1, n)


def _unpack_code(code: int, k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(code >> 4 * (i * k + j) & 0xF for j in range(k))
                 for i in range(k))


def _pack_cells(cells: Sequence[Sequence[int]], k: int) -> int:
    code = 0
    for i in range(k):
        for j in range(k):
            code |= int(cells[i][j]) << 4 * (i * k + j)
    return code


class _CodeMap:
    """Growing map from raw meet-table codes to class ids, with vectorized
    lookup through a sorted snapshot."""

    def __init__(self, k: int) -> None:
        self.k = k
        self.raw: dict[int, int] = {}
        self.canon: dict[tuple, int] = {}
        self._codes = np.zeros(0, dtype=np.uint64)
        self._ids = np.zeros(0, dtype=np.int64)

    def _rebuild(self) -> None:
        codes = np.fromiter(self.raw.keys(), dtype=np.uint64,
                            count=len(self.raw))
        ids = np.fromiter(self.raw.values(), dtype=np.int64,
                          count=len(self.raw))
        order = np.argsort(codes)
        self._codes = codes[order]
        self._ids = ids[order]

    def map_chunk(self, codes: np.ndarray,
                  on_new: "callable" = None) -> np.ndarray:
        """Class id per code; unseen codes go through on_new(code) -> id
        in order of first appearance, or raise when on_new is None."""
        uniq, first = np.unique(codes, return_index=True)
        fresh = [(int(first[i]), int(uniq[i]))
                 for i in range(len(uniq)) if int(uniq[i]) not in self.raw]
        if fresh:
            if on_new is None:
                raise SpectraError("internal error: unexpected meet table")
            for _, code in sorted(fresh):
                self.raw[code] = on_new(code)
            self._rebuild()
        pos = np.searchsorted(self._codes, codes)
        return self._ids[pos]

    def class_for(self, code: int, register) -> int:
        cells = _canonical_cells(_unpack_code(code, self.k))
        cid = self.canon.get(cells)
        if cid is None:
            cid = register(cells)
            self.canon[cells] = cid
        return cid


_MCP_CACHE: dict[tuple[int, int], MeetClassPartition] = {}
_TENSOR_CACHE: dict[tuple[int, int], np.ndarray] = {}


def equitable_partition(n: int, k: int,
                        cap: int | None = None) -> MeetClassPartition:
    """Build the meet-table class partition of the uniform family.

    One streaming pass; memory stays proportional to the number of classes.
    The family size is checked against the cap (default 5e6, overridable by
    QICA_STREAM_CAP) before enumeration starts.
    """
    if k < 2 or n % k:
        raise SpectraError("need k >= 2 and k dividing n")
    _check_kernel_domain(n, k)
    if (n, k) in _MCP_CACHE:
        return _MCP_CACHE[(n, k)]
    total = count_partitions(n, k, "uniform")
    limit = _stream_cap(cap)
    if total > limit:
        raise StreamCapExceeded(
            f"uniform family of ({n},{k}) has {total} members, over the "
            f"streaming cap of {limit}; raise QICA_STREAM_CAP to proceed")
    base = _base_labels(n, k)
    cmap = _CodeMap(k)
    tables: list[tuple[tuple[int, ...], ...]] = []
    reps: list[bytes] = []
    sizes = np.zeros(0, dtype=np.int64)

    for chunk in _label_chunks(n, k):
        codes = _kernels.meet_codes(chunk, base, k)
        first_of: dict[int, int] = {}
        uniq, first = np.unique(codes, return_index=True)
        for u, f in zip(uniq, first):
            first_of[int(u)] = int(f)

        def register(cells, chunk=chunk, first_of=first_of):
            tables.append(cells)
            return len(tables) - 1

        def on_new(code, chunk=chunk, first_of=first_of):
            before = len(tables)
            cid = cmap.class_for(code, lambda cells: register(cells))
            if len(tables) > before:
                reps.append(chunk[first_of[code]].tobytes())
            return cid

        ids = cmap.map_chunk(codes, on_new)
        if len(tables) > len(sizes):
            grown = np.zeros(len(tables), dtype=np.int64)
            grown[:len(sizes)] = sizes
            sizes = grown
        sizes += np.bincount(ids, minlength=len(tables))

    classes = tuple(
        MeetClass(MeetTable(k, tables[i]),
                  Partition.from_labels(reps[i]), int(sizes[i]))
        for i in range(len(tables)))
    mcp = MeetClassPartition(n, k, Partition.from_labels(base.tobytes()),
                             classes)
    _MCP_CACHE[(n, k)] = mcp
    return mcp


def scheme_quotients(mcp: MeetClassPartition) -> np.ndarray:
    """Quotient matrices of every meet-class relation, as one (m, m, m)
    tensor: entry [i, c, d] counts the class-d partitions whose meet table
    with class c's representative has type i.

    Streaming pass number two; the result is cached per (n, k).
    """
    key = (mcp.n, mcp.k)
    if key in _TENSOR_CACHE:
        return _TENSOR_CACHE[key]
    n, k, m = mcp.n, mcp.k, mcp.m
    base = _base_labels(n, k)
    reps = np.stack([np.frombuffer(c.rep.labels, dtype=np.uint8)
                     for c in mcp.classes])
    cmap = _CodeMap(k)
    for i, c in enumerate(mcp.classes):
        cmap.canon[c.table.cells] = i

    def on_new(code):
        cells = _canonical_cells(_unpack_code(code, k))
        cid = cmap.canon.get(cells)
        if cid is None:
            raise SpectraError("internal error: meet table outside classes")
        return cid

    tensor = np.zeros((m, m, m), dtype=np.int64)
    for chunk in _label_chunks(n, k):
        d_ids = cmap.map_chunk(_kernels.meet_codes(chunk, base, k), on_new)
        for c in range(m):
            codes = _kernels.meet_codes(chunk, reps[c], k)
            e_ids = cmap.map_chunk(codes, on_new)
            flat = np.bincount(e_ids * m + d_ids, minlength=m * m)
            tensor[:, c, :] += flat.reshape(m, m)
    _TENSOR_CACHE[key] = tensor
    return tensor


def _relation_indices(mcp: MeetClassPartition, relation) -> tuple[int, ...]:
    if isinstance(relation, int):
        if not 0 <= relation < mcp.m:
            raise SpectraError(f"no class {relation}")
        return (relation,)
    if relation == "qi":
        idx = mcp.qi_class_indices
        if not idx:
            raise SpectraError("no qualitatively independent class")
        return idx
    if isinstance(relation, str) and relation.startswith("meet-"):
        try:
            want = int(relation[5:])
        except ValueError as exc:
            raise SpectraError(f"bad relation {relation!r}") from exc
        idx = tuple(i for i, c in enumerate(mcp.classes)
                    if c.table.meet_value == want)
        if not idx:
            raise SpectraError(f"no class with meet value {want}")
        return idx
    raise SpectraError(f"unknown relation {relation!r}")


@dataclass(frozen=True)
class QuotientMatrix:
    """entries[c][d] counts class-d vertices adjacent to one (any) vertex of
    class c; rows all sum to the relation's degree."""

    relation: str
    entries: tuple[tuple[int, ...], ...]
    sizes: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def row_sums(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.entries)

    @property
    def degree(self) -> int:
        sums = set(self.row_sums)
        if len(sums) != 1:
            raise SpectraError("relation graph is not regular")
        return sums.pop()

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def reordered(self, order: Sequence[int]) -> np.ndarray:
        arr = self.as_array()
        idx = np.array(order)
        return arr[np.ix_(idx, idx)]


def quotient_matrix(mcp: MeetClassPartition, relation) -> QuotientMatrix:
    """Quotient of one relation graph over the meet-class partition.

    relation: a class index, "meet-<v>" (all classes of that meet value),
    or "qi" (all classes with every cell positive).
    """
    tensor = scheme_quotients(mcp)
    idx = _relation_indices(mcp, relation)
    mat = tensor[list(idx)].sum(axis=0)
    return QuotientMatrix(str(relation),
                          tuple(tuple(int(v) for v in row) for row in mat),
                          mcp.sizes)


def quotient_row(mcp: MeetClassPartition, rep: Partition,
                 relation) -> tuple[int, ...]:
    """Recompute one quotient row from an arbitrary representative; used to
    spot-check equitability (the row must not depend on the choice)."""
    if rep.n != mcp.n or rep.k != mcp.k:
        raise SpectraError("representative outside the family")
    n, k, m = mcp.n, mcp.k, mcp.m
    base = _base_labels(n, k)
    rep_arr = np.frombuffer(rep.labels, dtype=np.uint8)
    cmap = _CodeMap(k)
    for i, c in enumerate(mcp.classes):
        cmap.canon[c.table.cells] = i

    def on_new(code):
        cells = _canonical_cells(_unpack_code(code, k))
        cid = cmap.canon.get(cells)
        if cid is None:
            raise SpectraError("internal error: meet table outside classes")
        return cid

    want = set(_relation_indices(mcp, relation))
    counts = np.zeros(m, dtype=np.int64)
    for chunk in _label_chunks(n, k):
        d_ids = cmap.map_chunk(_kernels.meet_codes(chunk, base, k), on_new)
        e_ids = cmap.map_chunk(_kernels.meet_codes(chunk, rep_arr, k), on_new)
        sel = np.isin(e_ids, list(want))
        counts += np.bincount(d_ids[sel], minlength=m)
    return tuple(int(v) for v in counts)


# ---------------------------------------------------------------------------
# spectra with exact multiplicities


@dataclass(frozen=True)
class SpectrumEntry:
    value: object  # int | Fraction | Surd | float
    multiplicity: int
    kind: str  # "exact" | "numeric"


@dataclass(frozen=True)
class Spectrum:
    relation: str
    size: int
    degree: int
    entries: tuple[SpectrumEntry, ...]

    @property
    def exact(self) -> bool:
        return all(e.kind == "exact" for e in self.entries)

    def multiplicity_of(self, value) -> int:
        for e in self.entries:
            if e.value == value:
                return e.multiplicity
        raise KeyError(value)

    @property
    def least(self) -> SpectrumEntry:
        return min(self.entries, key=lambda e: float(e.value))


def _assert_spectrum_invariants(entries: Sequence[SpectrumEntry],
                                size: int, degree: int) -> None:
    """Sum of multiplicities is |V|, the weighted eigenvalue sum vanishes,
    and the weighted square sum is |V| times the degree.  Exact spectra are
    checked exactly, with surd parts tracked per discriminant."""
    total = sum(e.multiplicity for e in entries)
    if total != size:
        raise SpectraError(f"multiplicities sum to {total}, expected {size}")
    if all(e.kind == "exact" for e in entries):
        s1 = Fraction(0)
        s2 = Fraction(0)
        irr1: dict[int, Fraction] = {}
        irr2: dict[int, Fraction] = {}
        for e in entries:
            m = e.multiplicity
            if isinstance(e.value, Surd):
                a, b, d = e.value.a, e.value.b, e.value.d
                s1 += a * m
                s2 += (a * a + b * b * d) * m
                irr1[d] = irr1.get(d, Fraction(0)) + b * m
                irr2[d] = irr2.get(d, Fraction(0)) + 2 * a * b * m
            else:
                s1 += Fraction(e.value) * m
                s2 += Fraction(e.value) * e.value * m
        if s1 != 0 or any(irr1.values()) or \
                s2 != size * degree or any(irr2.values()):
            raise SpectraError("spectrum power sums are inconsistent")
    else:
        s1 = sum(float(e.value) * e.multiplicity for e in entries)
        s2 = sum(float(e.value) ** 2 * e.multiplicity for e in entries)
        if abs(s1) > 1e-3 * size or abs(s2 - size * degree) > 1e-3 * size:
            raise SpectraError("numeric spectrum power sums are off")


def _spectrum_from_quotient(q: QuotientMatrix, size: int) -> Spectrum:
    arr = q.as_array()
    degree = q.degree
    full = char_poly(arr)
    minor = char_poly(arr[1:, 1:])
    g = poly_gcd(full, minor)
    den = poly_exact_div(full, g)
    num = poly_exact_div(minor, g)
    num = Polynomial(tuple(size * c for c in num.coeffs))
    dden = den.derivative()
    x = sympy.Symbol("x")
    factors = sympy.factor_list(
        sympy.Poly(list(reversed(den.coeffs)), x, domain="ZZ"))[1]
    entries: list[SpectrumEntry] = []
    for poly, mult in factors:
        if mult != 1:
            raise SpectraError("reduced denominator has a repeated factor")
        cs = [int(v) for v in poly.all_coeffs()]
        if len(cs) == 2:
            lead, c0 = cs
            if lead != 1:
                raise SpectraError("non-monic factor of a monic polynomial")
            lam = -c0
            res = Fraction(num(lam), dden(lam))
            if res.denominator != 1 or res <= 0:
                raise SpectraError("non-integer multiplicity")
            entries.append(SpectrumEntry(lam, int(res), "exact"))
        elif len(cs) == 3:
            lead, c1, c0 = cs
            if lead != 1:
                raise SpectraError("non-monic factor of a monic polynomial")
            disc = c1 * c1 - 4 * c0
            if disc <= 0:
                raise SpectraError("complex eigenvalues of a real spectrum")
            s, d = _split_square(disc)
            for sign in (1, -1):
                lam = Surd(Fraction(-c1, 2), Fraction(sign * s, 2), d)
                res = num(lam) / dden(lam)
                if not res.is_rational or res.a.denominator != 1 or res.a <= 0:
                    raise SpectraError("non-integer surd multiplicity")
                entries.append(SpectrumEntry(lam, int(res.a), "exact"))
        else:
            roots = np.roots(np.array(cs, dtype=np.float64))
            nd = num
            for r in roots:
                if abs(r.imag) > 1e-9:
                    raise SpectraError("complex eigenvalues of a real "
                                       "spectrum")
                rv = float(r.real)
                res = float(nd(rv)) / float(dden(rv))
                rounded = round(res)
                if abs(res - rounded) > 1e-6:
                    raise SpectraError("numeric residue too far from an "
                                       "integer")
                entries.append(SpectrumEntry(rv, int(rounded), "numeric"))
    entries.sort(key=lambda e: -float(e.value))
    _assert_spectrum_invariants(entries, size, degree)
    return Spectrum(q.relation, size, degree, tuple(entries))


def spectrum(n: int, k: int, relation="qi",
             cap: int | None = None) -> Spectrum:
    """Eigenvalues with exact multiplicities of a meet-class relation graph
    on the uniform k-partitions of an n-set.

    Roots come from the quotient characteristic polynomial; multiplicities
    are the residues of |V| phi(quotient without the base class) /
    phi(quotient), computed exactly for integer and quadratic-surd
    eigenvalues and numerically (flagged) otherwise.
    """
    mcp = equitable_partition(n, k, cap)
    q = quotient_matrix(mcp, relation)
    size = count_partitions(n, k, "uniform")
    return _spectrum_from_quotient(q, size)


# ---------------------------------------------------------------------------
# modified matrix of eigenvalues


@dataclass(frozen=True)
class EigenMatrix:
    """Rows are common eigenspaces of all meet-class relation quotients;
    the first column holds multiplicities, remaining columns the eigenvalue
    of each non-identity relation (classes in discovery order)."""

    n: int
    k: int
    class_ids: tuple[int, ...]
    multiplicities: tuple[int, ...]
    values: tuple[tuple[object, ...], ...]
    commuting: bool
    exact: bool
    failure: tuple[int, int] | None = None
    column_names: tuple[str, ...] | None = None

    @property
    def rows(self) -> tuple[tuple[object, ...], ...]:
        return tuple((m,) + v
                     for m, v in zip(self.multiplicities, self.values))


def _common_eigenbasis_exact(mats: list[sympy.Matrix]) -> list[sympy.Matrix]:
    """Refine eigenspace blocks across commuting rational matrices down to
    one-dimensional common eigenvectors.  Raises when an eigenvalue is not
    rational (callers fall back to the numeric route)."""
    m = mats[0].rows
    blocks = [sympy.eye(m)]
    for a in mats:
        refined: list[sympy.Matrix] = []
        for basis in blocks:
            if basis.cols == 1:
                refined.append(basis)
                continue
            gram = (basis.T * basis).inv()
            restr = gram * basis.T * (a * basis)
            if any(not v.is_rational for v in restr.eigenvals()):
                raise SpectraError("irrational eigenvalue")
            for _, _, vecs in restr.eigenvects():
                sub = sympy.Matrix.hstack(*vecs)
                refined.append(basis * sub)
        blocks = refined
        if all(b.cols == 1 for b in blocks):
            break
    if any(b.cols != 1 for b in blocks):
        raise SpectraError("common eigenspaces did not separate")
    return blocks


def _eigen_rows_exact(quotients: list[np.ndarray], sizes: Sequence[int],
                      size: int) -> tuple[list[int], list[tuple]]:
    mats = [sympy.Matrix(q.tolist()) for q in quotients]
    blocks = _common_eigenbasis_exact(mats)
    rows: list[tuple] = []
    mults: list[int] = []
    for vec in blocks:
        pivot = next(i for i in range(vec.rows) if vec[i] != 0)
        values = []
        for a in mats:
            img = a * vec
            lam = sympy.Rational(img[pivot], vec[pivot])
            if any(v != 0 for v in img - lam * vec):
                raise SpectraError("internal error: not an eigenvector")
            values.append(lam)
        denom = Fraction(1)  # identity relation contributes 1^2 / 1
        for lam, v in zip(values, sizes[1:]):
            lf = Fraction(int(lam.p), int(lam.q))
            denom += lf * lf / v
        mult = Fraction(size) / denom
        if mult.denominator != 1:
            raise SpectraError("non-integer eigenspace multiplicity")
        mults.append(int(mult))
        out = []
        for lam in values:
            lf = Fraction(int(lam.p), int(lam.q))
            out.append(int(lf) if lf.denominator == 1 else lf)
        rows.append(tuple(out))
    return mults, rows


def _eigen_rows_numeric(quotients: list[np.ndarray], sizes: Sequence[int],
                        size: int) -> tuple[list[int], list[tuple]]:
    m = quotients[0].shape[0]
    scale = np.sqrt(np.array(sizes, dtype=np.float64))
    sym = [q * scale[:, None] / scale[None, :] for q in quotients]
    rng = np.random.default_rng(0)
    weights = rng.normal(size=len(sym))
    mix = sum(w * s for w, s in zip(weights, sym))
    mix = (mix + mix.T) / 2
    _, vecs = np.linalg.eigh(mix)
    cols = []
    for a in sym:
        cols.append(np.einsum("im,ij,jm->m", vecs, a, vecs))
    tuples = np.stack(cols, axis=1)
    seen: dict[tuple, list[int]] = {}
    for idx in range(m):
        key = tuple(round(float(v), 6) for v in tuples[idx])
        seen.setdefault(key, []).append(idx)
    mults: list[int] = []
    rows: list[tuple] = []
    for key in seen:
        denom = 1.0
        for lam, v in zip(key, sizes[1:]):
            denom += lam * lam / v
        mult = size / denom
        rounded = round(mult)
        if abs(mult - rounded) > 1e-3:
            raise SpectraError("numeric eigenspace multiplicity is not "
                               "near an integer")
        mults.append(int(rounded))
        rows.append(tuple(float(v) for v in key))
    return mults, rows


def modified_eigenmatrix(n: int, k: int,
                         cap: int | None = None) -> EigenMatrix:
    """The multiplicity column plus one eigenvalue column per non-identity
    meet-class relation, rows indexed by common eigenspaces.

    Quotient matrices that fail to commute are evidence against the scheme
    and yield an EigenMatrix with commuting=False and no rows.
    """
    mcp = equitable_partition(n, k, cap)
    tensor = scheme_quotients(mcp)
    m = mcp.m
    ids = tuple(range(1, m))
    quots = [tensor[i] for i in ids]
    for a in range(len(quots)):
        for b in range(a + 1, len(quots)):
            if not np.array_equal(quots[a] @ quots[b],
                                  quots[b] @ quots[a]):
                return EigenMatrix(n, k, ids, (), (), False, True,
                                   (ids[a], ids[b]))
    size = count_partitions(n, k, "uniform")
    sizes = mcp.sizes
    try:
        mults, rows = _eigen_rows_exact(quots, sizes, size)
        exact = True
    except SpectraError:
        mults, rows = _eigen_rows_numeric(quots, sizes, size)
        exact = False
    order = sorted(range(len(mults)),
                   key=lambda i: (mults[i] != 1,
                                  [-float(v) for v in rows[i]]))
    mults = [mults[i] for i in order]
    rows = [rows[i] for i in order]
    if sum(mults) != size:
        raise SpectraError("eigenspace multiplicities do not sum to |V|")
    return EigenMatrix(n, k, ids, tuple(mults), tuple(rows), True, exact)


# ---------------------------------------------------------------------------
# association-scheme verification


@dataclass(frozen=True)
class SchemeCounterexample:
    kind: str  # "symmetry" | "intersection"
    pair: tuple[Partition, Partition]
    relations: tuple[int, int] | None
    expected: int | None
    got: int | None


@dataclass(frozen=True)
class SchemeVerdict:
    status: str  # "confirmed" | "refuted" | "consistent"
    mode: str
    classes: int
    symmetric: bool
    counterexample: SchemeCounterexample | None
    p_numbers: np.ndarray | None
    pairs_checked: int

    @property
    def is_scheme(self) -> bool | None:
        if self.status == "confirmed":
            return True
        if self.status == "refuted":
            return False
        return None


def _symmetry_scan(mcp: MeetClassPartition) -> tuple[Partition, Partition] | None:
    """Compare canonical forms of the meet table with the base and of its
    transpose, for every member of the family.

    Every pair (P, Q) is a relabeling of some (P*, Q'), so scanning the base
    alone decides symmetry for all pairs.
    """
    n, k = mcp.n, mcp.k
    base = _base_labels(n, k)
    canon_of: dict[int, tuple] = {}

    def canon(code: int) -> tuple:
        got = canon_of.get(code)
        if got is None:
            got = _canonical_cells(_unpack_code(code, k))
            canon_of[code] = got
        return got

    for chunk in _label_chunks(n, k):
        codes, codes_t = _kernels.meet_codes_both(chunk, base, k)
        if np.array_equal(codes, codes_t):
            continue
        diff = codes != codes_t
        for idx in np.flatnonzero(diff):
            a = canon(int(codes[idx]))
            b = canon(int(codes_t[idx]))
            if a != b:
                q = Partition.from_labels(chunk[idx].tobytes())
                return mcp.base, q
    return None


def _variant_code_table(mcp: MeetClassPartition
                        ) -> tuple[np.ndarray, np.ndarray]:
    k = mcp.k
    mapping: dict[int, int] = {}
    for cid, cls in enumerate(mcp.classes):
        cells = cls.table.cells
        for rp in itertools.permutations(range(k)):
            rows = tuple(cells[i] for i in rp)
            for cp in itertools.permutations(range(k)):
                code = _pack_cells(
                    tuple(tuple(row[j] for j in cp) for row in rows), k)
                old = mapping.setdefault(code, cid)
                if old != cid:
                    raise SpectraError("internal error: meet-table classes "
                                       "overlap")
    codes = np.fromiter(mapping.keys(), dtype=np.uint64, count=len(mapping))
    ids = np.fromiter(mapping.values(), dtype=np.int64, count=len(mapping))
    order = np.argsort(codes)
    return codes[order], ids[order].astype(np.int8)


def _full_scheme_check(mcp: MeetClassPartition,
                       tensor: np.ndarray) -> SchemeVerdict:
    n, k, m = mcp.n, mcp.k, mcp.m
    labels = np.frombuffer(b"".join(iter_labels(n, k, "uniform")),
                           dtype=np.uint8).reshape(-1, n)
    nv = labels.shape[0]
    sorted_codes, ids = _variant_code_table(mcp)
    cls_mat = _kernels.pair_class_matrix(labels, k, sorted_codes, ids)
    if (cls_mat < 0).any():
        raise SpectraError("internal error: unclassified pair")
    if not np.array_equal(cls_mat, cls_mat.T):
        raise SpectraError("internal error: pair classes not symmetric "
                           "after the symmetry scan passed")
    p_pred = np.zeros((m, m, m), dtype=np.int64)
    for c in range(m):
        for i in range(m):
            for j in range(m):
                p_pred[c, i, j] = tensor[j, c, i]
    lut = np.zeros(m, dtype=np.float32)
    pairs_checked = 0
    for i in range(1, m):
        # 0/1 entries, inner dimension below 2**24: float32 products exact
        adj_i = (cls_mat == i).astype(np.float32)
        for j in range(i, m):
            adj_j = adj_i if j == i else (cls_mat == j).astype(np.float32)
            prod = adj_i @ adj_j
            pairs_checked += nv * nv
            for c in range(m):
                lut[c] = float(p_pred[c, i, j])
            want = lut[cls_mat]
            if not np.array_equal(prod, want):
                bad = np.argwhere(prod != want)
                u, v = int(bad[0][0]), int(bad[0][1])
                ce = SchemeCounterexample(
                    "intersection",
                    (Partition.from_labels(labels[u].tobytes()),
                     Partition.from_labels(labels[v].tobytes())),
                    (i, j), int(want[u, v]), int(round(float(prod[u, v]))))
                return SchemeVerdict("refuted", "full", m, True, ce,
                                     None, pairs_checked)
            del prod, want
    return SchemeVerdict("confirmed", "full", m, True, None, p_pred,
                         pairs_checked)


def check_association_scheme(n: int, k: int, mode: str = "full",
                             samples: int = 3, seed: int = 0,
                             cap: int | None = None) -> SchemeVerdict:
    """Decide (full) or probe (sampled) whether the meet-class relation
    graphs form an association scheme on the uniform k-partitions.

    Both modes first run the complete symmetry scan against the base
    partition, which settles symmetry for every pair of the family.  Full
    mode then verifies every intersection number by boolean matrix products
    (vertex count capped at 10000); sampled mode checks the common-neighbor
    profile of `samples` random pairs per class, with random relabelings so
    the pairs are in general position.
    """
    if mode not in ("full", "sampled"):
        raise SpectraError(f"unknown mode {mode!r}")
    mcp = equitable_partition(n, k, cap)
    bad = _symmetry_scan(mcp)
    if bad is not None:
        ce = SchemeCounterexample("symmetry", bad, None, None, None)
        return SchemeVerdict("refuted", mode, mcp.m, False, ce, None,
                             count_partitions(n, k, "uniform"))
    tensor = scheme_quotients(mcp)
    if mode == "full":
        nv = count_partitions(n, k, "uniform")
        limit = DEFAULT_FULL_CHECK_CAP
        if nv > limit:
            raise StreamCapExceeded(
                f"full mode handles at most {limit} vertices, "
                f"({n},{k}) has {nv}; use sampled mode")
        return _full_scheme_check(mcp, tensor)
    return _sampled_scheme_check(mcp, tensor, samples, seed)


def _sampled_scheme_check(mcp: MeetClassPartition, tensor: np.ndarray,
                          samples: int, seed: int) -> SchemeVerdict:
    n, k, m = mcp.n, mcp.k, mcp.m
    rng = np.random.default_rng(seed)
    base = _base_labels(n, k)
    cmap = _CodeMap(k)
    for i, c in enumerate(mcp.classes):
        cmap.canon[c.table.cells] = i

    def on_new(code):
        cells = _canonical_cells(_unpack_code(code, k))
        cid = cmap.canon.get(cells)
        if cid is None:
            raise SpectraError("internal error: meet table outside classes")
        return cid

    reservoir: dict[int, list[bytes]] = {i: [] for i in range(1, m)}
    seen = np.zeros(m, dtype=np.int64)
    for chunk in _label_chunks(n, k):
        ids = cmap.map_chunk(_kernels.meet_codes(chunk, base, k), on_new)
        for cid in range(1, m):
            for idx in np.flatnonzero(ids == cid):
                seen[cid] += 1
                pool = reservoir[cid]
                if len(pool) < samples:
                    pool.append(chunk[idx].tobytes())
                else:
                    slot = rng.integers(0, seen[cid])
                    if slot < samples:
                        pool[slot] = chunk[idx].tobytes()
    base_part = mcp.base
    pairs_checked = 0
    for cid in range(1, m):
        for raw in reservoir[cid]:
            # random relabeling puts the pair in general position while
            # keeping its meet-table class
            perm = rng.permutation(n)
            xa = np.frombuffer(base_part.labels, dtype=np.uint8)[perm]
            ya = np.frombuffer(raw, dtype=np.uint8)[perm]
            hist = np.zeros((m, m), dtype=np.int64)
            for chunk in _label_chunks(n, k):
                di = cmap.map_chunk(_kernels.meet_codes(chunk, xa, k), on_new)
                dj = cmap.map_chunk(_kernels.meet_codes(chunk, ya, k), on_new)
                hist += np.bincount(di * m + dj,
                                    minlength=m * m).reshape(m, m)
            pairs_checked += 1
            want = np.zeros((m, m), dtype=np.int64)
            for i in range(m):
                for j in range(m):
                    want[i, j] = tensor[j, cid, i]
            if not np.array_equal(hist, want):
                bad = np.argwhere(hist != want)[0]
                ce = SchemeCounterexample(
                    "intersection",
                    (Partition.from_labels(xa.tobytes()),
                     Partition.from_labels(ya.tobytes())),
                    (int(bad[0]), int(bad[1])),
                    int(want[bad[0], bad[1]]), int(hist[bad[0], bad[1]]))
                return SchemeVerdict("refuted", "sampled", m, True, ce,
                                     None, pairs_checked)
    return SchemeVerdict("consistent", "sampled", m, True, None, None,
                         pairs_checked)


# ---------------------------------------------------------------------------
# ratio bounds


def ratio_bounds(v: int, d: int, tau) -> tuple[Fraction, Fraction]:
    """(alpha bound, omega bound) = (v / (1 - d/tau), 1 - d/tau), exact.

    Needs a regular graph's vertex count, degree, and (negative) least
    eigenvalue.
    """
    tau = Fraction(tau)
    if v <= 0 or d <= 0:
        raise SpectraError("need positive vertex count and degree")
    if tau >= 0:
        raise SpectraError("least eigenvalue must be negative")
    omega = 1 - Fraction(d) / tau
    return Fraction(v) / omega, omega


# ---------------------------------------------------------------------------
# Kneser quotient utility


def _comb0(a: int, b: int) -> int:
    return math.comb(a, b) if 0 <= b <= a else 0


def kneser_fix_quotient(n: int, r: int) -> np.ndarray:
    """Quotient of the Kneser graph over the partition by intersection size
    with a fixed r-set: entry (i, j) = C(i, r-j) * C(n-r-i, j).

    Classes are indexed by i = |S meet A| for the fixed r-set A; class i of
    a neighbor T splits as choosing r-j points of A from the i points S
    shares with A, avoided by T, and j points of T outside both."""
    if not 1 <= r <= n // 2:
        raise SpectraError("need 1 <= r <= n/2")
    out = np.zeros((r + 1, r + 1), dtype=np.int64)
    for i in range(r + 1):
        for j in range(r + 1):
            out[i, j] = _comb0(i, r - j) * _comb0(n - r - i, j)
    return out


def kneser_eigenvalues(n: int, r: int) -> tuple[int, ...]:
    """(-1)^i C(n-r-i, r-i) for i = 0..r."""
    if not 1 <= r <= n // 2:
        raise SpectraError("need 1 <= r <= n/2")
    return tuple((-1) ** i * _comb0(n - r - i, r - i)
                 for i in range(r + 1))


# ---------------------------------------------------------------------------
# the two-class split by one point pair


def simple_split_quotient(n: int, k: int,
                          cap: int | None = None
                          ) -> tuple[np.ndarray, int, int, int]:
    """Quotient over {partitions keeping points 0,1 together; the rest} of
    the uniform qualitative independence graph.

    Returns (2x2 quotient, a, b, d): a and b are the inside-neighbor counts
    of an inside and an outside vertex, d the degree.  The split is an orbit
    partition, hence equitable; a second representative of each side is
    checked to agree.  Eigenvalues of the quotient are d and a - b.
    """
    if k < 2 or n % k:
        raise SpectraError("need k >= 2 and k dividing n")
    _check_kernel_domain(n, k)
    total = count_partitions(n, k, "uniform")
    limit = _stream_cap(cap)
    if total > limit:
        raise StreamCapExceeded(f"family size {total} over cap {limit}")
    inside: list[np.ndarray] = []
    outside: list[np.ndarray] = []
    for chunk in _label_chunks(n, k):
        for row in chunk:
            if len(inside) < 2 and row[1] == row[0]:
                inside.append(row.copy())
            elif len(outside) < 2 and row[1] != row[0]:
                outside.append(row.copy())
        if len(inside) == 2 and len(outside) == 2:
            break
    if len(inside) < 2 or len(outside) < 2:
        raise SpectraError("family too small for the two-class split")
    reps = np.stack(inside + outside)
    counts = np.zeros((4, 2), dtype=np.int64)
    for chunk in _label_chunks(n, k):
        flags = _kernels.qi_flags(chunk, reps, k)
        member = (chunk[:, 1] == chunk[:, 0]).astype(np.int64)
        for ridx in range(4):
            sel = flags[:, ridx].astype(bool)
            counts[ridx, 1] += int(sel.sum())
            counts[ridx, 0] += int(member[sel].sum())
    counts[:, 1] -= counts[:, 0]
    if not np.array_equal(counts[0], counts[1]):
        raise SpectraError("inside representatives disagree; split is not "
                           "equitable")
    if not np.array_equal(counts[2], counts[3]):
        raise SpectraError("outside representatives disagree; split is not "
                           "equitable")
    a, rest_in = int(counts[0][0]), int(counts[0][1])
    b, rest_out = int(counts[2][0]), int(counts[2][1])
    d = a + rest_in
    if d != b + rest_out:
        raise SpectraError("degree mismatch between the two sides")
    quot = np.array([[a, d - a], [b, d - b]], dtype=np.int64)
    return quot, a, b, d


# ---------------------------------------------------------------------------
# text and JSON output


def _format_value(value) -> str:
    if isinstance(value, bool):
        raise SpectraError("not an eigenvalue")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else \
            f"{value.numerator}/{value.denominator}"
    if isinstance(value, Surd):
        a = _format_value(value.a)
        b = value.b
        sign = "+" if b >= 0 else "-"
        babs = _format_value(abs(b))
        mul = "" if babs == "1" else f"{babs}*"
        return f"{a}{sign}{mul}sqrt({value.d})"
    return repr(float(value))


_SURD_RE = re.compile(
    r"^(-?\d+(?:/\d+)?)([+-])(?:(\d+(?:/\d+)?)\*)?sqrt\((\d+)\)$")


def _parse_value(text: str):
    t = text.strip()
    m = _SURD_RE.match(t)
    if m:
        a = Fraction(m.group(1))
        b = Fraction(m.group(3)) if m.group(3) else Fraction(1)
        if m.group(2) == "-":
            b = -b
        return Surd(a, b, int(m.group(4)))
    try:
        f = Fraction(t)
    except ValueError:
        try:
            return float(t)
        except ValueError as exc:
            raise SpectraError(f"bad eigenvalue {text!r}") from exc
    return int(f) if f.denominator == 1 else f


def spectrum_to_text(s: Spectrum) -> str:
    lines = [f"# spectrum {s.relation} {s.size} {s.degree}"]
    for e in s.entries:
        lines.append(f"{_format_value(e.value)}\t{e.multiplicity}\t{e.kind}")
    return "\n".join(lines) + "\n"


def spectrum_from_text(text: str) -> Spectrum:
    relation, size, degree = "", -1, -1
    entries: list[SpectrumEntry] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line.split()
            if len(parts) == 5 and parts[1] == "spectrum":
                relation = parts[2]
                size, degree = int(parts[3]), int(parts[4])
            continue
        parts = line.split("\t")
        if len(parts) != 3 or parts[2] not in ("exact", "numeric"):
            raise SpectraError(f"line {lineno}: expected value, "
                               "multiplicity, exact|numeric")
        try:
            mult = int(parts[1])
        except ValueError as exc:
            raise SpectraError(f"line {lineno}: bad multiplicity") from exc
        entries.append(SpectrumEntry(_parse_value(parts[0]), mult, parts[2]))
    if size < 0:
        raise SpectraError("missing spectrum header line")
    return Spectrum(relation, size, degree, tuple(entries))


def spectrum_to_json(s: Spectrum) -> str:
    doc = {
        "relation": s.relation,
        "size": s.size,
        "degree": s.degree,
        "entries": [
            {"value": _format_value(e.value),
             "multiplicity": e.multiplicity,
             "kind": e.kind}
            for e in s.entries
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _class_hash(cells: tuple[tuple[int, ...], ...]) -> str:
    flat = ",".join(str(v) for row in cells for v in row)
    return hashlib.sha256(flat.encode()).hexdigest()[:8]


def eigenmatrix_to_text(em: EigenMatrix,
                        mcp: MeetClassPartition | None = None) -> str:
    if em.column_names is not None:
        names = list(em.column_names)
    elif mcp is not None:
        names = [f"class-{_class_hash(mcp.classes[cid].table.cells)}"
                 for cid in em.class_ids]
    else:
        names = [f"class-{cid}" for cid in em.class_ids]
    lines = [f"# eigenmatrix {em.n} {em.k} "
             f"{'exact' if em.exact else 'numeric'} "
             f"{'commuting' if em.commuting else 'noncommuting'}"]
    lines.append("\t".join(["mult"] + names))
    for mult, values in zip(em.multiplicities, em.values):
        lines.append("\t".join([str(mult)] +
                               [_format_value(v) for v in values]))
    return "\n".join(lines) + "\n"


def eigenmatrix_from_text(text: str) -> EigenMatrix:
    n = k = -1
    exact = True
    commuting = True
    header: list[str] | None = None
    mults: list[int] = []
    rows: list[tuple] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        if line.startswith("#"):
            parts = line.split()
            if len(parts) >= 5 and parts[1] == "eigenmatrix":
                n, k = int(parts[2]), int(parts[3])
                exact = parts[4] == "exact"
            if len(parts) >= 6:
                commuting = parts[5] == "commuting"
            continue
        cells = line.split("\t")
        if header is None:
            if cells[0] != "mult":
                raise SpectraError(f"line {lineno}: expected header row")
            header = cells
            continue
        if len(cells) != len(header):
            raise SpectraError(f"line {lineno}: row width mismatch")
        try:
            mults.append(int(cells[0]))
        except ValueError as exc:
            raise SpectraError(f"line {lineno}: bad multiplicity") from exc
        rows.append(tuple(_parse_value(c) for c in cells[1:]))
    if n < 0 or header is None:
        raise SpectraError("missing eigenmatrix header")
    ids = []
    for name in header[1:]:
        tail = name.rsplit("-", 1)[-1]
        ids.append(int(tail) if tail.isdigit() else -1)
    return EigenMatrix(n, k, tuple(ids), tuple(mults), tuple(rows),
                       commuting, exact, None, tuple(header[1:]))


def eigenmatrix_to_json(em: EigenMatrix) -> str:
    doc = {
        "n": em.n,
        "k": em.k,
        "exact": em.exact,
        "commuting": em.commuting,
        "class_ids": list(em.class_ids),
        "rows": [
            {"multiplicity": m,
             "values": [_format_value(v) for v in values]}
            for m, values in zip(em.multiplicities, em.values)
        ],
    }
    return json.dumps(doc, indent=2) + "\n"
