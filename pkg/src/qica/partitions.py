"""Set partitions of an n-element ground set: enumeration, counting, meets,
symmetric chains, and hypergraph one-factorizations."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

import numpy as np

FAMILIES = ("all", "uniform", "almost-uniform", "min-class-size")


class PartitionError(ValueError):
    """Raised for malformed partitions or infeasible enumeration requests."""


@dataclass(frozen=True)
class Partition:
    """A set partition of {0..n-1} in canonical form.

    Classes are sorted by their minimum element, elements ascending within a
    class.  Everything internal is 0-indexed; text I/O ("1 2 3 | 4 5 6") is
    1-indexed.  `labels` is the restricted-growth string: labels[e] is the
    index of the class containing e, and partitions compare/sort by it.
    """

    n: int
    classes: tuple[tuple[int, ...], ...]

    @classmethod
    def from_classes(cls, n: int, classes) -> "Partition":
        norm = tuple(sorted(tuple(sorted(c)) for c in classes))
        seen = [e for c in norm for e in c]
        if sorted(seen) != list(range(n)):
            raise PartitionError(f"classes do not partition 0..{n - 1}")
        if any(not c for c in norm):
            raise PartitionError("empty class")
        return cls(n, norm)

    @classmethod
    def from_labels(cls, labels: Sequence[int] | bytes) -> "Partition":
        groups: dict[int, list[int]] = {}
        for e, lbl in enumerate(labels):
            groups.setdefault(lbl, []).append(e)
        return cls.from_classes(len(labels), groups.values())

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "Partition":
        classes = []
        for part in text.split("|"):
            try:
                elems = [int(tok) - 1 for tok in part.split()]
            except ValueError as exc:
                raise PartitionError(f"non-integer element in {part!r}") from exc
            if not elems:
                raise PartitionError(f"empty class in {text!r}")
            classes.append(elems)
        size = sum(len(c) for c in classes)
        if n is not None and n != size:
            raise PartitionError(f"expected {n} elements, got {size}")
        return cls.from_classes(size, classes)

    @classmethod
    def blocks(cls, n: int, k: int) -> "Partition":
        """The consecutive-blocks partition; the first n % k classes get the
        extra element when k does not divide n."""
        c, r = divmod(n, k)
        out, start = [], 0
        for j in range(k):
            size = c + (1 if j < r else 0)
            out.append(range(start, start + size))
            start += size
        return cls.from_classes(n, out)

    @property
    def k(self) -> int:
        return len(self.classes)

    @cached_property
    def labels(self) -> bytes:
        lab = bytearray(self.n)
        for i, c in enumerate(self.classes):
            for e in c:
                lab[e] = i
        return bytes(lab)

    def class_sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.classes)

    def min_class_size(self) -> int:
        return min(len(c) for c in self.classes)

    def is_uniform(self) -> bool:
        sizes = self.class_sizes()
        return len(set(sizes)) == 1

    def format(self) -> str:
        return " | ".join(" ".join(str(e + 1) for e in c) for c in self.classes)

    def __str__(self) -> str:
        return self.format()


# ---------------------------------------------------------------------------
# meets

def meet_cells(p: Partition, q: Partition) -> tuple[tuple[int, ...], ...]:
    """The k_p x k_q table of class intersection sizes."""
    if p.n != q.n:
        raise PartitionError("partitions of different ground sets")
    kq = q.k
    flat = [0] * (p.k * kq)
    la, lb = p.labels, q.labels
    for a, b in zip(la, lb):
        flat[a * kq + b] += 1
    return tuple(tuple(flat[i * kq:(i + 1) * kq]) for i in range(p.k))


def meet_value(p: Partition, q: Partition) -> int:
    """Number of nonempty pairwise class intersections."""
    if p.k != q.k:
        raise PartitionError("partitions with different class counts")
    return sum(1 for row in meet_cells(p, q) for v in row if v)


def is_qualitatively_independent(p: Partition, q: Partition) -> bool:
    """True when every class of p meets every class of q."""
    return meet_value(p, q) == p.k * q.k


def _labels_qi(la: bytes, lb: bytes, k: int) -> bool:
    seen = bytearray(k * k)
    hit = 0
    for a, b in zip(la, lb):
        i = a * k + b
        if not seen[i]:
            seen[i] = 1
            hit += 1
    return hit == k * k


# ---------------------------------------------------------------------------
# enumeration (restricted-growth-string order throughout)

def _check_family(n: int, k: int, family: str, min_size: int | None) -> None:
    if family not in FAMILIES:
        raise PartitionError(f"unknown family {family!r}")
    if k < 1 or n < k:
        raise PartitionError(f"no {k}-partitions of an {n}-set")
    if family == "uniform" and n % k:
        raise PartitionError(f"uniform family needs {k} | {n}")
    if family == "min-class-size" and (min_size is None or min_size < 1):
        raise PartitionError("min-class-size family needs min_size >= 1")


def iter_labels(n: int, k: int, family: str = "all",
                min_size: int | None = None) -> Iterator[bytes]:
    """Label strings of the k-partitions of {0..n-1} in lexicographic
    (restricted-growth) order, filtered to the requested family."""
    _check_family(n, k, family, min_size)
    if family == "uniform":
        if min_size is not None and n // k < min_size:
            return iter(())
        return _rgs_labels(n, k, lo=n // k, hi=n // k)
    if family == "almost-uniform":
        if min_size is not None and n // k < min_size:
            return iter(())
        return _rgs_labels(n, k, lo=n // k, hi=n // k + (1 if n % k else 0))
    lo = 1 if min_size is None else min_size
    if lo * k > n:
        return iter(())
    return _rgs_labels(n, k, lo=lo, hi=n)


def enumerate_partitions(n: int, k: int, family: str = "all",
                         min_size: int | None = None) -> Iterator[Partition]:
    for lab in iter_labels(n, k, family, min_size):
        yield Partition.from_labels(lab)


def _rgs_labels(n: int, k: int, lo: int, hi: int) -> Iterator[bytes]:
    # Generic restricted-growth recursion; every class must end with
    # lo <= size <= hi elements and exactly k classes must open.
    labels = bytearray(n)
    counts = [0] * k

    def feasible(pos: int, opened: int) -> bool:
        left = n - pos
        need = sum(max(0, lo - counts[j]) for j in range(opened))
        need += lo * (k - opened)
        room = sum(hi - counts[j] for j in range(opened))
        room += hi * (k - opened)
        return need <= left <= room

    def rec(pos: int, opened: int) -> Iterator[bytes]:
        if pos == n:
            if opened == k:
                yield bytes(labels)
            return
        top = opened + (1 if opened < k else 0)
        for lbl in range(top):
            if counts[lbl] >= hi:
                continue
            labels[pos] = lbl
            counts[lbl] += 1
            new_open = max(opened, lbl + 1)
            if feasible(pos + 1, new_open):
                yield from rec(pos + 1, new_open)
            counts[lbl] -= 1

    return rec(0, 0)


def uniform_label_blocks(n: int, k: int,
                         target_rows: int = 65536) -> Iterator[np.ndarray]:
    """Uniform k-partition labels as uint8 blocks: each block is one or more
    first-class choices crossed with the full sub-table on the leftover
    elements.  Covers every partition exactly once but NOT in lexicographic
    order; callers must not depend on row order.  Streams O(block) memory."""
    c = n // k
    if n % k:
        return
    if k == 1:
        yield np.zeros((1, n), dtype=np.uint8)
        return
    sub = np.frombuffer(
        b"".join(iter_labels(n - c, k - 1, "uniform")), dtype=np.uint8
    ).reshape(-1, n - c)
    buf: list[np.ndarray] = []
    rows = 0
    for combo in itertools.combinations(range(1, n), c - 1):
        first = (0,) + combo
        rest = [e for e in range(1, n) if e not in set(combo)]
        block = np.empty((sub.shape[0], n), dtype=np.uint8)
        block[:, list(first)] = 0
        block[:, rest] = sub + 1
        buf.append(block)
        rows += block.shape[0]
        if rows >= target_rows:
            yield np.concatenate(buf)
            buf, rows = [], 0
    if buf:
        yield np.concatenate(buf)


# ---------------------------------------------------------------------------
# counting

@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k < 1 or n < k:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def uniform_count(n: int, k: int) -> int:
    """Number of uniform k-partitions: prod C(n - i*c, c) / k!."""
    if n % k:
        return 0
    c = n // k
    out = 1
    for i in range(k):
        out *= math.comb(n - i * c, c)
    return out // math.factorial(k)


def almost_uniform_count(n: int, k: int) -> int:
    """Partitions with class sizes c and c+1 only, n = c*k + r."""
    c, r = divmod(n, k)
    if r == 0:
        return uniform_count(n, k)
    out = 1
    m = n
    for _ in range(k - r):
        out *= math.comb(m, c)
        m -= c
    for _ in range(r):
        out *= math.comb(m, c + 1)
        m -= c + 1
    return out // (math.factorial(r) * math.factorial(k - r))


@lru_cache(maxsize=None)
def min_size_count(n: int, k: int, s: int) -> int:
    """k-partitions with every class of size >= s (anchor the least element)."""
    if k == 0:
        return 1 if n == 0 else 0
    if n < k * s:
        return 0
    return sum(
        math.comb(n - 1, m - 1) * min_size_count(n - m, k - 1, s)
        for m in range(s, n - (k - 1) * s + 1)
    )


def count_partitions(n: int, k: int, family: str = "all",
                     min_size: int | None = None) -> int:
    _check_family(n, k, family, min_size)
    if family == "uniform":
        if min_size is not None and n // k < min_size:
            return 0
        return uniform_count(n, k)
    if family == "almost-uniform":
        if min_size is not None and n // k < min_size:
            return 0
        return almost_uniform_count(n, k)
    if min_size is None or min_size <= 1:
        return stirling2(n, k)
    return min_size_count(n, k, min_size)


# ---------------------------------------------------------------------------
# symmetric chain decomposition (bracket matching on subset bitmasks)

@dataclass(frozen=True)
class ChainDecomposition:
    """Saturated symmetric chains covering the subset lattice of {0..n-1}.

    Each chain lists subsets ascending by inclusion, one element added per
    step; min size + max size = n on every chain.
    """

    n: int
    chains: tuple[tuple[frozenset[int], ...], ...]


def _chain_frame(mask: int, n: int) -> tuple[int, tuple[int, ...]]:
    """Return (chain minimum, unmatched positions) for the chain through mask.

    Set bits open brackets, clear bits close them; unmatched closers always
    precede unmatched openers, and the chain varies exactly the unmatched
    positions from all-clear to all-set."""
    stack: list[int] = []
    closers: list[int] = []
    for i in range(n):
        if (mask >> i) & 1:
            stack.append(i)
        elif stack:
            stack.pop()
        else:
            closers.append(i)
    rep = mask
    for i in stack:
        rep &= ~(1 << i)
    return rep, tuple(closers + stack)


def chain_of(mask: int, n: int) -> list[int]:
    """The full symmetric chain containing the given subset, ascending."""
    rep, free = _chain_frame(mask, n)
    out = []
    for t in range(len(free) + 1):
        m = rep
        for i in free[len(free) - t:]:
            m |= 1 << i
        out.append(m)
    return out


def symmetric_chain_masks(n: int) -> list[list[int]]:
    """The decomposition with subsets as bitmasks, one list per chain."""
    if n < 1:
        raise PartitionError("need n >= 1")
    chains: dict[tuple[int, tuple[int, ...]], list[int]] = {}
    for mask in range(1 << n):
        key = _chain_frame(mask, n)
        if key not in chains:
            chains[key] = chain_of(mask, n)
    return [chains[key] for key in sorted(chains)]


def symmetric_chain_decomposition(n: int) -> ChainDecomposition:
    """Partition the subset lattice of an n-set into saturated symmetric
    chains.  Every subset appears in exactly one chain."""
    chains = tuple(
        tuple(frozenset(e for e in range(n) if (m >> e) & 1) for m in chain)
        for chain in symmetric_chain_masks(n)
    )
    return ChainDecomposition(n, chains)


# ---------------------------------------------------------------------------
# one-factorization of the complete c-uniform hypergraph (Baranyai)

@dataclass(frozen=True)
class OneFactorization:
    """All c-subsets of {0..n-1} split into uniform partitions, one class
    each per subset: C(n-1, c-1) factors in total."""

    n: int
    c: int
    factors: tuple[Partition, ...]


class _Dinic:
    def __init__(self, size: int):
        self.graph: list[list[list[int]]] = [[] for _ in range(size)]

    def add_edge(self, u: int, v: int, cap: int) -> None:
        self.graph[u].append([v, cap, len(self.graph[v])])
        self.graph[v].append([u, 0, len(self.graph[u]) - 1])

    def max_flow(self, s: int, t: int) -> int:
        flow = 0
        while True:
            level = [-1] * len(self.graph)
            level[s] = 0
            queue = [s]
            for u in queue:
                for e in self.graph[u]:
                    if e[1] > 0 and level[e[0]] < 0:
                        level[e[0]] = level[u] + 1
                        queue.append(e[0])
            if level[t] < 0:
                return flow
            it = [0] * len(self.graph)

            def dfs(u: int, f: int) -> int:
                if u == t:
                    return f
                while it[u] < len(self.graph[u]):
                    e = self.graph[u][it[u]]
                    v = e[0]
                    if e[1] > 0 and level[v] == level[u] + 1:
                        d = dfs(v, min(f, e[1]))
                        if d > 0:
                            e[1] -= d
                            self.graph[v][e[2]][1] += d
                            return d
                    it[u] += 1
                return 0

            while True:
                f = dfs(s, 1 << 60)
                if f == 0:
                    break
                flow += f


def baranyai_factorization(n: int, c: int) -> OneFactorization:
    """Split all c-subsets of {0..n-1} into C(n-1, c-1) one-factors, each a
    uniform partition.  c = 2 uses the circle method; c >= 3 rounds an
    integral flow one element at a time."""
    if c < 1 or n < 1 or n % c:
        raise PartitionError("class size must divide n")
    k = n // c
    if c == 1:
        only = Partition.from_classes(n, [[e] for e in range(n)])
        return OneFactorization(n, c, (only,))
    if c == n:
        return OneFactorization(n, c, (Partition.from_classes(n, [range(n)]),))
    if c == 2:
        return OneFactorization(n, c, tuple(_circle_one_factorization(n)))

    nfac = math.comb(n - 1, c - 1)
    blocks: list[list[int]] = [[] for _ in range(nfac)]
    for m in range(n):
        bit = 1 << m
        node_of: dict[int, int] = {}
        node_req: list[int] = []

        def node(subset: int, size: int) -> int:
            if subset not in node_of:
                node_of[subset] = len(node_req)
                node_req.append(math.comb(n - m - 1, c - size - 1))
            return node_of[subset]

        choices: list[list[tuple[int, int]]] = []
        for f in range(nfac):
            opts = []
            for bi, b in enumerate(blocks[f]):
                if bin(b).count("1") < c:
                    opts.append((bi, node(b, bin(b).count("1"))))
            if len(blocks[f]) < k:
                opts.append((-1, node(0, 0)))
            choices.append(opts)

        base = 1 + nfac
        sink = base + len(node_req)
        net = _Dinic(sink + 1)
        for f in range(nfac):
            net.add_edge(0, 1 + f, 1)
            for _, nd in choices[f]:
                net.add_edge(1 + f, base + nd, 1)
        for nd, req in enumerate(node_req):
            net.add_edge(base + nd, sink, req)
        pushed = net.max_flow(0, sink)
        if pushed != nfac:
            raise PartitionError(f"flow rounding failed at element {m}")
        for f in range(nfac):
            for e in net.graph[1 + f]:
                if e[0] >= base and e[1] == 0:
                    chosen = next(bi for bi, nd in choices[f]
                                  if base + nd == e[0])
                    if chosen < 0:
                        blocks[f].append(bit)
                    else:
                        blocks[f][chosen] |= bit
                    break

    out = []
    for f in range(nfac):
        classes = [[e for e in range(n) if (b >> e) & 1] for b in blocks[f]]
        out.append(Partition.from_classes(n, classes))
    return OneFactorization(n, c, tuple(out))


def _circle_one_factorization(n: int) -> list[Partition]:
    hub = n - 1
    out = []
    for i in range(n - 1):
        pairs = [[hub, i]]
        for j in range(1, n // 2):
            pairs.append([(i + j) % (n - 1), (i - j) % (n - 1)])
        out.append(Partition.from_classes(n, pairs))
    return out
