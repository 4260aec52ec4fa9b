"""Qualitative independence graphs and relation graphs on set partitions.

Vertices are partitions of {0, ..., n-1}; two partitions are joined when a
pairwise relation between their classes holds under a chosen quantifier.
Qualitative independence (every meet cell nonempty) is the case that makes
graph homomorphisms equivalent to covering arrays, so the module also ships
exact desk-scale solvers: maximum clique, maximum independent set with a
spectral certificate, chromatic number, homomorphism search, and the
retraction onto uniform or almost-uniform two-class partitions.

Adjacency is stored as one Python integer bitset per vertex, which keeps the
solvers branch-and-bound loops allocation free.
"""

from __future__ import annotations

import math
import os
from collections import Counter, deque
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import networkx as nx
import numpy as np

from . import _kernels
from .partitions import (
    Partition,
    chain_of,
    count_partitions,
    iter_labels,
    stirling2,
    symmetric_chain_masks,
    _labels_qi,
)


class GraphError(ValueError):
    """Raised for invalid graph specifications, vertex caps, or bad input."""


class CapExceeded(GraphError):
    """Raised when a requested graph would exceed the vertex cap."""


DEFAULT_VERTEX_CAP = 100_000

_FAMILIES = ("qi", "uqi", "auqi", "kneser", "complete", "relation")
_RELATIONS = (
    "comparable",
    "incomparable",
    "disjoint",
    "intersecting",
    "partial-t-intersecting",
)
_QUANTIFIERS = ("forall", "exists")


def _vertex_cap(cap: int | None) -> int:
    if cap is not None:
        return cap
    raw = os.environ.get("QICA_VERTEX_CAP", "")
    if raw:
        try:
            return int(raw)
        except ValueError as exc:
            raise GraphError(f"bad QICA_VERTEX_CAP value {raw!r}") from exc
    return DEFAULT_VERTEX_CAP


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# ---------------------------------------------------------------------------
# specifications and the graph container


@dataclass(frozen=True)
class GraphSpec:
    """What graph to build.

    family "qi" / "uqi" / "auqi" are the qualitative independence graphs on
    partitions with all classes of size >= k, uniform partitions, and
    almost-uniform partitions.  "relation" builds the graph of any supported
    class relation under a symmetric quantifier pair, on uniform partitions
    or on all partitions into k classes.  "kneser" and "complete" are the
    classical graphs (r-subsets joined when disjoint; all pairs joined).
    """

    family: str
    n: int
    k: int = 0
    r: int = 0
    relation: str = ""
    quantifier: str = ""
    uniform: bool = True
    t: int = 0

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise GraphError(f"unknown graph family {self.family!r}")
        if self.n < 1:
            raise GraphError("n must be positive")
        if self.family in ("qi", "uqi", "auqi"):
            if self.k < 2:
                raise GraphError("qualitative independence needs k >= 2")
            if self.n < self.k * self.k:
                raise GraphError(
                    f"QI graphs need n >= k^2, got n={self.n}, k={self.k}")
            if self.family == "uqi" and self.n % self.k:
                raise GraphError("uniform partitions need k to divide n")
        elif self.family == "kneser":
            if not 1 <= self.r <= self.n:
                raise GraphError("kneser needs 1 <= r <= n")
        elif self.family == "relation":
            if self.k < 2:
                raise GraphError("relation graphs need k >= 2")
            if self.n < self.k:
                raise GraphError("need n >= k for k-class partitions")
            if self.uniform and self.n % self.k:
                raise GraphError("uniform partitions need k to divide n")
            if self.relation not in _RELATIONS:
                raise GraphError(f"unknown relation {self.relation!r}")
            if self.quantifier not in _QUANTIFIERS:
                raise GraphError(f"unknown quantifier {self.quantifier!r}")
            if self.relation == "partial-t-intersecting":
                if self.t < 1:
                    raise GraphError("partial intersection needs t >= 1")
            elif self.t:
                raise GraphError("t only applies to partial-t-intersecting")

    @property
    def name(self) -> str:
        if self.family == "qi":
            return f"QI({self.n},{self.k})"
        if self.family == "uqi":
            return f"UQI({self.n},{self.k})"
        if self.family == "auqi":
            return f"AUQI({self.n},{self.k})"
        if self.family == "kneser":
            return f"Kneser({self.n},{self.r})"
        if self.family == "complete":
            return f"K{self.n}"
        star = "*" if self.uniform else ""
        tpart = f",t={self.t}" if self.relation == "partial-t-intersecting" else ""
        return (f"{self.relation}{star}({self.n},{self.k};"
                f"{self.quantifier},{self.quantifier}{tpart})")


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph with bitset adjacency.

    adj[v] has bit u set iff uv is an edge.  labels, when present, carry one
    object per vertex (a Partition for partition families, a tuple of
    elements for Kneser graphs).
    """

    name: str
    adj: tuple[int, ...]
    labels: tuple | None = None
    spec: GraphSpec | None = None

    def __post_init__(self) -> None:
        nv = len(self.adj)
        if self.labels is not None and len(self.labels) != nv:
            raise GraphError("label count does not match vertex count")
        for v, mask in enumerate(self.adj):
            if mask >> v & 1:
                raise GraphError(f"self loop at vertex {v}")
            if mask < 0 or mask >> nv:
                raise GraphError(f"adjacency bits out of range at vertex {v}")
        if nv <= 2000:
            for v, mask in enumerate(self.adj):
                for u in _bits(mask):
                    if not self.adj[u] >> v & 1:
                        raise GraphError(f"asymmetric edge {v}-{u}")

    @property
    def nv(self) -> int:
        return len(self.adj)

    @property
    def ne(self) -> int:
        return sum(mask.bit_count() for mask in self.adj) // 2

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def degrees(self) -> list[int]:
        return [mask.bit_count() for mask in self.adj]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def neighbors(self, v: int) -> Iterator[int]:
        return _bits(self.adj[v])

    def __repr__(self) -> str:
        return f"Graph({self.name}: {self.nv} vertices, {self.ne} edges)"


# ---------------------------------------------------------------------------
# construction


def _partition_family(spec: GraphSpec) -> tuple[str, int | None]:
    """(family, min_size) arguments for iter_labels / count_partitions."""
    if spec.family == "qi":
        return "min-class-size", spec.k
    if spec.family == "uqi":
        return "uniform", None
    if spec.family == "auqi":
        return "almost-uniform", None
    if spec.uniform:
        return "uniform", None
    return "all", None


def _partition_count(spec: GraphSpec) -> int:
    family, min_size = _partition_family(spec)
    return count_partitions(spec.n, spec.k, family, min_size)


def _label_matrix(spec: GraphSpec) -> np.ndarray:
    family, min_size = _partition_family(spec)
    rows = list(iter_labels(spec.n, spec.k, family, min_size))
    arr = np.frombuffer(b"".join(rows), dtype=np.uint8)
    return arr.reshape(len(rows), spec.n)


def _masks_from_flag_columns(flags: np.ndarray, base: int,
                             masks: list[int]) -> None:
    """Store column j of the 0/1 matrix as the bitset of vertex base + j."""
    for j in range(flags.shape[1]):
        col = flags[:, j].astype(bool)
        col[base + j] = False
        packed = np.packbits(col, bitorder="little")
        masks[base + j] = int.from_bytes(packed.tobytes(), "little")


def _qi_adjacency(arr: np.ndarray, k: int) -> list[int]:
    nv = arr.shape[0]
    masks = [0] * nv
    chunk = max(1, (1 << 26) // max(nv, 1))
    for lo in range(0, nv, chunk):
        flags = _kernels.qi_flags(arr, arr[lo:lo + chunk], k)
        _masks_from_flag_columns(flags, lo, masks)
    return masks


def _relation_predicate(spec: GraphSpec) -> Callable[..., bool]:
    relation, t = spec.relation, spec.t
    reduce_all = spec.quantifier == "forall"

    def pred(cells: np.ndarray, pa: np.ndarray, qa: np.ndarray) -> bool:
        if relation == "comparable":
            hit = (cells == pa[:, None]) | (cells == qa[None, :])
        elif relation == "incomparable":
            hit = (cells < pa[:, None]) & (cells < qa[None, :])
        elif relation == "disjoint":
            hit = cells == 0
        elif relation == "intersecting":
            hit = cells > 0
        else:
            hit = cells >= t
        return bool(hit.all()) if reduce_all else bool(hit.any())

    return pred


def _relation_adjacency(arr: np.ndarray, k: int,
                        pred: Callable[..., bool]) -> list[int]:
    nv = arr.shape[0]
    masks = [0] * nv
    sizes = [np.bincount(row, minlength=k) for row in arr]
    scaled = [row.astype(np.int64) * k for row in arr]
    for a in range(nv):
        for b in range(a + 1, nv):
            cells = np.bincount(scaled[a] + arr[b],
                                minlength=k * k).reshape(k, k)
            if pred(cells, sizes[a], sizes[b]):
                masks[a] |= 1 << b
                masks[b] |= 1 << a
    return masks


def build_graph(spec: GraphSpec, cap: int | None = None) -> Graph:
    """Materialize the graph a spec describes.

    The vertex count is computed in closed form first and checked against the
    cap (argument, else QICA_VERTEX_CAP, else 100000) before any enumeration,
    so an over-budget request fails fast instead of thrashing.
    """
    limit = _vertex_cap(cap)

    if spec.family == "complete":
        nv = spec.n
        if nv > limit:
            raise CapExceeded(
                f"{spec.name} has {nv} vertices, cap is {limit}")
        full = (1 << nv) - 1
        adj = tuple(full ^ (1 << v) for v in range(nv))
        return Graph(spec.name, adj, None, spec)

    if spec.family == "kneser":
        nv = math.comb(spec.n, spec.r)
        if nv > limit:
            raise CapExceeded(
                f"{spec.name} has {nv} vertices, cap is {limit}")
        from itertools import combinations
        sets = list(combinations(range(spec.n), spec.r))
        bitmasks = [sum(1 << e for e in s) for s in sets]
        masks = [0] * nv
        for a in range(nv):
            for b in range(a + 1, nv):
                if not bitmasks[a] & bitmasks[b]:
                    masks[a] |= 1 << b
                    masks[b] |= 1 << a
        return Graph(spec.name, tuple(masks), tuple(sets), spec)

    nv = _partition_count(spec)
    if nv > limit:
        raise CapExceeded(
            f"{spec.name} has {nv} vertices, over the cap of {limit}; "
            "raise QICA_VERTEX_CAP or pass a larger cap to proceed")
    arr = _label_matrix(spec)
    if spec.family in ("qi", "uqi", "auqi") and spec.k <= 8:
        masks = _qi_adjacency(arr, spec.k)
    elif spec.family in ("qi", "uqi", "auqi"):
        qi_spec = GraphSpec("relation", spec.n, spec.k,
                            relation="intersecting", quantifier="forall",
                            uniform=False)
        masks = _relation_adjacency(arr, spec.k, _relation_predicate(qi_spec))
    else:
        masks = _relation_adjacency(arr, spec.k, _relation_predicate(spec))
    labels = tuple(Partition.from_labels(row.tobytes()) for row in arr)
    return Graph(spec.name, tuple(masks), labels, spec)


# ---------------------------------------------------------------------------
# maximum clique


def maximum_clique_masks(masks: Sequence[int],
                         budget: int | None = None
                         ) -> tuple[tuple[int, ...], bool]:
    """Maximum clique by branch and bound with a greedy colouring bound.

    Returns (vertices, exact).  exact is False only when a node budget was
    given and hit, in which case the clique returned is the best found.
    """
    nv = len(masks)
    if nv == 0:
        return (), True
    best: list[int] = []
    nodes = 0
    exhausted = False

    def expand(chosen: list[int], cand: int) -> None:
        nonlocal best, nodes, exhausted
        if exhausted:
            return
        nodes += 1
        if budget is not None and nodes > budget:
            exhausted = True
            return
        if not cand:
            if len(chosen) > len(best):
                best = chosen.copy()
            return
        order: list[tuple[int, int]] = []
        uncoloured = cand
        colour = 0
        while uncoloured:
            colour += 1
            avail = uncoloured
            while avail:
                low = avail & -avail
                v = low.bit_length() - 1
                order.append((v, colour))
                avail &= ~masks[v]
                avail ^= low
                uncoloured ^= low
        for v, bound in reversed(order):
            if len(chosen) + bound <= len(best):
                return
            chosen.append(v)
            expand(chosen, cand & masks[v])
            chosen.pop()
            cand ^= 1 << v
            if exhausted:
                return

    expand([], (1 << nv) - 1)
    return tuple(sorted(best)), not exhausted


@dataclass(frozen=True)
class CliqueResult:
    vertices: tuple[int, ...]
    exact: bool

    @property
    def size(self) -> int:
        return len(self.vertices)


def max_clique(g: Graph, budget: int | None = None) -> CliqueResult:
    """Maximum clique of g; exact unless the node budget interrupts."""
    vertices, exact = maximum_clique_masks(g.adj, budget)
    for i, u in enumerate(vertices):
        for v in vertices[i + 1:]:
            if not g.has_edge(u, v):
                raise GraphError("internal error: clique check failed")
    return CliqueResult(vertices, exact)


# ---------------------------------------------------------------------------
# maximum independent set with a spectral certificate


@dataclass(frozen=True)
class IndependentSetResult:
    vertices: tuple[int, ...]
    exact: bool
    certified: bool
    ratio_bound: float | None


def _least_eigenvalue(adj: Sequence[int], nv: int) -> float:
    a = np.zeros((nv, nv), dtype=np.float64)
    for v, mask in enumerate(adj):
        for u in _bits(mask):
            a[v, u] = 1.0
    return float(np.linalg.eigvalsh(a)[0])


def max_independent_set(g: Graph, budget: int | None = None,
                        ) -> IndependentSetResult:
    """Maximum independent set (clique of the complement).

    For regular graphs of modest size the ratio bound nv / (1 - d/tau) with
    tau the least adjacency eigenvalue is evaluated; certified is True when
    the set found meets it, which proves optimality independently of the
    search.
    """
    nv = g.nv
    full = (1 << nv) - 1
    comp = [full ^ g.adj[v] ^ (1 << v) for v in range(nv)]
    vertices, exact = maximum_clique_masks(comp, budget)
    for i, u in enumerate(vertices):
        for v in vertices[i + 1:]:
            if g.has_edge(u, v):
                raise GraphError("internal error: independence check failed")
    certified = False
    bound = None
    degs = g.degrees()
    if nv and min(degs) == max(degs) and degs[0] > 0 and nv <= 4000:
        tau = _least_eigenvalue(g.adj, nv)
        if tau < -1e-9:
            bound = nv / (1.0 - degs[0] / tau)
            certified = len(vertices) >= math.floor(bound + 1e-9)
    return IndependentSetResult(vertices, exact, certified, bound)


# ---------------------------------------------------------------------------
# colouring


@dataclass(frozen=True)
class ColoringResult:
    """value is the chromatic number when exact, else None and the bracket
    [lower, upper] is what the search established.  coloring is a proper
    colouring with upper colours."""

    value: int | None
    lower: int
    upper: int
    coloring: tuple[int, ...]
    exact: bool


def _dsatur_greedy(masks: Sequence[int]) -> tuple[list[int], int]:
    nv = len(masks)
    colour = [-1] * nv
    sat = [0] * nv
    for _ in range(nv):
        pick, key = -1, (-1, -1)
        for v in range(nv):
            if colour[v] < 0:
                cand = (sat[v].bit_count(), masks[v].bit_count())
                if cand > key:
                    pick, key = v, cand
        c = 0
        while sat[pick] >> c & 1:
            c += 1
        colour[pick] = c
        for u in _bits(masks[pick]):
            sat[u] |= 1 << c
    return colour, max(colour) + 1 if nv else 0


def _colourable(masks: Sequence[int], c: int,
                budget: int | None) -> tuple[str, list[int] | None]:
    """Decide c-colourability by DSATUR-ordered backtracking."""
    nv = len(masks)
    colour = [-1] * nv
    sat = [0] * nv
    nodes = 0

    def bt(done: int, max_used: int) -> str:
        nonlocal nodes
        nodes += 1
        if budget is not None and nodes > budget:
            return "unknown"
        if done == nv:
            return "sat"
        pick, key = -1, (-1, -1)
        for v in range(nv):
            if colour[v] < 0:
                if sat[v].bit_count() >= c:
                    return "unsat"
                cand = (sat[v].bit_count(), masks[v].bit_count())
                if cand > key:
                    pick, key = v, cand
        hit_unknown = False
        for col in range(min(c, max_used + 2)):
            if sat[pick] >> col & 1:
                continue
            colour[pick] = col
            touched = []
            for u in _bits(masks[pick]):
                if not sat[u] >> col & 1:
                    sat[u] |= 1 << col
                    touched.append(u)
            res = bt(done + 1, max(max_used, col))
            if res == "sat":
                return "sat"
            if res == "unknown":
                hit_unknown = True
            colour[pick] = -1
            for u in touched:
                sat[u] ^= 1 << col
            if hit_unknown:
                break
        return "unknown" if hit_unknown else "unsat"

    res = bt(0, -1)
    return res, colour.copy() if res == "sat" else None


def chromatic_number(g: Graph, budget: int | None = None) -> ColoringResult:
    """Chromatic number, exact at desk scale.

    Qualitative independence graphs of 2-partitions take a dedicated route:
    a chain colouring gives the upper bound and a clique or pair-counting
    argument the matching lower bound, so no backtracking is needed even at
    hundreds of vertices.  Other graphs run maximum clique for the lower
    bound, DSATUR for the upper, then close the gap by deciding
    c-colourability for each c in between.
    """
    nv = g.nv
    if nv == 0:
        return ColoringResult(0, 0, 0, (), True)
    if g.spec is not None and g.spec.family == "qi" and g.spec.k == 2:
        result = _qi2_sandwich(g)
        if result is not None:
            return result
    clique, _ = maximum_clique_masks(g.adj, budget)
    lower = max(len(clique), 1)
    greedy, upper = _dsatur_greedy(g.adj)
    if lower == upper:
        return ColoringResult(upper, lower, upper, tuple(greedy), True)
    for c in range(lower, upper):
        status, colours = _colourable(g.adj, c, budget)
        if status == "sat":
            assert colours is not None
            return ColoringResult(c, c, c, tuple(colours), True)
        if status == "unknown":
            return ColoringResult(None, lower, upper, tuple(greedy), False)
        lower = c + 1
    return ColoringResult(upper, upper, upper, tuple(greedy), True)


def _check_proper(masks: Sequence[int], colours: Sequence[int]) -> bool:
    by_colour: dict[int, int] = {}
    for v, c in enumerate(colours):
        by_colour[c] = by_colour.get(c, 0) | 1 << v
    return all(not masks[v] & by_colour[colours[v]] for v in range(len(masks)))


def _qi2_sandwich(g: Graph) -> ColoringResult | None:
    spec = g.spec
    assert spec is not None
    n = spec.n
    colours = qi2_chain_coloring(n)
    if len(colours) != g.nv or not _check_proper(g.adj, colours):
        return None
    used = len(set(colours))
    assert g.labels is not None
    small = [min(len(c) for c in p.classes) for p in g.labels]
    if n % 2 == 0:
        w = [v for v in range(g.nv) if small[v] == n // 2]
        wmask = sum(1 << v for v in w)
        for v in w:
            if g.adj[v] & wmask != wmask ^ (1 << v):
                return None
        lower = len(w)
    else:
        w = [v for v in range(g.nv) if small[v] == n // 2]
        wmask = sum(1 << v for v in w)
        for i, u in enumerate(w):
            rest = wmask & ~g.adj[u] & ~(1 << u)
            for v in _bits(rest):
                if v <= u:
                    continue
                if rest & ~g.adj[v] & ~(1 << v) & ~((1 << (v + 1)) - 1):
                    return None
        lower = (len(w) + 1) // 2
    if used != lower:
        return None
    return ColoringResult(used, lower, used, colours, True)


def qi2_chain_coloring(n: int) -> tuple[int, ...]:
    """Optimal proper colouring of the QI graph of 2-partitions of n points.

    Colour index per vertex, vertices in the canonical enumeration order.
    Each 2-partition is identified with its smaller class (class containing
    point 0 on ties); subsets of one symmetric chain are nested, so a chain
    is an independent set.  Chains are then merged in pairs whose sets at
    level n // 2 are disjoint (complements for even n, a maximum matching on
    the disjointness graph of the middles for odd n): any set on one chain
    at or below the middle misses some point of the other middle, which
    leaves a meet cell empty, so the merged class stays independent.  The
    count of colours used, ceil(binom(n, n//2) / 2), matches the clique and
    pair-counting lower bounds, so the colouring is optimal.
    """
    if n < 4:
        raise GraphError("need n >= 4 for 2-partitions with classes >= 2")
    chains = symmetric_chain_masks(n)
    chain_id: dict[int, int] = {}
    middles: list[int] = []
    half = n // 2
    for i, chain in enumerate(chains):
        mid = -1
        for mask in chain:
            chain_id[mask] = i
            if mask.bit_count() == half:
                mid = mask
        if mid < 0:
            raise GraphError("internal error: chain misses the middle level")
        middles.append(mid)
    full = (1 << n) - 1
    partner = list(range(len(chains)))
    if n % 2 == 0:
        for i, mid in enumerate(middles):
            partner[i] = chain_id[full ^ mid]
    else:
        kneser = nx.Graph()
        kneser.add_nodes_from(range(len(chains)))
        for i in range(len(chains)):
            for j in range(i + 1, len(chains)):
                if not middles[i] & middles[j]:
                    kneser.add_edge(i, j)
        matching = nx.max_weight_matching(kneser, maxcardinality=True)
        for a, b in matching:
            partner[a] = b
            partner[b] = a
        unmatched = [i for i in range(len(chains)) if partner[i] == i]
        if len(unmatched) > 1:
            raise GraphError("internal error: chain matching left a gap")
    pair_key = [min(i, partner[i]) for i in range(len(chains))]
    colour_of = {key: idx for idx, key in enumerate(sorted(set(pair_key)))}
    colours: list[int] = []
    labels = list(iter_labels(n, 2, "min-class-size", 2))
    for raw in labels:
        row = np.frombuffer(raw, dtype=np.uint8)
        zeros = int((row == 0).sum())
        small_label = 0 if zeros <= n - zeros else 1
        mask = 0
        for e in range(n):
            if row[e] == small_label:
                mask |= 1 << e
        colours.append(colour_of[pair_key[chain_id[mask]]])
    by_colour: dict[int, list[bytes]] = {}
    for raw, c in zip(labels, colours):
        by_colour.setdefault(c, []).append(raw)
    for group in by_colour.values():
        for i, la in enumerate(group):
            for lb in group[i + 1:]:
                if _labels_qi(la, lb, 2):
                    raise GraphError("internal error: chain colouring "
                                     "is not proper")
    want = -(-math.comb(n, half) // 2)
    if len(by_colour) != want:
        raise GraphError("internal error: chain colouring used "
                         f"{len(by_colour)} colours, expected {want}")
    return tuple(colours)


# ---------------------------------------------------------------------------
# homomorphisms


@dataclass(frozen=True)
class Homomorphism:
    """Edge-preserving vertex map, as a tuple indexed by source vertex."""

    map: tuple[int, ...]


@dataclass(frozen=True)
class HomResult:
    status: str  # "found" | "none" | "unknown"
    hom: Homomorphism | None

    @property
    def found(self) -> bool:
        return self.status == "found"


def _ac3(dom: list[int], g: Graph, h: Graph,
         seed: Iterator[int] | None = None) -> bool:
    """Arc consistency on adjacency: x in dom[u] needs a neighbour in dom[v]
    for every g-edge uv.  Returns False when a domain empties."""
    queue: deque[tuple[int, int]] = deque()
    if seed is None:
        for u in range(g.nv):
            for v in g.neighbors(u):
                queue.append((u, v))
    else:
        for u in seed:
            for v in g.neighbors(u):
                queue.append((v, u))
    while queue:
        u, v = queue.popleft()
        kept = 0
        mask = dom[u]
        while mask:
            low = mask & -mask
            x = low.bit_length() - 1
            if h.adj[x] & dom[v]:
                kept |= low
            mask ^= low
        if kept != dom[u]:
            dom[u] = kept
            if not kept:
                return False
            for w in g.neighbors(u):
                if w != v:
                    queue.append((w, u))
    return True


def find_homomorphism(g: Graph, h: Graph,
                      budget: int | None = None) -> HomResult:
    """Search for a graph homomorphism g -> h.

    Backtracking over vertex images with full arc consistency after every
    assignment; domains are bitsets over h's vertices.  A budget bounds the
    number of assignments tried; hitting it yields status "unknown".
    """
    if g.nv == 0:
        return HomResult("found", Homomorphism(()))
    if h.nv == 0:
        return HomResult("none", None)
    if g.ne > 0 and h.ne == 0:
        return HomResult("none", None)
    full_h = (1 << h.nv) - 1
    dom = [full_h] * g.nv
    if not _ac3(dom, g, h):
        return HomResult("none", None)
    nodes = 0

    def bt(dom: list[int], assigned: int) -> tuple[str, list[int] | None]:
        nonlocal nodes
        if assigned == g.nv:
            return "sat", dom
        pick, best = -1, 1 << 62
        for v in range(g.nv):
            size = dom[v].bit_count()
            if size > 1 and size < best:
                pick, best = v, size
        if pick < 0:
            return "sat", dom
        hit_unknown = False
        mask = dom[pick]
        while mask:
            low = mask & -mask
            mask ^= low
            nodes += 1
            if budget is not None and nodes > budget:
                return "unknown", None
            child = dom.copy()
            child[pick] = low
            if _ac3(child, g, h, iter((pick,))):
                res, final = bt(child,
                                sum(d.bit_count() == 1 for d in child))
                if res == "sat":
                    return "sat", final
                if res == "unknown":
                    hit_unknown = True
                    break
        return ("unknown", None) if hit_unknown else ("unsat", None)

    status, final = bt(dom, sum(d.bit_count() == 1 for d in dom))
    if status == "unsat":
        return HomResult("none", None)
    if status == "unknown":
        return HomResult("unknown", None)
    assert final is not None
    mapping = tuple(d.bit_length() - 1 for d in final)
    for u in range(g.nv):
        for v in g.neighbors(u):
            if not h.has_edge(mapping[u], mapping[v]):
                raise GraphError("internal error: map is not edge-preserving")
    return HomResult("found", Homomorphism(mapping))


# ---------------------------------------------------------------------------
# covering arrays on graphs


@dataclass(frozen=True)
class CAGraphResult:
    status: str  # "found" | "none" | "unknown"
    ca: object | None
    hom: Homomorphism | None


def covering_array_on_graph(g: Graph, n: int, k: int,
                            budget: int | None = None) -> CAGraphResult:
    """Covering array on g with n columns over k symbols, if one exists.

    Rows indexed by g's vertices; every pair of adjacent rows must cover all
    k^2 symbol pairs.  Existence is equivalent to a homomorphism from g into
    the qualitative independence graph of (n, k), and the array is read off
    the image partitions.  A proper colouring of g into a clique of the
    target graph is tried first; only when g needs more colours than the
    largest clique does the general homomorphism search run.
    """
    from .covering import CoveringArray

    if k < 2:
        raise GraphError("need k >= 2 symbols")
    if n < k * k:
        raise GraphError("covering arrays on graphs need n >= k^2")
    target = build_graph(GraphSpec("qi", n, k))
    hom: Homomorphism | None = None
    colours, c = _dsatur_greedy(g.adj)
    clique, _ = maximum_clique_masks(target.adj, budget)
    if len(clique) >= c:
        hom = Homomorphism(tuple(clique[col] for col in colours))
    else:
        res = find_homomorphism(g, target, budget)
        if res.status != "found":
            return CAGraphResult(res.status, None, None)
        hom = res.hom
    assert hom is not None and target.labels is not None
    rows = np.stack([
        np.frombuffer(target.labels[x].labels, dtype=np.uint8)
        for x in hom.map
    ]) if g.nv else np.zeros((0, n), dtype=np.uint8)
    if g.nv == 0:
        return CAGraphResult("found", None, hom)
    ca = CoveringArray(k, rows)
    for u in range(g.nv):
        for v in g.neighbors(u):
            if not target.has_edge(hom.map[u], hom.map[v]):
                raise GraphError("internal error: rows not independent")
    return CAGraphResult("found", ca, hom)


# ---------------------------------------------------------------------------
# retraction of 2-partitions onto balanced ones


def core_project(p: Partition) -> Partition:
    """Send a 2-partition to the balanced one its chain passes through.

    The smaller class (the class of point 0 on ties) lies on a unique
    symmetric chain; the chain's set of size n // 2 becomes the projected
    smaller class.  The map fixes balanced partitions and preserves
    qualitative independence, so it retracts the QI graph of 2-partitions
    onto the uniform (even n) or almost-uniform (odd n) subgraph.
    """
    if p.k != 2:
        raise GraphError("core projection is defined for 2-partitions")
    classes = p.classes
    if min(len(c) for c in classes) < 2:
        raise GraphError("need both classes of size at least 2")
    n = p.n
    small = classes[0] if len(classes[0]) <= len(classes[1]) else classes[1]
    mask = sum(1 << e for e in small)
    chain = chain_of(mask, n)
    half = n // 2
    mid = next(m for m in chain if m.bit_count() == half)
    first = tuple(e for e in range(n) if mid >> e & 1)
    second = tuple(e for e in range(n) if not mid >> e & 1)
    return Partition.from_classes(n, (first, second))


# ---------------------------------------------------------------------------
# structure reports


@dataclass(frozen=True)
class RegularityReport:
    regular: bool
    degree: int | None
    histogram: dict[int, int]
    diameter: int | float


def regularity_and_diameter(g: Graph) -> RegularityReport:
    """Degree statistics and exact diameter (math.inf when disconnected)."""
    nv = g.nv
    if nv == 0:
        raise GraphError("empty graph has no diameter")
    degs = g.degrees()
    hist = dict(sorted(Counter(degs).items()))
    regular = len(hist) == 1
    degree = degs[0] if regular else None
    full = (1 << nv) - 1
    diameter: int | float = 0
    for v in range(nv):
        visited = frontier = 1 << v
        dist = 0
        while visited != full:
            nxt = 0
            for u in _bits(frontier):
                nxt |= g.adj[u]
            nxt &= ~visited
            if not nxt:
                return RegularityReport(regular, degree, hist, math.inf)
            dist += 1
            visited |= nxt
            frontier = nxt
        diameter = max(diameter, dist)
    return RegularityReport(regular, degree, hist, diameter)


# ---------------------------------------------------------------------------
# text format


def graph_to_text(g: Graph) -> str:
    """Serialize: comment lines, a "p edge V E" header, vertex label lines
    "c v <index> <partition>", then "e u v" lines, all indices 1-based."""
    lines = [f"c name {g.name}", f"p edge {g.nv} {g.ne}"]
    if g.labels is not None:
        for i, lab in enumerate(g.labels):
            if isinstance(lab, Partition):
                lines.append(f"c v {i + 1} {lab.format()}")
    for v in range(g.nv):
        for u in _bits(g.adj[v]):
            if u > v:
                lines.append(f"e {v + 1} {u + 1}")
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> Graph:
    """Parse the format graph_to_text writes."""
    nv = ne = -1
    name = "graph"
    edges: list[tuple[int, int]] = []
    labels: dict[int, Partition] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(None, 3)
        if parts[0] == "c":
            if len(parts) >= 3 and parts[1] == "name":
                name = line.split(None, 2)[2]
            elif len(parts) == 4 and parts[1] == "v":
                try:
                    idx = int(parts[2])
                except ValueError as exc:
                    raise GraphError(f"line {lineno}: bad vertex index") from exc
                labels[idx - 1] = Partition.parse(parts[3])
            continue
        if parts[0] == "p":
            if nv >= 0:
                raise GraphError(f"line {lineno}: duplicate problem line")
            if len(parts) != 4 or parts[1] != "edge":
                raise GraphError(f"line {lineno}: expected 'p edge V E'")
            try:
                nv, ne = int(parts[2]), int(parts[3])
            except ValueError as exc:
                raise GraphError(f"line {lineno}: bad counts") from exc
            if nv < 0 or ne < 0:
                raise GraphError(f"line {lineno}: negative counts")
            continue
        if parts[0] == "e":
            if nv < 0:
                raise GraphError(f"line {lineno}: edge before problem line")
            if len(parts) != 3:
                raise GraphError(f"line {lineno}: expected 'e u v'")
            try:
                u, v = int(parts[1]) - 1, int(parts[2]) - 1
            except ValueError as exc:
                raise GraphError(f"line {lineno}: bad endpoints") from exc
            if not (0 <= u < nv and 0 <= v < nv) or u == v:
                raise GraphError(f"line {lineno}: endpoints out of range")
            edges.append((u, v))
            continue
        raise GraphError(f"line {lineno}: unrecognized line {line!r}")
    if nv < 0:
        raise GraphError("missing problem line")
    if len(edges) != ne:
        raise GraphError(f"problem line promises {ne} edges, found {len(edges)}")
    masks = [0] * nv
    for u, v in edges:
        masks[u] |= 1 << v
        masks[v] |= 1 << u
    label_tuple: tuple | None = None
    if labels:
        if sorted(labels) != list(range(nv)):
            raise GraphError("vertex labels must cover all vertices or none")
        label_tuple = tuple(labels[i] for i in range(nv))
    return Graph(name, tuple(masks), label_tuple, None)
