"""Ribbons, minimum vertex separators, and the canonical factorization.

A ribbon is a graph with designated left/right endpoint sets U, V and a set
of pinned edges; separators are vertex sets whose removal leaves no path
from U to V, and they may intersect U and V (removing U itself vacuously
disconnects, so sep(R) <= min(|U|, |V|) always).  Minimum separators are
computed by the Menger reduction to unit-capacity vertex-split max flow;
the leftmost/rightmost minimum separators fall out of residual reachability
from the two sides, and a 2^|V(R)| brute-force oracle is kept alongside.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InvalidParameterError
from .fourier import Character, Monomial, implied_edges, support
from .model import Edge, edge


@dataclass(frozen=True)
class Ribbon:
    """Graph with endpoint sets ``left``/``right`` and pinned edge set ``pinned``."""

    vertices: frozenset[int]
    edges: frozenset[Edge]
    left: frozenset[int]
    right: frozenset[int]
    pinned: frozenset[Edge]

    def __post_init__(self) -> None:
        if not (self.left | self.right) <= self.vertices:
            raise InvalidParameterError("endpoint sets must lie inside the vertex set")
        if not self.pinned <= self.edges:
            raise InvalidParameterError("pinned edges must be edges of the ribbon")
        covered = {v for e in self.edges for v in e} | self.left | self.right
        if covered != self.vertices:
            raise InvalidParameterError(
                "every ribbon vertex must be an edge endpoint or lie in an endpoint set"
            )

    @property
    def free_edges(self) -> frozenset[Edge]:
        return self.edges - self.pinned


def ribbon_from_monomials(a: Monomial, b: Monomial, w: Iterable[Edge]) -> Ribbon:
    """The ribbon of an index pair: U = supp(A), V = supp(B), pinned = implied edges."""
    w_edges = frozenset(edge(u, v) for u, v in w)
    pinned = implied_edges(a) | implied_edges(b)
    edges = w_edges | pinned
    vertices = {v for e in edges for v in e} | support(a) | support(b)
    return Ribbon(frozenset(vertices), edges, support(a), support(b), pinned)


def _adjacency(vertices: Iterable[int], edges: Iterable[Edge]) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {v: set() for v in vertices}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def reachable(
    vertices: Iterable[int],
    edges: Iterable[Edge],
    sources: Iterable[int],
    blocked: Iterable[int] = (),
) -> frozenset[int]:
    """Vertices reachable from ``sources`` minus ``blocked``, never entering ``blocked``."""
    adj = _adjacency(vertices, edges)
    blocked_set = set(blocked)
    seen: set[int] = set()
    stack = sorted(s for s in sources if s not in blocked_set)
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(w for w in sorted(adj[v]) if w not in blocked_set and w not in seen)
    return frozenset(seen)


def is_separator(r: Ribbon, q: Iterable[int]) -> bool:
    q_set = set(q)
    region = reachable(r.vertices, r.edges, r.left, q_set)
    return not any(v in region for v in r.right if v not in q_set)


class _SplitFlow:
    """Unit-capacity vertex-split max flow between the two endpoint sets."""

    SOURCE = ("s",)
    SINK = ("t",)

    def __init__(self, r: Ribbon) -> None:
        self.ribbon = r
        inf = len(r.vertices) + 1
        self.capacity: dict[tuple, dict[tuple, int]] = {}

        def arc(a: tuple, b: tuple, cap: int) -> None:
            self.capacity.setdefault(a, {})[b] = cap
            self.capacity.setdefault(b, {}).setdefault(a, 0)

        for v in sorted(r.vertices):
            arc((v, "in"), (v, "out"), 1)
        for u in sorted(r.left):
            arc(self.SOURCE, (u, "in"), inf)
        for v in sorted(r.right):
            arc((v, "out"), self.SINK, inf)
        for u, v in sorted(r.edges):
            arc((u, "out"), (v, "in"), inf)
            arc((v, "out"), (u, "in"), inf)
        self.capacity.setdefault(self.SOURCE, {})
        self.capacity.setdefault(self.SINK, {})
        self.flow: dict[tuple, dict[tuple, int]] = {
            a: {b: 0 for b in nbrs} for a, nbrs in self.capacity.items()
        }
        self.value = 0
        self._run()

    def _residual(self, a: tuple, b: tuple) -> int:
        return self.capacity[a].get(b, 0) - self.flow[a].get(b, 0)

    def _run(self) -> None:
        while True:
            parents: dict[tuple, tuple] = {self.SOURCE: self.SOURCE}
            queue = deque([self.SOURCE])
            while queue and self.SINK not in parents:
                node = queue.popleft()
                for nxt in sorted(self.capacity[node]):
                    if nxt not in parents and self._residual(node, nxt) > 0:
                        parents[nxt] = node
                        queue.append(nxt)
            if self.SINK not in parents:
                return
            node = self.SINK
            while node != self.SOURCE:
                prev = parents[node]
                self.flow[prev][node] += 1
                self.flow[node][prev] -= 1
                node = prev
            self.value += 1

    def source_side(self) -> set[tuple]:
        seen = {self.SOURCE}
        queue = deque([self.SOURCE])
        while queue:
            node = queue.popleft()
            for nxt in sorted(self.capacity[node]):
                if nxt not in seen and self._residual(node, nxt) > 0:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen

    def sink_side(self) -> set[tuple]:
        seen = {self.SINK}
        queue = deque([self.SINK])
        while queue:
            node = queue.popleft()
            for prev in sorted(self.capacity):
                if prev not in seen and self._residual(prev, node) > 0:
                    seen.add(prev)
                    queue.append(prev)
        return seen


def min_separator_size(r: Ribbon) -> int:
    """Minimum size of a vertex set disconnecting ``left`` from ``right``."""
    return _SplitFlow(r).value


@dataclass(frozen=True)
class ExtremalSeparators:
    leftmost: frozenset[int]
    rightmost: frozenset[int]
    size: int


def extremal_separators(r: Ribbon) -> ExtremalSeparators:
    """The unique minimum separators closest to each endpoint set.

    The leftmost separator is read off the saturated vertex arcs crossing the
    residual-reachable region on the source side; the rightmost symmetrically
    from the sink side.
    """
    flow = _SplitFlow(r)
    src = flow.source_side()
    leftmost = frozenset(
        v for v in r.vertices if (v, "in") in src and (v, "out") not in src
    )
    snk = flow.sink_side()
    rightmost = frozenset(
        v for v in r.vertices if (v, "out") in snk and (v, "in") not in snk
    )
    if len(leftmost) != flow.value or len(rightmost) != flow.value:
        raise AssertionError("extremal cut sizes disagree with the max-flow value")
    return ExtremalSeparators(leftmost, rightmost, flow.value)


def brute_force_min_separators(r: Ribbon) -> tuple[int, tuple[frozenset[int], ...]]:
    """All minimum separators by trying every vertex subset, smallest size first."""
    verts = sorted(r.vertices)
    for size in range(len(verts) + 1):
        found = [
            frozenset(q) for q in itertools.combinations(verts, size) if is_separator(r, q)
        ]
        if found:
            return size, tuple(found)
    return 0, (frozenset(),)  # no vertices at all


def _induced(edges: Iterable[Edge], verts: frozenset[int]) -> frozenset[Edge]:
    return frozenset(e for e in edges if e[0] in verts and e[1] in verts)


def canonical_factorization(r: Ribbon) -> tuple[Ribbon, Ribbon, Ribbon]:
    """Split R into left / middle / right parts at its extremal separators.

    The left part is the region reachable from ``left`` without touching the
    leftmost separator S_L, together with S_L; the right part symmetrically;
    the middle is everything else (it contains both separators).
    """
    ext = extremal_separators(r)
    region_left = reachable(r.vertices, r.edges, r.left, ext.leftmost)
    region_right = reachable(r.vertices, r.edges, r.right, ext.rightmost)
    if region_left & region_right:
        raise AssertionError("extremal regions overlap; minimum-cut lattice violated")
    middle_verts = frozenset(r.vertices - region_left - region_right)
    if not (ext.leftmost | ext.rightmost) <= middle_verts:
        raise AssertionError("extremal separators escape the middle region")

    left_verts = frozenset(region_left | ext.leftmost)
    right_verts = frozenset(region_right | ext.rightmost)
    left_part = Ribbon(
        left_verts, _induced(r.edges, left_verts), r.left, ext.leftmost,
        _induced(r.pinned, left_verts),
    )
    middle_part = Ribbon(
        middle_verts, _induced(r.edges, middle_verts), ext.leftmost, ext.rightmost,
        _induced(r.pinned, middle_verts),
    )
    right_part = Ribbon(
        right_verts, _induced(r.edges, right_verts), ext.rightmost, r.right,
        _induced(r.pinned, right_verts),
    )
    return left_part, middle_part, right_part


def verify_vertex_count(r: Ribbon) -> bool:
    """|V(R)| = |V(R_l)| + |V(R_m)| + |V(R_r)| - |S_L| - |S_R|, exactly."""
    left_part, middle_part, right_part = canonical_factorization(r)
    ext = extremal_separators(r)
    return len(r.vertices) == (
        len(left_part.vertices)
        + len(middle_part.vertices)
        + len(right_part.vertices)
        - len(ext.leftmost)
        - len(ext.rightmost)
    )


def separator_upper_bound_check(a: Monomial, b: Monomial, w: Iterable[Edge]) -> bool:
    """sep(R) <= min(|supp(A)|, |supp(B)|): either endpoint set is a separator."""
    r = ribbon_from_monomials(a, b, w)
    return min_separator_size(r) <= min(len(support(a)), len(support(b)))


def random_monomial(rng: np.random.Generator, vertices: Sequence[int], t: int, max_pairs: int) -> Monomial:
    size = int(rng.integers(0, max_pairs + 1))
    pairs: set[tuple[int, int]] = set()
    for _ in range(size):
        pairs.add((int(rng.choice(vertices)), int(rng.integers(1, t + 1))))
    return frozenset(pairs)


def random_ribbon_triples(
    count: int,
    seed: int,
    max_vertices: int = 10,
    t: int = 2,
    max_pairs: int = 3,
    max_free_edges: int = 5,
) -> Iterator[tuple[Monomial, Monomial, frozenset[Edge]]]:
    """Seeded stream of (A, B, W) triples whose ribbons stay small."""
    rng = np.random.Generator(np.random.Philox(seed))
    produced = 0
    verts = list(range(1, max_vertices + 1))
    while produced < count:
        a = random_monomial(rng, verts, t, max_pairs)
        b = random_monomial(rng, verts, t, max_pairs)
        w: set[Edge] = set()
        for _ in range(int(rng.integers(0, max_free_edges + 1))):
            u, v = rng.choice(verts, size=2, replace=False)
            w.add(edge(int(u), int(v)))
        ribbon = ribbon_from_monomials(a, b, w)
        if len(ribbon.vertices) <= max_vertices:
            produced += 1
            yield a, b, frozenset(w)
