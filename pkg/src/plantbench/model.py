"""Null and planted graph models.

The null model draws every edge sign of the complete graph on [n]
independently and uniformly from {+1, -1}.  The planted model additionally
chooses an ordered tuple of t disjoint k-subsets of [n] (a *planting*),
forces every intra-block edge to +1, and records the n x t membership
indicator.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import InvalidParameterError, ResourceLimitError

# Counter-based generator; the algorithm name is embedded in run reports so
# that seed lists stay meaningful across machines.
RNG_NAME = "Philox4x64-10 (numpy.random.Philox)"

DEFAULT_ENUMERATION_CAP = 10_000_000

Edge = tuple[int, int]


def edge(u: int, v: int) -> Edge:
    """Canonical (min, max) form of an unordered vertex pair."""
    if u < 1 or v < 1:
        raise InvalidParameterError(f"vertices are 1-based, got ({u}, {v})")
    if u == v:
        raise InvalidParameterError(f"self-loop at vertex {u}")
    return (u, v) if u < v else (v, u)


@lru_cache(maxsize=None)
def edge_order(n: int) -> tuple[Edge, ...]:
    """All unordered pairs of [n], lexicographically ordered."""
    return tuple((u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1))


@lru_cache(maxsize=None)
def edge_index(n: int) -> dict[Edge, int]:
    """Stable position of each canonical pair inside ``edge_order(n)``."""
    return {e: i for i, e in enumerate(edge_order(n))}


@dataclass(eq=False)
class Graph:
    """A +-1 sign for every unordered pair of vertices 1..n."""

    n: int
    signs: dict[Edge, int]

    def __post_init__(self) -> None:
        expected = edge_order(self.n)
        if len(self.signs) != len(expected) or set(self.signs) != set(expected):
            raise InvalidParameterError(
                f"graph on {self.n} vertices needs exactly one sign per pair"
            )
        for e, s in self.signs.items():
            if s not in (-1, 1):
                raise InvalidParameterError(f"sign of edge {e} must be +-1, got {s}")
        self._neg_mask: int | None = None

    def sign(self, u: int, v: int) -> int:
        e = edge(u, v)
        if e not in self.signs:
            raise InvalidParameterError(f"edge {e} out of range for n={self.n}")
        return self.signs[e]

    def is_edge(self, u: int, v: int) -> bool:
        return self.sign(u, v) == 1

    def non_edges(self) -> tuple[Edge, ...]:
        return tuple(e for e in edge_order(self.n) if self.signs[e] == -1)

    @property
    def negative_mask(self) -> int:
        """Bitmask over ``edge_order(n)`` marking the -1 edges."""
        if self._neg_mask is None:
            mask = 0
            for i, e in enumerate(edge_order(self.n)):
                if self.signs[e] == -1:
                    mask |= 1 << i
            self._neg_mask = mask
        return self._neg_mask


def complete_graph(n: int) -> Graph:
    return Graph(n, {e: 1 for e in edge_order(n)})


def graph_from_bits(n: int, code: int) -> Graph:
    """Graph whose i-th edge (lex order) is -1 iff bit i of ``code`` is set."""
    return Graph(n, {e: -1 if (code >> i) & 1 else 1 for i, e in enumerate(edge_order(n))})


def all_graphs(n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[Graph]:
    """Every sign assignment on [n], in increasing bit-code order."""
    total = 1 << len(edge_order(n))
    if total > cap:
        raise ResourceLimitError(f"2^binom({n},2) = {total} graphs exceeds cap {cap}")
    for code in range(total):
        yield graph_from_bits(n, code)


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def sample_null(n: int, seed: int) -> Graph:
    """One draw from the null model: independent fair +-1 edge signs."""
    if n < 1:
        raise InvalidParameterError(f"n must be positive, got {n}")
    rng = _generator(seed)
    order = edge_order(n)
    draws = rng.integers(0, 2, size=len(order))
    return Graph(n, {e: int(2 * d - 1) for e, d in zip(order, draws)})


@dataclass(frozen=True)
class Planting:
    """Ordered tuple of t pairwise disjoint k-subsets of [n]."""

    n: int
    k: int
    t: int
    blocks: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        if self.n < 1 or self.k < 1 or self.t < 1:
            raise InvalidParameterError("n, k, t must be positive")
        if self.k * self.t > self.n:
            raise InvalidParameterError(f"kt = {self.k * self.t} exceeds n = {self.n}")
        if len(self.blocks) != self.t:
            raise InvalidParameterError(f"expected {self.t} blocks, got {len(self.blocks)}")
        seen: set[int] = set()
        for block in self.blocks:
            if len(block) != self.k:
                raise InvalidParameterError(f"block {sorted(block)} does not have size {self.k}")
            if not block <= set(range(1, self.n + 1)):
                raise InvalidParameterError(f"block {sorted(block)} not contained in [n]")
            if block & seen:
                raise InvalidParameterError("blocks must be pairwise disjoint")
            seen |= block

    @property
    def union(self) -> frozenset[int]:
        return frozenset().union(*self.blocks)

    def indicator(self) -> np.ndarray:
        """n x t  0/1 membership matrix."""
        x = np.zeros((self.n, self.t), dtype=np.int8)
        for j, block in enumerate(self.blocks):
            for i in block:
                x[i - 1, j] = 1
        return x

    def contains(self, vertex: int, label: int) -> bool:
        return vertex in self.blocks[label - 1]


def forced_edges(planting: Planting) -> frozenset[Edge]:
    """Edges forced present by the planting: the union of intra-block pairs."""
    forced: set[Edge] = set()
    for block in planting.blocks:
        forced.update(itertools.combinations(sorted(block), 2))
    return frozenset(forced)


@dataclass(eq=False)
class PlantedSample:
    """A planted-model draw: background graph with forced intra-block edges."""

    graph: Graph
    planting: Planting
    indicator: np.ndarray

    def __post_init__(self) -> None:
        p = self.planting
        if self.graph.n != p.n:
            raise InvalidParameterError("graph and planting disagree on n")
        if self.indicator.shape != (p.n, p.t):
            raise InvalidParameterError("indicator must be an n x t matrix")
        if (self.indicator.sum(axis=1) > 1).any():
            raise InvalidParameterError("a vertex lies in more than one block")
        if (self.indicator.sum(axis=0) != p.k).any():
            raise InvalidParameterError("every block must have size k")
        for u, v in forced_edges(p):
            if self.graph.sign(u, v) != 1:
                raise InvalidParameterError(f"intra-block edge {(u, v)} is not present")


def sample_planted(n: int, k: int, t: int, seed: int) -> PlantedSample:
    """One draw from the planted model, deterministic given the seed.

    The planting is uniform over ordered tuples of disjoint k-subsets: the
    first kt entries of a uniformly random permutation of [n] are chunked
    into t blocks.
    """
    if n < 1 or k < 1 or t < 1:
        raise InvalidParameterError("n, k, t must be positive")
    if k * t > n:
        raise InvalidParameterError(f"kt = {k * t} exceeds n = {n}")
    rng = _generator(seed)
    perm = rng.permutation(n)
    blocks = tuple(
        frozenset(int(v) + 1 for v in perm[r * k : (r + 1) * k]) for r in range(t)
    )
    planting = Planting(n, k, t, blocks)

    order = edge_order(n)
    draws = rng.integers(0, 2, size=len(order))
    signs = {e: int(2 * d - 1) for e, d in zip(order, draws)}
    for e in forced_edges(planting):
        signs[e] = 1
    return PlantedSample(Graph(n, signs), planting, planting.indicator())


def count_plantings(n: int, k: int, t: int) -> int:
    """Number of ordered plantings: binom(n, kt) * (kt)! / (k!)^t."""
    if n < 1 or k < 1 or t < 1:
        raise InvalidParameterError("n, k, t must be positive")
    if k * t > n:
        raise InvalidParameterError(f"kt = {k * t} exceeds n = {n}")
    kt = k * t
    return math.comb(n, kt) * math.factorial(kt) // (math.factorial(k) ** t)


def enumerate_plantings(
    n: int, k: int, t: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[Planting]:
    """Yield every ordered planting exactly once.

    Order: lexicographic over the ordered tuple of sorted blocks, so reruns
    and oracle comparisons see an identical stream.
    """
    total = count_plantings(n, k, t)
    if total > cap:
        raise ResourceLimitError(f"{total} plantings exceed enumeration cap {cap}")

    def rec(chosen: list[frozenset[int]], remaining: tuple[int, ...]) -> Iterator[Planting]:
        if len(chosen) == t:
            yield Planting(n, k, t, tuple(chosen))
            return
        for combo in itertools.combinations(remaining, k):
            block = frozenset(combo)
            rest = tuple(v for v in remaining if v not in block)
            yield from rec(chosen + [block], rest)

    yield from rec([], tuple(range(1, n + 1)))
