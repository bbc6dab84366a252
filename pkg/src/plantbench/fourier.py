"""Characters, monomials, test graphs and truncation feasibility.

Monomials are sets of (vertex, label) pairs; characters are edge sets T with
chi_T(G) = prod of the edge signs over T.  A monomial M implies the
intra-label edges binom(S_r(M), 2); the *test graph* of (M, T) lives on
V(T) union S_M with edge set T union implied(M).  A pair passes truncation
iff its test graph has at most tau vertices and no connected component
larger than the block size k.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import InvalidParameterError, ResourceLimitError
from .model import DEFAULT_ENUMERATION_CAP, Edge, Graph, edge

Pair = tuple[int, int]
Monomial = frozenset  # of Pair
Character = frozenset  # of Edge


def monomial(pairs: Iterable[Pair]) -> Monomial:
    out = frozenset((int(i), int(j)) for i, j in pairs)
    for i, j in out:
        if i < 1 or j < 1:
            raise InvalidParameterError(f"(vertex, label) pairs are 1-based, got {(i, j)}")
    return out


def character(edges: Iterable[tuple[int, int]]) -> Character:
    return frozenset(edge(u, v) for u, v in edges)


def support(m: Monomial) -> frozenset[int]:
    """Vertices appearing in the monomial."""
    return frozenset(i for i, _ in m)


def label_class(m: Monomial, r: int) -> frozenset[int]:
    """Vertices the monomial pins to label r."""
    return frozenset(i for i, j in m if j == r)


def labels(m: Monomial) -> frozenset[int]:
    return frozenset(j for _, j in m)


def endpoints(t: Character) -> frozenset[int]:
    return frozenset(v for e in t for v in e)


def implied_edges(m: Monomial) -> Character:
    """Intra-label edges implied by the monomial: union of binom(S_r(M), 2)."""
    out: set[Edge] = set()
    for r in labels(m):
        out.update(itertools.combinations(sorted(label_class(m, r)), 2))
    return frozenset(out)


def chi(t: Character, g: Graph) -> int:
    """Character value chi_T(G): the product of the edge signs over T.

    The empty character is the constant +1.
    """
    sign = 1
    for u, v in t:
        sign *= g.sign(u, v)
    return sign


def components(vertices: Iterable[int], edges: Iterable[Edge]) -> tuple[frozenset[int], ...]:
    """Connected components, listed by increasing minimum vertex."""
    adjacency: dict[int, set[int]] = {v: set() for v in vertices}
    for u, v in edges:
        adjacency.setdefault(u, set()).add(v)
        adjacency.setdefault(v, set()).add(u)
    seen: set[int] = set()
    comps: list[frozenset[int]] = []
    for start in sorted(adjacency):
        if start in seen:
            continue
        stack = [start]
        comp: set[int] = set()
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp.add(v)
            stack.extend(w for w in sorted(adjacency[v]) if w not in comp)
        seen |= comp
        comps.append(frozenset(comp))
    return tuple(sorted(comps, key=min))


@dataclass(frozen=True)
class TestGraph:
    """The graph on V(T) union S_M with edges T union implied(M)."""

    vertices: frozenset[int]
    edges: Character
    components: tuple[frozenset[int], ...]


def test_graph(m: Monomial, t: Character) -> TestGraph:
    edges = frozenset(t) | implied_edges(m)
    vertices = endpoints(edges) | support(m)
    return TestGraph(vertices, edges, components(vertices, edges))


@dataclass(frozen=True)
class TruncationParams:
    """Vertex budget tau, component-size budget k, and degree budget d.

    ``epsilon`` is the exponent with kt = n^(1/2 - epsilon); it is derived
    from the model when not supplied.  Small-n runs normally sit outside the
    asymptotic parameter window; ``parameter_window`` records that fact, it
    never rejects a configuration.
    """

    tau: int
    k: int
    d: int
    epsilon: float | None = None

    def __post_init__(self) -> None:
        if self.tau < 1:
            raise InvalidParameterError(f"tau must be >= 1, got {self.tau}")
        if self.k < 1:
            raise InvalidParameterError(f"k must be >= 1, got {self.k}")
        if self.d < 2:
            raise InvalidParameterError(f"d must be >= 2, got {self.d}")

    @property
    def half_degree(self) -> int:
        return self.d // 2


def epsilon_exponent(n: int, k: int, t: int) -> float:
    """epsilon solving kt = n^(1/2 - epsilon)."""
    if n < 2:
        raise InvalidParameterError("epsilon is defined for n >= 2")
    return 0.5 - math.log(k * t) / math.log(n)


def parameter_window(n: int, t: int, params: TruncationParams) -> dict:
    """Informational flags for the asymptotic parameter window.

    Conditions checked with constant C = 1 and natural logs:
    t*d/eps <= tau <= eps*log(n), and eps > loglog(n)/log(n).  Desk-scale
    configurations typically violate them; reports must say so.
    """
    eps = params.epsilon if params.epsilon is not None else epsilon_exponent(n, params.k, t)
    log_n = math.log(n)
    loglog_over_log = math.log(log_n) / log_n if log_n > 0 else float("inf")
    eps_positive = eps > 0
    tau_lower_ok = eps_positive and t * params.d / eps <= params.tau
    tau_upper_ok = eps_positive and params.tau <= eps * log_n
    eps_ok = eps > loglog_over_log
    return {
        "n": n,
        "k": params.k,
        "t": t,
        "d": params.d,
        "tau": params.tau,
        "epsilon": eps,
        "constant_C": 1,
        "log_base": "e",
        "tau_lower_ok": tau_lower_ok,
        "tau_upper_ok": tau_upper_ok,
        "epsilon_ok": eps_ok,
        "satisfied": bool(tau_lower_ok and tau_upper_ok and eps_ok),
    }


def is_truncation_feasible(m: Monomial, t: Character, params: TruncationParams) -> bool:
    """True iff |V(T) union S_M| <= tau and every component has size <= k."""
    tg = test_graph(m, t)
    if len(tg.vertices) > params.tau:
        return False
    return all(len(c) <= params.k for c in tg.components)


def is_consistent(m: Monomial, t: Character, num_labels: int) -> bool:
    """Whether some labelling of the test-graph components agrees with M.

    A component containing a vertex pinned to label j must take label j; a
    component pinned to two different labels admits no assignment.
    """
    for _, j in m:
        if j > num_labels:
            raise InvalidParameterError(f"label {j} exceeds t = {num_labels}")
    tg = test_graph(m, t)
    for comp in tg.components:
        pinned = {j for i, j in m if i in comp}
        if len(pinned) > 1:
            return False
    return True


def enumerate_feasible_characters(
    m: Monomial,
    n: int,
    params: TruncationParams,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> Iterator[Character]:
    """All characters T passing truncation against the monomial M.

    Strategy: for each vertex superset V >= S_M with |V| <= tau, emit every
    T subset of binom(V, 2) whose endpoints cover V \\ S_M exactly; the
    exact-cover condition prevents double counting across supersets.
    """
    sup = support(m)
    for v in sup:
        if v > n:
            raise InvalidParameterError(f"monomial vertex {v} exceeds n = {n}")
    if len(sup) > params.tau:
        return
    others = [v for v in range(1, n + 1) if v not in sup]

    candidates = 0
    for extra in range(params.tau - len(sup) + 1):
        candidates += math.comb(len(others), extra) * (1 << math.comb(len(sup) + extra, 2))
    if candidates > cap:
        raise ResourceLimitError(
            f"character enumeration would visit {candidates} subsets, cap is {cap}"
        )

    for extra_count in range(params.tau - len(sup) + 1):
        for extra in itertools.combinations(others, extra_count):
            verts = sorted(sup | set(extra))
            pairs = list(itertools.combinations(verts, 2))
            need = frozenset(extra)
            for mask in range(1 << len(pairs)):
                t = frozenset(pairs[i] for i in range(len(pairs)) if (mask >> i) & 1)
                if not need <= endpoints(t):
                    continue
                if is_truncation_feasible(m, t, params):
                    yield t
