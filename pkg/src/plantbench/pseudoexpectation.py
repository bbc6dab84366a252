"""The truncated pseudoexpectation operator and its exact identity checks.

For a graph G the operator evaluates a monomial X_M as

    E~_G[X_M] = sum over truncation-feasible T of coeff(M, T) * chi_T(G),

with the planted coefficients of :mod:`plantbench.moments`.  The expansion of
each monomial depends only on the model (n, k, t) and the truncation budgets,
so it is built once per monomial and shared across graphs.

Exact identities exercised here:

* non-edge products  E~_G[x_{u,r} x_{v,r} X_{M'}] = 0 whenever {u,v} is
  absent from G (the coefficients pair up across toggling the implied edge);
* disjointness products E~_G[x_{i,j1} x_{i,j2} X_{M'}] = 0 for j1 != j2
  (every planted coefficient of an inconsistent monomial vanishes);
* calibration: averaging E~_G[p] over all graphs equals the planted-model
  expectation of p(X), for polynomials with graph-independent coefficients.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Sequence

from .errors import (
    DegenerateNormalizationError,
    DegreeBudgetError,
    InvalidParameterError,
    ResourceLimitError,
)
from .fourier import (
    Character,
    Monomial,
    TruncationParams,
    enumerate_feasible_characters,
    monomial,
    support,
)
from .model import (
    DEFAULT_ENUMERATION_CAP,
    RNG_NAME,
    Graph,
    Planting,
    all_graphs,
    count_plantings,
    edge_index,
    edge_order,
    enumerate_plantings,
    sample_null,
)
from .moments import exact_coefficient

Rational = Fraction | int


class Polynomial:
    """Multilinear polynomial in the variables x_{i,j} with rational coefficients.

    Monomials are sets of (vertex, label) pairs; products merge pair sets, so
    x_{i,j}^2 = x_{i,j} holds identically.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Iterable, Rational] | None = None) -> None:
        collected: dict[Monomial, Fraction] = {}
        for mono, coeff in (terms or {}).items():
            c = Fraction(coeff)
            if c == 0:
                continue
            key = monomial(mono)
            collected[key] = collected.get(key, Fraction(0)) + c
        self.terms = {m: c for m, c in collected.items() if c != 0}

    @classmethod
    def constant(cls, value: Rational) -> "Polynomial":
        return cls({frozenset(): value})

    @classmethod
    def variable(cls, vertex: int, label: int) -> "Polynomial":
        return cls({frozenset({(vertex, label)}): 1})

    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def __add__(self, other: "Polynomial | Rational") -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other)
        merged = dict(self.terms)
        for m, c in other.terms.items():
            merged[m] = merged.get(m, Fraction(0)) + c
        return Polynomial(merged)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Polynomial | Rational") -> "Polynomial":
        return self + (-other if isinstance(other, Polynomial) else Polynomial.constant(-Fraction(other)))

    def __mul__(self, other: "Polynomial | Rational") -> "Polynomial":
        if not isinstance(other, Polynomial):
            c = Fraction(other)
            return Polynomial({m: coeff * c for m, coeff in self.terms.items()})
        merged: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                key = m1 | m2
                merged[key] = merged.get(key, Fraction(0)) + c1 * c2
        return Polynomial(merged)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"Polynomial({len(self.terms)} terms, degree {self.degree()})"

    def evaluate_on_planting(self, planting: Planting) -> Fraction:
        """p(X) for the 0/1 indicator of the planting."""
        total = Fraction(0)
        for m, c in self.terms.items():
            if all(planting.contains(i, j) for i, j in m):
                total += c
        return total


def label_size(n: int, label: int) -> Polynomial:
    """sum_i x_{i,label}."""
    return Polynomial({frozenset({(i, label)}): 1 for i in range(1, n + 1)})


def total_size(n: int, t: int) -> Polynomial:
    """sum_{j<=t} sum_i x_{i,j}, the relaxation objective."""
    return Polynomial(
        {frozenset({(i, j)}): 1 for i in range(1, n + 1) for j in range(1, t + 1)}
    )


class FourierTables:
    """Per-monomial truncated expansions, shared across graphs.

    ``table(M)`` returns the pairs (mask, coeff) where ``mask`` marks the
    character's edges inside ``edge_order(n)`` and ``coeff`` is the exact
    planted coefficient; zero coefficients are dropped.  Thread-safe.
    """

    def __init__(
        self,
        n: int,
        t: int,
        params: TruncationParams,
        cap: int = DEFAULT_ENUMERATION_CAP,
    ) -> None:
        if params.k * t > n:
            raise InvalidParameterError(f"kt = {params.k * t} exceeds n = {n}")
        self.n = n
        self.t = t
        self.params = params
        self.cap = cap
        self._tables: dict[Monomial, tuple[tuple[int, Fraction], ...]] = {}
        self._lock = threading.Lock()

    @property
    def k(self) -> int:
        return self.params.k

    def _build(self, m: Monomial) -> tuple[tuple[int, Fraction], ...]:
        index = edge_index(self.n)
        rows: list[tuple[int, Fraction]] = []
        for t_char in enumerate_feasible_characters(m, self.n, self.params, cap=self.cap):
            coeff = exact_coefficient(m, t_char, self.n, self.k, self.t)
            if coeff == 0:
                continue
            mask = 0
            for e in t_char:
                mask |= 1 << index[e]
            rows.append((mask, coeff))
        rows.sort(key=lambda row: row[0])
        return tuple(rows)

    def table(self, m: Monomial) -> tuple[tuple[int, Fraction], ...]:
        key = frozenset(m)
        if len(key) > self.params.d:
            raise DegreeBudgetError(f"|M| = {len(key)} exceeds degree budget d = {self.params.d}")
        with self._lock:
            cached = self._tables.get(key)
            if cached is None:
                cached = self._build(key)
                self._tables[key] = cached
            return cached

    def characters(self, m: Monomial) -> tuple[tuple[Character, Fraction], ...]:
        """The expansion with characters spelled out as edge sets (for audits)."""
        order = edge_order(self.n)
        out = []
        for mask, coeff in self.table(m):
            edges = frozenset(order[i] for i in range(len(order)) if (mask >> i) & 1)
            out.append((edges, coeff))
        return tuple(out)


class PseudoExpectation:
    """The truncated operator evaluated on one graph, with memoized moments."""

    def __init__(self, graph: Graph, tables: FourierTables) -> None:
        if graph.n != tables.n:
            raise InvalidParameterError("graph and tables disagree on n")
        self.graph = graph
        self.tables = tables
        self.cache: dict[Monomial, Fraction] = {}

    @property
    def n(self) -> int:
        return self.tables.n

    @property
    def t(self) -> int:
        return self.tables.t

    @property
    def k(self) -> int:
        return self.tables.k

    @property
    def params(self) -> TruncationParams:
        return self.tables.params

    def moment(self, m: Iterable) -> Fraction:
        """E~_G[X_M]; the empty monomial gives the normalization mass E~_G[1]."""
        key = monomial(m)
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        neg = self.graph.negative_mask
        total = Fraction(0)
        for mask, coeff in self.tables.table(key):
            if (mask & neg).bit_count() & 1:
                total -= coeff
            else:
                total += coeff
        self.cache[key] = total
        return total

    def expect(self, p: Polynomial) -> Fraction:
        if p.degree() > self.params.d:
            raise DegreeBudgetError(
                f"polynomial degree {p.degree()} exceeds budget d = {self.params.d}"
            )
        return sum((c * self.moment(m) for m, c in p.terms.items()), Fraction(0))


class NormalizedPseudoExpectation:
    """E~*[p] = E~[p] / E~[1]; rescaling preserves every exact zero."""

    def __init__(self, pe) -> None:
        mass = pe.moment(frozenset())
        if mass == 0:
            raise DegenerateNormalizationError("cannot normalize: E~[1] = 0")
        self._pe = pe
        self.mass = mass

    def moment(self, m: Iterable) -> Fraction:
        return self._pe.moment(m) / self.mass

    def expect(self, p: Polynomial) -> Fraction:
        return self._pe.expect(p) / self.mass


def normalized(pe) -> NormalizedPseudoExpectation:
    return NormalizedPseudoExpectation(pe)


def check_nonedge_constraint(
    pe: PseudoExpectation, u: int, v: int, r: int, m_prime: Iterable = ()
) -> Fraction:
    """E~_G[x_{u,r} x_{v,r} X_{M'}] for a non-edge {u,v}; exactly 0."""
    if pe.graph.sign(u, v) != -1:
        raise InvalidParameterError(f"{{{u},{v}}} is an edge; the check needs a non-edge")
    if r < 1 or r > pe.t:
        raise InvalidParameterError(f"label {r} out of range")
    mp = monomial(m_prime)
    if len(mp) > pe.params.d - 2:
        raise DegreeBudgetError(f"|M'| = {len(mp)} exceeds d - 2 = {pe.params.d - 2}")
    return pe.moment(mp | {(u, r), (v, r)})


def check_disjointness(
    pe: PseudoExpectation, i: int, j1: int, j2: int, m_prime: Iterable = ()
) -> Fraction:
    """E~_G[x_{i,j1} x_{i,j2} X_{M'}] for distinct labels; exactly 0."""
    if j1 == j2:
        raise InvalidParameterError("disjointness check needs two distinct labels")
    mp = monomial(m_prime)
    if len(mp) > pe.params.d - 2:
        raise DegreeBudgetError(f"|M'| = {len(mp)} exceeds d - 2 = {pe.params.d - 2}")
    return pe.moment(mp | {(i, j1), (i, j2)})


def calibration_check(
    n: int,
    t: int,
    params: TruncationParams,
    p: Polynomial,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> tuple[Fraction, Fraction]:
    """(lhs, rhs) of the calibration identity for a constant-coefficient p.

    lhs averages E~_G[p] uniformly over all 2^binom(n,2) graphs; rhs averages
    p(X) over all plantings.  Polynomials built from :class:`Polynomial` have
    graph-independent coefficients, so their Fourier support is the empty
    character and the identity applies.
    """
    num_graphs = 1 << comb(n, 2)
    if num_graphs > cap:
        raise ResourceLimitError(f"{num_graphs} graphs exceed enumeration cap {cap}")
    tables = FourierTables(n, t, params, cap=cap)

    lhs_total = Fraction(0)
    for graph in all_graphs(n, cap=cap):
        lhs_total += PseudoExpectation(graph, tables).expect(p)
    lhs = lhs_total / num_graphs

    m_count = count_plantings(n, params.k, t)
    rhs_total = Fraction(0)
    for planting in enumerate_plantings(n, params.k, t, cap=cap):
        rhs_total += p.evaluate_on_planting(planting)
    rhs = rhs_total / m_count
    return lhs, rhs


def fourier_variance_bound(n: int, t: int, params: TruncationParams) -> Fraction:
    """Upper bound sum_s binom(n,s) 2^(s(s-1)/2) (kt/(n-tau))^(2s) on Var E~_G[1].

    Valid because every feasible character on s endpoints has coefficient at
    most (kt/(n-tau))^s in absolute value, and there are at most
    binom(n,s) 2^binom(s,2) characters with s endpoints.
    """
    if n <= params.tau:
        raise InvalidParameterError("the bound needs n > tau")
    ratio = Fraction(params.k * t, n - params.tau)
    total = Fraction(0)
    for s in range(1, params.tau + 1):
        total += comb(n, s) * (1 << comb(s, 2)) * ratio ** (2 * s)
    return total


@dataclass(frozen=True)
class SummaryStats:
    mean: Fraction
    variance: Fraction
    minimum: Fraction
    maximum: Fraction


def _summary(values: Sequence[Fraction]) -> SummaryStats:
    count = len(values)
    mean = sum(values, Fraction(0)) / count
    var = sum(((v - mean) ** 2 for v in values), Fraction(0)) / count
    return SummaryStats(mean, var, min(values), max(values))


@dataclass(frozen=True)
class ConcentrationStats:
    """Distribution of E~_G[1] and of the per-label size statistics."""

    samples: int
    exhaustive: bool
    mass: SummaryStats
    label_sizes: tuple[SummaryStats, ...]
    variance_bound: Fraction
    rng_name: str = RNG_NAME


def concentration_stats(
    n: int,
    t: int,
    params: TruncationParams,
    seeds: Sequence[int] | None = None,
    exhaustive: bool = False,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> ConcentrationStats:
    """Monte Carlo (or exhaustive) summary of the mass and size statistics."""
    if not exhaustive and not seeds:
        raise InvalidParameterError("need seeds unless running exhaustively")
    tables = FourierTables(n, t, params, cap=cap)
    if exhaustive:
        graphs: Iterable[Graph] = all_graphs(n, cap=cap)
    else:
        graphs = (sample_null(n, s) for s in seeds)

    mass_values: list[Fraction] = []
    size_values: list[list[Fraction]] = [[] for _ in range(t)]
    size_polys = [label_size(n, j) for j in range(1, t + 1)]
    for graph in graphs:
        pe = PseudoExpectation(graph, tables)
        mass_values.append(pe.moment(frozenset()))
        for j in range(t):
            size_values[j].append(pe.expect(size_polys[j]))
    return ConcentrationStats(
        samples=len(mass_values),
        exhaustive=exhaustive,
        mass=_summary(mass_values),
        label_sizes=tuple(_summary(vals) for vals in size_values),
        variance_bound=fourier_variance_bound(n, t, params),
    )


def moment_by_direct_sum(
    m: Iterable, graph: Graph, t: int, params: TruncationParams, cap: int = DEFAULT_ENUMERATION_CAP
) -> Fraction:
    """Oracle re-summation of a pseudo-moment in reversed enumeration order.

    Independent of :class:`FourierTables`; used to confirm that moments do
    not depend on how the feasible characters are enumerated.
    """
    from .fourier import chi

    key = monomial(m)
    entries = [
        (t_char, exact_coefficient(key, t_char, graph.n, params.k, t))
        for t_char in enumerate_feasible_characters(key, graph.n, params, cap=cap)
    ]
    total = Fraction(0)
    for t_char, coeff in reversed(entries):
        total += coeff * chi(t_char, graph)
    return total
