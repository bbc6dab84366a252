"""Exact planted Fourier coefficients and their combinatorial bound.

The planted expectation of chi_T(G) * X_M equals the probability that the
planting satisfies every pin of M and forces every edge of T.  Conditioning
on the planting kills every character containing a background edge, so

    coeff(M, T) = Pr[X_M = 1 and T subseteq F_X]
                = sum over consistent component labellings sigma of
                  prod_r (k)_{s_r(sigma)} / (n)_{|V|},

where s_r(sigma) is the number of test-graph vertices landing in block r and
(a)_b is the falling factorial.  The events indexed by sigma are disjoint,
so the sum is exact.  Everything is computed in exact rational arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError, InvalidParameterError, ResourceLimitError
from .fourier import Character, Monomial, is_consistent, support, test_graph
from .model import (
    DEFAULT_ENUMERATION_CAP,
    Planting,
    count_plantings,
    enumerate_plantings,
    forced_edges,
)


def _validate_model(m: Monomial, t: Character, n: int, k: int, num_labels: int) -> None:
    if n < 1 or k < 1 or num_labels < 1:
        raise InvalidParameterError("n, k, t must be positive")
    if k * num_labels > n:
        raise InvalidParameterError(f"kt = {k * num_labels} exceeds n = {n}")
    for i, j in m:
        if i > n:
            raise InvalidParameterError(f"monomial vertex {i} exceeds n = {n}")
        if j > num_labels:
            raise InvalidParameterError(f"monomial label {j} exceeds t = {num_labels}")
    for u, v in t:
        if v > n:
            raise InvalidParameterError(f"character endpoint {v} exceeds n = {n}")


def exact_coefficient(m: Monomial, t: Character, n: int, k: int, num_labels: int) -> Fraction:
    """Pr[X_M = 1 and T subseteq F_X] as an exact rational.

    Returns 0 when (M, T) is inconsistent or some test-graph component is
    larger than k (the falling factorial (k)_s vanishes for s > k).
    """
    _validate_model(m, t, n, k, num_labels)
    tg = test_graph(m, t)

    pinned_labels: list[int | None] = []
    for comp in tg.components:
        pins = {j for i, j in m if i in comp}
        if len(pins) > 1:
            return Fraction(0)
        pinned_labels.append(pins.pop() if pins else None)
    if any(len(c) > k for c in tg.components):
        return Fraction(0)

    loads = [0] * num_labels
    free_sizes: list[int] = []
    for comp, pin in zip(tg.components, pinned_labels):
        if pin is None:
            free_sizes.append(len(comp))
        else:
            loads[pin - 1] += len(comp)
    if any(load > k for load in loads):
        return Fraction(0)

    total = 0

    def assign(idx: int) -> None:
        nonlocal total
        if idx == len(free_sizes):
            prod = 1
            for load in loads:
                prod *= math.perm(k, load)
            total += prod
            return
        size = free_sizes[idx]
        for r in range(num_labels):
            if loads[r] + size <= k:
                loads[r] += size
                assign(idx + 1)
                loads[r] -= size

    assign(0)
    return Fraction(total, math.perm(n, len(tg.vertices)))


def coefficient_bound(m: Monomial, t: Character, n: int, k: int, num_labels: int) -> Fraction:
    """The bound t^c * (k / (n - |V| + 1))^(|V|) for consistent pairs.

    c is the number of test-graph components.  The relaxed form
    (kt / (n - |V| + 1))^(|V|) follows because c <= |V|.
    """
    _validate_model(m, t, n, k, num_labels)
    if not is_consistent(m, t, num_labels):
        raise DomainError("coefficient bound is defined for consistent pairs only")
    tg = test_graph(m, t)
    v = len(tg.vertices)
    if v >= n:
        raise InvalidParameterError(f"|V| = {v} must be smaller than n = {n}")
    return Fraction(num_labels) ** len(tg.components) * Fraction(k, n - v + 1) ** v


@lru_cache(maxsize=8)
def _planting_events(n: int, k: int, num_labels: int, cap: int) -> tuple:
    """Materialized plantings with their forced-edge sets, for the oracle."""
    return tuple(
        (p.blocks, forced_edges(p)) for p in enumerate_plantings(n, k, num_labels, cap=cap)
    )


def brute_force_coefficient(
    m: Monomial,
    t: Character,
    n: int,
    k: int,
    num_labels: int,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> Fraction:
    """Oracle: count plantings with X_M = 1 and T subseteq F_X, over m total."""
    _validate_model(m, t, n, k, num_labels)
    total = count_plantings(n, k, num_labels)
    if total > cap:
        raise ResourceLimitError(f"{total} plantings exceed enumeration cap {cap}")
    hits = 0
    t_set = frozenset(t)
    for blocks, forced in _planting_events(n, k, num_labels, cap):
        if not all(i in blocks[j - 1] for i, j in m):
            continue
        if t_set <= forced:
            hits += 1
    return Fraction(hits, total)


def planting_satisfies(planting: Planting, m: Monomial) -> bool:
    """Whether X_M = 1 under the planting."""
    return all(planting.contains(i, j) for i, j in m)
