"""VSTAT oracle simulation and the single-query mean-weight distinguisher.

A VSTAT(N) oracle answers a [0,1]-valued query f with any value within
max(1/N, sqrt(Var[f]/N)) of E[f] under the queried distribution.  The honest
policy adds seeded uniform noise inside the band; the adversarial policy
returns the point of the band closest to the null expectation, the least
informative answer the definition permits.  Truths and variances are exact
rationals (analytic for affine queries, exhaustive for table queries), and
every emitted answer is checked against its band before being returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .errors import InvalidParameterError, ResourceLimitError
from .model import Planting, sample_planted
from .sq import RowMixture, pmf

EXHAUSTIVE_MAX_N = 20


@dataclass(frozen=True)
class UniformNull:
    """The reference distribution: uniform over {0,1}^n."""

    n: int


Distribution = Union[RowMixture, UniformNull]


@dataclass(frozen=True)
class AffineQuery:
    """f(x) = constant + sum_v weights[v] * x_v, with range inside [0,1].

    Affine queries have closed-form moments under both the null and any row
    mixture, so they work at any n.
    """

    name: str
    constant: Fraction
    weights: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        lo = self.constant + sum((w for w in self.weights if w < 0), Fraction(0))
        hi = self.constant + sum((w for w in self.weights if w > 0), Fraction(0))
        if lo < 0 or hi > 1:
            raise InvalidParameterError(f"query range [{lo}, {hi}] leaves [0,1]")

    @property
    def n(self) -> int:
        return len(self.weights)

    def value(self, x: Sequence[int]) -> Fraction:
        return self.constant + sum(
            (w for w, b in zip(self.weights, x) if b), Fraction(0)
        )


@dataclass(frozen=True)
class TableQuery:
    """Explicit truth table over {0,1}^n, indexed by bitmask (bit v-1 <-> x_v)."""

    name: str
    n: int
    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.n > EXHAUSTIVE_MAX_N:
            raise ResourceLimitError(f"table queries capped at n <= {EXHAUSTIVE_MAX_N}")
        if len(self.values) != 1 << self.n:
            raise InvalidParameterError("table must have 2^n entries")
        if any(v < 0 or v > 1 for v in self.values):
            raise InvalidParameterError("query values must lie in [0,1]")


Query = Union[AffineQuery, TableQuery]


def mean_weight_query(n: int) -> AffineQuery:
    """f(x) = (sum_v x_v) / n."""
    return AffineQuery("mean-weight", Fraction(0), (Fraction(1, n),) * n)


def constant_query(n: int, value: Fraction | int) -> AffineQuery:
    return AffineQuery("constant", Fraction(value), (Fraction(0),) * n)


def _marginal(dist: Distribution, v: int) -> Fraction:
    """E[x_v]."""
    if isinstance(dist, UniformNull):
        return Fraction(1, 2)
    p = dist.p
    planted = any(v in block for block in dist.planting.blocks)
    return Fraction(1, 2) + (p / (2 * dist.t) if planted else Fraction(0))


def _pair_moment(dist: Distribution, u: int, v: int) -> Fraction:
    """E[x_u x_v] for u != v."""
    if isinstance(dist, UniformNull):
        return Fraction(1, 4)
    p = dist.p
    total = (1 - p) * Fraction(1, 4)
    for block in dist.planting.blocks:
        eu = Fraction(1) if u in block else Fraction(1, 2)
        ev = Fraction(1) if v in block else Fraction(1, 2)
        total += (p / dist.t) * eu * ev
    return total


def expectation(query: Query, dist: Distribution) -> Fraction:
    if isinstance(query, AffineQuery):
        if query.n != dist.n:
            raise InvalidParameterError("query and distribution disagree on n")
        return query.constant + sum(
            (w * _marginal(dist, v + 1) for v, w in enumerate(query.weights) if w != 0),
            Fraction(0),
        )
    return _exhaustive_moment(query, dist, power=1)


def variance(query: Query, dist: Distribution) -> Fraction:
    mean = expectation(query, dist)
    if isinstance(query, AffineQuery):
        # E[f^2] via the first and second coordinate moments
        second = query.constant**2 + 2 * query.constant * (mean - query.constant)
        weights = query.weights
        for uu, wu in enumerate(weights):
            if wu == 0:
                continue
            second += wu * wu * _marginal(dist, uu + 1)  # x_v^2 = x_v
            for vv in range(uu + 1, len(weights)):
                wv = weights[vv]
                if wv == 0:
                    continue
                second += 2 * wu * wv * _pair_moment(dist, uu + 1, vv + 1)
        return second - mean * mean
    return _exhaustive_moment(query, dist, power=2) - mean * mean


def _exhaustive_moment(query: TableQuery, dist: Distribution, power: int) -> Fraction:
    if query.n != dist.n:
        raise InvalidParameterError("query and distribution disagree on n")
    n = query.n
    total = Fraction(0)
    if isinstance(dist, UniformNull):
        for mask, value in enumerate(query.values):
            total += value**power
        return total / (1 << n)
    for mask in range(1 << n):
        x = tuple((mask >> v) & 1 for v in range(n))
        total += query.values[mask] ** power * pmf(dist, x)
    return total


@dataclass(frozen=True)
class OracleAnswer:
    """One oracle reply; |value - truth| <= tolerance holds exactly."""

    value: Fraction
    truth: Fraction
    tolerance: Fraction
    policy: str
    query_name: str

    def __post_init__(self) -> None:
        if abs(self.value - self.truth) > self.tolerance:
            raise AssertionError("oracle answer left its tolerance band")


def _tolerance(var: Fraction, big_n: int) -> Fraction:
    """max(1/N, sqrt(Var/N)) as an exact rational (sqrt rounds to double)."""
    base = Fraction(1, big_n)
    if var == 0:
        return base
    root = Fraction(math.sqrt(var / big_n))
    return max(base, root)


def vstat_query(
    dist: Distribution,
    query: Query,
    big_n: int,
    policy: str = "honest",
    seed: int = 0,
) -> OracleAnswer:
    """Simulate one VSTAT(N) reply under the chosen answering policy."""
    if big_n < 1:
        raise InvalidParameterError("N must be a positive integer")
    if policy not in ("honest", "adversarial"):
        raise InvalidParameterError(f"unknown policy {policy!r}")
    truth = expectation(query, dist)
    tol = _tolerance(variance(query, dist), big_n)
    if policy == "honest":
        rng = np.random.Generator(np.random.Philox(seed))
        noise = Fraction(float(rng.uniform(-1.0, 1.0)))
        value = truth + noise * tol
    else:
        null_truth = expectation(query, UniformNull(dist.n))
        value = min(max(null_truth, truth - tol), truth + tol)
    return OracleAnswer(value, truth, tol, policy, query.name)


@dataclass(frozen=True)
class DistinguisherOutcome:
    decision: str
    answer: Fraction
    threshold: Fraction
    truth: Fraction
    gap: Fraction


def detection_gap(n: int, k: int, t: int) -> Fraction:
    """The mean-weight signal p*k/(2n): planted mean is 1/2 + gap."""
    p = Fraction(k * t, n)
    return p * k / (2 * n)


def mean_weight_distinguisher(
    n: int,
    k: int,
    t: int,
    big_n: int,
    policy: str = "honest",
    seed: int = 0,
    hypothesis: str = "planted",
) -> DistinguisherOutcome:
    """Issue the single mean-weight query and threshold at the gap midpoint.

    ``hypothesis`` selects the true distribution the oracle answers for; under
    "planted" a planting is drawn from the seed.
    """
    if hypothesis not in ("planted", "null"):
        raise InvalidParameterError(f"unknown hypothesis {hypothesis!r}")
    if hypothesis == "planted":
        dist: Distribution = RowMixture(sample_planted(n, k, t, seed).planting)
    else:
        dist = UniformNull(n)
    gap = detection_gap(n, k, t)
    threshold = Fraction(1, 2) + gap / 2
    answer = vstat_query(dist, mean_weight_query(n), big_n, policy=policy, seed=seed + 1)
    decision = "planted" if answer.value > threshold else "null"
    return DistinguisherOutcome(decision, answer.value, threshold, answer.truth, gap)


def threshold_sweep(
    grid: Sequence[tuple[int, int, int]],
    n_values: Sequence[int],
    trials: int = 20,
    seed: int = 0,
    policies: Sequence[str] = ("adversarial", "honest"),
    success_target: Fraction = Fraction(2, 3),
) -> dict:
    """Minimal VSTAT budget at which the distinguisher clears the target rate.

    A trial succeeds when the decision is correct under both hypotheses.  The
    per-config context column carries the N derived from the correlation level
    at ell = 0, i.e. ceil(n^2 / (2 k^2)).
    """
    rows = []
    minima = []
    for gi, (n, k, t) in enumerate(grid):
        context_n = -((-(n * n)) // (2 * k * k))  # ceil(1/gamma_bar) at ell = 0
        for policy in policies:
            minimal = None
            for big_n in n_values:
                successes = 0
                for trial in range(trials):
                    trial_seed = ((seed * 1_000_003 + gi) * 211 + trial) * 4 + 1
                    planted = mean_weight_distinguisher(
                        n, k, t, big_n, policy, trial_seed, "planted"
                    )
                    null = mean_weight_distinguisher(
                        n, k, t, big_n, policy, trial_seed + 2, "null"
                    )
                    if planted.decision == "planted" and null.decision == "null":
                        successes += 1
                rate = Fraction(successes, trials)
                rows.append(
                    {
                        "n": n,
                        "k": k,
                        "t": t,
                        "policy": policy,
                        "N": big_n,
                        "success_rate": rate,
                        "gamma_bar_N": context_n,
                    }
                )
                if minimal is None and rate >= success_target:
                    minimal = big_n
            minima.append(
                {
                    "n": n,
                    "k": k,
                    "t": t,
                    "policy": policy,
                    "minimal_N": minimal,
                    "gamma_bar_N": context_n,
                    "gap": detection_gap(n, k, t),
                }
            )
    return {"rows": rows, "minima": minima, "trials": trials, "success_target": success_target}
