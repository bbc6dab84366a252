"""Row-mixture distributions, exact correlations, and the SDA computation.

The detection family puts, for each planting S, the distribution D_S on
{0,1}^n that with probability 1-p (p = kt/n) samples uniformly and with
probability p forces a uniformly chosen block of S to all-ones.  Pairwise
correlations of the relative densities have the exact closed form

    <D^_S, D^_U> = p^2 ((1/t^2) sum_{i,j} 2^{lambda_ij} - 1),

with lambda_ij the block overlaps; a 2^n brute-force inner product is kept
as the oracle.  Overlap counts follow the hypergeometric law of the block
unions, and the statistical-dimension parameters (d, gamma_bar, N) are
computed from the documented formulas with exact arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, InvalidParameterError, ResourceLimitError
from .model import (
    DEFAULT_ENUMERATION_CAP,
    Planting,
    count_plantings,
    enumerate_plantings,
)

BRUTE_FORCE_MAX_N = 20


@dataclass(frozen=True)
class RowMixture:
    """D_S: uniform with probability 1-p, else one block of S forced to ones."""

    planting: Planting

    @property
    def n(self) -> int:
        return self.planting.n

    @property
    def k(self) -> int:
        return self.planting.k

    @property
    def t(self) -> int:
        return self.planting.t

    @property
    def p(self) -> Fraction:
        return Fraction(self.k * self.t, self.n)


def _check_vector(rm: RowMixture, x: Sequence[int]) -> None:
    if len(x) != rm.n:
        raise InvalidParameterError(f"expected a length-{rm.n} bit vector, got {len(x)}")
    if any(b not in (0, 1) for b in x):
        raise InvalidParameterError("bit vectors must be 0/1 valued")


def fired_blocks(rm: RowMixture, x: Sequence[int]) -> int:
    """Number of blocks of the planting that x sets entirely to one."""
    _check_vector(rm, x)
    return sum(1 for block in rm.planting.blocks if all(x[v - 1] == 1 for v in block))


def pmf(rm: RowMixture, x: Sequence[int]) -> Fraction:
    """(1-p) 2^-n + (p/t) * (#fired blocks) * 2^-(n-k)."""
    fired = fired_blocks(rm, x)
    p = rm.p
    return (1 - p) * Fraction(1, 1 << rm.n) + (p / rm.t) * fired * Fraction(
        1, 1 << (rm.n - rm.k)
    )


def relative_density(rm: RowMixture, x: Sequence[int]) -> Fraction:
    """D^_S(x) = D_S(x) / D_0(x) - 1 = p (2^k Z_S(x) - 1)."""
    return pmf(rm, x) * (1 << rm.n) - 1


@dataclass(frozen=True)
class OverlapProfile:
    """Block-intersection sizes lambda_ij = |S_i cap U_j| and their total."""

    matrix: tuple[tuple[int, ...], ...]
    total: int


def overlap_profile(s: Planting, u: Planting) -> OverlapProfile:
    if (s.n, s.k, s.t) != (u.n, u.k, u.t):
        raise InvalidParameterError("overlap profile needs plantings with the same (n, k, t)")
    matrix = tuple(
        tuple(len(si & uj) for uj in u.blocks) for si in s.blocks
    )
    return OverlapProfile(matrix, sum(map(sum, matrix)))


def correlation_exact(s: Planting, u: Planting) -> Fraction:
    """p^2 ((1/t^2) sum_{i,j} 2^{lambda_ij} - 1), exact."""
    profile = overlap_profile(s, u)
    p = Fraction(s.k * s.t, s.n)
    power_sum = sum(1 << lam for row in profile.matrix for lam in row)
    return p * p * (Fraction(power_sum, s.t * s.t) - 1)


def correlation_bound(s: Planting, u: Planting) -> Fraction:
    """(k^2/n^2) * 2^Lambda, the relaxed overlap bound."""
    profile = overlap_profile(s, u)
    return Fraction(s.k * s.k, s.n * s.n) * (1 << profile.total)


def _density_table(s: Planting) -> tuple[np.ndarray, list[Fraction]]:
    """Per-x fired-block counts (as an array over bitmasks) and the density value per count."""
    n, k, t = s.n, s.k, s.t
    xs = np.arange(1 << n, dtype=np.uint32)
    counts = np.zeros(1 << n, dtype=np.int8)
    for block in s.blocks:
        mask = np.uint32(sum(1 << (v - 1) for v in block))
        counts += ((xs & mask) == mask).astype(np.int8)
    rm = RowMixture(s)
    p = rm.p
    # density as a function of the fired count, straight from the pmf formula
    values = [
        ((1 - p) * Fraction(1, 1 << n) + (p / t) * c * Fraction(1, 1 << (n - k)))
        * (1 << n)
        - 1
        for c in range(t + 1)
    ]
    return counts, values


def correlation_bruteforce(s: Planting, u: Planting) -> Fraction:
    """Oracle: sum_x 2^-n D^_S(x) D^_U(x) over all of {0,1}^n, exact.

    Identical x values share their fired-block count, so the sum is grouped
    by the joint count histogram; the arithmetic stays exact throughout.
    """
    if (s.n, s.k, s.t) != (u.n, u.k, u.t):
        raise InvalidParameterError("correlation needs plantings with the same (n, k, t)")
    if s.n > BRUTE_FORCE_MAX_N:
        raise ResourceLimitError(f"brute-force correlation capped at n <= {BRUTE_FORCE_MAX_N}")
    counts_s, values_s = _density_table(s)
    counts_u, values_u = _density_table(u)
    t = s.t
    joint = np.bincount(
        counts_s.astype(np.int64) * (t + 1) + counts_u.astype(np.int64),
        minlength=(t + 1) * (t + 1),
    )
    total = Fraction(0)
    for a in range(t + 1):
        for b in range(t + 1):
            cnt = int(joint[a * (t + 1) + b])
            if cnt:
                total += cnt * values_s[a] * values_u[b]
    return total / (1 << s.n)


def overlap_pmf(n: int, big_k: int, ell: int) -> Fraction:
    """Hypergeometric mass binom(K,l) binom(n-K, K-l) / binom(n,K)."""
    if not (0 <= ell <= big_k <= n):
        raise InvalidParameterError(f"need 0 <= ell <= K <= n, got ell={ell}, K={big_k}, n={n}")
    if big_k - ell > n - big_k:
        return Fraction(0)
    return Fraction(
        math.comb(big_k, ell) * math.comb(n - big_k, big_k - ell), math.comb(n, big_k)
    )


def exact_overlap_tail(n: int, big_k: int, j: int) -> Fraction:
    """Pr[X >= j] for the overlap law, summed exactly."""
    if j < 0:
        raise InvalidParameterError("j must be nonnegative")
    return sum(
        (overlap_pmf(n, big_k, ell) for ell in range(min(j, big_k), big_k + 1)),
        Fraction(0),
    ) if j <= big_k else Fraction(0)


def overlap_tail_bound(n: int, big_k: int, j: int) -> Fraction:
    """binom(K, j) (K/n)^j, an upper bound for Pr[X >= j]."""
    if j < 0:
        raise InvalidParameterError("j must be nonnegative")
    if j > big_k:
        return Fraction(0)
    return math.comb(big_k, j) * Fraction(big_k, n) ** j


def sparse_asymptotic(n: int, big_k: int, ell: int) -> float:
    """(1/ell!) (K^2/n)^ell, the sparse-regime approximation of the overlap mass."""
    if ell > big_k:
        raise InvalidParameterError("ell must not exceed K")
    return (big_k * big_k / n) ** ell / math.factorial(ell)


def poisson_tail_exact(lam: float, ell: int, rel_tol: float = 1e-16) -> float:
    """sum_{j > ell} lam^j / j!, summed until terms stop changing the total."""
    total = 0.0
    term = lam ** (ell + 1) / math.factorial(ell + 1)
    j = ell + 1
    while term > rel_tol * max(total, 1e-300):
        total += term
        j += 1
        term *= lam / j
    return total


def poisson_tail_bound(lam: float, ell: int) -> float:
    """Geometric-series bound (lam^(l+1)/(l+1)!) / (1 - lam/(l+2))."""
    if lam < 0:
        raise InvalidParameterError("lambda must be nonnegative")
    if ell < 0:
        raise InvalidParameterError("ell must be nonnegative")
    if lam >= ell + 2:
        raise DomainError(f"the bound needs lambda < ell + 2, got lambda={lam}, ell={ell}")
    return (lam ** (ell + 1) / math.factorial(ell + 1)) / (1 - lam / (ell + 2))


def high_overlap_moment(n: int, big_k: int, ell: int) -> Fraction:
    """E[2^X 1{X > ell}] under the overlap law, exact."""
    return sum(
        ((1 << j) * overlap_pmf(n, big_k, j) for j in range(ell + 1, big_k + 1)),
        Fraction(0),
    )


def moment_tail_bound(n: int, big_k: int, ell: int) -> float:
    """sum_{j > ell} (2K^2/n)^j / j!, bounding the high-overlap moment."""
    if not (0 <= big_k <= n):
        raise InvalidParameterError("need 0 <= K <= n")
    if ell < 0:
        raise InvalidParameterError("ell must be nonnegative")
    lam = 2 * big_k * big_k / n
    total = 0.0
    term = lam ** (ell + 1) / math.factorial(ell + 1)
    j = ell + 1
    while term > 1e-16 * max(total, 1e-300):
        total += term
        j += 1
        term *= lam / j
    return total


@dataclass(frozen=True)
class SdaParameters:
    """Query lower bound d, correlation level gamma_bar, and VSTAT budget N."""

    ell: int
    d: int
    gamma_bar: Fraction
    N: int


def admissible_ell_max(n: int, k: int, t: int) -> int:
    """min(kt, floor(log2(n / (k^2 t^2))) - 1); may be negative (empty window)."""
    if n < 1 or k < 1 or t < 1:
        raise InvalidParameterError("n, k, t must be positive")
    # exact floor(log2(ratio)) for the positive rational n / (k t)^2
    ratio = Fraction(n, k * k * t * t)
    power = 0
    if ratio >= 1:
        while ratio >= 2:
            ratio /= 2
            power += 1
    else:
        while ratio < 1:
            ratio *= 2
            power -= 1
    return min(k * t, power - 1)


def sda_parameters(n: int, k: int, t: int, ell: int) -> SdaParameters:
    """d = floor(ell! (n/(k^2 t^2))^ell), gamma_bar = 2 (k^2/n^2) 2^ell, N = ceil(1/gamma_bar).

    The admissible window is 0 <= ell <= min(kt, floor(log2(n/(k^2 t^2))) - 1);
    violations are rejected naming the bound.  The proportionality constant in
    N = Theta(1/gamma_bar) is instantiated as 1.
    """
    if n < 1 or k < 1 or t < 1:
        raise InvalidParameterError("n, k, t must be positive")
    if ell < 0:
        raise DomainError(f"ell = {ell} violates the lower bound ell >= 0")
    upper = admissible_ell_max(n, k, t)
    if ell > upper:
        raise DomainError(
            f"ell = {ell} violates the admissible window: "
            f"ell <= min(kt, floor(log2(n/(k^2*t^2))) - 1) = {upper}"
        )
    ratio = Fraction(n, k * k * t * t)
    d_exact = math.factorial(ell) * ratio**ell
    d = d_exact.numerator // d_exact.denominator
    gamma_bar = 2 * Fraction(k * k, n * n) * (1 << ell)
    big_n = -((-gamma_bar.denominator) // gamma_bar.numerator)  # ceil(1/gamma_bar)
    return SdaParameters(ell, d, gamma_bar, big_n)


def ell_for_delta(n: int, delta: float) -> int:
    """The instantiation ell = floor(delta * log2 n)."""
    if n < 1 or delta <= 0:
        raise InvalidParameterError("need n >= 1 and delta > 0")
    return int(math.floor(delta * math.log2(n)))


def avg_corr(
    plantings: Sequence[Planting],
    subset: Sequence[int] | None = None,
    pair_cap: int = 1_000_000,
) -> Fraction:
    """(1/|A|^2) sum over ordered pairs (including the diagonal) of exact correlations."""
    indices = list(range(len(plantings))) if subset is None else list(subset)
    if not indices:
        raise InvalidParameterError("the subset must be nonempty")
    if len(indices) ** 2 > pair_cap:
        raise ResourceLimitError(
            f"{len(indices) ** 2} ordered pairs exceed the pair budget {pair_cap}"
        )
    total = Fraction(0)
    for i in indices:
        for j in indices:
            total += correlation_exact(plantings[i], plantings[j])
    return total / (len(indices) ** 2)


def sda_audit(
    n: int,
    k: int,
    t: int,
    ell: int,
    num_subsets: int = 20,
    seed: int = 0,
    enum_cap: int = DEFAULT_ENUMERATION_CAP,
    pair_cap: int = 1_000_000,
) -> dict:
    """Sampled necessary-condition audit of the statistical-dimension bound.

    Draws random subsets A with |A| >= m/d and records the largest average
    correlation seen, against gamma_bar; also builds the adversarial subset
    concentrated on high overlap with a reference planting.  This samples a
    necessary condition only: certifying the bound would require every
    subset, which is exponential.  Out-of-window ell is allowed here and
    flagged, so that desk-scale configurations can still be explored.
    """
    family = tuple(enumerate_plantings(n, k, t, cap=enum_cap))
    m = len(family)
    upper = admissible_ell_max(n, k, t)
    window_ok = 0 <= ell <= upper
    ratio = Fraction(n, k * k * t * t)
    d_exact = math.factorial(ell) * ratio**ell
    d = max(d_exact.numerator // d_exact.denominator, 1)
    gamma_bar = 2 * Fraction(k * k, n * n) * (1 << ell)

    subset_size = max(1, math.ceil(m / d))
    degenerate = d <= 1  # every subset of the family qualifies
    rng = np.random.Generator(np.random.Philox(seed))
    sampled: list[Fraction] = []
    for _ in range(num_subsets):
        chosen = sorted(int(i) for i in rng.choice(m, size=subset_size, replace=False))
        sampled.append(avg_corr(family, chosen, pair_cap=pair_cap))

    reference = family[0]
    overlaps = [(overlap_profile(reference, p).total, idx) for idx, p in enumerate(family)]
    high = sorted(
        (idx for total, idx in overlaps if total >= ell + 1),
        key=lambda idx: (-overlap_profile(reference, family[idx]).total, idx),
    )
    if len(high) < subset_size:
        rest = sorted(
            (idx for total, idx in overlaps if total <= ell),
            key=lambda idx: (-overlap_profile(reference, family[idx]).total, idx),
        )
        high = list(high) + rest[: subset_size - len(high)]
    adversarial = sorted(high[:subset_size])
    adversarial_corr = avg_corr(family, adversarial, pair_cap=pair_cap)

    return {
        "model": {"n": n, "k": k, "t": t, "ell": ell},
        "family_size": m,
        "d": d,
        "gamma_bar": gamma_bar,
        "N": -((-gamma_bar.denominator) // gamma_bar.numerator),
        "subset_size": subset_size,
        "num_subsets": num_subsets,
        "degenerate": degenerate,
        "window_ok": window_ok,
        "window_upper": upper,
        "asymptotic_conditions": "ell = O(log n) and ell^2 = o(kt) are not machine-checkable",
        "max_sampled_avg_corr": max(sampled),
        "sampled_avg_corr": sampled,
        "adversarial_avg_corr": adversarial_corr,
        "max_sampled_within_gamma_bar": max(sampled) <= gamma_bar,
        "note": "sampled necessary-condition audit, not a certificate",
    }
