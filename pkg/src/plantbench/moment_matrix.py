"""Moment-matrix assembly, PSD audits, and the objective experiment.

The moment matrix is indexed by all monomial sets A with |A| <= floor(d/2)
(including internally inconsistent ones, whose rows are identically zero and
cannot affect positive semidefiniteness) and has entries
M(A, B) = E~_G[X_{A union B}] in exact rational arithmetic.  PSD is audited
in floating point with an explicit tolerance; an exact rational LDL^T
certifier is available as a second route for small dimensions.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateNormalizationError,
    InvalidParameterError,
    NumericOverflowError,
    ResourceLimitError,
)
from .fourier import Monomial, TruncationParams, parameter_window
from .model import RNG_NAME, sample_null
from .pseudoexpectation import (
    FourierTables,
    PseudoExpectation,
    normalized,
    total_size,
)

DEFAULT_INDEX_CAP = 5_000


def monomial_index(n: int, t: int, half_degree: int) -> tuple[Monomial, ...]:
    """All monomial sets of size <= half_degree, in (size, lex) order."""
    variables = [(i, j) for i in range(1, n + 1) for j in range(1, t + 1)]
    index: list[Monomial] = []
    for size in range(half_degree + 1):
        for combo in itertools.combinations(variables, size):
            index.append(frozenset(combo))
    return tuple(index)


@dataclass(eq=False)
class MomentMatrix:
    """Symmetric exact-rational matrix of pseudo-moments."""

    index: tuple[Monomial, ...]
    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        self._position = {m: i for i, m in enumerate(self.index)}

    @property
    def dimension(self) -> int:
        return len(self.index)

    def entry(self, a, b) -> Fraction:
        return self.entries[self._position[frozenset(a)]][self._position[frozenset(b)]]

    def diagonal(self) -> tuple[Fraction, ...]:
        return tuple(self.entries[i][i] for i in range(self.dimension))

    def to_float(self) -> np.ndarray:
        out = np.array([[float(x) for x in row] for row in self.entries], dtype=float)
        if not np.isfinite(out).all():
            raise NumericOverflowError("matrix entry does not fit in a float")
        return out


def build_moment_matrix(pe: PseudoExpectation, index_cap: int = DEFAULT_INDEX_CAP) -> MomentMatrix:
    """Assemble M(A, B) = E~_G[X_{A union B}] over the full monomial index."""
    index = monomial_index(pe.n, pe.t, pe.params.half_degree)
    if len(index) > index_cap:
        raise ResourceLimitError(f"index size {len(index)} exceeds cap {index_cap}")
    dim = len(index)
    rows = [[Fraction(0)] * dim for _ in range(dim)]
    for a in range(dim):
        for b in range(a, dim):
            value = pe.moment(index[a] | index[b])
            rows[a][b] = value
            rows[b][a] = value
    return MomentMatrix(index, tuple(tuple(row) for row in rows))


@dataclass(frozen=True)
class PsdAudit:
    min_eigenvalue: float
    is_psd: bool
    diag_nonneg: bool
    tolerance: float
    dimension: int


def psd_audit(entries: Sequence[Sequence[Fraction]], tolerance: float | None = None) -> PsdAudit:
    """Minimum eigenvalue of the symmetrized float image of an exact matrix.

    Default tolerance: 1e-9 * dimension * max |entry|.  The diagonal check
    E~[X_A] >= 0 is done on the exact rationals, independently of the
    spectrum.
    """
    dim = len(entries)
    diag_ok = all(entries[i][i] >= 0 for i in range(dim))
    if dim == 0:
        return PsdAudit(0.0, True, diag_ok, tolerance or 0.0, 0)
    dense = np.array([[float(x) for x in row] for row in entries], dtype=float)
    if not np.isfinite(dense).all():
        raise NumericOverflowError("matrix entry does not fit in a float")
    if tolerance is None:
        tolerance = 1e-9 * dim * max(abs(dense).max(), 1.0)
    if tolerance < 0:
        raise InvalidParameterError("tolerance must be nonnegative")
    sym = (dense + dense.T) / 2.0
    min_eig = float(np.linalg.eigvalsh(sym)[0])
    return PsdAudit(min_eig, min_eig >= -tolerance, diag_ok, float(tolerance), dim)


def audit_moment_matrix(mm: MomentMatrix, tolerance: float | None = None) -> PsdAudit:
    return psd_audit(mm.entries, tolerance)


def exact_psd_certificate(entries: Sequence[Sequence[Fraction]]) -> bool:
    """Exact PSD decision via rational LDL^T with symmetric complete pivoting.

    Intended for dimensions up to a couple hundred; quadratic growth of the
    rational entries makes larger matrices impractical.
    """
    work = [[Fraction(x) for x in row] for row in entries]
    dim = len(work)
    for row in work:
        if len(row) != dim:
            raise InvalidParameterError("matrix must be square")
    active = list(range(dim))
    while active:
        pivot_pos = max(range(len(active)), key=lambda p: work[active[p]][active[p]])
        pivot = active[pivot_pos]
        d = work[pivot][pivot]
        if d < 0:
            return False
        if d == 0:
            # All remaining diagonal entries are <= 0, hence exactly 0; PSD
            # then requires the whole remaining block to vanish.
            return all(work[i][j] == 0 for i in active for j in active)
        active.pop(pivot_pos)
        for i in active:
            if work[i][pivot] == 0:
                continue
            factor = work[i][pivot] / d
            for j in active:
                work[i][j] -= factor * work[pivot][j]
        for i in active:
            work[i][pivot] = Fraction(0)
            work[pivot][i] = Fraction(0)
    return True


def gram_selftest(dim: int, rank: int, seed: int, tolerance: float = 1e-9) -> PsdAudit:
    """Audit a known-PSD Gram matrix L L^T built from random rational L."""
    rng = np.random.Generator(np.random.Philox(seed))
    raw = rng.integers(-9, 10, size=(dim, rank))
    l_rows = [[Fraction(int(x), 3) for x in row] for row in raw]
    gram = [
        [sum((l_rows[i][r] * l_rows[j][r] for r in range(rank)), Fraction(0)) for j in range(dim)]
        for i in range(dim)
    ]
    return psd_audit(gram, tolerance)


def objective_value(pe: PseudoExpectation) -> Fraction:
    """Normalized relaxation objective E~*[sum_{j,i} x_{i,j}]."""
    return normalized(pe).expect(total_size(pe.n, pe.t))


def sos_experiment(
    n: int,
    t: int,
    params: TruncationParams,
    seeds: Sequence[int],
    threads: int = 1,
    index_cap: int = DEFAULT_INDEX_CAP,
    tolerance: float | None = None,
) -> dict:
    """Per-seed assembly, constraint audit, normalization, objective and PSD.

    Entry computation is a pure function of (graph, model, budgets), so the
    fan-out over seeds is schedule-independent; rows are ordered by seed
    position regardless of worker count.
    """
    tables = FourierTables(n, t, params)
    kt = params.k * t

    def run_trial(seed: int) -> dict:
        graph = sample_null(n, seed)
        pe = PseudoExpectation(graph, tables)
        constraint_abs: list[Fraction] = []
        for u, v in graph.non_edges():
            for r in range(1, t + 1):
                constraint_abs.append(abs(pe.moment(frozenset({(u, r), (v, r)}))))
        for i in range(1, n + 1):
            for j1, j2 in itertools.combinations(range(1, t + 1), 2):
                constraint_abs.append(abs(pe.moment(frozenset({(i, j1), (i, j2)}))))
        mass = pe.moment(frozenset())
        mm = build_moment_matrix(pe, index_cap=index_cap)
        audit = audit_moment_matrix(mm, tolerance)
        row = {
            "seed": seed,
            "mass": mass,
            "constraint_checks": len(constraint_abs),
            "constraint_max_abs": max(constraint_abs, default=Fraction(0)),
            "dimension": audit.dimension,
            "min_eigenvalue": audit.min_eigenvalue,
            "is_psd": audit.is_psd,
            "diag_nonneg": audit.diag_nonneg,
            "degenerate": mass == 0,
        }
        if mass == 0:
            row["objective"] = None
            row["objective_over_kt"] = None
        else:
            try:
                objective = objective_value(pe)
            except DegenerateNormalizationError:  # pragma: no cover - guarded above
                objective = None
            row["objective"] = objective
            row["objective_over_kt"] = float(objective / kt) if objective is not None else None
        return row

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run_trial, seeds))
    else:
        rows = [run_trial(s) for s in seeds]

    usable = [r for r in rows if not r["degenerate"]]
    ratios = [r["objective_over_kt"] for r in usable]
    report = {
        "model": {"n": n, "k": params.k, "t": t, "d": params.d, "tau": params.tau},
        "parameter_window": parameter_window(n, t, params),
        "rng": RNG_NAME,
        "seeds": list(seeds),
        "rows": rows,
        "aggregates": {
            "trials": len(rows),
            "degenerate": len(rows) - len(usable),
            "psd_fraction": (sum(1 for r in rows if r["is_psd"]) / len(rows)) if rows else None,
            "min_eigenvalue_min": min((r["min_eigenvalue"] for r in rows), default=None),
            "min_eigenvalue_max": max((r["min_eigenvalue"] for r in rows), default=None),
            "objective_over_kt_mean": (sum(ratios) / len(ratios)) if ratios else None,
            "constraint_all_zero": all(r["constraint_max_abs"] == 0 for r in rows),
        },
    }
    return report
