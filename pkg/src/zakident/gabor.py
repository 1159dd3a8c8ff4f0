"""Measurement matrix of the weighted Dirac-train probing signal.

A_c = [A_0 | ... | A_{L-1}] with A_k = diag(c_k, c_{k-1}, ..., c_{k+1}) F^H / (TL)
and the DFT convention [F]_{p,m} = exp(-j2pi pm/L), so that

    [A_c]_{p, kL+m} = c_{(k-p) mod L} exp(+j2pi pm/L) / (TL).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .errors import BudgetError, GenerationError, StructuralError
from .model import ModelParams, SupportSet, complex_normal

EPS_SPARK = 1e-10
SPARK_BUDGET = 2_000_000
RANDOM_SPARK_TRIALS = 100_000
CHUNK = 50_000


def as_coefficients(c, L: int | None = None) -> np.ndarray:
    """Validate one period of the L-periodic probing weights."""
    c = np.asarray(c, dtype=np.complex128).reshape(-1)
    if L is not None and c.size != L:
        raise StructuralError(f"expected {L} coefficients, got {c.size}")
    if c.size < 2:
        raise StructuralError("need at least two coefficients")
    if not np.any(c):
        raise StructuralError("coefficient vector is all zero")
    return c


@dataclass(frozen=True)
class MeasurementMatrix:
    A: np.ndarray
    c: np.ndarray
    params: ModelParams
    spark_certified: bool = False

    @property
    def L(self) -> int:
        return self.params.L

    def column(self, k: int, m: int) -> np.ndarray:
        return self.A[:, k * self.L + m]


def dft_matrix(L: int) -> np.ndarray:
    p = np.arange(L)
    return np.exp(-2j * np.pi * np.outer(p, p) / L)


def build_matrix(c, params: ModelParams) -> MeasurementMatrix:
    L = params.L
    c = as_coefficients(c, L)
    FH = dft_matrix(L).conj().T
    p = np.arange(L)
    blocks = [np.diag(c[(k - p) % L]) @ FH for k in range(L)]
    A = np.hstack(blocks) / (params.T * L)
    A.flags.writeable = False
    c.flags.writeable = False
    return MeasurementMatrix(A, c, params)


def submatrix(M: MeasurementMatrix, support: SupportSet) -> np.ndarray:
    return M.A[:, support.indices(M.L)]


def iter_subsets(n: int, k: int, chunk: int = CHUNK) -> Iterator[np.ndarray]:
    """All k-subsets of range(n) in lexicographic order, in index-array chunks."""
    it = itertools.combinations(range(n), k)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.array(block, dtype=int).reshape(len(block), k)


def subset_singular_values(A: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Singular values (descending) of A[:, row] for each row of ``idx``.

    When a subset has more columns than A has rows the trailing zero singular
    values are appended, so the last entry is always inf ||A_Gamma v||.
    """
    sub = np.transpose(A[:, idx], (1, 0, 2))
    sv = np.linalg.svd(sub, compute_uv=False)
    deficit = idx.shape[1] - sv.shape[1]
    if deficit > 0:
        sv = np.concatenate([sv, np.zeros((sv.shape[0], deficit))], axis=1)
    return sv


def random_subsets(rng: np.random.Generator, n: int, k: int, count: int) -> np.ndarray:
    """``count`` uniformly random k-subsets of range(n), each sorted."""
    return np.sort(np.argsort(rng.random((count, n)), axis=1)[:, :k], axis=1)


@dataclass(frozen=True)
class SparkResult:
    ok: bool
    witness: SupportSet | None
    checked: int
    worst_ratio: float
    exhaustive: bool


def spark_check(
    M: MeasurementMatrix,
    mode: str = "exhaustive",
    trials: int = RANDOM_SPARK_TRIALS,
    rng: np.random.Generator | None = None,
    eps: float = EPS_SPARK,
    budget: int = SPARK_BUDGET,
) -> SparkResult:
    """Check that every L-column submatrix of A_c has full rank.

    A subset passes when sigma_min(A_Gamma) > eps * sigma_max(A_c). In
    exhaustive mode the witness is the lexicographically first failing set.
    """
    L = M.L
    scale = np.linalg.norm(M.A, 2)
    worst = np.inf
    checked = 0
    if mode == "exhaustive":
        total = math.comb(L * L, L)
        if total > budget:
            raise BudgetError(f"C({L * L}, {L}) = {total} subsets exceeds budget {budget}")
        chunks = iter_subsets(L * L, L)
    elif mode == "randomized":
        rng = np.random.default_rng() if rng is None else rng
        chunks = (random_subsets(rng, L * L, L, n) for n in _chunk_sizes(trials))
    else:
        raise ValueError(f"unknown spark_check mode {mode!r}")

    for idx in chunks:
        ratio = subset_singular_values(M.A, idx)[:, -1] / scale
        bad = np.flatnonzero(ratio <= eps)
        if bad.size:
            witness = SupportSet.from_indices(idx[bad[0]], L)
            return SparkResult(False, witness, checked + int(bad[0]) + 1, 0.0, mode == "exhaustive")
        worst = min(worst, float(ratio.min()))
        checked += len(idx)
    return SparkResult(True, None, checked, worst, mode == "exhaustive")


def _chunk_sizes(total: int) -> Iterator[int]:
    while total > 0:
        n = min(CHUNK, total)
        yield n
        total -= n


def certify_matrix(
    M: MeasurementMatrix, rng: np.random.Generator | None = None, budget: int = SPARK_BUDGET
) -> tuple[MeasurementMatrix, SparkResult]:
    """Run the cheapest conclusive spark check and return the marked matrix."""
    if math.comb(M.L * M.L, M.L) <= budget:
        result = spark_check(M, "exhaustive", budget=budget)
    else:
        result = spark_check(M, "randomized", rng=rng)
    return replace(M, spark_certified=result.ok), result


def draw_coefficients(
    params: ModelParams,
    rng: np.random.Generator,
    max_attempts: int = 10,
    budget: int = SPARK_BUDGET,
) -> MeasurementMatrix:
    """Draw Gaussian coefficients until the resulting A_c passes the spark check."""
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    for _ in range(max_attempts):
        c = complex_normal(rng, params.L)
        M, result = certify_matrix(build_matrix(c, params), rng, budget)
        if result.ok:
            return M
    raise GenerationError(f"no full-spark coefficient vector in {max_attempts} draws")


def stability_bounds(M: MeasurementMatrix, support: SupportSet) -> tuple[float, float]:
    """(alpha, beta) = sqrt(TL) * (sigma_min, sigma_max) of A_Gamma."""
    if len(support) == 0:
        raise StructuralError("stability bounds need a nonempty support")
    sv = subset_singular_values(M.A, support.indices(M.L)[None, :])[0]
    root = math.sqrt(M.params.T * M.L)
    return root * float(sv[-1]), root * float(sv[0])
