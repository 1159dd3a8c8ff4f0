"""Identifiability certificates, condition profiles and counterexamples.

Everything here reduces to singular values of column subsets of A_c: a class
of operators whose supports have at most kmax cells is stably identifiable
iff every union of two such supports, i.e. every set of min(2 kmax, L + 1)
columns, has sigma_min > 0.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import PreconditionError
from .gabor import (
    EPS_SPARK,
    SPARK_BUDGET,
    MeasurementMatrix,
    iter_subsets,
    random_subsets,
    submatrix,
    subset_singular_values,
)
from .model import CellVectorField, SpreadingFunction, SupportSet, devectorize


class Verdict(str, enum.Enum):
    STABLY_IDENTIFIABLE = "STABLY_IDENTIFIABLE"
    NOT_IDENTIFIABLE = "NOT_IDENTIFIABLE"


@dataclass(frozen=True)
class Certificate:
    delta: Fraction
    verdict: Verdict
    worst_alpha: float
    worst_beta: float
    worst_support: SupportSet
    checked_count: int
    L: int
    sampled: bool = False

    @property
    def kmax(self) -> int:
        return int(self.delta * self.L)


def _subsets(L: int, size: int, budget: int, rng, trials: int):
    """Exhaustive chunks when affordable, otherwise uniformly sampled subsets."""
    n = L * L
    if math.comb(n, size) <= budget:
        return iter_subsets(n, size), False
    rng = np.random.default_rng() if rng is None else rng
    sample = random_subsets(rng, n, size, trials)
    return iter(np.array_split(sample, max(1, trials // 50_000))), True


def certify(
    M: MeasurementMatrix,
    kmax: int,
    budget: int = SPARK_BUDGET,
    rng: np.random.Generator | None = None,
    trials: int = 100_000,
) -> Certificate:
    """Worst-case stability constants over all supports of size min(2 kmax, L + 1)."""
    L = M.L
    if not 1 <= kmax <= L:
        raise PreconditionError(f"kmax={kmax} outside [1, {L}]")
    root = math.sqrt(M.params.T * L)
    scale = root * np.linalg.norm(M.A, 2)
    size = min(2 * kmax, L + 1)
    delta = Fraction(kmax, L)

    if size > L:
        # more columns than rows: sigma_min = 0 for every such union
        witness = np.arange(size)[None, :]
        beta = root * float(subset_singular_values(M.A, witness)[0, 0])
        return Certificate(
            delta, Verdict.NOT_IDENTIFIABLE, 0.0, beta,
            SupportSet.from_indices(witness[0], L), 1, L,
        )

    chunks, sampled = _subsets(L, size, budget, rng, trials)
    worst_alpha, worst_beta, worst_idx, checked = np.inf, 0.0, None, 0
    for idx in chunks:
        sv = subset_singular_values(M.A, idx) * root
        i = int(np.argmin(sv[:, -1]))
        if sv[i, -1] < worst_alpha:
            worst_alpha, worst_idx = float(sv[i, -1]), idx[i]
        worst_beta = max(worst_beta, float(sv[:, 0].max()))
        checked += len(idx)
    verdict = (
        Verdict.STABLY_IDENTIFIABLE
        if worst_alpha > EPS_SPARK * scale
        else Verdict.NOT_IDENTIFIABLE
    )
    return Certificate(
        delta, verdict, worst_alpha, worst_beta,
        SupportSet.from_indices(worst_idx, L), checked, L, sampled,
    )


@dataclass(frozen=True)
class ProfileRow:
    k: int
    worst_ratio: float
    argmax_support: SupportSet


def condition_profile(
    M: MeasurementMatrix, kmax: int, budget: int = SPARK_BUDGET
) -> list[ProfileRow]:
    """Largest beta/alpha over supports of each size k <= min(2 kmax, L + 1)."""
    L = M.L
    rows = []
    for k in range(1, min(2 * kmax, L + 1) + 1):
        if k > L:
            rows.append(ProfileRow(k, math.inf, SupportSet.from_indices(range(k), L)))
            continue
        if math.comb(L * L, k) > budget:
            raise PreconditionError(f"C({L * L}, {k}) subsets exceeds budget {budget}")
        worst, arg = -1.0, None
        for idx in iter_subsets(L * L, k):
            sv = subset_singular_values(M.A, idx)
            with np.errstate(divide="ignore"):
                ratio = np.where(sv[:, -1] > 0, sv[:, 0] / sv[:, -1], np.inf)
            i = int(np.argmax(ratio))
            if ratio[i] > worst:
                worst, arg = float(ratio[i]), idx[i]
        rows.append(ProfileRow(k, worst, SupportSet.from_indices(arg, L)))
    return rows


def counterexample(
    M: MeasurementMatrix, support1: SupportSet, support2: SupportSet
) -> tuple[SpreadingFunction, SpreadingFunction]:
    """Two distinct operators on disjoint supports with identical responses.

    Both cell fields are constant (after the cell phase) and built from a null
    vector v of A over the union: H1 carries v on support1, H2 carries -v on
    support2, so H1 - H2 maps to A v = 0. v is scaled so that
    ||H1 - H2|| = 1.
    """
    p = M.params
    support1.check(p.L)
    support2.check(p.L)
    if len(support1 & support2):
        raise PreconditionError("supports must be disjoint")
    union = support1 | support2
    A_u = submatrix(M, union)
    _, s, Vh = np.linalg.svd(A_u)
    has_null = A_u.shape[1] > A_u.shape[0] or s[-1] <= EPS_SPARK * s[0]
    if not has_null:
        raise PreconditionError(
            f"columns of the {len(union)}-cell union are independent; no counterexample exists"
        )
    v = Vh[-1].conj() * math.sqrt(p.L)
    coord = dict(zip(union.cells, v))

    def build(support: SupportSet, sign: float) -> SpreadingFunction:
        values = np.zeros((p.L * p.L, p.Nt, p.Nf), dtype=np.complex128)
        for k, m in support:
            values[k * p.L + m] = sign * coord[(k, m)]
        return devectorize(CellVectorField(p, values), support)

    return build(support1, 1.0), build(support2, -1.0)
