"""Support recovery and known-support reconstruction from a Zak-domain field."""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, InfeasibleError, PreconditionError, StructuralError
from .gabor import (
    EPS_SPARK,
    MeasurementMatrix,
    iter_subsets,
    stability_bounds,
    submatrix,
)
from .model import (
    CellVectorField,
    SpreadingFunction,
    SupportSet,
    devectorize,
    hs_norm,
    vectorize,
)
from .simulate import ZakField, simulate_response

EPS_RANK = 1e-10
EPS_MUSIC = 1e-8
EPS_FIT = 1e-9
MMV_BUDGET = 10_000_000


class Method(str, enum.Enum):
    MMV_EXHAUSTIVE = "MMV_EXHAUSTIVE"
    SOMP = "SOMP"
    MUSIC = "MUSIC"


@dataclass(frozen=True)
class CorrelationMatrix:
    Z: np.ndarray
    rank_estimate: int
    eig_values: np.ndarray
    eig_vectors: np.ndarray
    eps_rank: float = EPS_RANK


def _rank(eig_values: np.ndarray, eps: float) -> int:
    lam_max = eig_values[0] if eig_values.size else 0.0
    if lam_max <= 0:
        return 0
    return int(np.sum(eig_values > eps * lam_max))


def correlation(zf: ZakField, eps_rank: float = EPS_RANK) -> CorrelationMatrix:
    """Z = sum_ij z(t_i, f_j) z(t_i, f_j)^H * weight, with its eigendecomposition."""
    z = zf.z.reshape(zf.params.L, -1)
    Z = (z @ z.conj().T) * zf.params.weight
    Z = (Z + Z.conj().T) / 2
    w, V = np.linalg.eigh(Z)
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    return CorrelationMatrix(Z, _rank(w, eps_rank), w, V, eps_rank)


def factor_Q(C: CorrelationMatrix) -> np.ndarray:
    """Q with orthogonal columns and Z = Q Q^H on the leading rank_estimate eigenpairs."""
    R = C.rank_estimate
    lam = np.clip(C.eig_values[:R], 0.0, None)
    return C.eig_vectors[:, :R] * np.sqrt(lam)[None, :]


def _relative_residual(Q: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """||Q - P Q||_F / ||Q||_F for a batch of orthonormal bases (n, L, r)."""
    coeff = np.conj(np.transpose(basis, (0, 2, 1))) @ Q
    res = Q[None] - basis @ coeff
    return np.linalg.norm(res, axis=(1, 2)) / np.linalg.norm(Q)


def _range_bases(A: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Orthonormal bases of range(A_Gamma), rank-deficient directions zeroed."""
    sub = np.transpose(A[:, idx], (1, 0, 2))
    U, s, _ = np.linalg.svd(sub, full_matrices=False)
    keep = s > EPS_SPARK * s[:, :1]
    return U * keep[:, None, :]


def mmv_exhaustive(
    Q: np.ndarray,
    M: MeasurementMatrix,
    kmax: int,
    eps_fit: float = EPS_FIT,
    budget: int = MMV_BUDGET,
) -> SupportSet:
    """Smallest support whose column span contains range(Q).

    Sizes are searched in increasing order. Within a size the smallest
    projection residual wins, then the lexicographically first set.
    """
    L = M.L
    if not 0 <= kmax <= L:
        raise PreconditionError(f"kmax={kmax} outside [0, {L}]")
    if Q.size == 0 or np.linalg.norm(Q) == 0:
        return SupportSet()
    for k in range(1, kmax + 1):
        if math.comb(L * L, k) > budget:
            raise BudgetError(f"C({L * L}, {k}) subsets exceeds budget {budget}")
        best, best_res = None, np.inf
        for idx in iter_subsets(L * L, k):
            res = _relative_residual(Q, _range_bases(M.A, idx))
            i = int(np.argmin(res))
            if res[i] <= eps_fit and res[i] < best_res:
                best, best_res = idx[i], res[i]
        if best is not None:
            return SupportSet.from_indices(best, L)
    raise InfeasibleError(f"no support with at most {kmax} cells fits within {eps_fit}")


def somp(
    Q: np.ndarray, M: MeasurementMatrix, kmax: int, eps_fit: float = EPS_FIT
) -> SupportSet:
    """Simultaneous orthogonal matching pursuit on the columns of Q (heuristic)."""
    A = M.A
    norms = np.linalg.norm(A, axis=0)
    total = np.linalg.norm(Q) if Q.size else 0.0
    chosen: list[int] = []
    if total == 0:
        return SupportSet()
    R = Q
    while np.linalg.norm(R) / total > eps_fit and len(chosen) < kmax:
        score = np.linalg.norm(A.conj().T @ R, axis=1) / norms
        score[chosen] = -np.inf
        chosen.append(int(np.argmax(score)))
        basis, _ = np.linalg.qr(A[:, chosen])
        R = Q - basis @ (basis.conj().T @ Q)
    return SupportSet.from_indices(chosen, M.L)


def music_scores(C: CorrelationMatrix, M: MeasurementMatrix) -> np.ndarray:
    """||U_n^H a_{k,m}|| / ||a_{k,m}|| for every column, in stacked order."""
    Un = C.eig_vectors[:, C.rank_estimate:]
    return np.linalg.norm(Un.conj().T @ M.A, axis=0) / np.linalg.norm(M.A, axis=0)


def music_support(
    C: CorrelationMatrix, M: MeasurementMatrix, eps_music: float = EPS_MUSIC
) -> SupportSet:
    if C.rank_estimate >= M.L:
        raise PreconditionError(
            "correlation matrix has full rank; no noise subspace for MUSIC"
        )
    scores = music_scores(C, M)
    return SupportSet.from_indices(np.flatnonzero(scores <= eps_music), M.L)


def reconstruct(zf: ZakField, support: SupportSet, M: MeasurementMatrix) -> SpreadingFunction:
    """Per-grid-point least squares for s_Gamma, then strip the cell phases."""
    p = zf.params
    if p != M.params:
        raise StructuralError("Zak field and measurement matrix disagree on params")
    if len(support) > p.L:
        raise PreconditionError(f"|support|={len(support)} exceeds L={p.L}")
    if len(support) == 0:
        return SpreadingFunction.zero(p)
    A_g = submatrix(M, support)
    s = np.linalg.svd(A_g, compute_uv=False)
    if s[-1] <= EPS_SPARK * s[0]:
        raise PreconditionError("A_Gamma is rank deficient on the requested support")
    sol = np.linalg.pinv(A_g) @ zf.z.reshape(p.L, -1)
    values = np.zeros((p.L * p.L, p.Nt, p.Nf), dtype=np.complex128)
    values[support.indices(p.L)] = sol.reshape(len(support), p.Nt, p.Nf)
    return devectorize(CellVectorField(p, values), support)


def fit_residual(zf: ZakField, sf: SpreadingFunction, M: MeasurementMatrix) -> float:
    """Relative misfit ||z - A s|| / ||z|| (0 for a zero field)."""
    total = zf.norm()
    if total == 0:
        return 0.0
    return (zf - simulate_response(sf, M)).norm() / total


@dataclass(frozen=True)
class GramResult:
    S: np.ndarray
    full_rank: bool


def gram_rank(sf: SpreadingFunction, eps_rank: float = EPS_RANK) -> GramResult:
    """S_Gamma = sum_ij s_Gamma s_Gamma^H * weight and its full-rank verdict."""
    if len(sf.support) == 0:
        raise PreconditionError("Gram matrix of an empty support")
    s = vectorize(sf).restrict(sf.support).reshape(len(sf.support), -1)
    S = (s @ s.conj().T) * sf.params.weight
    S = (S + S.conj().T) / 2
    lam = np.linalg.eigvalsh(S)
    return GramResult(S, bool(lam[-1] > 0 and lam[0] > eps_rank * lam[-1]))


@dataclass
class RecoveryReport:
    support_estimate: SupportSet
    reconstruction: SpreadingFunction
    residual: float
    alpha: float
    beta: float
    method: Method
    support_exact: bool | None = None
    reconstruction_rel_err: float | None = None
    reconstruction_ok: bool | None = None
    elapsed_ms: float = 0.0


def identify(
    zf: ZakField,
    M: MeasurementMatrix,
    method: Method | str,
    kmax: int,
    truth: SpreadingFunction | None = None,
    eps_rank: float = EPS_RANK,
    eps_fit: float = EPS_FIT,
    eps_music: float = EPS_MUSIC,
    recon_tol: float = 1e-9,
) -> RecoveryReport:
    """Recover the support with ``method``, reconstruct, and score against ``truth``."""
    method = Method(method)
    start = time.perf_counter()
    C = correlation(zf, eps_rank)
    if method is Method.MUSIC:
        support = music_support(C, M, eps_music)
    elif method is Method.SOMP:
        support = somp(factor_Q(C), M, kmax, eps_fit)
    else:
        support = mmv_exhaustive(factor_Q(C), M, kmax, eps_fit)
    try:
        sf = reconstruct(zf, support, M)
    except PreconditionError:
        sf = SpreadingFunction.zero(zf.params)
    elapsed = (time.perf_counter() - start) * 1e3

    alpha, beta = stability_bounds(M, support) if len(support) else (math.nan, math.nan)
    report = RecoveryReport(
        support_estimate=support,
        reconstruction=sf,
        residual=fit_residual(zf, sf, M),
        alpha=alpha,
        beta=beta,
        method=method,
        elapsed_ms=elapsed,
    )
    if truth is not None:
        report.support_exact = support == truth.support
        ref = hs_norm(truth)
        err = hs_norm(sf - truth)
        report.reconstruction_rel_err = err / ref if ref > 0 else err
        report.reconstruction_ok = report.reconstruction_rel_err <= recon_tol
    return report
