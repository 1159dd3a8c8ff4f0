import itertools

import numpy as np
import pytest

from zakident import (
    CellVectorField,
    InfeasibleError,
    PreconditionError,
    SpreadingFunction,
    SupportSet,
    build_matrix,
    correlation,
    devectorize,
    factor_Q,
    gram_rank,
    hs_norm,
    identify,
    mmv_exhaustive,
    music_scores,
    music_support,
    random_spreading,
    reconstruct,
    simulate_response,
    somp,
    submatrix,
)
from zakident.model import ModelParams, random_support
from zakident.recover import fit_residual


def instance(M, size, rng):
    p = M.params
    sf = random_spreading(p, random_support(p, size, rng), rng)
    return sf, simulate_response(sf, M)


def brute_force_support(Q, M, kmax, tol=1e-9):
    """Plain lstsq over every subset, independent of the batched SVD path."""
    if np.linalg.norm(Q) == 0:
        return SupportSet()
    n = M.L * M.L
    for k in range(1, kmax + 1):
        fits = []
        for idx in itertools.combinations(range(n), k):
            A = M.A[:, list(idx)]
            G = np.linalg.lstsq(A, Q, rcond=None)[0]
            res = np.linalg.norm(Q - A @ G) / np.linalg.norm(Q)
            if res <= tol:
                fits.append((res, idx))
        if fits:
            return SupportSet.from_indices(min(fits)[1], M.L)
    return None


def test_correlation_zero_field(M4):
    C = correlation(simulate_response(SpreadingFunction.zero(M4.params), M4))
    assert not np.any(C.Z) and C.rank_estimate == 0
    assert factor_Q(C).shape == (4, 0)


def test_correlation_single_cell_rank_one(M4, rng):
    _, zf = instance(M4, 1, rng)
    assert correlation(zf).rank_estimate == 1


def test_correlation_hermitian_psd_and_rank(M6, rng):
    sf, zf = instance(M6, 3, rng)
    C = correlation(zf)
    assert np.linalg.norm(C.Z - C.Z.conj().T) <= 1e-12 * np.linalg.norm(C.Z)
    assert C.eig_values.min() >= -1e-12 * C.eig_values.max()
    assert C.rank_estimate == 3
    # Z = A_Gamma S_Gamma A_Gamma^H
    A = submatrix(M6, sf.support)
    np.testing.assert_allclose(C.Z, A @ gram_rank(sf).S @ A.conj().T, atol=1e-14)


def test_factor_q(M6, rng):
    _, zf = instance(M6, 4, rng)
    C = correlation(zf)
    Q = factor_Q(C)
    assert Q.shape == (6, 4)
    assert np.linalg.norm(C.Z - Q @ Q.conj().T) <= 1e-10 * np.linalg.norm(C.Z)
    G = Q.conj().T @ Q
    off = G - np.diag(np.diag(G))
    assert np.abs(off).max() <= 1e-12 * np.abs(G).max()


def test_mmv_zero_measurement(M4):
    assert mmv_exhaustive(np.zeros((4, 0)), M4, 2) == SupportSet()


def test_mmv_single_cell(M6, rng):
    sf, zf = instance(M6, 1, rng)
    assert mmv_exhaustive(factor_Q(correlation(zf)), M6, 3) == sf.support


@pytest.mark.parametrize("size", [1, 2])
def test_mmv_matches_brute_force(M4, rng, size):
    for _ in range(3):
        sf, zf = instance(M4, size, rng)
        Q = factor_Q(correlation(zf))
        assert brute_force_support(Q, M4, 2) == mmv_exhaustive(Q, M4, 2) == sf.support


def test_mmv_exact_l6(M6, rng):
    for _ in range(200):
        sf, zf = instance(M6, 3, rng)
        assert mmv_exhaustive(factor_Q(correlation(zf)), M6, 3) == sf.support


def test_mmv_infeasible(M6, rng):
    _, zf = instance(M6, 3, rng)
    with pytest.raises(InfeasibleError):
        mmv_exhaustive(factor_Q(correlation(zf)), M6, 2)
    with pytest.raises(PreconditionError):
        mmv_exhaustive(factor_Q(correlation(zf)), M6, 7)


def test_mmv_p0bar_consistency(M6, rng):
    _, zf = instance(M6, 3, rng)
    C = correlation(zf)
    support = mmv_exhaustive(factor_Q(C), M6, 3)
    A = submatrix(M6, support)
    P = np.linalg.pinv(A)
    S = P @ C.Z @ P.conj().T
    assert np.linalg.norm(C.Z - A @ S @ A.conj().T) <= 1e-9 * np.linalg.norm(C.Z)


def test_somp_basic(M6, rng):
    assert somp(np.zeros((6, 0)), M6, 3) == SupportSet()
    for _ in range(20):
        sf, zf = instance(M6, 1, rng)
        assert somp(factor_Q(correlation(zf)), M6, 3) == sf.support


def test_somp_not_better_than_exhaustive(M6, rng):
    somp_hits = exhaustive_hits = 0
    for _ in range(50):
        sf, zf = instance(M6, 3, rng)
        Q = factor_Q(correlation(zf))
        somp_hits += somp(Q, M6, 3) == sf.support
        exhaustive_hits += mmv_exhaustive(Q, M6, 3) == sf.support
    assert exhaustive_hits == 50
    assert somp_hits <= exhaustive_hits


def test_music_full_support_l6(M6, rng):
    for _ in range(200):
        sf, zf = instance(M6, 5, rng)
        assert music_support(correlation(zf), M6) == sf.support


def test_music_single_cell(M6, rng):
    sf, zf = instance(M6, 1, rng)
    C = correlation(zf)
    assert C.eig_vectors[:, C.rank_estimate:].shape[1] == 5
    assert music_support(C, M6) == sf.support


def test_music_rank_l_rejected(M6, rng):
    _, zf = instance(M6, 6, rng)
    with pytest.raises(PreconditionError):
        music_support(correlation(zf), M6)


def test_music_score_dichotomy(M6, rng):
    for _ in range(50):
        sf, zf = instance(M6, int(rng.integers(1, 6)), rng)
        scores = music_scores(correlation(zf), M6)
        inside = np.zeros(36, dtype=bool)
        inside[sf.support.indices(6)] = True
        assert scores[inside].max() <= 1e-9
        assert scores[~inside].min() >= 1e-3


def test_reconstruct_round_trip(M6, rng):
    sf, zf = instance(M6, 4, rng)
    rec = reconstruct(zf, sf.support, M6)
    assert hs_norm(rec - sf) <= 1e-9 * hs_norm(sf)
    assert fit_residual(zf, rec, M6) <= 1e-10


def test_reconstruct_zero_field(M4):
    zf = simulate_response(SpreadingFunction.zero(M4.params), M4)
    rec = reconstruct(zf, SupportSet(((0, 0), (2, 1))), M4)
    assert hs_norm(rec) == 0


def test_reconstruct_wrong_support_residual(M6, rng):
    for _ in range(20):
        sf, zf = instance(M6, 3, rng)
        rest = [c for c in itertools.product(range(6), range(6)) if c not in sf.support]
        wrong = SupportSet(tuple(rest[i] for i in rng.choice(len(rest), 3, replace=False)))
        assert fit_residual(zf, reconstruct(zf, wrong, M6), M6) > 1e-3


def test_reconstruct_rank_deficient():
    M = build_matrix([1, 1], ModelParams(2, 0.5))
    zf = simulate_response(SpreadingFunction.zero(M.params), M)
    with pytest.raises(PreconditionError):
        reconstruct(zf, SupportSet(((0, 0), (1, 0))), M)
    with pytest.raises(PreconditionError):
        reconstruct(zf, SupportSet(((0, 0), (0, 1), (1, 0))), M)


def test_gram_rank_dependent_phased_fields(rng):
    p = ModelParams(4, 1.0, 4, 4)
    base = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    values = np.zeros((16, 4, 4), dtype=complex)
    values[1] = base            # cell (0, 1)
    values[14] = 2 * base       # cell (3, 2)
    support = SupportSet(((0, 1), (3, 2)))
    sf = devectorize(CellVectorField(p, values), support)
    assert not gram_rank(sf).full_rank


def test_gram_rank_generic_and_oversized(rng):
    p = ModelParams(4, 1.0, 2, 2)
    assert gram_rank(random_spreading(p, random_support(p, 4, rng), rng)).full_rank
    with pytest.warns(UserWarning):
        sf = random_spreading(p, random_support(p, 5, rng), rng)
    assert not gram_rank(sf).full_rank


def test_methods_agree(M6, rng):
    for _ in range(30):
        sf, zf = instance(M6, int(rng.integers(1, 4)), rng)
        reports = {m: identify(zf, M6, m, 3, sf) for m in ("MMV_EXHAUSTIVE", "MUSIC", "SOMP")}
        assert reports["MMV_EXHAUSTIVE"].support_estimate == reports["MUSIC"].support_estimate == sf.support
        if reports["SOMP"].residual <= 1e-9:
            assert reports["SOMP"].support_estimate == sf.support


def test_identify_report_fields(M6, rng):
    sf, zf = instance(M6, 2, rng)
    r = identify(zf, M6, "MMV_EXHAUSTIVE", 3, sf)
    assert r.support_exact and r.reconstruction_ok
    assert r.residual <= 1e-10 and 0 < r.alpha <= r.beta
    assert r.elapsed_ms >= 0
