import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zakident import (
    CellVectorField,
    InconsistencyError,
    ModelParams,
    SpreadingFunction,
    StructuralError,
    SupportSet,
    devectorize,
    gram_rank,
    hs_inner,
    hs_norm,
    random_spreading,
    vectorize,
)
from zakident.model import RankDeficiencyWarning, field_norm, random_support


def test_params_derived_quantities():
    p = ModelParams(5, 0.2, 3, 2)
    assert p.tau_max == pytest.approx(1.0)
    assert p.nu_max == pytest.approx(5.0)
    assert p.cell_area == pytest.approx(1 / 5)
    assert p.weight == pytest.approx(1 / 30)
    np.testing.assert_allclose(p.t_grid, [0.2 / 6, 0.1, 5 * 0.2 / 6])
    np.testing.assert_allclose(p.f_grid, [0.25, 0.75])


@pytest.mark.parametrize("kwargs", [dict(L=1), dict(L=3, T=0.0), dict(L=3, Nt=0), dict(L=3, Nf=-1)])
def test_params_rejects_invalid(kwargs):
    with pytest.raises(StructuralError):
        ModelParams(**kwargs)


def test_support_set_basics():
    s = SupportSet.of([(2, 1), (0, 3)], L=4)
    assert s.cells == ((0, 3), (2, 1))
    assert s.area(4) == 0.5
    np.testing.assert_array_equal(s.indices(4), [3, 9])
    with pytest.raises(StructuralError):
        SupportSet(((0, 0), (0, 0)))
    with pytest.raises(StructuralError):
        SupportSet.of([(4, 0)], L=4)


def test_vectorize_empty_support_is_zero():
    p = ModelParams(3)
    v = vectorize(SpreadingFunction.zero(p))
    assert v.values.shape == (9, 4, 4)
    assert not np.any(v.values)


def test_vectorize_single_cell_constant_one():
    p = ModelParams(4, 0.5, 3, 2)
    sf = SpreadingFunction(p, SupportSet(((0, 0),)), {(0, 0): np.ones((3, 2))})
    v = vectorize(sf).values
    t = (np.arange(3) + 0.5) * 0.5 / 3
    f = (np.arange(2) + 0.5) * (1 / (0.5 * 4)) / 2
    expected = np.exp(2j * np.pi * f[None, :] * t[:, None])
    np.testing.assert_allclose(v[0], expected, rtol=0, atol=1e-15)
    assert not np.any(v[1:])


def test_vectorize_entry_formula_off_origin(rng):
    p = ModelParams(3, 2.0, 2, 3)
    sf = random_spreading(p, SupportSet(((2, 1),)), rng)
    v = vectorize(sf).values
    for i, t in enumerate(p.t_grid):
        for j, f in enumerate(p.f_grid):
            nu = f + 1 / (2.0 * 3)
            assert v[7, i, j] == pytest.approx(sf.cells[(2, 1)][i, j] * np.exp(2j * np.pi * nu * t))


def test_round_trip(rng):
    p = ModelParams(4, 1.0, 4, 4)
    sf = random_spreading(p, random_support(p, 3, rng), rng)
    back = devectorize(vectorize(sf), sf.support)
    assert back.support == sf.support
    for key in sf.support:
        np.testing.assert_allclose(back.cells[key], sf.cells[key], rtol=0, atol=1e-12)


def test_devectorize_zero_field():
    p = ModelParams(3)
    sf = devectorize(CellVectorField(p, np.zeros((9, 4, 4))), SupportSet(((1, 1),)))
    assert hs_norm(sf) == 0.0


def test_devectorize_rejects_energy_outside_support():
    p = ModelParams(3, 1.0, 1, 1)
    values = np.zeros((9, 1, 1), dtype=complex)
    values[4] = 1.0
    with pytest.raises(InconsistencyError):
        devectorize(CellVectorField(p, values), SupportSet(((0, 0),)), tol=1e-9)


def test_shape_mismatch_is_structural():
    p = ModelParams(3, 1.0, 2, 2)
    with pytest.raises(StructuralError):
        SpreadingFunction(p, SupportSet(((0, 0),)), {(0, 0): np.ones((3, 2))})
    with pytest.raises(StructuralError):
        SpreadingFunction(p, SupportSet(((0, 0),)), {(0, 1): np.ones((2, 2))})


def test_hs_inner_properties(rng):
    p = ModelParams(4, 1.0, 3, 3)
    sf = random_spreading(p, random_support(p, 5, rng), rng)
    ip = hs_inner(sf, sf)
    assert ip.imag == 0.0 and ip.real > 0
    a = random_spreading(p, SupportSet(((0, 0), (1, 2))), rng)
    b = random_spreading(p, SupportSet(((3, 3),)), rng)
    assert hs_inner(a, b) == 0


def test_hs_norm_constant_cell():
    p = ModelParams(5, 1.0, 3, 2)
    a = 2 - 1j
    sf = SpreadingFunction(p, SupportSet(((1, 4),)), {(1, 4): np.full((3, 2), a)})
    assert hs_norm(sf) ** 2 == pytest.approx(abs(a) ** 2 / 5, rel=1e-14)


def test_hs_inner_rejects_mismatched_params():
    a = SpreadingFunction.zero(ModelParams(3))
    b = SpreadingFunction.zero(ModelParams(4))
    with pytest.raises(StructuralError):
        hs_inner(a, b)


@settings(max_examples=30, deadline=None)
@given(
    L=st.integers(2, 5),
    Nt=st.integers(1, 4),
    Nf=st.integers(1, 4),
    T=st.floats(0.1, 10.0),
    size=st.integers(0, 6),
    seed=st.integers(0, 2**32 - 1),
)
def test_vectorize_preserves_norm(L, Nt, Nf, T, size, seed):
    p = ModelParams(L, T, Nt, Nf)
    rng = np.random.default_rng(seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficiencyWarning)
        sf = random_spreading(p, random_support(p, min(size, L * L), rng), rng)
    assert field_norm(vectorize(sf).values, p) == pytest.approx(hs_norm(sf), rel=1e-13, abs=1e-300)


def test_random_spreading_deterministic():
    p = ModelParams(4)
    s = SupportSet(((0, 1), (3, 2)))
    a = random_spreading(p, s, np.random.default_rng(7))
    b = random_spreading(p, s, np.random.default_rng(7))
    for key in s:
        assert a.cells[key].tobytes() == b.cells[key].tobytes()


def test_random_spreading_generic_gram():
    p = ModelParams(6, 1.0, 4, 4)
    rng = np.random.default_rng(3)
    sf = random_spreading(p, random_support(p, 5, rng), rng)
    g = gram_rank(sf)
    lam = np.linalg.eigvalsh(g.S)
    assert g.full_rank and lam[0] > 1e-6 * lam[-1]


def test_random_spreading_empty_and_warning():
    p = ModelParams(3, 1.0, 1, 2)
    assert hs_norm(random_spreading(p, SupportSet(), np.random.default_rng(0))) == 0
    with pytest.warns(RankDeficiencyWarning):
        sf = random_spreading(p, SupportSet(((0, 0), (0, 1), (1, 1))), np.random.default_rng(0))
    assert sf.rank_deficient


def test_arithmetic_unions_supports(rng):
    p = ModelParams(3)
    a = random_spreading(p, SupportSet(((0, 0),)), rng)
    b = random_spreading(p, SupportSet(((1, 1),)), rng)
    d = 2 * a - b
    assert d.support.cells == ((0, 0), (1, 1))
    assert hs_norm(d) ** 2 == pytest.approx(4 * hs_norm(a) ** 2 + hs_norm(b) ** 2)
