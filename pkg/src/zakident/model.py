"""Delay-Doppler grid, spreading functions and their stacked cell representation.

The (tau, nu) plane is tiled into L x L cells of size T x 1/(TL). A spreading
function supported on a set of active cells is stored as samples on a
cell-centred grid inside each cell. Multiplying every cell by the phase
exp(j2pi (f + m/(TL)) t) and stacking the cells row-major gives the vector
field s(t, f) that the measurement matrix acts on.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import InconsistencyError, StructuralError

Cell = tuple[int, int]


class RankDeficiencyWarning(UserWarning):
    """More active cells than grid samples per cell; the Gram matrix is singular."""


@dataclass(frozen=True)
class ModelParams:
    L: int
    T: float = 1.0
    Nt: int = 4
    Nf: int = 4

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise StructuralError(f"L must be an integer >= 2, got {self.L}")
        if int(self.Nt) != self.Nt or int(self.Nf) != self.Nf or self.Nt < 1 or self.Nf < 1:
            raise StructuralError(f"Nt, Nf must be positive integers, got {self.Nt}, {self.Nf}")
        if not self.T > 0:
            raise StructuralError(f"T must be positive, got {self.T}")
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "Nt", int(self.Nt))
        object.__setattr__(self, "Nf", int(self.Nf))
        object.__setattr__(self, "T", float(self.T))

    @property
    def tau_max(self) -> float:
        return self.T * self.L

    @property
    def nu_max(self) -> float:
        return 1.0 / self.T

    @property
    def doppler_step(self) -> float:
        """Height 1/(TL) of a cell along the Doppler axis."""
        return 1.0 / (self.T * self.L)

    @property
    def cell_area(self) -> float:
        return self.T * self.doppler_step

    @property
    def weight(self) -> float:
        """Riemann weight of one grid sample: cell area over samples per cell."""
        return 1.0 / (self.L * self.Nt * self.Nf)

    @property
    def t_grid(self) -> np.ndarray:
        return (np.arange(self.Nt) + 0.5) * self.T / self.Nt

    @property
    def f_grid(self) -> np.ndarray:
        return (np.arange(self.Nf) + 0.5) * self.doppler_step / self.Nf

    def cell_phase(self, m: int) -> np.ndarray:
        """exp(j2pi (f_j + m/(TL)) t_i) on the Nt x Nf grid."""
        t = self.t_grid[:, None]
        f = self.f_grid[None, :] + m * self.doppler_step
        return np.exp(2j * np.pi * f * t)


@dataclass(frozen=True)
class SupportSet:
    """Sorted, duplicate-free set of active cells (k, m)."""

    cells: tuple[Cell, ...] = ()

    def __post_init__(self):
        cells = tuple(sorted({(int(k), int(m)) for k, m in self.cells}))
        if len(cells) != len(self.cells):
            raise StructuralError("duplicate cells in support")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def of(cls, pairs: Iterable[Iterable[int]], L: int | None = None) -> "SupportSet":
        support = cls(tuple(tuple(p) for p in pairs))
        if L is not None:
            support.check(L)
        return support

    @classmethod
    def from_indices(cls, indices: Iterable[int], L: int) -> "SupportSet":
        return cls(tuple(divmod(int(i), L) for i in indices))

    def check(self, L: int) -> None:
        for k, m in self.cells:
            if not (0 <= k < L and 0 <= m < L):
                raise StructuralError(f"cell {(k, m)} outside the {L}x{L} grid")

    def indices(self, L: int) -> np.ndarray:
        """Column indices k*L + m in the stacked ordering."""
        self.check(L)
        return np.array([k * L + m for k, m in self.cells], dtype=int)

    def area(self, L: int) -> float:
        return len(self.cells) / L

    def __len__(self):
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)

    def __contains__(self, cell):
        return tuple(cell) in self.cells

    def __or__(self, other: "SupportSet") -> "SupportSet":
        return SupportSet(tuple(set(self.cells) | set(other.cells)))

    def __and__(self, other: "SupportSet") -> "SupportSet":
        return SupportSet(tuple(set(self.cells) & set(other.cells)))

    def to_list(self) -> list[list[int]]:
        return [[k, m] for k, m in self.cells]


@dataclass(frozen=True)
class SpreadingFunction:
    """Samples of s_H(t_i + kT, f_j + m/(TL)) on every active cell (k, m)."""

    params: ModelParams
    support: SupportSet
    cells: Mapping[Cell, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.support.check(self.params.L)
        shape = (self.params.Nt, self.params.Nf)
        if set(self.cells) != set(self.support.cells):
            raise StructuralError("cell arrays do not match the support")
        frozen = {}
        for key in self.support.cells:
            arr = np.array(self.cells[key], dtype=np.complex128)
            if arr.shape != shape:
                raise StructuralError(f"cell {key} has shape {arr.shape}, expected {shape}")
            arr.flags.writeable = False
            frozen[key] = arr
        object.__setattr__(self, "cells", frozen)

    @classmethod
    def zero(cls, params: ModelParams) -> "SpreadingFunction":
        return cls(params, SupportSet(), {})

    @property
    def rank_deficient(self) -> bool:
        """True when |support| exceeds the number of samples per cell."""
        return len(self.support) > self.params.Nt * self.params.Nf

    def _combine(self, other: "SpreadingFunction", a: complex, b: complex):
        if self.params != other.params:
            raise StructuralError("spreading functions live on different grids")
        support = self.support | other.support
        zero = np.zeros((self.params.Nt, self.params.Nf), dtype=np.complex128)
        cells = {
            key: a * self.cells.get(key, zero) + b * other.cells.get(key, zero)
            for key in support
        }
        return SpreadingFunction(self.params, support, cells)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, scalar):
        return SpreadingFunction(
            self.params, self.support, {key: scalar * v for key, v in self.cells.items()}
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


@dataclass(frozen=True)
class CellVectorField:
    """The stacked field s(t, f), shape (L^2, Nt, Nf)."""

    params: ModelParams
    values: np.ndarray

    def __post_init__(self):
        p = self.params
        values = np.array(self.values, dtype=np.complex128)
        if values.shape != (p.L * p.L, p.Nt, p.Nf):
            raise StructuralError(
                f"field shape {values.shape} != {(p.L * p.L, p.Nt, p.Nf)}"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def restrict(self, support: SupportSet) -> np.ndarray:
        """s_Gamma(t, f) as an array of shape (|Gamma|, Nt, Nf)."""
        return self.values[support.indices(self.params.L)]


def vectorize(sf: SpreadingFunction) -> CellVectorField:
    p = sf.params
    values = np.zeros((p.L * p.L, p.Nt, p.Nf), dtype=np.complex128)
    for (k, m), arr in sf.cells.items():
        values[k * p.L + m] = arr * p.cell_phase(m)
    return CellVectorField(p, values)


def devectorize(v: CellVectorField, support: SupportSet, tol: float = 1e-9) -> SpreadingFunction:
    """Strip the cell phases of ``v`` on ``support``.

    Raises InconsistencyError when the energy of ``v`` outside ``support``
    exceeds ``tol`` relative to its total energy.
    """
    p = v.params
    idx = support.indices(p.L)
    outside = np.ones(p.L * p.L, dtype=bool)
    outside[idx] = False
    total = np.sqrt(np.sum(np.abs(v.values) ** 2))
    leak = np.sqrt(np.sum(np.abs(v.values[outside]) ** 2))
    if leak > tol * total:
        raise InconsistencyError(
            f"field has relative energy {leak / total:.3e} outside the support"
        )
    cells = {
        (k, m): v.values[k * p.L + m] * np.conj(p.cell_phase(m)) for k, m in support
    }
    return SpreadingFunction(p, support, cells)


def hs_inner(sf1: SpreadingFunction, sf2: SpreadingFunction) -> complex:
    if sf1.params != sf2.params:
        raise StructuralError("spreading functions live on different grids")
    total = 0j
    for key in set(sf1.support.cells) & set(sf2.support.cells):
        total += np.vdot(sf2.cells[key], sf1.cells[key])
    return complex(total * sf1.params.weight)


def hs_norm(sf: SpreadingFunction) -> float:
    return float(np.sqrt(max(hs_inner(sf, sf).real, 0.0)))


def field_norm(values: np.ndarray, params: ModelParams) -> float:
    """Weighted l2 norm of any (rows, Nt, Nf) field sampled on the cell grid."""
    return float(np.sqrt(np.sum(np.abs(values) ** 2) * params.weight))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """I.i.d. circular complex Gaussian entries with unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_support(params: ModelParams, size: int, rng: np.random.Generator) -> SupportSet:
    L = params.L
    if not 0 <= size <= L * L:
        raise StructuralError(f"support size {size} outside [0, {L * L}]")
    idx = np.sort(rng.choice(L * L, size=size, replace=False))
    return SupportSet.from_indices(idx, L)


def random_spreading(
    params: ModelParams, support: SupportSet, rng: np.random.Generator
) -> SpreadingFunction:
    support.check(params.L)
    cells = {key: complex_normal(rng, (params.Nt, params.Nf)) for key in support}
    sf = SpreadingFunction(params, support, cells)
    if sf.rank_deficient:
        warnings.warn(
            f"{len(support)} active cells but only {params.Nt * params.Nf} samples per cell",
            RankDeficiencyWarning,
            stacklevel=2,
        )
    return sf
