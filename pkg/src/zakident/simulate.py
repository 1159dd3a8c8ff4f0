"""Zak-domain response of an operator to the Dirac-train probing signal."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, StructuralError
from .gabor import MeasurementMatrix, as_coefficients
from .model import ModelParams, SpreadingFunction, complex_normal, field_norm, vectorize


@dataclass(frozen=True)
class ZakField:
    """z(t_i, f_j) stacked over the L delay cells, shape (L, Nt, Nf)."""

    params: ModelParams
    z: np.ndarray

    def __post_init__(self):
        p = self.params
        z = np.array(self.z, dtype=np.complex128)
        if z.shape != (p.L, p.Nt, p.Nf):
            raise StructuralError(f"Zak field shape {z.shape} != {(p.L, p.Nt, p.Nf)}")
        z.flags.writeable = False
        object.__setattr__(self, "z", z)

    def norm(self) -> float:
        return field_norm(self.z, self.params)

    def energy(self) -> float:
        return self.norm() ** 2

    def __sub__(self, other: "ZakField") -> "ZakField":
        if self.params != other.params:
            raise StructuralError("Zak fields live on different grids")
        return ZakField(self.params, self.z - other.z)


def simulate_response(sf: SpreadingFunction, M: MeasurementMatrix) -> ZakField:
    if sf.params != M.params:
        raise StructuralError("spreading function and measurement matrix disagree on params")
    s = vectorize(sf).values
    return ZakField(sf.params, np.einsum("pc,cij->pij", M.A, s))


def simulate_response_reference(sf: SpreadingFunction, c, params: ModelParams) -> ZakField:
    """Evaluate the per-cell double sum directly, without forming A_c.

    z_p(t, f) = sum_{k,m} c_{k-p}/(TL) s_H(t + kT, f + m/(TL)) exp(j2pi (t + pT)(f + m/(TL)))
    followed by the phase exp(-j2pi pTf).
    """
    if sf.params != params:
        raise StructuralError("spreading function and params disagree")
    L, T = params.L, params.T
    c = as_coefficients(c, L)
    t = params.t_grid
    f = params.f_grid
    z = np.zeros((L, params.Nt, params.Nf), dtype=np.complex128)
    for p in range(L):
        for i in range(params.Nt):
            for j in range(params.Nf):
                acc = 0j
                for (k, m), samples in sf.cells.items():
                    nu = f[j] + m / (T * L)
                    acc += (
                        c[(k - p) % L] / (T * L)
                        * samples[i, j]
                        * np.exp(2j * np.pi * (t[i] + p * T) * nu)
                    )
                z[p, i, j] = acc * np.exp(-2j * np.pi * p * T * f[j])
    return ZakField(params, z)


def add_noise(zf: ZakField, snr_db: float, rng: np.random.Generator) -> ZakField:
    """Add circular Gaussian noise with expected weighted energy E_signal / 10^(snr/10)."""
    if math.isinf(snr_db) and snr_db > 0:
        return zf
    energy = zf.energy()
    if energy == 0.0:
        raise PreconditionError("cannot set an SNR on a zero-energy field")
    # expected weighted noise energy = sigma^2 * (#samples) * weight = sigma^2
    sigma = math.sqrt(energy / 10 ** (snr_db / 10))
    return ZakField(zf.params, zf.z + sigma * complex_normal(rng, zf.z.shape))
