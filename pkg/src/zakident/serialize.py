"""File formats for spreading functions, Zak fields, reports and certificates."""
from __future__ import annotations

import csv
import json
import math
import struct
from fractions import Fraction
from pathlib import Path

import numpy as np

from .certify import Certificate, ProfileRow
from .errors import StructuralError
from .gabor import MeasurementMatrix
from .model import ModelParams, SpreadingFunction, SupportSet
from .recover import RecoveryReport
from .simulate import ZakField

ZAK_MAGIC = b"ZAKF"
ZAK_HEADER = struct.Struct("<4sIIId")


def _float(x):
    """JSON-safe float: non-finite values become strings."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else str(x)


def spreading_to_dict(sf: SpreadingFunction) -> dict:
    p = sf.params
    return {
        "L": p.L,
        "T": p.T,
        "Nt": p.Nt,
        "Nf": p.Nf,
        "cells": [
            {"k": k, "m": m, "re": sf.cells[(k, m)].real.tolist(), "im": sf.cells[(k, m)].imag.tolist()}
            for k, m in sf.support
        ],
    }


def spreading_from_dict(doc: dict) -> SpreadingFunction:
    params = ModelParams(doc["L"], doc["T"], doc["Nt"], doc["Nf"])
    cells = {}
    for cell in doc["cells"]:
        key = (int(cell["k"]), int(cell["m"]))
        if key in cells:
            raise StructuralError(f"cell {key} listed twice")
        cells[key] = np.asarray(cell["re"], dtype=float) + 1j * np.asarray(cell["im"], dtype=float)
    return SpreadingFunction(params, SupportSet(tuple(cells)), cells)


def save_spreading(sf: SpreadingFunction, path) -> None:
    Path(path).write_text(json.dumps(spreading_to_dict(sf)))


def load_spreading(path) -> SpreadingFunction:
    return spreading_from_dict(json.loads(Path(path).read_text()))


def zak_to_bytes(zf: ZakField) -> bytes:
    p = zf.params
    header = ZAK_HEADER.pack(ZAK_MAGIC, p.L, p.Nt, p.Nf, p.T)
    return header + np.ascontiguousarray(zf.z, dtype="<c16").tobytes()


def zak_from_bytes(data: bytes) -> ZakField:
    if len(data) < ZAK_HEADER.size:
        raise StructuralError("truncated Zak field header")
    magic, L, Nt, Nf, T = ZAK_HEADER.unpack_from(data)
    if magic != ZAK_MAGIC:
        raise StructuralError(f"bad magic {magic!r}")
    params = ModelParams(L, T, Nt, Nf)
    body = data[ZAK_HEADER.size:]
    if len(body) != 16 * L * Nt * Nf:
        raise StructuralError(f"payload has {len(body)} bytes, expected {16 * L * Nt * Nf}")
    z = np.frombuffer(body, dtype="<c16").reshape(L, Nt, Nf)
    return ZakField(params, z)


def save_zak(zf: ZakField, path) -> None:
    Path(path).write_bytes(zak_to_bytes(zf))


def load_zak(path) -> ZakField:
    return zak_from_bytes(Path(path).read_bytes())


def zak_to_dict(zf: ZakField) -> dict:
    p = zf.params
    return {"L": p.L, "T": p.T, "Nt": p.Nt, "Nf": p.Nf, "re": zf.z.real.tolist(), "im": zf.z.imag.tolist()}


def zak_from_dict(doc: dict) -> ZakField:
    params = ModelParams(doc["L"], doc["T"], doc["Nt"], doc["Nf"])
    return ZakField(params, np.asarray(doc["re"]) + 1j * np.asarray(doc["im"]))


def coefficients_to_dict(M: MeasurementMatrix) -> dict:
    return {"L": M.L, "T": M.params.T, "re": M.c.real.tolist(), "im": M.c.imag.tolist()}


def coefficients_from_dict(doc: dict) -> np.ndarray:
    return np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc["im"], dtype=float)


def matrix_to_csv(M: MeasurementMatrix, path) -> None:
    """One row per matrix row; columns re/im interleaved per matrix column."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = []
        for col in range(M.A.shape[1]):
            k, m = divmod(col, M.L)
            header += [f"re_{k}_{m}", f"im_{k}_{m}"]
        writer.writerow(header)
        for row in M.A:
            writer.writerow([repr(float(x)) for pair in zip(row.real, row.imag) for x in pair])


def report_to_dict(report: RecoveryReport) -> dict:
    return {
        "support": report.support_estimate.to_list(),
        "residual": _float(report.residual),
        "alpha": _float(report.alpha),
        "beta": _float(report.beta),
        "method": report.method.value,
        "support_exact": report.support_exact,
        "reconstruction_ok": report.reconstruction_ok,
        "reconstruction_rel_err": _float(report.reconstruction_rel_err),
        "elapsed_ms": _float(report.elapsed_ms),
    }


def certificate_to_dict(cert: Certificate) -> dict:
    return {
        "L": cert.L,
        "delta": str(cert.delta),
        "kmax": cert.kmax,
        "verdict": cert.verdict.value,
        "worst_alpha": _float(cert.worst_alpha),
        "worst_beta": _float(cert.worst_beta),
        "worst_support": cert.worst_support.to_list(),
        "checked_count": cert.checked_count,
        "sampled": cert.sampled,
    }


def profile_to_csv(rows: list[ProfileRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "worst_ratio", "argmax_support"])
        for row in rows:
            support = ";".join(f"{k}:{m}" for k, m in row.argmax_support)
            writer.writerow([row.k, repr(row.worst_ratio), support])


def parse_fraction(text: str) -> Fraction:
    return Fraction(text.strip())
