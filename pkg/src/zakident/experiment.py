"""Monte-Carlo identification sweeps written as CSV."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import IdentError, PreconditionError
from .gabor import MeasurementMatrix, build_matrix, certify_matrix, draw_coefficients
from .model import ModelParams, random_spreading, random_support
from .recover import EPS_FIT, EPS_MUSIC, EPS_RANK, Method, identify
from .serialize import coefficients_from_dict
from .simulate import add_noise, simulate_response

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "trial", "delta", "method", "support_size", "support_exact",
    "reconstruction_rel_err", "residual", "alpha", "beta", "elapsed_ms",
]
ALL_METHODS = (Method.MMV_EXHAUSTIVE, Method.SOMP, Method.MUSIC)


@dataclass
class ExperimentConfig:
    params: ModelParams = field(default_factory=lambda: ModelParams(6, 1.0, 4, 4))
    seed: int = 0
    trials: int = 200
    delta_list: list[Fraction] = field(default_factory=lambda: [Fraction(1, 2)])
    method: str = "MMV_EXHAUSTIVE"
    snr_db: float = math.inf
    coefficients: str = "draw"
    output: str | None = None
    timing: bool = True
    eps_rank: float = EPS_RANK
    eps_fit: float = EPS_FIT
    eps_music: float = EPS_MUSIC

    def __post_init__(self):
        self.delta_list = [Fraction(d) for d in self.delta_list]
        self.snr_db = float(self.snr_db)
        if self.trials < 1:
            raise PreconditionError("trials must be >= 1")
        if self.method != "ALL":
            Method(self.method)
        for d in self.delta_list:
            if not 0 < d <= 1:
                raise PreconditionError(f"delta {d} outside (0, 1]")
            if self.kmax(d) < 1:
                raise PreconditionError(f"delta {d} gives no active cell at L={self.params.L}")

    def kmax(self, delta: Fraction) -> int:
        return math.floor(delta * self.params.L)

    @property
    def methods(self) -> tuple[Method, ...]:
        return ALL_METHODS if self.method == "ALL" else (Method(self.method),)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        params = ModelParams(
            doc.pop("L", 6), doc.pop("T", 1.0), doc.pop("Nt", 4), doc.pop("Nf", 4)
        )
        known = {f.name for f in fields(cls)} - {"params"}
        unknown = set(doc) - known
        if unknown:
            raise PreconditionError(f"unknown config keys: {sorted(unknown)}")
        if "delta_list" in doc:
            doc["delta_list"] = [Fraction(str(d)) for d in doc["delta_list"]]
        return cls(params=params, **doc)


def load_config(path) -> ExperimentConfig:
    """Read a TOML config, falling back to JSON."""
    text = Path(path).read_text()
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError:
        doc = json.loads(text)
    return ExperimentConfig.from_dict(doc)


def trial_rng(seed: int, delta_index: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, 1, delta_index, trial])


def measurement_for(cfg: ExperimentConfig) -> MeasurementMatrix:
    if cfg.coefficients == "draw":
        return draw_coefficients(cfg.params, np.random.default_rng([cfg.seed, 0]))
    c = coefficients_from_dict(json.loads(Path(cfg.coefficients).read_text()))
    M, result = certify_matrix(build_matrix(c, cfg.params), np.random.default_rng([cfg.seed, 0]))
    if not result.ok:
        raise PreconditionError(f"loaded coefficients fail the spark check (witness {result.witness})")
    return M


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def run_trial(cfg: ExperimentConfig, M: MeasurementMatrix, delta_index: int, trial: int) -> list[list[str]]:
    delta = cfg.delta_list[delta_index]
    kmax = cfg.kmax(delta)
    rng = trial_rng(cfg.seed, delta_index, trial)
    support = random_support(cfg.params, kmax, rng)
    truth = random_spreading(cfg.params, support, rng)
    zf = add_noise(simulate_response(truth, M), cfg.snr_db, rng)
    rows = []
    for method in cfg.methods:
        try:
            r = identify(
                zf, M, method, kmax, truth,
                eps_rank=cfg.eps_rank, eps_fit=cfg.eps_fit, eps_music=cfg.eps_music,
            )
        except IdentError as exc:
            log.warning("trial %d delta %s %s failed: %s", trial, delta, method.value, exc)
            row = [trial, str(delta), method.value, -1, False, math.nan, math.nan, math.nan, math.nan, 0.0]
        else:
            if method is Method.SOMP and not r.support_exact:
                log.warning("trial %d delta %s: SOMP returned %s, truth %s",
                            trial, delta, r.support_estimate.cells, support.cells)
            row = [
                trial, str(delta), method.value, len(r.support_estimate), bool(r.support_exact),
                float(r.reconstruction_rel_err), float(r.residual), float(r.alpha), float(r.beta),
                float(r.elapsed_ms) if cfg.timing else 0.0,
            ]
        rows.append([_fmt(x) for x in row])
    return rows


def _run_one(args):
    return run_trial(*args)


def run_experiment(cfg: ExperimentConfig, M: MeasurementMatrix | None = None) -> str:
    """Run every (delta, trial) pair and return the CSV text; written to cfg.output if set."""
    M = measurement_for(cfg) if M is None else M
    jobs = [
        (cfg, M, di, trial)
        for di in range(len(cfg.delta_list))
        for trial in range(cfg.trials)
    ]
    workers = int(os.environ.get("IDENT_THREADS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=8))
    else:
        results = [_run_one(job) for job in jobs]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rows in results:
        writer.writerows(rows)
    text = buf.getvalue()
    if cfg.output:
        Path(cfg.output).write_text(text)
    return text


def summarize(csv_text: str) -> dict[tuple[str, str], float]:
    """Support-exact rate per (delta, method)."""
    hits: dict[tuple[str, str], list[bool]] = {}
    for row in csv.DictReader(io.StringIO(csv_text)):
        hits.setdefault((row["delta"], row["method"]), []).append(row["support_exact"] == "true")
    return {key: sum(v) / len(v) for key, v in hits.items()}
