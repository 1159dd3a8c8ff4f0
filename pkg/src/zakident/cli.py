"""Command line front end: ``ident <subcommand>``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import serialize
from .certify import certify, condition_profile, counterexample
from .errors import BudgetError, IdentError
from .experiment import ExperimentConfig, load_config, run_experiment, summarize
from .gabor import build_matrix, certify_matrix, draw_coefficients, spark_check, stability_bounds
from .model import ModelParams, SupportSet, hs_norm, random_spreading, random_support
from .recover import EPS_FIT, EPS_MUSIC, EPS_RANK, Method, identify
from .simulate import add_noise, simulate_response

log = logging.getLogger("zakident")


def parse_cells(text: str) -> SupportSet:
    """'0:1,2:3' -> {(0, 1), (2, 3)}"""
    pairs = [item.split(":") for item in text.split(",") if item.strip()]
    return SupportSet(tuple((int(k), int(m)) for k, m in pairs))


def _params(args) -> ModelParams:
    return ModelParams(args.L, args.T, args.Nt, args.Nf)


def _measurement(args, params: ModelParams):
    if args.coeffs:
        c = serialize.coefficients_from_dict(json.loads(Path(args.coeffs).read_text()))
        M, result = certify_matrix(build_matrix(c, params), np.random.default_rng(args.seed))
        if not result.ok:
            log.warning("loaded coefficients fail the spark check, witness %s", result.witness)
        return M
    return draw_coefficients(params, np.random.default_rng([args.seed, 0]))


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def cmd_gabor(args) -> int:
    params = _params(args)
    M = _measurement(args, params)
    mode = args.spark
    if mode == "auto":
        mode = "exhaustive" if math.comb(params.L ** 2, params.L) <= 2_000_000 else "randomized"
    result = spark_check(M, mode, trials=args.trials, rng=np.random.default_rng(args.seed))
    doc = {
        "L": params.L,
        "T": params.T,
        "coefficients": serialize.coefficients_to_dict(M),
        "spark": {
            "ok": result.ok,
            "mode": mode,
            "checked": result.checked,
            "witness": result.witness.to_list() if result.witness else None,
            "worst_ratio": result.worst_ratio,
        },
    }
    if args.supports:
        bounds = []
        for cells in json.loads(Path(args.supports).read_text()):
            support = SupportSet.of(cells, params.L)
            alpha, beta = stability_bounds(M, support)
            bounds.append({"support": support.to_list(), "alpha": alpha, "beta": beta})
        doc["stability_bounds"] = bounds
    if args.csv:
        serialize.matrix_to_csv(M, args.csv)
    if args.coeffs_out:
        Path(args.coeffs_out).write_text(json.dumps(serialize.coefficients_to_dict(M)))
    _emit(doc, args.out)
    return 0


def cmd_certify(args) -> int:
    params = _params(args)
    M = _measurement(args, params)
    kmax = math.floor(Fraction(args.delta) * params.L)
    cert = certify(M, kmax, rng=np.random.default_rng(args.seed))
    if args.profile_csv:
        serialize.profile_to_csv(condition_profile(M, kmax), args.profile_csv)
    _emit(serialize.certificate_to_dict(cert), args.out)
    return 0


def cmd_simulate(args) -> int:
    if args.sf:
        truth = serialize.load_spreading(args.sf)
        params = truth.params
    else:
        params = _params(args)
        rng = np.random.default_rng([args.seed, 2])
        truth = random_spreading(params, random_support(params, args.random, rng), rng)
        if args.sf_out:
            serialize.save_spreading(truth, args.sf_out)
    M = _measurement(args, params)
    zf = simulate_response(truth, M)
    if args.snr_db is not None:
        zf = add_noise(zf, args.snr_db, np.random.default_rng([args.seed, 3]))
    serialize.save_zak(zf, args.out)
    if args.json_mirror:
        Path(args.json_mirror).write_text(json.dumps(serialize.zak_to_dict(zf)))
    print(json.dumps({"out": str(args.out), "support": truth.support.to_list(), "energy": zf.energy()}))
    return 0


def cmd_recover(args) -> int:
    zf = serialize.load_zak(args.zak)
    M = _measurement(args, zf.params)
    truth = serialize.load_spreading(args.truth) if args.truth else None
    kmax = args.kmax if args.kmax is not None else zf.params.L // 2
    method = Method(args.method)
    if method is Method.MMV_EXHAUSTIVE and math.comb(zf.params.L ** 2, kmax) > 10_000_000:
        log.warning("exhaustive MMV over budget, falling back to SOMP")
        method = Method.SOMP
    report = identify(
        zf, M, method, kmax, truth,
        eps_rank=args.eps_rank, eps_fit=args.eps_fit, eps_music=args.eps_music,
    )
    if args.sf_out:
        serialize.save_spreading(report.reconstruction, args.sf_out)
    _emit(serialize.report_to_dict(report), args.out)
    return 0


def cmd_experiment(args) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.out:
        cfg.output = args.out
    if args.trials:
        cfg.trials = args.trials
    if args.no_timing:
        cfg.timing = False
    text = run_experiment(cfg)
    if not cfg.output:
        sys.stdout.write(text)
    for (delta, method), rate in sorted(summarize(text).items()):
        print(f"delta={delta} method={method} support_exact_rate={rate:.3f}", file=sys.stderr)
    return 0


def cmd_counterexample(args) -> int:
    params = _params(args)
    M = _measurement(args, params)
    h1, h2 = counterexample(M, parse_cells(args.gamma1), parse_cells(args.gamma2))
    serialize.save_spreading(h1, args.out1)
    serialize.save_spreading(h2, args.out2)
    gap = (simulate_response(h1, M) - simulate_response(h2, M)).norm()
    print(json.dumps({"operator_distance": hs_norm(h1 - h2), "output_distance": gap}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ident", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def grid(p, coeffs=True):
        p.add_argument("--L", type=int, default=6)
        p.add_argument("--T", type=float, default=1.0)
        p.add_argument("--Nt", type=int, default=4)
        p.add_argument("--Nf", type=int, default=4)
        if coeffs:
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--coeffs", help="coefficient JSON instead of a seeded draw")

    p = sub.add_parser("gabor", help="measurement matrix dump and spark report")
    grid(p)
    p.add_argument("--spark", choices=["auto", "exhaustive", "randomized"], default="auto")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--supports", help="JSON list of supports [[[k, m], ...], ...]")
    p.add_argument("--csv", help="write A_c as CSV")
    p.add_argument("--coeffs-out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gabor)

    p = sub.add_parser("certify", help="identifiability certificate for area delta")
    grid(p)
    p.add_argument("--delta", required=True, help="target area as a fraction, e.g. 1/2")
    p.add_argument("--profile-csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="spreading function JSON -> Zak field file")
    grid(p)
    p.add_argument("--sf", help="spreading function JSON")
    p.add_argument("--random", type=int, default=1, help="random support size when --sf is absent")
    p.add_argument("--sf-out")
    p.add_argument("--snr-db", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--json-mirror")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("recover", help="Zak field file -> recovery report")
    p.add_argument("--zak", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--coeffs")
    p.add_argument("--method", choices=[m.value for m in Method], default="MMV_EXHAUSTIVE")
    p.add_argument("--kmax", type=int)
    p.add_argument("--truth")
    p.add_argument("--eps-rank", type=float, default=EPS_RANK)
    p.add_argument("--eps-fit", type=float, default=EPS_FIT)
    p.add_argument("--eps-music", type=float, default=EPS_MUSIC)
    p.add_argument("--sf-out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("experiment", help="Monte-Carlo sweep -> CSV")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--trials", type=int)
    p.add_argument("--no-timing", action="store_true", help="write elapsed_ms as 0")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("counterexample", help="two operators with identical responses")
    grid(p)
    p.add_argument("--gamma1", required=True, help="cells as k:m,k:m")
    p.add_argument("--gamma2", required=True)
    p.add_argument("--out1", required=True)
    p.add_argument("--out2", required=True)
    p.set_defaults(func=cmd_counterexample)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 3
    except (IdentError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
