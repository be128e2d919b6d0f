"""Command-line interface.

Subcommands: ``test`` (bootstrap separability test on a sample file),
``simulate`` (write a synthetic MA(1) sample), ``table1`` (Monte-Carlo
rejection-rate table), ``relmeasure`` (relative separability measure).

Exit codes: 0 test ran and did not reject, 3 test ran and rejected,
1 runtime/data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys

import numpy as np

from . import __version__
from .bootstrap import BootstrapConfig, default_block_length, run_test
from .covariance import LazyCovariance
from .errors import SepcovError
from .estimator import make_psi
from .sample_io import read_sample, write_sample
from .separable import ApproxKind
from .simulate import SimConfig, SimKernelParams, generate_sample, run_experiment
from .statistic import relative_measure

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_REJECT = 3


def _approx_kind(name: str, psi_name: str, sample) -> ApproxKind:
    if name == "product":
        return ApproxKind("product", make_psi(psi_name, sample.grid.temporal))
    return ApproxKind(name)


def _add_approx_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--approx", choices=("trace", "product", "spca"), default="trace")
    p.add_argument("--psi", choices=("const", "cosine"), default="const")


def _cmd_test(args) -> int:
    sample = read_sample(args.infile)
    config = BootstrapConfig(
        replicates=args.replicates,
        block_length=args.block_length,
        alpha=args.alpha,
        seed=args.seed,
        kind=_approx_kind(args.approx, args.psi, sample),
    )
    report = run_test(sample, config)
    payload = report.to_dict()
    payload["config"]["psi"] = args.psi if args.approx == "product" else None
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_REJECT if report.reject else EXIT_OK


def _cmd_simulate(args) -> int:
    config = SimConfig(
        params=SimKernelParams(a=args.a, b=args.b, c=args.c),
        n_spatial=args.S,
        n_temporal=args.T,
        n_obs=args.N,
        runs=1,
        seed=args.seed,
        paper_grid=args.paper_grid,
        ma1_integer_sites=not args.ma1_grid_sites,
    )
    rng = np.random.default_rng(np.random.SeedSequence((args.seed, 0, 0)))
    sample = generate_sample(config, rng)
    write_sample(sample, args.out)
    return EXIT_OK


def _parse_rows(spec: str) -> dict[str, list[float]]:
    values: dict[str, list[float]] = {}
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        try:
            key, raw = part.split("=")
        except ValueError:
            raise SepcovError(f"malformed table row spec {part!r}") from None
        key = key.strip()
        if key not in ("S", "N", "c"):
            raise SepcovError(f"unknown table variable {key!r}; use S, N, c")
        values[key] = [float(v) for v in raw.split(",")]
    for key, default in (("S", [4.0]), ("N", [100.0]), ("c", [0.0, 1.0])):
        values.setdefault(key, default)
    return values


def _cmd_table1(args) -> int:
    cells = _parse_rows(args.rows)
    writer_rows = []
    for s, n, c in itertools.product(cells["S"], cells["N"], cells["c"]):
        s, n = int(s), int(n)
        l = args.block_length or default_block_length(n)
        config = SimConfig(
            params=SimKernelParams(c=c),
            n_spatial=s,
            n_temporal=args.T,
            n_obs=n,
            runs=args.runs,
            bootstrap=BootstrapConfig(
                replicates=args.replicates,
                block_length=l,
                alpha=args.alpha,
                kind=ApproxKind("trace"),
            ),
            seed=args.seed,
            paper_grid=True,
        )
        result = run_experiment(config)
        writer_rows.append(
            {
                "S": s,
                "N": n,
                "c": c,
                "rejection_rate": result.rejection_rate,
                "runs": args.runs,
                "r": args.replicates,
                "l": l,
                "seed": args.seed,
            }
        )
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(
            out, fieldnames=["S", "N", "c", "rejection_rate", "runs", "r", "l", "seed"]
        )
        writer.writeheader()
        writer.writerows(writer_rows)
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def _cmd_relmeasure(args) -> int:
    sample = read_sample(args.infile)
    cov = LazyCovariance(sample)
    kind = _approx_kind(args.approx, args.psi, sample)
    measure = relative_measure(cov, kind)
    print(f"{measure.value:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sepcov",
        description="Sup-norm separability tests for space-time covariance kernels",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="run the bootstrap separability test")
    p.add_argument("--in", dest="infile", required=True)
    _add_approx_args(p)
    p.add_argument("--replicates", type=int, default=400)
    p.add_argument("--block-length", type=int, default=None)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("simulate", help="write a synthetic MA(1) sample file")
    p.add_argument("--a", type=float, default=3.0)
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--S", type=int, default=4)
    p.add_argument("--T", type=int, default=50)
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--paper-grid", action="store_true")
    p.add_argument(
        "--ma1-grid-sites",
        action="store_true",
        help="use grid coordinates instead of integer site indices in the "
        "innovation kernel and smoothing weights",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("table1", help="Monte-Carlo rejection-rate table")
    p.add_argument("--rows", default="S=4;N=100;c=0,1", help="e.g. 'S=4,6;N=100;c=0,1'")
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--replicates", type=int, default=400)
    p.add_argument("--block-length", type=int, default=None)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--T", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_table1)

    p = sub.add_parser("relmeasure", help="relative separability measure")
    p.add_argument("--in", dest="infile", required=True)
    _add_approx_args(p)
    p.set_defaults(func=_cmd_relmeasure)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SepcovError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
