"""Command-line interface.

Exit status: 0 when witnesses were found (or, for ``verify-lemmas``, every
lemma was evaluated), 2 when no witness exists at this n, 1 on error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .coloring import Domain
from .primes import theoretical_kappa, theoretical_w
from .report import emit_report, jsonable, write_csv_tables
from .schur_count import schur_constants
from .solver import (
    REQUIRED_LEMMAS,
    Mode,
    RunConfig,
    conjecture_report,
    make_coloring,
    pipeline_report,
    run_pipeline,
    search_report,
)

log = logging.getLogger("schurprimes")

EXIT_OK, EXIT_ERROR, EXIT_NONE = 0, 1, 2


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="ambient bound")
    p.add_argument("--w", type=int, default=2, help="W is the product of primes <= w")
    p.add_argument("--k", type=int, default=1, help="number of colors")
    p.add_argument("--kappa", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--coloring", default="const",
                   help="const | random:SEED | residue:M:r=c,... | path to a coloring file")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="csv also writes lemma_margins.csv / per_color_counts.csv next to --out")
    p.add_argument("--max-witnesses", type=int, default=100)
    p.add_argument("--c1-variant", choices=("recursion", "rz-claim"), default="recursion")
    p.add_argument("--paper-defaults", action="store_true",
                   help="use w = floor(log log n / 4) and kappa = C1(k)/(10000 k)")
    p.add_argument("--timings", action="store_true",
                   help="record stage timings (makes the report non-reproducible)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schurprimes",
        description="Search and certify monochromatic primes with p1 + p2 = p3 + 1.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("search", "list monochromatic witnesses among the primes <= n"),
        ("pipeline", "run the W-trick / Fourier / Bohr-set pipeline and lift its solutions"),
        ("conjecture", "search monochromatic p0; p1, p2, p3 in progression of step p0 - 1"),
        ("verify-lemmas", "run the pipeline and report every lemma comparison"),
    ):
        _add_common(sub.add_parser(name, help=help_text))
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    mode = {"search": Mode.SEARCH, "conjecture": Mode.CONJECTURE}.get(args.command, Mode.PIPELINE)
    w, kappa = args.w, args.kappa
    if args.paper_defaults:
        w = theoretical_w(args.n)
        kappa = theoretical_kappa(args.k, schur_constants(args.k).c1)
        log.warning("theoretical defaults give w=%d, kappa=%.3g; both degenerate at desk scale",
                    w, kappa)
    return RunConfig(n=args.n, w=w, k=args.k, kappa=kappa, delta=args.delta,
                     epsilon=args.epsilon, coloring_spec=args.coloring,
                     output_path=str(args.out) if args.out else None, mode=mode,
                     c1_variant=args.c1_variant, max_witnesses=args.max_witnesses)


def _write(report: dict, args: argparse.Namespace) -> None:
    if args.out is not None:
        emit_report(report, args.out,
                    csv_dir=args.out.parent if args.format == "csv" else None)
        log.info("report written to %s", args.out)
    else:
        sys.stdout.write(json.dumps(jsonable(report), indent=2, sort_keys=True) + "\n")
        if args.format == "csv":
            write_csv_tables(report, Path.cwd())


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        cfg.validate()
        if args.command == "search":
            coloring = make_coloring(cfg.coloring_spec, Domain.primes(cfg.n), cfg.k)
            report = search_report(cfg, coloring, timings=args.timings)
            status = EXIT_OK if report["witness_summary"]["count"] > 0 else EXIT_NONE
        elif args.command == "conjecture":
            coloring = make_coloring(cfg.coloring_spec, Domain.primes(cfg.n), cfg.k)
            report = conjecture_report(cfg, coloring, timings=args.timings)
            status = EXIT_OK if report["quadruple_count"] > 0 else EXIT_NONE
        else:
            result = run_pipeline(cfg)
            report = pipeline_report(result, timings=args.timings)
            if args.command == "verify-lemmas":
                report["witnesses"] = []
                names = {r["name"] for r in report["lemma_reports"]}
                status = EXIT_OK if REQUIRED_LEMMAS <= names else EXIT_ERROR
            else:
                status = EXIT_OK if result.lifted_count > 0 else EXIT_NONE
        _write(report, args)
        return status
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        log.error("%s", exc)
        if args.verbose:
            raise
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
