"""Command-line entry point: ``distanova {scan, test, simulate, validate}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical degeneracy
under ``--strict``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .dbf import dbf_permutation_test, dbf_test
from .distances import (
    FUNCTIONAL_MEASURES,
    GENETIC_MEASURES,
    CurveSet,
    canonical_measure,
    pairwise_matrix,
)
from .errors import (
    DataFormatError,
    DegenerateDistributionError,
    DegenerateWithinError,
    DistanovaError,
    PoleError,
    SingularMetricError,
)
from .gwas import EngineConfig, export, load_genotypes, load_phenotype, scan, write_summary
from .permutation import PermutationPlan
from .simulate import (
    SimConfig,
    compare_classical,
    compare_permutation,
    ks_experiment,
    write_comparison_csv,
    write_ks_csv,
)
from .validation import run_all

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DEGENERATE = 0, 1, 2, 3
# ``validate`` reports failed checks with the generic failure status.
EXIT_CHECK_FAILED = 1

log = logging.getLogger("distanova")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default; usage errors are 1 here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _measure_list(text: str) -> list[str]:
    try:
        return [canonical_measure(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="distanova", description="Distance-based F tests with a permutation-free null.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("scan", help="sliding-window genome scan")
    p.add_argument("--geno", required=True, type=Path, help="genotype TSV")
    p.add_argument("--pheno", required=True, type=Path, help="phenotype TSV")
    p.add_argument("--width", type=int, default=5)
    p.add_argument("--measures", type=_measure_list, default=list(GENETIC_MEASURES))
    p.add_argument("--engine", choices=("approx", "monte_carlo"), default="approx")
    p.add_argument("--n-pi", type=int, default=10_000, help="permutations per window for the monte_carlo engine")
    p.add_argument("--skew-backend", choices=("closed_form", "monte_carlo"), default="closed_form")
    p.add_argument("--skew-n-perm", type=int, default=10_000)
    p.add_argument(
        "--refine-below",
        type=float,
        default=1e-5,
        help="with the monte_carlo skew backend, refit windows below this p with --refine-n-perm draws",
    )
    p.add_argument("--refine-n-perm", type=int, default=100_000)
    p.add_argument("--missing-policy", choices=("mode-impute", "drop-subject"), default="mode-impute")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--strict", action="store_true", help="fail on degenerate windows instead of flagging them")
    p.add_argument("--out", required=True, type=Path, help="output directory")

    p = sub.add_parser("test", help="DBF test on one dataset")
    p.add_argument(
        "--data",
        required=True,
        type=Path,
        help="TSV: header 'subject<TAB>group<TAB>...' then one row per subject. "
        "Feature columns hold vector values, genotype counts, curve values on the grid given by the "
        "header, or a full distance matrix with --measure precomputed.",
    )
    p.add_argument("--measure", default="euclidean")
    p.add_argument("--backend", choices=("closed_form", "monte_carlo"), default="closed_form")
    p.add_argument("--permutations", type=int, default=0, help="also compute a Monte Carlo permutation p-value")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict", action="store_true")

    p = sub.add_parser("simulate", help="compare approximate and reference p-values on simulated nulls")
    p.add_argument(
        "--scenario",
        required=True,
        choices=("univariate_normal", "mvn_wishart", "vector_normal", "snp_resample", "bezier_curves"),
    )
    p.add_argument("--experiment", choices=("auto", "ks"), default="auto",
                   help="'ks' runs the CDF-distance experiment on univariate_normal data")
    p.add_argument("--runs", type=int, default=200)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--groups", type=int, default=2)
    p.add_argument("--p", type=int, default=1, help="dimension or SNP count")
    p.add_argument("--measure", default=None)
    p.add_argument("--n-perm", type=int, default=None, help="Monte Carlo permutations (default: exact enumeration)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, default=None, help="CSV with per-run results")

    p = sub.add_parser("validate", help="run the oracle-equivalence checks")
    p.add_argument("--full", action="store_true", help="use the full randomized sample sizes")
    return parser


def _read_table(path: Path) -> tuple[list[str], list[str], list[str], np.ndarray]:
    try:
        lines = [ln.rstrip("\r") for ln in path.read_text(encoding="utf-8").split("\n") if ln.strip()]
    except OSError as exc:
        raise DataFormatError(f"cannot read file: {exc}", path=str(path)) from exc
    if not lines:
        raise DataFormatError("empty data file", path=str(path), line=1)
    header = lines[0].split("\t")
    if header[:2] != ["subject", "group"] or len(header) < 3:
        raise DataFormatError("header must be 'subject<TAB>group<TAB>...'", path=str(path), line=1)
    subjects, groups, rows = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(header):
            raise DataFormatError(f"expected {len(header)} fields, found {len(fields)}", path=str(path), line=lineno)
        try:
            rows.append([float(t) for t in fields[2:]])
        except ValueError:
            raise DataFormatError("non-numeric value", path=str(path), line=lineno) from None
        subjects.append(fields[0])
        groups.append(fields[1])
    return header[2:], subjects, groups, np.array(rows, dtype=np.float64)


def _cmd_test(args) -> int:
    columns, _, groups, values = _read_table(args.data)
    if args.measure == "precomputed":
        delta = values
    else:
        measure = canonical_measure(args.measure)
        if measure in FUNCTIONAL_MEASURES:
            try:
                grid = np.array([float(c) for c in columns])
            except ValueError:
                raise DataFormatError("curve data needs numeric grid points in the header", path=str(args.data), line=1) from None
            data = CurveSet(grid, values)
        elif measure in GENETIC_MEASURES:
            data = values.astype(np.int8)
        else:
            data = values
        delta = pairwise_matrix(data, measure)
    result = dbf_test(delta, groups, backend=args.backend, strict=args.strict)
    out = {
        "statistic": result.statistic,
        "pvalue": result.pvalue,
        "flag": result.flag,
        "total": result.decomposition.total,
        "between": result.decomposition.between,
        "within": result.decomposition.within,
    }
    if result.moments is not None:
        out.update(mu=result.moments.mu, sigma2=result.moments.sigma2, gamma=result.moments.gamma)
    if args.permutations:
        plan = PermutationPlan(n_pi=args.permutations, seed=args.seed)
        out["permutation_pvalue"] = dbf_permutation_test(delta, groups, plan, strict=args.strict).pvalue
    print(json.dumps({k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in out.items()}, indent=2))
    return EXIT_OK


def _cmd_scan(args) -> int:
    geno = load_genotypes(args.geno)
    pheno = load_phenotype(args.pheno)
    engine = EngineConfig(
        kind=args.engine,
        skew_backend=args.skew_backend,
        skew_n_perm=args.skew_n_perm,
        refine_below=args.refine_below,
        refine_n_perm=args.refine_n_perm,
        n_pi=args.n_pi,
    )
    result = scan(
        geno,
        pheno,
        args.width,
        args.measures,
        engine,
        args.missing_policy,
        seed=args.seed,
        threads=args.threads,
        strict=args.strict,
    )
    args.out.mkdir(parents=True, exist_ok=True)
    export(result, args.out / "windows.tsv", "tsv")
    export(result, args.out / "manhattan.csv", "manhattan_csv")
    write_summary(result, args.out / "summary.json")
    log.info("scanned %d windows into %s", result.n_windows, args.out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    config = SimConfig(
        scenario=args.scenario,
        n=args.n,
        g=args.groups,
        p=args.p,
        runs=args.runs,
        seed=args.seed,
        measure=args.measure,
        n_perm=args.n_perm,
        workers=args.workers,
    )
    if args.experiment == "ks":
        result = ks_experiment(config)
        median = {b: float(np.median(v)) for b, v in result.ks_values.items()}
        print(json.dumps({"ks_approx": result.ks_approx, "median_ks_by_budget": median}, indent=2))
        if args.out:
            write_ks_csv(result, args.out)
        return EXIT_OK
    if args.scenario in ("univariate_normal", "mvn_wishart"):
        result = compare_classical(config)
    else:
        result = compare_permutation(config)
    summary = {"runs": len(result.p_approx), "mean_abs_diff": result.mean_abs_diff, "sd_abs_diff": result.sd_abs_diff}
    print(json.dumps(summary, indent=2))
    if args.out:
        write_comparison_csv(result, args.out)
    return EXIT_OK


def _cmd_validate(args) -> int:
    results = run_all(quick=not args.full)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    commands = {"scan": _cmd_scan, "test": _cmd_test, "simulate": _cmd_simulate, "validate": _cmd_validate}
    try:
        return commands[args.command](args)
    except (DegenerateWithinError, DegenerateDistributionError, SingularMetricError, PoleError) as exc:
        print(f"distanova: numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except DistanovaError as exc:
        print(f"distanova: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"distanova: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
