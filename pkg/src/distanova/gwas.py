"""Genotype and phenotype files, sliding-window scans and scan exports.

A scan slides a window of ``width`` adjacent SNPs along each chromosome and
runs one DBF test per window and genetic distance. Subjects sharing a
genotype pattern within a window give identical rows of every distance
matrix, so the work for a window is done on its distinct patterns weighted by
their multiplicities. This is exact and, for narrow windows, much cheaper than
working with all subjects.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .core import (
    WITHIN_ZERO_RTOL,
    GroupAssignment,
    gower_center_weighted,
    group_projector,
    pattern_projector,
    variance_decomposition_weighted,
)
from .dbf import POINT_MASS, WITHIN_ZERO
from .distances import GENETIC_MEASURES, canonical_measure, genetic_matrices
from .errors import DataFormatError, DegenerateDistributionError, DegenerateWithinError
from .moments import (
    MIN_APPROX_N,
    ExactMoments,
    MonteCarloConfig,
    VARIANCE_ZERO_RTOL,
    TraceQuantities,
    mean_variance,
    monte_carlo_skewness,
    trace_quantities,
)
from .pearson3 import DbfNull, dbf_pvalue
from .permutation import PermutationPlan, perm_F_values, perm_pvalue
from .simulate import derive_seed

log = logging.getLogger(__name__)

MISSING = -1
MISSING_TOKEN = "NA"
SIGNIFICANCE = 1e-7
TOO_FEW = "too_few_subjects"
P_FLOOR = float(np.finfo(np.float64).tiny)
# Windows handed to a worker at a time.
BATCH = 256

MissingPolicy = Literal["mode-impute", "drop-subject"]


@dataclass(frozen=True)
class GenotypeMatrix:
    """Minor-allele counts (``MISSING`` for unknown) with subject and SNP metadata.

    SNPs are in genome order: all SNPs of one chromosome are contiguous and
    keep their file order within it.
    """

    subjects: tuple[str, ...]
    snp_ids: tuple[str, ...]
    chromosomes: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int8)
        if counts.shape != (len(self.subjects), len(self.snp_ids)):
            raise DataFormatError(
                f"counts of shape {counts.shape} do not match {len(self.subjects)} subjects x {len(self.snp_ids)} SNPs"
            )
        if len(self.chromosomes) != len(self.snp_ids):
            raise DataFormatError("one chromosome per SNP is required")
        if len(set(self.subjects)) != len(self.subjects):
            raise DataFormatError("duplicate subject ids")
        if not np.all(np.isin(counts, (MISSING, 0, 1, 2))):
            raise DataFormatError("genotype counts must be 0, 1, 2 or missing")
        seen: set[str] = set()
        for i, chrom in enumerate(self.chromosomes):
            if i and chrom != self.chromosomes[i - 1]:
                if chrom in seen:
                    raise DataFormatError(f"SNPs of chromosome {chrom!r} are not contiguous")
            seen.add(chrom)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def n_subjects(self) -> int:
        return len(self.subjects)

    @property
    def n_snps(self) -> int:
        return len(self.snp_ids)

    def chromosome_spans(self) -> list[tuple[str, int, int]]:
        """``(chromosome, first column, column count)`` in genome order."""
        spans: list[tuple[str, int, int]] = []
        for i, chrom in enumerate(self.chromosomes):
            if spans and spans[-1][0] == chrom:
                name, first, count = spans[-1]
                spans[-1] = (name, first, count + 1)
            else:
                spans.append((chrom, i, 1))
        return spans


@dataclass(frozen=True)
class Phenotype:
    """Case (1) / control (0) status per subject id."""

    subjects: tuple[str, ...]
    status: np.ndarray

    def __post_init__(self) -> None:
        status = np.asarray(self.status, dtype=np.int8)
        if status.shape != (len(self.subjects),):
            raise DataFormatError("one status per subject is required")
        if len(set(self.subjects)) != len(self.subjects):
            raise DataFormatError("duplicate subject ids in phenotype")
        if not np.all(np.isin(status, (0, 1))):
            raise DataFormatError("status must be 0 or 1")
        if np.unique(status).size < 2:
            raise DataFormatError("phenotype needs both cases and controls")
        object.__setattr__(self, "status", status)

    def shuffled(self, seed: int) -> "Phenotype":
        """The same statuses randomly reassigned to subjects."""
        rng = np.random.default_rng(seed)
        return Phenotype(self.subjects, rng.permutation(self.status))


@dataclass(frozen=True)
class Window:
    """``width`` adjacent SNPs of one chromosome."""

    chromosome: str
    start: int
    column: int
    snp_ids: tuple[str, ...]


@dataclass(frozen=True)
class EngineConfig:
    """How window p-values are obtained.

    ``approx`` fits the moment-matched null; its skewness comes from
    ``skew_backend``. With the ``monte_carlo`` skewness backend, windows whose
    p-value falls below ``refine_below`` are refitted with ``refine_n_perm``
    permutations. ``monte_carlo`` uses ``n_pi`` Monte Carlo permutations.
    """

    kind: Literal["approx", "monte_carlo"] = "approx"
    skew_backend: Literal["closed_form", "monte_carlo"] = "closed_form"
    skew_n_perm: int = 10_000
    refine_below: float | None = 1e-5
    refine_n_perm: int = 100_000
    n_pi: int = 10_000


@dataclass(frozen=True)
class WindowResult:
    window: Window
    measure: str
    statistic: float
    pvalue: float
    flag: str = ""
    n_dropped: int = 0

    @property
    def neg_log10_p(self) -> float:
        if not math.isfinite(self.pvalue):
            return math.nan
        return math.inf if self.pvalue == 0 else -math.log10(self.pvalue)


@dataclass
class ScanResult:
    """Per-window results in genome order, measures in the requested order within a window."""

    rows: list[WindowResult]
    measures: tuple[str, ...]
    width: int
    threshold: float = SIGNIFICANCE
    n_windows: int = 0

    def pvalues(self, measure: str) -> np.ndarray:
        measure = canonical_measure(measure)
        return np.array([r.pvalue for r in self.rows if r.measure == measure])

    def summary(self) -> dict:
        out: dict = {"windows": self.n_windows, "width": self.width, "threshold": self.threshold, "measures": {}}
        for m in self.measures:
            rows = [r for r in self.rows if r.measure == m]
            p = np.array([r.pvalue for r in rows])
            finite = p[np.isfinite(p)]
            flags: dict[str, int] = {}
            for r in rows:
                if r.flag:
                    flags[r.flag] = flags.get(r.flag, 0) + 1
            best = int(np.argmin(np.where(np.isfinite(p), p, np.inf))) if finite.size else None
            out["measures"][m] = {
                "tested": int(finite.size),
                "significant": int(np.count_nonzero(finite < self.threshold)),
                "min_p": float(finite.min()) if finite.size else None,
                "top_window": None
                if best is None
                else {"chromosome": rows[best].window.chromosome, "start_snp": rows[best].window.snp_ids[0]},
                "flags": flags,
            }
        return out


# ---------------------------------------------------------------- file formats


def _read_lines(path: Path) -> list[str]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"cannot read file: {exc}", path=str(path)) from exc
    return text.split("\n")


def load_genotypes(path: str | Path) -> GenotypeMatrix:
    """Read a genotype TSV.

    The header is ``subject`` followed by one ``chromosome:snp_id`` per SNP in
    genome order; each further line is a subject id followed by tokens from
    ``0``, ``1``, ``2`` and ``NA``.
    """
    path = Path(path)
    lines = _read_lines(path)
    if not lines or not lines[0].strip():
        raise DataFormatError("empty genotype file", path=str(path), line=1)
    header = lines[0].rstrip("\r").split("\t")
    if header[0] != "subject":
        raise DataFormatError("header must start with 'subject'", path=str(path), line=1)
    chromosomes, snp_ids = [], []
    for token in header[1:]:
        chrom, sep, snp = token.partition(":")
        if not sep or not chrom or not snp:
            raise DataFormatError(f"SNP column {token!r} is not 'chromosome:snp_id'", path=str(path), line=1)
        chromosomes.append(chrom)
        snp_ids.append(snp)
    lookup = {"0": 0, "1": 1, "2": 2, MISSING_TOKEN: MISSING}
    subjects, rows, seen = [], [], {}
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.rstrip("\r")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != len(header):
            raise DataFormatError(f"expected {len(header)} fields, found {len(fields)}", path=str(path), line=lineno)
        sid = fields[0]
        if sid in seen:
            raise DataFormatError(f"duplicate subject id {sid!r} (first on line {seen[sid]})", path=str(path), line=lineno)
        seen[sid] = lineno
        try:
            rows.append([lookup[t] for t in fields[1:]])
        except KeyError as exc:
            raise DataFormatError(f"invalid genotype token {exc.args[0]!r}", path=str(path), line=lineno) from None
        subjects.append(sid)
    counts = np.array(rows, dtype=np.int8).reshape(len(subjects), len(snp_ids))
    try:
        return GenotypeMatrix(tuple(subjects), tuple(snp_ids), tuple(chromosomes), counts)
    except DataFormatError as exc:
        raise DataFormatError(str(exc), path=str(path)) from None


def load_phenotype(path: str | Path) -> Phenotype:
    """Read a phenotype TSV with header ``subject<TAB>status`` and statuses 0/1."""
    path = Path(path)
    lines = _read_lines(path)
    if not lines or lines[0].rstrip("\r").split("\t") != ["subject", "status"]:
        raise DataFormatError("header must be 'subject<TAB>status'", path=str(path), line=1)
    subjects, status, seen = [], [], set()
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.rstrip("\r")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise DataFormatError(f"expected 2 fields, found {len(fields)}", path=str(path), line=lineno)
        if fields[1] not in ("0", "1"):
            raise DataFormatError(f"status must be 0 or 1, got {fields[1]!r}", path=str(path), line=lineno)
        if fields[0] in seen:
            raise DataFormatError(f"duplicate subject id {fields[0]!r}", path=str(path), line=lineno)
        seen.add(fields[0])
        subjects.append(fields[0])
        status.append(int(fields[1]))
    try:
        return Phenotype(tuple(subjects), np.array(status, dtype=np.int8))
    except DataFormatError as exc:
        raise DataFormatError(str(exc), path=str(path)) from None


def write_genotypes(geno: GenotypeMatrix, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tokens = np.array(["NA", "0", "1", "2"])
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(["subject"] + [f"{c}:{s}" for c, s in zip(geno.chromosomes, geno.snp_ids)]) + "\n")
        for sid, row in zip(geno.subjects, geno.counts):
            fh.write(sid + "\t" + "\t".join(tokens[row.astype(int) + 1]) + "\n")
    return path


def write_phenotype(pheno: Phenotype, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("subject\tstatus\n")
        for sid, s in zip(pheno.subjects, pheno.status):
            fh.write(f"{sid}\t{int(s)}\n")
    return path


def align(geno: GenotypeMatrix, pheno: Phenotype) -> tuple[np.ndarray, np.ndarray]:
    """Row indices into ``geno`` and statuses for the phenotyped subjects, in genotype order.

    Raises:
        DataFormatError: naming the first phenotype id missing from the genotypes.
    """
    index = {sid: i for i, sid in enumerate(geno.subjects)}
    missing = [sid for sid in pheno.subjects if sid not in index]
    if missing:
        raise DataFormatError(f"phenotype subject {missing[0]!r} is absent from the genotype file")
    status = dict(zip(pheno.subjects, pheno.status.tolist()))
    rows = np.array(sorted(index[s] for s in pheno.subjects), dtype=np.intp)
    labels = np.array([status[geno.subjects[i]] for i in rows], dtype=np.intp)
    return rows, labels


# ---------------------------------------------------------------- windows


def windows(geno: GenotypeMatrix, width: int) -> list[Window]:
    """All stride-1 windows of ``width`` SNPs that stay within one chromosome."""
    if width < 1:
        raise ValueError("window width must be at least 1")
    out = []
    for chrom, first, count in geno.chromosome_spans():
        if count < width:
            log.warning("chromosome %s has %d SNPs, fewer than the window width %d", chrom, count, width)
            continue
        for start in range(count - width + 1):
            col = first + start
            out.append(Window(chrom, start, col, geno.snp_ids[col : col + width]))
    return out


def impute_mode(block: np.ndarray) -> np.ndarray:
    """Replace missing entries by the most frequent observed count of their SNP (ties to the smaller count)."""
    out = block.copy()
    for j in np.flatnonzero(np.any(block == MISSING, axis=0)):
        col = block[:, j]
        observed = col[col != MISSING]
        mode = int(np.argmax(np.bincount(observed, minlength=3))) if observed.size else 0
        out[col == MISSING, j] = mode
    return out


# ---------------------------------------------------------------- per-window testing


@dataclass
class _Context:
    counts: np.ndarray
    labels: np.ndarray
    width: int
    measures: tuple[str, ...]
    engine: EngineConfig
    missing_policy: str
    seed: int
    strict: bool
    exact: ExactMoments | None = None
    h_traces: TraceQuantities | None = None
    cache: dict = field(default_factory=dict)

    def prepared(self, labels: np.ndarray) -> tuple[ExactMoments, TraceQuantities, np.ndarray]:
        key = labels.tobytes()
        if key not in self.cache:
            h = group_projector(GroupAssignment.from_labels(labels))
            tq = trace_quantities(h, np.zeros_like(h))
            self.cache = {key: (ExactMoments(h), tq, h)}
        return self.cache[key]


_CTX: _Context | None = None


def _init_worker(ctx: _Context) -> None:
    global _CTX
    _CTX = ctx


def window_seed(seed: int, chromosome: str, start: int) -> int:
    """Seed for one window, fixed by the global seed and the window's genome position."""
    return derive_seed(seed, zlib.crc32(chromosome.encode("utf-8")), start)


def _test_window(ctx: _Context, win: Window) -> list[WindowResult]:
    block = np.asarray(ctx.counts[:, win.column : win.column + ctx.width])
    labels = ctx.labels
    dropped = 0
    if np.any(block == MISSING):
        if ctx.missing_policy == "drop-subject":
            keep = ~np.any(block == MISSING, axis=1)
            dropped = int(np.count_nonzero(~keep))
            block, labels = block[keep], labels[keep]
        else:
            block = impute_mode(block)
    counts_per_class = np.bincount(labels, minlength=2)
    if labels.size < MIN_APPROX_N or np.any(counts_per_class < 2):
        return [WindowResult(win, m, math.nan, math.nan, TOO_FEW, dropped) for m in ctx.measures]

    # Distinct genotype patterns and their multiplicities per class.
    codes = block.astype(np.int64) @ (3 ** np.arange(block.shape[1], dtype=np.int64))
    uniq, first, inv = np.unique(codes, return_index=True, return_inverse=True)
    weights = np.bincount(inv).astype(np.float64)
    per_class = np.zeros((uniq.size, 2))
    np.add.at(per_class, (inv, labels), 1.0)
    proj = pattern_projector(per_class)
    mats = genetic_matrices(block[first], ctx.measures, weights)
    exact, h_tq, h = ctx.prepared(labels)
    n = labels.size
    seed = window_seed(ctx.seed, win.chromosome, win.start)

    out = []
    for measure in ctx.measures:
        gt = gower_center_weighted(mats[measure], weights)
        v = variance_decomposition_weighted(gt, weights, proj)
        stat, p, flag = _window_pvalue(ctx, v, gt, weights, inv, labels, exact, h_tq, h, n, seed)
        out.append(WindowResult(win, measure, stat, p, flag, dropped))
    return out


def _degenerate(ctx: _Context, kind: str, message: str) -> None:
    if ctx.strict:
        exc = DegenerateWithinError if kind == WITHIN_ZERO else DegenerateDistributionError
        raise exc(message)


def _window_pvalue(ctx, v, gt, weights, inv, labels, exact, h_tq, h, n, seed) -> tuple[float, float, str]:
    if v.total <= np.finfo(float).tiny:
        _degenerate(ctx, POINT_MASS, "all subjects share one genotype pattern")
        return math.nan, math.nan, POINT_MASS
    if abs(v.within) <= WITHIN_ZERO_RTOL * abs(v.total):
        _degenerate(ctx, WITHIN_ZERO, "within-group variability is zero")
        return math.inf, 0.0, WITHIN_ZERO
    f = v.between / v.within

    if ctx.engine.kind == "monte_carlo":
        full = gt[np.ix_(inv, inv)]
        plan = PermutationPlan(n_pi=ctx.engine.n_pi, seed=seed)
        return f, perm_pvalue(f, perm_F_values(full, GroupAssignment.from_labels(labels), plan)), ""

    diag = np.diag(gt)
    tq = replace(h_tq, b1=v.total, b2=float(weights @ (gt * gt) @ weights), b3=float(weights @ (diag * diag)))
    mu, sigma2 = mean_variance(tq, n, min_n=MIN_APPROX_N)
    if sigma2 <= VARIANCE_ZERO_RTOL * max(mu * mu, v.total * v.total, 1e-300):
        _degenerate(ctx, POINT_MASS, "permutation variance is zero")
        return f, math.nan, POINT_MASS

    def fitted(gamma: float) -> float:
        # An underflowed tail is reported as the smallest normal double, keeping p > 0.
        return max(float(dbf_pvalue(f, DbfNull(mu, math.sqrt(sigma2), gamma, v.total))), P_FLOOR)

    if ctx.engine.skew_backend == "closed_form":
        return f, fitted(exact.central_weighted(gt, weights, 3) / sigma2**1.5), ""
    full = gt[np.ix_(inv, inv)]
    gamma = monte_carlo_skewness(h, full, MonteCarloConfig(ctx.engine.skew_n_perm, seed)).gamma
    p = fitted(gamma)
    if ctx.engine.refine_below is not None and p < ctx.engine.refine_below:
        gamma = monte_carlo_skewness(h, full, MonteCarloConfig(ctx.engine.refine_n_perm, seed)).gamma
        p = fitted(gamma)
    return f, p, ""


def _run_batch(batch: list[Window]) -> list[WindowResult]:
    assert _CTX is not None
    with threadpool_limits(limits=1):
        return [row for win in batch for row in _test_window(_CTX, win)]


def scan(
    geno: GenotypeMatrix,
    pheno: Phenotype,
    width: int = 5,
    measures: Sequence[str] = GENETIC_MEASURES,
    engine: EngineConfig = EngineConfig(),
    missing_policy: MissingPolicy = "mode-impute",
    *,
    seed: int = 0,
    threads: int = 1,
    strict: bool = False,
    window_list: Iterable[Window] | None = None,
) -> ScanResult:
    """Test every window for a case/control difference under each genetic distance.

    Windows are processed in batches by ``threads`` worker processes; every
    window's computation depends only on its own data and seed, so the result
    is identical for any thread count.

    Args:
        strict: raise on degenerate windows instead of flagging them.
        window_list: test only these windows (default: all windows of ``width``).
    """
    if missing_policy not in ("mode-impute", "drop-subject"):
        raise ValueError(f"unknown missing policy {missing_policy!r}")
    measures = tuple(dict.fromkeys(canonical_measure(m) for m in measures))
    bad = [m for m in measures if m not in GENETIC_MEASURES]
    if bad:
        raise ValueError(f"not genetic measures: {', '.join(bad)}")
    rows, labels = align(geno, pheno)
    counts = np.ascontiguousarray(geno.counts[rows])
    wins = list(window_list) if window_list is not None else windows(geno, width)
    ctx = _Context(counts, labels, width, measures, engine, missing_policy, seed, strict)
    batches = [wins[i : i + BATCH] for i in range(0, len(wins), BATCH)]
    if threads > 1 and len(batches) > 1:
        with ProcessPoolExecutor(max_workers=threads, initializer=_init_worker, initargs=(ctx,)) as pool:
            parts = list(pool.map(_run_batch, batches))
    else:
        _init_worker(ctx)
        parts = [_run_batch(b) for b in batches]
    results = [row for part in parts for row in part]
    return ScanResult(results, measures, width, n_windows=len(wins))


# ---------------------------------------------------------------- export


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "NA"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def export(result: ScanResult, path: str | Path, fmt: Literal["tsv", "manhattan_csv"] = "tsv") -> Path:
    """Write scan results.

    ``tsv`` has one row per window and measure. ``manhattan_csv`` has one row per
    tested window and measure with its cumulative window index, ``-log10 p``, a
    chromosome parity column for alternating colours and the threshold line.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "tsv":
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write("chromosome\tstart_snp\twindow_start\tmeasure\tstatistic\tpvalue\tneg_log10_p\tflag\tn_dropped\n")
            for r in result.rows:
                fh.write(
                    f"{r.window.chromosome}\t{r.window.snp_ids[0]}\t{r.window.start}\t{r.measure}\t"
                    f"{_fmt(r.statistic)}\t{_fmt(r.pvalue)}\t{_fmt(r.neg_log10_p)}\t{r.flag or '.'}\t{r.n_dropped}\n"
                )
        return path
    if fmt == "manhattan_csv":
        threshold = -math.log10(result.threshold)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["measure", "x", "chromosome", "parity", "start_snp", "neg_log10_p", "threshold"])
            chrom_order: dict[str, int] = {}
            x_of: dict[tuple[str, int], int] = {}
            for r in result.rows:
                key = (r.window.chromosome, r.window.start)
                if key not in x_of:
                    x_of[key] = len(x_of)
                chrom_order.setdefault(r.window.chromosome, len(chrom_order))
                if not math.isfinite(r.pvalue):
                    continue
                writer.writerow(
                    [
                        r.measure,
                        x_of[key],
                        r.window.chromosome,
                        chrom_order[r.window.chromosome] % 2,
                        r.window.snp_ids[0],
                        _fmt(r.neg_log10_p),
                        _fmt(threshold),
                    ]
                )
        return path
    raise ValueError(f"unknown export format {fmt!r}")


def write_summary(result: ScanResult, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(result.summary(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------- synthetic cohorts


def synthetic_cohort(
    n_subjects: int = 254,
    n_cases: int = 101,
    n_snps: int = 2000,
    n_chromosomes: int = 4,
    *,
    signal_start: int | None = None,
    signal_width: int = 5,
    case_shift: float = 0.25,
    missing_rate: float = 0.0,
    seed: int = 0,
) -> tuple[GenotypeMatrix, Phenotype]:
    """A cohort under Hardy-Weinberg with an optional block of case-enriched SNPs.

    Allele frequencies are ``U(0.05, 0.5)``. When ``signal_start`` is given, the
    cases' minor-allele frequency at the ``signal_width`` SNPs starting at that
    global column is raised by ``case_shift``. Chromosomes get equal shares of
    the SNPs.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 104729]))
    maf = rng.uniform(0.05, 0.5, size=n_snps)
    status = np.zeros(n_subjects, dtype=np.int8)
    status[rng.choice(n_subjects, size=n_cases, replace=False)] = 1
    freq = np.broadcast_to(maf, (n_subjects, n_snps)).copy()
    if signal_start is not None:
        cols = slice(signal_start, signal_start + signal_width)
        freq[status == 1, cols] = np.minimum(freq[status == 1, cols] + case_shift, 0.95)
    counts = rng.binomial(2, freq).astype(np.int8)
    if missing_rate > 0:
        counts[rng.random(counts.shape) < missing_rate] = MISSING
    sizes = np.full(n_chromosomes, n_snps // n_chromosomes)
    sizes[: n_snps % n_chromosomes] += 1
    chromosomes = tuple(str(c + 1) for c, size in enumerate(sizes) for _ in range(size))
    snp_ids = tuple(f"rs{100000 + j}" for j in range(n_snps))
    subjects = tuple(f"S{i:04d}" for i in range(n_subjects))
    return GenotypeMatrix(subjects, snp_ids, chromosomes, counts), Phenotype(subjects, status)
