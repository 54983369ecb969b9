import csv
import json
import math

import numpy as np
import pytest

from distanova.dbf import dbf_test
from distanova.distances import GENETIC_MEASURES, pairwise_matrix
from distanova.errors import DataFormatError
from distanova.gwas import (
    MISSING,
    TOO_FEW,
    EngineConfig,
    GenotypeMatrix,
    Phenotype,
    align,
    export,
    impute_mode,
    load_genotypes,
    load_phenotype,
    scan,
    synthetic_cohort,
    windows,
    write_genotypes,
    write_phenotype,
    write_summary,
)


def make_geno(chrom_sizes, n=10, seed=0):
    rng = np.random.default_rng(seed)
    m = sum(chrom_sizes)
    chromosomes = tuple(str(c + 1) for c, size in enumerate(chrom_sizes) for _ in range(size))
    return GenotypeMatrix(
        tuple(f"s{i}" for i in range(n)),
        tuple(f"rs{j}" for j in range(m)),
        chromosomes,
        rng.integers(0, 3, size=(n, m)).astype(np.int8),
    )


@pytest.fixture(scope="module")
def cohort():
    return synthetic_cohort(n_subjects=120, n_cases=50, n_snps=80, n_chromosomes=2, signal_start=30, seed=1)


class TestParsing:
    def test_round_trip_with_missing(self, tmp_path):
        geno = make_geno([4, 3], n=5)
        counts = geno.counts.copy()
        counts[1, 2] = MISSING
        geno = GenotypeMatrix(geno.subjects, geno.snp_ids, geno.chromosomes, counts)
        path = write_genotypes(geno, tmp_path / "g.tsv")
        assert "\tNA" in path.read_text()
        back = load_genotypes(path)
        np.testing.assert_array_equal(back.counts, counts)
        assert back.chromosomes == geno.chromosomes
        pheno = Phenotype(geno.subjects, np.array([0, 1, 0, 1, 1], dtype=np.int8))
        again = load_phenotype(write_phenotype(pheno, tmp_path / "p.tsv"))
        np.testing.assert_array_equal(again.status, pheno.status)

    def test_bad_token_reports_line(self, tmp_path):
        path = tmp_path / "g.tsv"
        path.write_text("subject\t1:rs1\t1:rs2\na\t0\t1\nb\t3\t1\n")
        with pytest.raises(DataFormatError, match=r"g\.tsv:3"):
            load_genotypes(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "g.tsv"
        path.write_text("id\t1:rs1\na\t0\n")
        with pytest.raises(DataFormatError, match=":1"):
            load_genotypes(path)

    def test_field_count(self, tmp_path):
        path = tmp_path / "p.tsv"
        path.write_text("subject\tstatus\na\t0\nb\n")
        with pytest.raises(DataFormatError, match=":3"):
            load_phenotype(path)

    def test_missing_phenotype_subject_named(self):
        geno = make_geno([5], n=4)
        pheno = Phenotype(("s0", "s1", "ghost"), np.array([0, 1, 1], dtype=np.int8))
        with pytest.raises(DataFormatError, match="ghost"):
            align(geno, pheno)

    def test_align_keeps_genotype_order(self):
        geno = make_geno([5], n=4)
        rows, labels = align(geno, Phenotype(("s3", "s0", "s1"), np.array([1, 0, 1], dtype=np.int8)))
        np.testing.assert_array_equal(rows, [0, 1, 3])
        np.testing.assert_array_equal(labels, [0, 1, 1])

    def test_phenotype_needs_both_classes(self):
        with pytest.raises(DataFormatError):
            Phenotype(("a", "b"), np.array([1, 1], dtype=np.int8))

    def test_noncontiguous_chromosomes(self):
        with pytest.raises(DataFormatError):
            GenotypeMatrix(("a",), ("x", "y", "z"), ("1", "2", "1"), np.zeros((1, 3), dtype=np.int8))


class TestWindows:
    @pytest.mark.parametrize("sizes, width, expected", [([6], 5, 2), ([5], 5, 1), ([10, 7], 5, 9), ([3, 8], 5, 4)])
    def test_counts(self, sizes, width, expected):
        assert len(windows(make_geno(sizes), width)) == expected

    def test_short_chromosome_warns(self, caplog):
        wins = windows(make_geno([3, 6]), 5)
        assert {w.chromosome for w in wins} == {"2"}
        assert "fewer than the window width" in caplog.text

    def test_stay_within_chromosome(self):
        geno = make_geno([10, 7])
        for w in windows(geno, 5):
            assert {geno.chromosomes[w.column + k] for k in range(5)} == {w.chromosome}
            assert w.snp_ids == geno.snp_ids[w.column : w.column + 5]

    def test_impute_mode(self):
        block = np.array([[0, 2], [MISSING, 2], [0, MISSING], [1, 1]], dtype=np.int8)
        np.testing.assert_array_equal(impute_mode(block), [[0, 2], [0, 2], [0, 2], [1, 1]])


class TestScan:
    def test_single_window_equals_direct_test(self, cohort):
        geno, pheno = cohort
        win = windows(geno, 5)[7]
        result = scan(geno, pheno, measures=GENETIC_MEASURES, window_list=[win])
        block = geno.counts[:, win.column : win.column + 5]
        for row in result.rows:
            direct = dbf_test(pairwise_matrix(block, row.measure), pheno.status)
            assert row.statistic == pytest.approx(direct.statistic, rel=1e-12)
            assert row.pvalue == pytest.approx(direct.pvalue, rel=1e-9)

    def test_genome_order_and_row_count(self, cohort):
        geno, pheno = cohort
        result = scan(geno, pheno, measures=("ibs", "sm"))
        assert len(result.rows) == result.n_windows * 2 == len(windows(geno, 5)) * 2
        cols = [r.window.column for r in result.rows]
        assert cols == sorted(cols)

    def test_planted_signal_ranks_first(self, cohort):
        geno, pheno = cohort
        result = scan(geno, pheno, measures=("ibs", "sokal_sneath"))
        for m in ("ibs", "sokal_sneath"):
            rows = [r for r in result.rows if r.measure == m]
            best = min(rows, key=lambda r: r.pvalue)
            assert 26 <= best.window.column <= 34

    def test_too_few_subjects(self):
        geno = make_geno([5], n=6)
        pheno = Phenotype(geno.subjects, np.array([0, 0, 0, 1, 1, 1], dtype=np.int8))
        result = scan(geno, pheno, measures=("ibs",))
        assert result.rows[0].flag == TOO_FEW
        assert math.isnan(result.rows[0].pvalue)

    def test_drop_subject_policy(self):
        geno, pheno = synthetic_cohort(n_subjects=40, n_cases=20, n_snps=10, n_chromosomes=1, missing_rate=0.02, seed=2)
        dropped = scan(geno, pheno, measures=("ibs",), missing_policy="drop-subject")
        imputed = scan(geno, pheno, measures=("ibs",))
        assert any(r.n_dropped > 0 for r in dropped.rows)
        assert all(r.n_dropped == 0 for r in imputed.rows)
        for r in dropped.rows:
            block = geno.counts[:, r.window.column : r.window.column + 5]
            keep = ~np.any(block == MISSING, axis=1)
            assert r.n_dropped == np.count_nonzero(~keep)

    def test_rejects_non_genetic_measure(self, cohort):
        with pytest.raises(ValueError):
            scan(*cohort, measures=("euclidean",))

    def test_monte_carlo_skew_backend_close(self, cohort):
        geno, pheno = cohort
        wins = windows(geno, 5)[:5]
        closed = scan(geno, pheno, measures=("ibs",), window_list=wins).pvalues("ibs")
        engine = EngineConfig(skew_backend="monte_carlo", skew_n_perm=20_000)
        mc = scan(geno, pheno, measures=("ibs",), engine=engine, window_list=wins).pvalues("ibs")
        np.testing.assert_allclose(mc, closed, atol=0.02)

    def test_byte_identical_across_threads(self, cohort, tmp_path):
        geno, pheno = cohort
        outputs = []
        for threads in (1, 3):
            result = scan(geno, pheno, measures=("ibs", "hamman1"), threads=threads, seed=5)
            outputs.append(export(result, tmp_path / f"w{threads}.tsv").read_bytes())
        assert outputs[0] == outputs[1]

    @pytest.mark.slow
    def test_shuffled_labels_are_calibrated(self):
        geno, pheno = synthetic_cohort(n_snps=600, n_chromosomes=2, seed=4)
        result = scan(geno, pheno.shuffled(11), measures=("ibs",))
        p = result.pvalues("ibs")
        assert p.size >= 500
        assert abs(np.mean(p < 0.05) - 0.05) <= 0.02

    @pytest.mark.slow
    def test_engines_agree(self):
        # 100 windows, N = 100 subjects, 1e5 permutations per window.
        geno, pheno = synthetic_cohort(n_subjects=100, n_cases=50, n_snps=104, n_chromosomes=1, seed=0)
        approx = scan(geno, pheno, measures=("ibs",)).pvalues("ibs")
        engine = EngineConfig(kind="monte_carlo", n_pi=100_000)
        perm = scan(geno, pheno, measures=("ibs",), engine=engine, seed=1).pvalues("ibs")
        assert approx.size == 100
        assert np.mean(np.abs(approx - perm)) < 0.005


class TestExport:
    @pytest.fixture
    def result(self):
        geno = make_geno([6, 5], n=12, seed=3)
        pheno = Phenotype(geno.subjects, np.array([0, 1] * 6, dtype=np.int8))
        small = make_geno([5], n=6)
        return scan(geno, pheno, measures=("ibs", "sm")), scan(
            small, Phenotype(small.subjects, np.array([0, 0, 0, 1, 1, 1], dtype=np.int8)), measures=("ibs",)
        )

    def test_tsv(self, result, tmp_path):
        regular, flagged = result
        lines = export(regular, tmp_path / "w.tsv").read_text().splitlines()
        assert len(lines) == 1 + regular.n_windows * 2
        assert lines[0].split("\t")[:6] == ["chromosome", "start_snp", "window_start", "measure", "statistic", "pvalue"]
        row = export(flagged, tmp_path / "f.tsv").read_text().splitlines()[1].split("\t")
        assert row[5] == "NA" and row[7] == TOO_FEW

    def test_manhattan(self, result, tmp_path):
        regular, flagged = result
        rows = list(csv.DictReader(export(regular, tmp_path / "m.csv", "manhattan_csv").open()))
        assert len(rows) == regular.n_windows * 2
        assert float(rows[0]["threshold"]) == 7.0
        assert {r["parity"] for r in rows} == {"0", "1"}
        xs = sorted({int(r["x"]) for r in rows})
        assert xs == list(range(regular.n_windows))
        empty = list(csv.reader(export(flagged, tmp_path / "e.csv", "manhattan_csv").open()))
        assert len(empty) == 1

    def test_neg_log10(self, result):
        regular, _ = result
        r = regular.rows[0]
        assert r.neg_log10_p == pytest.approx(-math.log10(r.pvalue))

    def test_summary(self, result, tmp_path):
        regular, _ = result
        data = json.loads(write_summary(regular, tmp_path / "s.json").read_text())
        assert data["windows"] == regular.n_windows
        assert set(data["measures"]) == {"ibs", "simple_matching"}

    def test_unknown_format(self, result, tmp_path):
        with pytest.raises(ValueError):
            export(result[0], tmp_path / "x", "parquet")
