"""Distance-based F tests for group differences under arbitrary distances.

The DBF statistic ``F = B / W`` splits the total variability of a Gower-centred
distance matrix into between- and within-group parts. Its null distribution is
approximated by a Pearson type III law matched to the exact first three
permutation moments, so p-values come without permuting.
"""

from .classical import anova_f, f_cdf, f_sf, hotelling_t2, t2_from_dbf
from .core import (
    GroupAssignment,
    VarianceDecomposition,
    dbf,
    dbf_statistic,
    gower_center,
    group_projector,
    variance_decomposition,
)
from .dbf import DbfResult, dbf_permutation_test, dbf_test
from .distances import CurveSet, pairwise_matrix
from .errors import (
    DataFormatError,
    DegenerateDistributionError,
    DegenerateWithinError,
    DimensionMismatchError,
    DistanovaError,
    InvalidAssignmentError,
    InvalidDistanceMatrixError,
    PoleError,
    SampleSizeError,
    SingularMetricError,
)
from .gwas import EngineConfig, GenotypeMatrix, Phenotype, ScanResult, export, load_genotypes, load_phenotype, scan, windows
from .moments import ExactMoments, MonteCarloConfig, PermMoments, mean_variance, perm_moments, trace_quantities
from .pearson3 import DbfNull, dbf_cdf, dbf_pdf, dbf_pvalue, dbf_sf, pt3_cdf, pt3_pdf
from .permutation import PermutationPlan, perm_F_values, perm_pvalue

__version__ = "0.1.0"

__all__ = [
    "CurveSet",
    "DataFormatError",
    "DbfNull",
    "DbfResult",
    "DegenerateDistributionError",
    "DegenerateWithinError",
    "DimensionMismatchError",
    "DistanovaError",
    "EngineConfig",
    "ExactMoments",
    "GenotypeMatrix",
    "GroupAssignment",
    "InvalidAssignmentError",
    "InvalidDistanceMatrixError",
    "MonteCarloConfig",
    "PermMoments",
    "PermutationPlan",
    "Phenotype",
    "PoleError",
    "SampleSizeError",
    "ScanResult",
    "SingularMetricError",
    "VarianceDecomposition",
    "anova_f",
    "dbf",
    "dbf_cdf",
    "dbf_pdf",
    "dbf_permutation_test",
    "dbf_pvalue",
    "dbf_sf",
    "dbf_statistic",
    "dbf_test",
    "export",
    "f_cdf",
    "f_sf",
    "gower_center",
    "group_projector",
    "hotelling_t2",
    "load_genotypes",
    "load_phenotype",
    "mean_variance",
    "pairwise_matrix",
    "perm_F_values",
    "perm_moments",
    "perm_pvalue",
    "pt3_cdf",
    "pt3_pdf",
    "scan",
    "t2_from_dbf",
    "trace_quantities",
    "variance_decomposition",
    "windows",
]
