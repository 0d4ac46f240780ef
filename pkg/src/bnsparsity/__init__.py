"""Sparsity testing for linear Bayesian networks from data.

Tests whether a network's maximum in-degree exceeds 1 using the largest
eigenvalue of the normalized inverse covariance matrix, with shrinkage and
second-order bias correction. Includes a simulation harness for calibration
and power studies, tree structure fitting, and a paired network-equality
permutation test.
"""

__version__ = "0.1.0"

from .asymptotics import (
    PROPAGATOR_FORMS,
    AsymptoticCovariances,
    build_asymptotics,
    eigenvalue_cov,
    eigenvalue_gradients,
    gaussian_vec_cov,
    normalization_propagator,
    normalized_precision_cov,
    propagation_vec_cov,
)
from .correction import CorrectedEigenvalue, bias_term, corrected_top_eigenvalue
from .covariance import (
    CovarianceSuite,
    Dataset,
    build_suite,
    normalized_precision_eigen,
    read_csv,
    sample_covariance,
    suite_from_covariance,
    write_csv,
)
from .errors import (
    BnSparsityError,
    ConvergenceError,
    CsvParseError,
    DegenerateVarianceError,
    InputError,
    InsufficientSampleError,
    NumericalError,
    SingularityError,
)
from .kernels import (
    EigenSystem,
    commutation_matrix,
    diagonalization_matrix,
    kron,
    scaled_frobenius_sq,
    selector_matrix,
    symmetric_eigen,
    vec,
)
from .montecarlo import MonteCarloReport, MonteCarloRow, run_basic_simulation, run_power_study
from .shrinkage import ShrinkageEstimate, shrink, shrinkage_intensity
from .simulate import (
    GenerativeModel,
    NoiseSpec,
    PowerChain,
    UndirectedGraph,
    WeightedDag,
    analytic_normalized_precision,
    is_forest,
    max_in_degree,
    moral_graph,
    power_chain,
    random_dag,
    random_model,
    sample_dataset,
    tuned_top_eigenvalue_model,
)
from .sparsity import SparsityTestResult, max_parents_test, student_t_quantile, student_t_sf
from .trees import (
    FittedTree,
    PermutationTestResult,
    chow_liu,
    gaussian_mutual_information,
    paired_permutation_equality,
)

__all__ = [
    "__version__",
    "AsymptoticCovariances",
    "PROPAGATOR_FORMS",
    "BnSparsityError",
    "ConvergenceError",
    "CorrectedEigenvalue",
    "CovarianceSuite",
    "CsvParseError",
    "Dataset",
    "DegenerateVarianceError",
    "EigenSystem",
    "FittedTree",
    "GenerativeModel",
    "InputError",
    "InsufficientSampleError",
    "MonteCarloReport",
    "MonteCarloRow",
    "NoiseSpec",
    "NumericalError",
    "PermutationTestResult",
    "PowerChain",
    "ShrinkageEstimate",
    "SingularityError",
    "SparsityTestResult",
    "UndirectedGraph",
    "WeightedDag",
    "analytic_normalized_precision",
    "bias_term",
    "build_asymptotics",
    "build_suite",
    "chow_liu",
    "commutation_matrix",
    "corrected_top_eigenvalue",
    "diagonalization_matrix",
    "eigenvalue_cov",
    "eigenvalue_gradients",
    "gaussian_mutual_information",
    "gaussian_vec_cov",
    "is_forest",
    "kron",
    "max_in_degree",
    "max_parents_test",
    "moral_graph",
    "normalization_propagator",
    "normalized_precision_cov",
    "normalized_precision_eigen",
    "paired_permutation_equality",
    "power_chain",
    "propagation_vec_cov",
    "random_dag",
    "random_model",
    "read_csv",
    "run_basic_simulation",
    "run_power_study",
    "sample_covariance",
    "sample_dataset",
    "scaled_frobenius_sq",
    "selector_matrix",
    "shrink",
    "shrinkage_intensity",
    "student_t_quantile",
    "student_t_sf",
    "suite_from_covariance",
    "symmetric_eigen",
    "tuned_top_eigenvalue_model",
    "vec",
    "write_csv",
]
