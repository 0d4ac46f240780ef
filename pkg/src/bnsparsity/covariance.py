"""Datasets and the covariance pipeline.

Turns an n x p sample matrix into the sample covariance, its inverse (the
precision matrix), the precision diagonal, and the unit-diagonal normalized
precision whose top eigenvalue the sparsity test examines.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.linalg.lapack import dpocon

from .errors import CsvParseError, InputError, InsufficientSampleError, SingularityError
from .kernels import EigenSystem, symmetric_eigen

# Condition estimates above this are treated as singular.
CONDITION_LIMIT = 1e12


@dataclass
class Dataset:
    """n x p sample matrix; rows are observations, columns are variables."""

    values: np.ndarray
    variable_names: list[str] | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise InputError(f"dataset must be 2-D, got shape {self.values.shape}")
        n, p = self.values.shape
        if n < 1 or p < 1:
            raise InputError(f"dataset must be non-empty, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise InputError("dataset contains non-finite values")
        if self.variable_names is not None and len(self.variable_names) != p:
            raise InputError(
                f"got {len(self.variable_names)} variable names for {p} columns"
            )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def names(self) -> list[str]:
        if self.variable_names is not None:
            return list(self.variable_names)
        return [f"x{i + 1}" for i in range(self.p)]


def read_csv(path) -> Dataset:
    """Read a dataset CSV: header row of names, then numeric rows.

    Comma separated, '.' decimal, UTF-8. Parse failures report the 1-based
    row and column.
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvParseError("file is empty") from None
        names = [name.strip() for name in header]
        if not names or any(not name for name in names):
            raise CsvParseError("header row has empty variable names", row=1)
        rows = []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(names):
                raise CsvParseError(
                    f"expected {len(names)} fields, got {len(record)}", row=lineno
                )
            parsed = []
            for colno, cell in enumerate(record, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise CsvParseError(
                        f"cannot parse {cell!r} as a number", row=lineno, column=colno
                    ) from None
            rows.append(parsed)
    if not rows:
        raise CsvParseError("no data rows after the header")
    return Dataset(values=np.array(rows, dtype=float), variable_names=names)


def write_csv(dataset: Dataset, path) -> None:
    """Write a dataset in the same CSV format ``read_csv`` accepts."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(dataset.names())
        for row in dataset.values:
            writer.writerow([repr(float(x)) for x in row])


def sample_covariance(data: Dataset) -> np.ndarray:
    """Sample covariance with divisor n (not n-1)."""
    if data.n < 2:
        raise InputError(f"covariance needs at least 2 samples, got n={data.n}")
    centered = data.values - data.values.mean(axis=0)
    cov = centered.T @ centered / data.n
    return 0.5 * (cov + cov.T)


@dataclass(frozen=True)
class CovarianceSuite:
    """Sample covariance, precision, precision diagonal, normalized precision."""

    covariance: np.ndarray
    precision: np.ndarray
    precision_diag: np.ndarray
    normalized_precision: np.ndarray

    @property
    def p(self) -> int:
        return self.covariance.shape[0]


def suite_from_covariance(sigma: np.ndarray) -> CovarianceSuite:
    """Build the suite from a covariance matrix directly.

    Inversion goes through a symmetric positive-definite factorization; a
    failed factorization or a condition estimate above ``CONDITION_LIMIT``
    raises :class:`SingularityError`.
    """
    sigma = np.asarray(sigma, dtype=float)
    sigma = 0.5 * (sigma + sigma.T)
    p = sigma.shape[0]
    try:
        factor = cho_factor(sigma, lower=True)
    except LinAlgError:
        raise SingularityError("covariance matrix is not positive definite") from None
    anorm = float(np.abs(sigma).sum(axis=0).max())
    rcond, info = dpocon(factor[0], anorm, uplo="L")
    if info != 0:
        raise SingularityError("condition estimation failed")
    cond = np.inf if rcond == 0 else 1.0 / float(rcond)
    if cond > CONDITION_LIMIT:
        raise SingularityError(
            f"covariance condition estimate {cond:.3e} exceeds {CONDITION_LIMIT:.0e}"
        )
    precision = cho_solve(factor, np.eye(p))
    precision = 0.5 * (precision + precision.T)
    diag = np.diag(precision).copy()
    scale = 1.0 / np.sqrt(diag)
    normalized = precision * np.outer(scale, scale)
    normalized = 0.5 * (normalized + normalized.T)
    return CovarianceSuite(
        covariance=sigma,
        precision=precision,
        precision_diag=diag,
        normalized_precision=normalized,
    )


def build_suite(data: Dataset) -> CovarianceSuite:
    """Covariance pipeline for a dataset; requires n > p."""
    if data.n <= data.p:
        raise InsufficientSampleError(
            f"need more samples than variables, got n={data.n}, p={data.p}"
        )
    return suite_from_covariance(sample_covariance(data))


def normalized_precision_eigen(suite: CovarianceSuite) -> EigenSystem:
    """Descending eigenvalues and eigenvectors of the normalized precision."""
    return symmetric_eigen(suite.normalized_precision)
