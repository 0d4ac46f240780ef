"""Plug-in asymptotic covariance matrices for the normalized precision and
its eigenvalues, under Gaussian sampling.

The chain is: the vectorized sample covariance has asymptotic covariance
``V = (I + K)(S (x) S)``; the delta method carries it through matrix
inversion and diagonal normalization via a propagation factor ``G`` so that
``Cov(vec of normalized precision) ~ G.T V G / divisor``; a final projection
onto eigenvalue gradients gives the eigenvalue covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .covariance import CovarianceSuite
from .errors import InputError, InsufficientSampleError, SingularityError
from .kernels import EigenSystem, commutation_indices, kron

DIVISOR_MODES = ("nminusp", "n")

# Propagation-factor forms. "conservative" (default) applies the
# normalization-map Jacobian untransposed, with every plug-in slot evaluated
# at the sample correlation matrix so the result is invariant to column
# rescaling. The quadratic form is PSD but over-weights the normalization
# curvature, inflating the covariance trace and with it the shrinkage
# intensity; that inflation cancels the positive small-sample bias of the
# top sample eigenvalue and holds the test's nominal level when n is close
# to p. "exact" is the true gradient-layout delta-method factor
# (finite-difference validated), giving the actual asymptotic covariance of
# the vectorized normalized precision; it is asymptotically equivalent but
# anticonservative for n close to p.
PROPAGATOR_FORMS = ("conservative", "exact")


def _check_form(form: str) -> str:
    if form not in PROPAGATOR_FORMS:
        raise InputError(f"form must be one of {PROPAGATOR_FORMS}, got {form!r}")
    return form


def _form_suite(suite: CovarianceSuite, form: str) -> CovarianceSuite:
    """Plug-in suite for the chosen form.

    The conservative composition is not scale-equivariant, so its plug-ins
    are taken at the correlation scale (the normalized precision itself is
    unchanged). The exact form is scale-invariant and uses the suite as is.
    """
    if form == "exact":
        return suite
    scale = np.sqrt(np.diag(suite.covariance))
    inv = 1.0 / scale
    return CovarianceSuite(
        covariance=suite.covariance * np.outer(inv, inv),
        precision=suite.precision * np.outer(scale, scale),
        precision_diag=suite.precision_diag * scale * scale,
        normalized_precision=suite.normalized_precision,
    )


def divisor_value(n: int, p: int, mode: str = "nminusp") -> int:
    """Degrees-of-freedom divisor: n - p (default, conservative) or n."""
    if mode not in DIVISOR_MODES:
        raise InputError(f"divisor mode must be one of {DIVISOR_MODES}, got {mode!r}")
    if n <= p:
        raise InsufficientSampleError(
            f"need more samples than variables, got n={n}, p={p}"
        )
    return n - p if mode == "nminusp" else n


def gaussian_vec_cov(sigma: np.ndarray) -> np.ndarray:
    """Asymptotic covariance of the vectorized sample covariance, Gaussian
    case: ``(I + K)(S (x) S)``. Symmetric, and commutes with K."""
    sigma = np.asarray(sigma, dtype=float)
    p = sigma.shape[0]
    s2 = kron(sigma, sigma)
    v = s2 + s2[commutation_indices(p), :]
    return 0.5 * (v + v.T)


def _normalization_jacobian(suite: CovarianceSuite) -> np.ndarray:
    """Standard Jacobian of the unit-diagonal normalization map at the
    sample precision: d vec(normalized) = J d vec(precision)."""
    p = suite.p
    pd = suite.precision_diag
    inv_sqrt = 1.0 / np.sqrt(pd)
    scaled = suite.normalized_precision * (1.0 / pd)[None, :]
    # (I (x) scaled) D is nonzero only in the diagonal-position columns.
    m = np.zeros((p * p, p * p))
    for i in range(p):
        m[i * p : (i + 1) * p, i * (p + 1)] = scaled[:, i]
    m = m + m[commutation_indices(p), :]
    jac = np.diag(np.kron(inv_sqrt, inv_sqrt)) - 0.5 * m
    return jac


def normalization_propagator(
    suite: CovarianceSuite, form: str = "conservative"
) -> np.ndarray:
    """Delta-method factor G mapping covariance uncertainty to the
    normalized precision: ``Cov(vec of normalized precision) ~ G.T V G``.

    With ``form="exact"``, G solves ``(S (x) S) G = J.T`` where J is the
    Jacobian of the normalization map; it enters the sandwich transposed
    because the covariance propagates as ``J_total V J_total.T`` and the
    inverse-map Jacobian ``-(S (x) S)^{-1}`` is symmetric with a sign that
    cancels. ``form="conservative"`` solves against J untransposed, at the
    correlation scale (see ``PROPAGATOR_FORMS``); both forms coincide at a
    diagonal covariance. Pair the result with ``propagation_vec_cov`` of the
    same form.
    """
    _check_form(form)
    work = _form_suite(suite, form)
    big = kron(work.covariance, work.covariance)
    try:
        factor = cho_factor(big, lower=True)
    except LinAlgError:
        raise SingularityError("S (x) S is not positive definite") from None
    jac = _normalization_jacobian(work)
    return cho_solve(factor, jac.T if form == "exact" else jac)


def propagation_vec_cov(suite: CovarianceSuite, form: str = "conservative") -> np.ndarray:
    """The vec-covariance plug-in matching ``normalization_propagator``:
    evaluated at the correlation scale for the conservative form."""
    _check_form(form)
    return gaussian_vec_cov(_form_suite(suite, form).covariance)


def _vec_cov_times(sigma: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Compute ``gaussian_vec_cov(sigma) @ m`` without forming V densely."""
    p = sigma.shape[0]
    sm = kron(sigma, sigma) @ m
    return sm + sm[commutation_indices(p), :]


def normalized_precision_cov(
    suite: CovarianceSuite, n: int, divisor: str = "nminusp", form: str = "conservative"
) -> np.ndarray:
    """Plug-in covariance of the vectorized normalized precision,
    ``G.T V G / (n - p)`` by default."""
    div = divisor_value(n, suite.p, divisor)
    work = _form_suite(suite, _check_form(form))
    g = normalization_propagator(suite, form)
    s = g.T @ _vec_cov_times(work.covariance, g) / div
    return 0.5 * (s + s.T)


def eigenvalue_gradients(eig: EigenSystem) -> np.ndarray:
    """p^2 x p matrix whose i-th column, ``w_i (x) w_i``, is the gradient of
    the i-th eigenvalue with respect to the vectorized matrix."""
    p = eig.p
    grads = np.empty((p * p, p))
    for i in range(p):
        grads[:, i] = np.kron(eig.vectors[:, i], eig.vectors[:, i])
    return grads


def eigenvalue_cov(
    suite: CovarianceSuite,
    eig: EigenSystem,
    n: int,
    divisor: str = "nminusp",
    form: str = "conservative",
) -> np.ndarray:
    """Plug-in covariance of the normalized-precision eigenvalues."""
    cov = normalized_precision_cov(suite, n, divisor, form)
    grads = eigenvalue_gradients(eig)
    out = grads.T @ cov @ grads
    return 0.5 * (out + out.T)


@dataclass(frozen=True)
class AsymptoticCovariances:
    """All plug-in covariance pieces for one dataset, sharing one divisor."""

    vec_cov: np.ndarray
    propagator: np.ndarray
    gradients: np.ndarray
    normalized_precision_cov: np.ndarray
    eigenvalue_cov: np.ndarray
    divisor: int


def build_asymptotics(
    suite: CovarianceSuite,
    eig: EigenSystem,
    n: int,
    divisor: str = "nminusp",
    form: str = "conservative",
) -> AsymptoticCovariances:
    """Compute every plug-in covariance once, reusing shared factors."""
    div = divisor_value(n, suite.p, divisor)
    v = propagation_vec_cov(suite, form)
    g = normalization_propagator(suite, form)
    omega_cov = g.T @ (v @ g) / div
    omega_cov = 0.5 * (omega_cov + omega_cov.T)
    grads = eigenvalue_gradients(eig)
    lam_cov = grads.T @ omega_cov @ grads
    lam_cov = 0.5 * (lam_cov + lam_cov.T)
    return AsymptoticCovariances(
        vec_cov=v,
        propagator=g,
        gradients=grads,
        normalized_precision_cov=omega_cov,
        eigenvalue_cov=lam_cov,
        divisor=div,
    )
