"""Gaussian-process regression over one-hot encoded subgroups.

Squared-exponential kernel with a single shared lengthscale, exact posterior
through a Cholesky factorization of K + sigma^2 I (never an explicit
inverse), and hyperparameter selection by grid search over the log marginal
likelihood.  Targets are standardized to zero mean and unit variance before
fitting so the zero-mean prior is serviceable for metrics living on
arbitrary scales; posteriors are mapped back to original units.

On one-hot inputs the squared distance between two encodings is twice the
number of attributes on which they differ, so the SE kernel acts as a
Hamming-distance kernel over subgroups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.spatial.distance import cdist

from .errors import NumericalFailureError

#: Fallback used when there are too few observations to select hyperparameters.
_FALLBACK_JITTER = 1e-8


@dataclass(frozen=True)
class KernelParams:
    """Squared-exponential kernel and observation-noise parameters."""

    lengthscale: float = 1.0
    signal_variance: float = 1.0
    noise_variance: float = 1e-4
    jitter: float = _FALLBACK_JITTER

    def __post_init__(self) -> None:
        if self.lengthscale <= 0:
            raise ValueError("lengthscale must be positive")
        if self.signal_variance <= 0:
            raise ValueError("signal_variance must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")
        if self.jitter <= 0:
            raise ValueError("jitter must be positive")


@dataclass(frozen=True)
class HyperGrid:
    """Log-spaced hyperparameter grid, in standardized target space."""

    lengthscales: tuple[float, ...] = (0.1, 0.3, 1.0, 3.0, 10.0)
    signal_variances: tuple[float, ...] = (0.25, 1.0, 4.0)
    noise_variances: tuple[float, ...] = (1e-6, 1e-4, 1e-2)

    def __post_init__(self) -> None:
        for name in ("lengthscales", "signal_variances", "noise_variances"):
            values = getattr(self, name)
            if len(values) == 0:
                raise ValueError(f"{name} must be non-empty")


@dataclass(frozen=True)
class Posterior:
    """Predictive mean and variance in original target units."""

    mean: float
    variance: float


@dataclass(frozen=True)
class GpModel:
    """Fitted GP state: Cholesky factor, dual weights and target scaling.

    ``chol_factor`` is the lower factor of K + (noise + jitter_used) I on the
    standardized targets; ``alpha`` solves that system against them.  A model
    with zero observations represents the prior.
    """

    train_inputs: np.ndarray
    train_targets: np.ndarray
    chol_factor: np.ndarray | None
    alpha: np.ndarray
    params: KernelParams
    target_mean: float
    target_std: float
    jitter_used: float

    @property
    def n_train(self) -> int:
        return self.train_inputs.shape[0]


def kernel_eval(a: np.ndarray, b: np.ndarray, params: KernelParams) -> float:
    """SE kernel value sigma_f^2 * exp(-||a-b||^2 / (2 l^2)) for two points."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    sq = float(np.sum((a - b) ** 2))
    return params.signal_variance * math.exp(
        -sq / (2.0 * params.lengthscale**2)
    )


def kernel_matrix(a: np.ndarray, b: np.ndarray, params: KernelParams) -> np.ndarray:
    """Kernel cross-matrix for stacked rows of points."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    sq = cdist(a, b, metric="sqeuclidean")
    return params.signal_variance * np.exp(-sq / (2.0 * params.lengthscale**2))


def _factorize(
    x: np.ndarray, y: np.ndarray, params: KernelParams
) -> tuple[np.ndarray, np.ndarray, float]:
    """Cholesky of K + (noise + jitter) I with jitter escalation.

    Jitter grows tenfold per failed attempt up to 1e-2 * signal_variance;
    past that the factorization is declared a numerical failure.
    """
    n = x.shape[0]
    base = kernel_matrix(x, x, params) + params.noise_variance * np.eye(n)
    jitter = params.jitter
    cap = 1e-2 * params.signal_variance
    while True:
        try:
            chol = np.linalg.cholesky(base + jitter * np.eye(n))
        except np.linalg.LinAlgError:
            jitter *= 10.0
            if jitter > cap:
                raise NumericalFailureError(
                    f"Cholesky failed for n={n} even with jitter {jitter / 10.0:g}"
                ) from None
            continue
        if not np.isfinite(chol).all():
            raise NumericalFailureError("non-finite Cholesky factor")
        alpha = cho_solve((chol, True), y)
        return chol, alpha, jitter


def _standardize(y: np.ndarray) -> tuple[np.ndarray, float, float]:
    mean = float(np.mean(y))
    std = float(np.std(y))
    if std < 1e-12:
        std = 1.0
    return (y - mean) / std, mean, std


def fit(x: np.ndarray, y: np.ndarray, params: KernelParams) -> GpModel:
    """Fit the GP to encoded points ``x`` and raw targets ``y``.

    With zero observations the returned model is the prior (standardized
    mean 0, variance sigma_f^2).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if x.size == 0:
        x = x.reshape(0, x.shape[1] if x.ndim == 2 and x.shape[1] else 0)
    if x.shape[0] != y.shape[0]:
        raise ValueError(
            f"got {x.shape[0]} inputs but {y.shape[0]} targets"
        )
    if y.shape[0] == 0:
        return GpModel(
            train_inputs=x,
            train_targets=y,
            chol_factor=None,
            alpha=y,
            params=params,
            target_mean=0.0,
            target_std=1.0,
            jitter_used=params.jitter,
        )
    z, mean, std = _standardize(y)
    chol, alpha, jitter_used = _factorize(x, z, params)
    return GpModel(
        train_inputs=x,
        train_targets=z,
        chol_factor=chol,
        alpha=alpha,
        params=params,
        target_mean=mean,
        target_std=std,
        jitter_used=jitter_used,
    )


def posterior_batch(
    model: GpModel, x_new: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior means and variances at stacked query points.

    mean = k_new [K + sigma^2 I]^-1 y and
    var = k(x,x) - k_new [K + sigma^2 I]^-1 k_new^T, both evaluated through
    the stored factorization and mapped back to original units; variances
    are clamped at zero from below.
    """
    x_new = np.atleast_2d(np.asarray(x_new, dtype=float))
    params = model.params
    if model.n_train == 0:
        means = np.zeros(x_new.shape[0])
        variances = np.full(x_new.shape[0], params.signal_variance)
    else:
        if x_new.shape[1] != model.train_inputs.shape[1]:
            raise ValueError(
                f"query dimension {x_new.shape[1]} does not match "
                f"training dimension {model.train_inputs.shape[1]}"
            )
        k_cross = kernel_matrix(model.train_inputs, x_new, params)
        means = k_cross.T @ model.alpha
        v = solve_triangular(model.chol_factor, k_cross, lower=True)
        variances = params.signal_variance - np.einsum("ij,ij->j", v, v)
        np.clip(variances, 0.0, None, out=variances)
    means = model.target_mean + model.target_std * means
    variances = model.target_std**2 * variances
    return means, variances


def posterior_at(model: GpModel, x_new: np.ndarray) -> Posterior:
    """Posterior at a single query point."""
    means, variances = posterior_batch(model, np.atleast_2d(x_new))
    return Posterior(mean=float(means[0]), variance=float(variances[0]))


def log_marginal_likelihood(
    x: np.ndarray, y: np.ndarray, params: KernelParams
) -> float:
    """GP evidence -0.5 y^T alpha - sum(log diag L) - (n/2) log 2 pi.

    Computed on the targets as given; callers standardize first when their
    grid bounds assume standardized space.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] == 0:
        raise ValueError("log marginal likelihood needs at least one point")
    chol, alpha, _ = _factorize(x, y, params)
    n = y.shape[0]
    return float(
        -0.5 * (y @ alpha)
        - np.sum(np.log(np.diag(chol)))
        - 0.5 * n * math.log(2.0 * math.pi)
    )


def optimize_hypers(
    x: np.ndarray,
    y: np.ndarray,
    grid: HyperGrid | None = None,
) -> KernelParams:
    """Grid point maximizing the evidence on standardized targets.

    Deterministic: grid order is fixed and the first maximizer wins ties.
    Grid points whose factorization fails are skipped; if all fail the
    failure is raised.
    """
    if grid is None:
        grid = HyperGrid()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] < 2:
        raise ValueError("hyperparameter selection needs at least two points")
    z, _, _ = _standardize(y)
    best: KernelParams | None = None
    best_value = -math.inf
    for lengthscale in grid.lengthscales:
        for signal_variance in grid.signal_variances:
            for noise_variance in grid.noise_variances:
                params = KernelParams(
                    lengthscale=lengthscale,
                    signal_variance=signal_variance,
                    noise_variance=noise_variance,
                )
                try:
                    value = log_marginal_likelihood(x, z, params)
                except NumericalFailureError:
                    continue
                if value > best_value:
                    best = params
                    best_value = value
    if best is None:
        raise NumericalFailureError(
            "every hyperparameter grid point failed to factorize"
        )
    return best
