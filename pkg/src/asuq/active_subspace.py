"""One-dimensional active-subspace estimation from O(m) samples.

The active direction w is the normalized gradient of a global
least-squares linear fit f(x) ~ u0 + u' . x over the normalized
hypercube. A bootstrap over row resamples gauges the variability of w,
the summary data (w . x_j, f_j) supports judging whether f is close to
a univariate function of the active variable, and a Monte Carlo
gradient-outer-product estimate provides an independent oracle for
differentiable test functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DataError, DegeneracyError, EvaluatorError
from .param_space import sample_hypercube

__all__ = [
    "LinearFit",
    "ActiveSubspace",
    "BootstrapEnsemble",
    "SummaryData",
    "CMatrixEstimate",
    "fit_active_direction",
    "bootstrap_direction",
    "sensitivity_ranking",
    "summary_data",
    "estimate_c_gradient_oracle",
]

# Singular values below RANK_RTOL * sigma_max count as zero; sample sizes
# sit barely above m+1 (down to 2m), so rank diagnostics matter.
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class LinearFit:
    """Least-squares solution of [1 | X] u = f with diagnostics."""

    u_hat: np.ndarray
    residual_norm: float
    cond_estimate: float


@dataclass(frozen=True)
class ActiveSubspace:
    """Unit active direction w with the fit it came from."""

    w: np.ndarray
    fit: LinearFit
    M: int


@dataclass(frozen=True)
class BootstrapEnsemble:
    """Replicated directions from row resampling, sign-aligned to w."""

    replicates: np.ndarray  # (N, m)
    N: int
    seed: int

    def component_quantiles(self, qs: Sequence[float] = (0.025, 0.25, 0.5, 0.75, 0.975)) -> dict:
        return {
            f"q{q}": np.quantile(self.replicates, q, axis=0).tolist()
            for q in qs
        }


@dataclass(frozen=True)
class SummaryData:
    """Projected samples for the summary scatter plus a monotonicity proxy.

    ``discordant_pairs`` counts adjacent orderings (after sorting by y)
    that break monotonicity in the better of the two orientations; zero
    means the samples are monotone in the active variable.
    """

    y: np.ndarray
    f: np.ndarray
    discordant_pairs: int
    bootstrap_cloud: np.ndarray | None = None  # (N*M, 2) columns (y, f)


@dataclass(frozen=True)
class CMatrixEstimate:
    """Monte Carlo estimate of the gradient outer-product matrix."""

    C: np.ndarray
    eigenvalues: np.ndarray   # descending
    eigenvectors: np.ndarray  # orthonormal columns, matching order
    n_mc: int


def _as_design(X, f) -> tuple[np.ndarray, np.ndarray, int, int]:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    f = np.asarray(f, dtype=float).ravel()
    M, m = X.shape
    if len(f) != M:
        raise DataError(f"{M} sample points but {len(f)} responses")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(f)):
        raise DataError("non-finite values in the sample set")
    return X, f, M, m


def _apply_sign_convention(w: np.ndarray) -> np.ndarray:
    # Largest-magnitude component made positive; argmax takes the lowest
    # index on ties.
    if w[int(np.argmax(np.abs(w)))] < 0:
        return -w
    return w


def _solve_direction(X: np.ndarray, f: np.ndarray) -> tuple[np.ndarray, LinearFit]:
    M, m = X.shape
    A = np.column_stack([np.ones(M), X])
    u_hat, _, rank, sv = np.linalg.lstsq(A, f, rcond=RANK_RTOL)
    if rank < m + 1:
        raise DegeneracyError(
            f"design matrix rank {rank} < {m + 1}; the sample points do not "
            f"determine a linear fit (need M >= m+1 affinely independent points)"
        )
    residual_norm = float(np.linalg.norm(A @ u_hat - f))
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    fit = LinearFit(u_hat=u_hat, residual_norm=residual_norm, cond_estimate=cond)

    u_prime = u_hat[1:]
    grad_norm = float(np.linalg.norm(u_prime))
    f_scale = float(np.max(np.abs(f))) or 1.0
    if grad_norm < 1e-14 * f_scale:
        raise DegeneracyError(
            "constant response: the fitted gradient is numerically zero"
        )
    return _apply_sign_convention(u_prime / grad_norm), fit


def fit_active_direction(X, f) -> ActiveSubspace:
    """Estimate the active direction from done runs.

    Parameters
    ----------
    X : (M, m) array of normalized sample points.
    f : (M,) array of quantity-of-interest values.

    Fits the global linear model by orthogonal factorization, normalizes
    its gradient, and applies the sign convention (largest-magnitude
    component positive). Requires M >= m+1 and a full-rank design.
    """
    X, f, M, m = _as_design(X, f)
    if M < m + 1:
        raise DegeneracyError(
            f"M={M} samples cannot determine an {m}-parameter direction; "
            f"need M >= m+1 = {m + 1}, practical floor 2m = {2 * m}, "
            f"recommended about m^2 = {m * m}"
        )
    w, fit = _solve_direction(X, f)
    return ActiveSubspace(w=w, fit=fit, M=M)


def bootstrap_direction(X, f, N: int = 100, seed: int = 0,
                        max_retries_per_replicate: int = 100) -> BootstrapEnsemble:
    """Row-resampling bootstrap of the active direction.

    Replicate k resamples M rows with replacement using the RNG stream
    keyed by (seed, k), refits, and sign-aligns the result to the
    point-estimate direction. Rank-deficient resamples are redrawn within
    the same stream; exhausting the retry budget raises.
    """
    X, f, M, m = _as_design(X, f)
    if N < 1:
        raise DataError(f"replicate count must be >= 1, got {N}")
    base = fit_active_direction(X, f)
    w = base.w

    replicates = np.empty((N, m))
    for k in range(N):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
        for attempt in range(max_retries_per_replicate):
            idx = rng.integers(0, M, size=M)
            try:
                w_k, _ = _solve_direction(X[idx], f[idx])
            except DegeneracyError:
                continue
            if np.dot(w_k, w) < 0:
                w_k = -w_k
            replicates[k] = w_k
            break
        else:
            raise DegeneracyError(
                f"bootstrap replicate {k}: {max_retries_per_replicate} resamples "
                f"in a row were rank-deficient; the sample set is too degenerate "
                f"to bootstrap"
            )
    return BootstrapEnsemble(replicates=replicates, N=N, seed=seed)


def sensitivity_ranking(asub: ActiveSubspace,
                        names: Sequence[str] | None = None,
                        ) -> list[tuple[str, float, float]]:
    """Rank parameters by |w_i| descending (ties keep index order).

    The components of w measure each parameter's global contribution to
    changes in the output along the active direction.
    """
    w = asub.w
    m = len(w)
    if names is None:
        names = [f"x{i + 1}" for i in range(m)]
    elif len(names) != m:
        raise DataError(f"{len(names)} names for {m} components")
    order = sorted(range(m), key=lambda i: (-abs(w[i]), i))
    return [(str(names[i]), float(w[i]), float(abs(w[i]))) for i in order]


def summary_data(X, f, asub: ActiveSubspace,
                 ensemble: BootstrapEnsemble | None = None) -> SummaryData:
    """Project samples onto the active variable y = w . x.

    When an ensemble is given, also returns the bootstrap cloud: every
    sample projected onto every replicate direction (N*M points).
    """
    X, f, M, m = _as_design(X, f)
    if len(asub.w) != m:
        raise DataError(f"direction has {len(asub.w)} components, samples have {m}")
    y = X @ asub.w

    order = np.argsort(y, kind="stable")
    fs = f[order]
    increasing_breaks = int(np.sum(fs[1:] < fs[:-1]))
    decreasing_breaks = int(np.sum(fs[1:] > fs[:-1]))
    discordant = min(increasing_breaks, decreasing_breaks)

    cloud = None
    if ensemble is not None:
        ys = X @ ensemble.replicates.T          # (M, N)
        cloud = np.column_stack([
            ys.ravel(order="F"),
            np.tile(f, ensemble.N),
        ])
    return SummaryData(y=y, f=f, discordant_pairs=discordant, bootstrap_cloud=cloud)


def estimate_c_gradient_oracle(grad_fn: Callable[[np.ndarray], np.ndarray],
                               m: int, n_mc: int, seed: int) -> CMatrixEstimate:
    """Monte Carlo estimate of C = E[grad f grad f^T] under the uniform density.

    Independent validation route for differentiable test functions: the
    leading eigenvector of C is the exact active direction for ridge
    functions, against which the least-squares estimate can be checked.
    """
    if n_mc < 1:
        raise DataError(f"n_mc must be >= 1, got {n_mc}")
    points = sample_hypercube(m, n_mc, seed)
    C = np.zeros((m, m))
    for x in points:
        g = np.asarray(grad_fn(x), dtype=float)
        if g.shape != (m,):
            raise DataError(f"gradient shape {g.shape} != ({m},)")
        if not np.all(np.isfinite(g)):
            raise EvaluatorError(f"non-finite gradient at {x}")
        C += np.outer(g, g)
    C /= n_mc
    C = (C + C.T) / 2.0

    evals, evecs = np.linalg.eigh(C)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    for i in range(m):
        evecs[:, i] = _apply_sign_convention(evecs[:, i])
    return CMatrixEstimate(C=C, eigenvalues=evals, eigenvectors=evecs, n_mc=n_mc)
