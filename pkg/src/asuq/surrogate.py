"""Univariate quadratic link function of the active variable.

Models the output as g(y) = c0 + c1*y + c2*y^2 from the projected pairs
(y_j, f_j), reports R^2 as a discrepancy measure, and provides the
pointwise upper confidence bound of the regression curve. The bound is a
mean-response band used purely as a conservative factor: the responses
are deterministic, so no probabilistic coverage statement attaches to it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import t as student_t

from .errors import DataError, DegeneracyError

__all__ = ["QuadraticSurrogate", "fit_quadratic"]


def _design_rows(y: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones_like(y), y, y * y])


@dataclass(frozen=True)
class QuadraticSurrogate:
    """Fitted quadratic of the active variable with band machinery.

    ``sigma2_hat`` is RSS/(M-3); it is None for an exact three-point fit,
    in which case confidence bounds are unavailable. ``zero_variance``
    flags constant data, where R^2 = 1 is adopted by convention.
    """

    coeffs: np.ndarray            # (c0, c1, c2)
    sigma2_hat: float | None
    gram_inverse: np.ndarray      # (T^T T)^-1 for rows t(y) = [1, y, y^2]
    M: int
    r_squared: float
    y_domain: tuple[float, float]
    zero_variance: bool = False

    def in_domain(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return (y >= self.y_domain[0]) & (y <= self.y_domain[1])

    def predict(self, y):
        """Evaluate c0 + c1*y + c2*y^2 (extrapolation permitted, warned)."""
        y = np.asarray(y, dtype=float)
        if y.size and not np.all(self.in_domain(y)):
            warnings.warn(
                "evaluating the surrogate outside its fitted active-variable "
                f"domain {self.y_domain}", stacklevel=2)
        c0, c1, c2 = self.coeffs
        out = c0 + y * (c1 + y * c2)
        return float(out) if np.isscalar(out) or out.ndim == 0 else out

    def band_halfwidth(self, y, level: float = 0.99):
        """Half-width of the pointwise mean-response band at the given level.

        The Student-t quantile comes from the incomplete-beta inversion
        (accurate to well under 1e-8).
        """
        if self.sigma2_hat is None:
            raise DegeneracyError(
                "confidence bounds unavailable: exact fit with M = 3 leaves "
                "no residual degrees of freedom"
            )
        if not (0.5 < level < 1.0):
            raise DataError(f"confidence level must be in (0.5, 1), got {level}")
        y = np.asarray(y, dtype=float)
        rows = _design_rows(np.atleast_1d(y))
        leverage = np.einsum("ij,jk,ik->i", rows, self.gram_inverse, rows)
        tq = float(student_t.ppf(level, self.M - 3))
        half = tq * np.sqrt(self.sigma2_hat * leverage)
        return float(half[0]) if np.isscalar(y) or y.ndim == 0 else half

    def upper_confidence(self, y, level: float = 0.99):
        """predict(y) plus the band half-width; always >= predict(y)."""
        return self.predict(y) + self.band_halfwidth(y, level)

    def to_dict(self) -> dict:
        return {
            "coeffs": [float(c) for c in self.coeffs],
            "sigma2_hat": None if self.sigma2_hat is None else float(self.sigma2_hat),
            "gram_inverse": [[float(v) for v in row] for row in self.gram_inverse],
            "M": self.M,
            "r_squared": float(self.r_squared),
            "y_domain": [float(self.y_domain[0]), float(self.y_domain[1])],
            "zero_variance": self.zero_variance,
        }


def fit_quadratic(y, f, y_domain: tuple[float, float] | None = None
                  ) -> QuadraticSurrogate:
    """Least-squares quadratic over the pairs (y_j, f_j).

    Needs at least three distinct abscissae; with exactly M = 3 points the
    fit interpolates and the residual variance is undefined. R^2 is
    1 - RSS/TSS about the mean of f, reported as 1 with ``zero_variance``
    set when the data are constant. The degree is fixed at 2.
    """
    y = np.asarray(y, dtype=float).ravel()
    f = np.asarray(f, dtype=float).ravel()
    if len(y) != len(f):
        raise DataError(f"{len(y)} abscissae but {len(f)} responses")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(f))):
        raise DataError("non-finite values in the surrogate training pairs")
    M = len(y)
    if M < 3:
        raise DegeneracyError(f"M={M} points cannot determine a quadratic")
    if len(np.unique(y)) < 3:
        raise DegeneracyError(
            "fewer than 3 distinct active-variable values; the quadratic "
            "design is rank-deficient"
        )

    T = _design_rows(y)
    coeffs, _, rank, _ = np.linalg.lstsq(T, f, rcond=1e-12)
    if rank < 3:
        raise DegeneracyError("quadratic design matrix is rank-deficient")

    resid = T @ coeffs - f
    rss = float(resid @ resid)
    tss = float(np.sum((f - f.mean()) ** 2))
    zero_variance = tss == 0.0
    r_squared = 1.0 if zero_variance else 1.0 - rss / tss

    gram = T.T @ T
    gram_inverse = np.linalg.inv(gram)
    gram_inverse = (gram_inverse + gram_inverse.T) / 2.0

    sigma2_hat = rss / (M - 3) if M > 3 else None
    if y_domain is None:
        y_domain = (float(y.min()), float(y.max()))
    return QuadraticSurrogate(
        coeffs=coeffs,
        sigma2_hat=sigma2_hat,
        gram_inverse=gram_inverse,
        M=M,
        r_squared=r_squared,
        y_domain=(float(y_domain[0]), float(y_domain[1])),
        zero_variance=zero_variance,
    )
