"""Exploiting the one-dimensional structure for uncertainty quantification.

Three computations, all downstream of the active direction w and the
quadratic link surrogate: output-range estimation at the two hypercube
corners extremizing w . x, inversion of an output threshold into a safe
input set with independent per-parameter ranges (largest inscribed
hyperrectangle), and CDF estimation by sampling the surrogate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr

from .errors import DataError
from .param_space import ParameterSpace, sample_hypercube
from .surrogate import QuadraticSurrogate

__all__ = [
    "RangeEstimate",
    "SafeSetResult",
    "InscribedBox",
    "CdfEstimate",
    "corner_extrema",
    "estimate_range",
    "invert_safe_set",
    "inscribed_box",
    "estimate_cdf",
]


def _check_unit(w) -> np.ndarray:
    w = np.asarray(w, dtype=float).ravel()
    if abs(np.linalg.norm(w) - 1.0) > 1e-9:
        raise DataError("w must be a unit vector")
    return w


# -- output range ------------------------------------------------------------

@dataclass(frozen=True)
class RangeEstimate:
    """Corner evaluations bracketing the output under the monotone heuristic.

    ``x_min``/``x_max`` extremize w . x. The interval [f_min, f_max] is
    ordered; when the trend is decreasing in the active variable the
    minimum value occurs at ``x_max``, flagged by ``inverted``.
    """

    x_min: np.ndarray
    x_max: np.ndarray
    f_min: float | None
    f_max: float | None
    validated: bool
    inverted: bool = False
    monotone_caveat: bool = False
    corner_errors: dict | None = None


def corner_extrema(w) -> tuple[np.ndarray, np.ndarray]:
    """Hypercube corners minimizing and maximizing w . x.

    Componentwise: x_max_i = sign(w_i) with zeros sent to +1, and
    x_min = -x_max. These are the candidate extremizers of any function
    monotone in the active variable.
    """
    w = _check_unit(w)
    x_max = np.where(w >= 0.0, 1.0, -1.0)
    return -x_max, x_max


def estimate_range(w, evaluate: Callable[[np.ndarray], float],
                   f_samples, discordant_pairs: int = 0) -> RangeEstimate:
    """Evaluate the black box at the two extremizing corners.

    ``f_samples`` are the already-computed sample outputs; ``validated``
    reports whether they all fall inside [f_min, f_max]. A nonzero
    ``discordant_pairs`` count from the summary data flags that the
    monotone reasoning behind the heuristic is not fully supported.
    """
    w = _check_unit(w)
    f_samples = np.asarray(f_samples, dtype=float).ravel()
    x_min, x_max = corner_extrema(w)

    values: dict[str, float | None] = {}
    errors: dict[str, str] = {}
    for key, corner in (("at_x_min", x_min), ("at_x_max", x_max)):
        try:
            values[key] = float(evaluate(corner))
        except Exception as exc:
            values[key] = None
            errors[key] = str(exc)

    at_min, at_max = values["at_x_min"], values["at_x_max"]
    inverted = at_min is not None and at_max is not None and at_min > at_max
    if inverted:
        f_min, f_max = at_max, at_min
    else:
        f_min, f_max = at_min, at_max
    validated = (
        f_min is not None and f_max is not None and len(f_samples) > 0
        and bool(np.all(f_samples >= f_min) and np.all(f_samples <= f_max))
    )
    return RangeEstimate(
        x_min=x_min, x_max=x_max, f_min=f_min, f_max=f_max,
        validated=validated, inverted=inverted,
        monotone_caveat=discordant_pairs > 0,
        corner_errors=errors or None,
    )


# -- safe set and inscribed box ----------------------------------------------

@dataclass(frozen=True)
class InscribedBox:
    """Side lengths of the largest box inside the safe half-space slab."""

    sides: np.ndarray  # each in [0, 2]
    empty: bool


def inscribed_box(w, y_max: float, x_min) -> InscribedBox:
    """Largest axis-aligned box in {x : w.x <= y_max} anchored at x_min.

    Maximizes sum(log s_i) subject to sum(|w_i| s_i) <= y_max - w.x_min
    and 0 <= s_i <= 2. The KKT solution is water-filling,
    s_i = min(2, lam / |w_i|), with the level lam found by bisection until
    the budget binds; zero-weight coordinates cost nothing and get the
    full side.
    """
    w = _check_unit(w)
    x_min = np.asarray(x_min, dtype=float).ravel()
    budget = float(y_max - np.dot(w, x_min))
    absw = np.abs(w)
    m = len(w)

    if budget < 0:
        return InscribedBox(sides=np.zeros(m), empty=True)
    if 2.0 * absw.sum() <= budget:
        return InscribedBox(sides=np.full(m, 2.0), empty=False)

    active = absw > 0.0

    def spent(lam: float) -> float:
        s = np.minimum(2.0, lam / absw[active])
        return float(np.dot(absw[active], s))

    lo, hi = 0.0, 2.0 * float(absw.max())
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if spent(mid) > budget:
            hi = mid
        else:
            lo = mid
    lam = 0.5 * (lo + hi)

    sides = np.full(m, 2.0)
    sides[active] = np.minimum(2.0, lam / absw[active])
    return InscribedBox(sides=sides, empty=False)


@dataclass(frozen=True)
class SafeSetResult:
    """Inversion of an output threshold into safe input ranges."""

    threshold: float
    level: float
    y_max: float | None
    feasible: str                       # "empty" | "partial" | "full"
    box_sides: np.ndarray
    x_anchor: np.ndarray                # corner the box grows from
    safe_ranges: list[dict]             # per-parameter physical intervals

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "level": self.level,
            "y_max": self.y_max,
            "feasible": self.feasible,
            "box_sides": [float(s) for s in self.box_sides],
            "x_anchor": [float(v) for v in self.x_anchor],
            "safe_ranges": self.safe_ranges,
        }


def _box_normalized_intervals(x_min: np.ndarray, sides: np.ndarray) -> np.ndarray:
    # The box spans from the anchor corner toward the opposite corner.
    lo = np.where(x_min < 0, -1.0, 1.0 - sides)
    hi = np.where(x_min < 0, -1.0 + sides, 1.0)
    return np.column_stack([lo, hi])


def invert_safe_set(surr: QuadraticSurrogate, w, threshold: float,
                    level: float = 0.99, space: ParameterSpace | None = None,
                    scan_points: int = 2048) -> SafeSetResult:
    """Find the active-variable cap y_max and the inscribed safe box.

    Scans the upper confidence bound over the active-variable domain
    [-||w||_1, +||w||_1]; y_max is the supremum of the contiguous feasible
    interval anchored at the left end, refined by bisection. The bound
    need not be monotone, so feasibility past the first crossing is
    ignored. With a space given, the box is reported as physical
    per-parameter intervals.
    """
    w = _check_unit(w)
    if space is not None and space.m != len(w):
        raise DataError(f"space has m={space.m}, direction has {len(w)}")
    l1 = float(np.abs(w).sum())
    x_min, _ = corner_extrema(w)

    ys = np.linspace(-l1, l1, scan_points)
    ub = surr.upper_confidence(ys, level)

    if ub[0] > threshold:
        feasible = "empty"
        y_max = None
        box = InscribedBox(sides=np.zeros(len(w)), empty=True)
    else:
        crossing = np.nonzero(ub > threshold)[0]
        if len(crossing) == 0:
            feasible = "full"
            y_max = l1
            box = InscribedBox(sides=np.full(len(w), 2.0), empty=False)
        else:
            feasible = "partial"
            i = int(crossing[0])
            lo, hi = ys[i - 1], ys[i]
            for _ in range(100):
                mid = 0.5 * (lo + hi)
                if surr.upper_confidence(mid, level) > threshold:
                    hi = mid
                else:
                    lo = mid
            y_max = float(lo)
            box = inscribed_box(w, y_max, x_min)

    intervals = _box_normalized_intervals(x_min, box.sides)
    safe_ranges = []
    for i in range(len(w)):
        entry = {
            "index": i,
            "normalized_min": float(intervals[i, 0]),
            "normalized_max": float(intervals[i, 1]),
            "restricted": bool(box.sides[i] < 2.0 - 1e-12),
        }
        if space is not None:
            spec = space.params[i]
            half_span = (spec.max - spec.min) / 2.0
            entry.update({
                "name": spec.name,
                "units": spec.units,
                "min": float(spec.min + (intervals[i, 0] + 1.0) * half_span),
                "max": float(spec.min + (intervals[i, 1] + 1.0) * half_span),
            })
        safe_ranges.append(entry)

    return SafeSetResult(
        threshold=float(threshold), level=float(level), y_max=y_max,
        feasible=feasible, box_sides=box.sides, x_anchor=x_min,
        safe_ranges=safe_ranges,
    )


# -- cumulative distribution function ----------------------------------------

@dataclass(frozen=True)
class CdfEstimate:
    """Gaussian-kernel CDF of the surrogate output under uniform inputs."""

    grid: np.ndarray
    cdf: np.ndarray
    n_samples: int
    bandwidth: float
    degenerate: bool = False
    _values: np.ndarray | None = None

    def evaluate(self, q):
        """Exact mixture (or step, when degenerate) CDF at arbitrary points."""
        q = np.asarray(q, dtype=float)
        if self.degenerate:
            c = float(self._values[0])
            at_atom = np.abs(q - c) <= 1e-12 * max(1.0, abs(c))
            out = np.where(at_atom, 0.5, np.where(q < c, 0.0, 1.0))
        else:
            out = ndtr(
                (np.atleast_1d(q)[:, None] - self._values[None, :]) / self.bandwidth
            ).mean(axis=1)
            if q.ndim == 0:
                out = out[0]
        return float(out) if q.ndim == 0 else np.asarray(out)


def estimate_cdf(surr: QuadraticSurrogate, w, m: int, n_samples: int = 5000,
                 seed: int = 0, grid_size: int = 513,
                 bandwidth: float | None = None,
                 grid_margin: float = 4.0) -> CdfEstimate:
    """Sample the surrogate over uniform inputs and smooth with a Gaussian KDE.

    Draws n_samples points on [-1, 1]^m (index-keyed streams, so the set
    is reproducible and parallel-safe), evaluates g(w . x), and smooths
    with the Silverman bandwidth 1.06 * std * n^(-1/5) unless one is
    given. The grid spans ``grid_margin`` bandwidths beyond the sample
    extremes. Constant output degenerates to a step CDF with zero
    bandwidth.
    """
    w = _check_unit(w)
    if len(w) != m:
        raise DataError(f"direction has {len(w)} components, expected {m}")
    if n_samples < 2:
        raise DataError(f"n_samples must be >= 2, got {n_samples}")
    if bandwidth is not None and bandwidth <= 0:
        raise DataError(f"bandwidth must be positive, got {bandwidth}")
    X = sample_hypercube(m, n_samples, seed)
    g = np.asarray(surr.predict(X @ w), dtype=float)

    std = float(np.std(g, ddof=1))
    scale = max(1.0, float(np.max(np.abs(g))))
    if std <= 1e-14 * scale:  # constant output up to float fuzz
        c = float(np.mean(g))
        margin = max(1.0, 1e-3 * abs(c))
        grid = np.array([c - margin, c, c + margin])
        return CdfEstimate(grid=grid, cdf=np.array([0.0, 0.5, 1.0]),
                           n_samples=n_samples, bandwidth=0.0,
                           degenerate=True, _values=np.array([c]))

    h = bandwidth if bandwidth is not None else 1.06 * std * n_samples ** (-0.2)
    grid = np.linspace(g.min() - grid_margin * h, g.max() + grid_margin * h,
                       grid_size)
    cdf = ndtr((grid[:, None] - g[None, :]) / h).mean(axis=1)
    return CdfEstimate(grid=grid, cdf=cdf, n_samples=n_samples, bandwidth=h,
                       degenerate=False, _values=g)
