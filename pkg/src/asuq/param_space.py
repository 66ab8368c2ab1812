"""Uncertain-parameter space: physical ranges and the map to [-1, 1]^m.

Each parameter has a physical range [min, max]; the toolkit works in
normalized coordinates where every parameter spans [-1, 1] and the input
density is uniform (the maximum-entropy choice for range-bounded inputs).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError

__all__ = [
    "ParameterSpec",
    "ParameterSpace",
    "hyshot_space",
    "unit_space",
    "sample_hypercube",
]


@dataclass(frozen=True)
class ParameterSpec:
    """One uncertain physical parameter with its range and nominal value."""

    name: str
    min: float
    nominal: float
    max: float
    units: str = ""

    def __post_init__(self):
        if not self.name:
            raise DataError("parameter name must be non-empty")
        if not (self.min < self.max):
            raise DataError(f"{self.name}: min {self.min} must be < max {self.max}")
        if not (self.min <= self.nominal <= self.max):
            raise DataError(
                f"{self.name}: nominal {self.nominal} outside [{self.min}, {self.max}]"
            )


class ParameterSpace:
    """Ordered collection of parameters with the affine map to [-1, 1]^m.

    Immutable after construction; all methods are safe for concurrent use.
    Coordinate i of the normalized space corresponds to ``params[i]``.
    """

    def __init__(self, params: Sequence[ParameterSpec]):
        params = tuple(params)
        if len(params) < 1:
            raise DataError("a parameter space needs at least one parameter")
        names = [p.name for p in params]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DataError(f"duplicate parameter names: {dupes}")
        self.params = params
        self.names = tuple(names)
        self._mins = np.array([p.min for p in params], dtype=float)
        self._maxs = np.array([p.max for p in params], dtype=float)
        self._spans = self._maxs - self._mins

    @property
    def m(self) -> int:
        return len(self.params)

    @property
    def mins(self) -> np.ndarray:
        return self._mins.copy()

    @property
    def maxs(self) -> np.ndarray:
        return self._maxs.copy()

    @property
    def nominals(self) -> np.ndarray:
        return np.array([p.nominal for p in self.params], dtype=float)

    def _check_length(self, v: np.ndarray, what: str) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.m:
            raise DataError(
                f"{what} has length {v.shape[-1]}, expected {self.m}"
            )
        return v

    def normalize(self, p) -> tuple[np.ndarray, np.ndarray]:
        """Map physical values to normalized coordinates.

        Returns ``(x, in_bounds)``. Out-of-range physical values are
        accepted (the map extrapolates); ``in_bounds`` marks which
        components fell inside their table range.
        """
        p = self._check_length(p, "physical vector")
        x = 2.0 * (p - self._mins) / self._spans - 1.0
        in_bounds = (p >= self._mins) & (p <= self._maxs)
        return x, in_bounds

    def denormalize(self, x) -> np.ndarray:
        """Map normalized coordinates back to physical values."""
        x = self._check_length(x, "normalized vector")
        return self._mins + (x + 1.0) * self._spans / 2.0

    def sample_uniform(self, M: int, seed: int) -> np.ndarray:
        """Draw M points i.i.d. uniform on [-1, 1]^m, shape (M, m).

        Sample j is a pure function of (seed, j), so parallel or resumed
        generation reproduces the serial sequence.
        """
        if M < 1:
            raise DataError(f"sample count must be >= 1, got {M}")
        return sample_hypercube(self.m, M, seed)

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> list[dict]:
        return [
            {"name": p.name, "min": p.min, "nominal": p.nominal, "max": p.max,
             "units": p.units}
            for p in self.params
        ]

    @classmethod
    def from_dict(cls, entries: Iterable[dict]) -> "ParameterSpace":
        specs = []
        for i, e in enumerate(entries):
            try:
                specs.append(ParameterSpec(
                    name=str(e["name"]),
                    min=float(e["min"]),
                    nominal=float(e["nominal"]),
                    max=float(e["max"]),
                    units=str(e.get("units", "")),
                ))
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(f"bad parameter entry {i}: {exc}") from exc
        return cls(specs)

    @classmethod
    def from_json(cls, path) -> "ParameterSpace":
        try:
            entries = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read parameter space {path}: {exc}") from exc
        if not isinstance(entries, list):
            raise DataError(f"{path}: expected a JSON array of parameter objects")
        return cls.from_dict(entries)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def hyshot_space() -> ParameterSpace:
    """The bundled seven-parameter HyShot II inflow space."""
    text = resources.files("asuq.data").joinpath("hyshot_space.json").read_text()
    return ParameterSpace.from_dict(json.loads(text))


def unit_space(m: int) -> ParameterSpace:
    """A placeholder space where physical and normalized coordinates agree."""
    return ParameterSpace(
        [ParameterSpec(name=f"x{i + 1}", min=-1.0, nominal=0.0, max=1.0)
         for i in range(m)]
    )


def sample_hypercube(m: int, n: int, seed: int, start: int = 0) -> np.ndarray:
    """Uniform samples on [-1, 1]^m with one RNG stream per sample index.

    Row j uses the stream keyed by (seed, start + j); concurrency and
    resumption therefore never change the generated set.
    """
    out = np.empty((n, m), dtype=float)
    for j in range(n):
        ss = np.random.SeedSequence(seed, spawn_key=(start + j,))
        out[j] = np.random.default_rng(ss).uniform(-1.0, 1.0, m)
    return out
