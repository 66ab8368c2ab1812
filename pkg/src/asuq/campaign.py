"""Evaluation campaigns: sampled points, black-box results, persistence.

A campaign records the normalized sample points, their physical
counterparts, and the scalar quantity of interest returned by an
evaluator. Evaluators are callables taking an :class:`EvalRequest`;
built-in synthetic ridges, external subprocess commands, and
pre-recorded CSV datasets are supported.
"""

from __future__ import annotations

import hashlib
import json
import math
import shlex
import subprocess
import threading
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DataError, EvaluatorError, UsageError
from .param_space import ParameterSpace, unit_space

__all__ = [
    "RunRecord",
    "EvalRequest",
    "Campaign",
    "new_campaign",
    "evaluate_campaign",
    "save_campaign",
    "load_campaign",
    "load_dataset",
    "save_dataset",
    "synthetic_ridge",
    "ridge_direction",
    "CommandEvaluator",
    "RIDGE_LINKS",
]


@dataclass
class RunRecord:
    """One evaluation of the quantity of interest at a sampled point.

    ``role`` distinguishes the original design samples from auxiliary
    corner validation runs, which never feed the direction fits.
    """

    index: int
    x: np.ndarray
    p: np.ndarray
    status: str = "pending"  # pending | running | done | failed
    f: float | None = None
    wall_time: float | None = None
    error: str | None = None
    role: str = "sample"     # sample | corner

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.p = np.asarray(self.p, dtype=float)


@dataclass(frozen=True)
class EvalRequest:
    """What an evaluator sees for a single run."""

    index: int
    x: np.ndarray
    params: dict[str, float]
    condition: dict


class Campaign:
    """A parameter space plus the ordered run records sampled from it."""

    def __init__(self, space: ParameterSpace, seed: int,
                 condition: Mapping | None = None,
                 runs: Sequence[RunRecord] | None = None):
        self.space = space
        self.seed = int(seed)
        self.condition = dict(condition or {})
        self.runs = list(runs or [])
        self._check_indices()

    def _check_indices(self):
        for i, rec in enumerate(self.runs):
            if rec.index != i:
                raise DataError(
                    f"run indices must be contiguous from 0; "
                    f"position {i} holds index {rec.index}"
                )

    @property
    def m(self) -> int:
        return self.space.m

    def done_runs(self) -> list[RunRecord]:
        return [r for r in self.runs if r.status == "done"]

    def pending_runs(self) -> list[RunRecord]:
        return [r for r in self.runs if r.status == "pending"]

    def failed_runs(self) -> list[RunRecord]:
        return [r for r in self.runs if r.status == "failed"]

    def design_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Stack done design runs into (X, f).

        Failed runs never contribute (excluded, not imputed), and corner
        validation runs are excluded so re-analysis after a range
        estimate reproduces the original fit.
        """
        done = [r for r in self.done_runs() if r.role == "sample"]
        if not done:
            raise DataError("campaign has no completed runs")
        if len(done) < self.m + 1:
            warnings.warn(
                f"only {len(done)} usable runs for m={self.m}; direction "
                f"fits need at least m+1 = {self.m + 1}", stacklevel=2)
        X = np.array([r.x for r in done])
        f = np.array([r.f for r in done], dtype=float)
        return X, f

    def append_point(self, x: np.ndarray, role: str = "sample") -> RunRecord:
        """Add one pending run at a caller-chosen normalized point."""
        x = np.asarray(x, dtype=float)
        rec = RunRecord(index=len(self.runs), x=x, p=self.space.denormalize(x),
                        role=role)
        self.runs.append(rec)
        return rec


def new_campaign(space: ParameterSpace, M: int, seed: int,
                 condition: Mapping | None = None) -> Campaign:
    """Create a campaign with M pending runs sampled uniformly."""
    X = space.sample_uniform(M, seed)
    runs = [
        RunRecord(index=j, x=X[j], p=space.denormalize(X[j]))
        for j in range(M)
    ]
    return Campaign(space, seed, condition, runs)


# -- evaluation ------------------------------------------------------------

def evaluate_campaign(campaign: Campaign,
                      evaluator: Callable[[EvalRequest], float],
                      max_concurrency: int = 1,
                      record_timing: bool = False,
                      checkpoint: Callable[[Campaign], None] | None = None,
                      runs: Sequence[RunRecord] | None = None,
                      ) -> Campaign:
    """Run the evaluator on every pending run (or just the given ones).

    Each result depends only on the run's own point, so the final table is
    independent of ``max_concurrency`` and of completion order. Runs that
    raise are marked failed with the diagnostic captured; already-done
    runs are never touched (resume semantics). Raises
    :class:`EvaluatorError` only if every attempted run fails.
    """
    if max_concurrency < 1:
        raise UsageError(f"max_concurrency must be >= 1, got {max_concurrency}")
    pending = [r for r in (campaign.pending_runs() if runs is None else runs)
               if r.status == "pending"]
    if not pending:
        return campaign

    lock = threading.Lock()

    def _one(rec: RunRecord):
        req = EvalRequest(
            index=rec.index,
            x=rec.x.copy(),
            params={n: float(v) for n, v in zip(campaign.space.names, rec.p)},
            condition=dict(campaign.condition),
        )
        t0 = time.perf_counter()
        try:
            value = float(evaluator(req))
            if not math.isfinite(value):
                raise EvaluatorError(f"run {rec.index}: non-finite result {value}")
        except Exception as exc:
            with lock:
                rec.status = "failed"
                rec.error = str(exc)
                rec.f = None
                if checkpoint is not None:
                    checkpoint(campaign)
            return
        with lock:
            rec.status = "done"
            rec.f = value
            rec.error = None
            if record_timing:
                rec.wall_time = time.perf_counter() - t0
            if checkpoint is not None:
                checkpoint(campaign)

    if max_concurrency == 1:
        for rec in pending:
            _one(rec)
    else:
        with ThreadPoolExecutor(max_workers=max_concurrency) as pool:
            list(pool.map(_one, pending))

    if all(r.status == "failed" for r in pending):
        first = pending[0]
        raise EvaluatorError(
            f"all {len(pending)} attempted runs failed "
            f"(first diagnostic: {first.error})"
        )
    return campaign


# -- persistence -----------------------------------------------------------

def _record_to_dict(rec: RunRecord) -> dict:
    d = {
        "index": rec.index,
        "x": [float(v) for v in rec.x],
        "p": [float(v) for v in rec.p],
        "status": rec.status,
    }
    if rec.f is not None:
        d["f"] = float(rec.f)
    if rec.wall_time is not None:
        d["wall_time"] = float(rec.wall_time)
    if rec.error is not None:
        d["error"] = rec.error
    if rec.role != "sample":
        d["role"] = rec.role
    return d


def save_campaign(campaign: Campaign, path) -> None:
    """Write the campaign manifest as JSON (deterministic formatting)."""
    manifest = {
        "space": campaign.space.to_dict(),
        "seed": campaign.seed,
        "condition": {k: campaign.condition[k] for k in sorted(campaign.condition)},
        "runs": [_record_to_dict(r) for r in campaign.runs],
    }
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n")


def load_campaign(path) -> Campaign:
    try:
        manifest = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read campaign {path}: {exc}") from exc
    for key in ("space", "seed", "runs"):
        if key not in manifest:
            raise DataError(f"campaign manifest missing '{key}'")
    space = ParameterSpace.from_dict(manifest["space"])
    runs = []
    for rd in manifest["runs"]:
        try:
            rec = RunRecord(
                index=int(rd["index"]),
                x=np.array(rd["x"], dtype=float),
                p=np.array(rd["p"], dtype=float),
                status=str(rd["status"]),
                f=None if rd.get("f") is None else float(rd["f"]),
                wall_time=None if rd.get("wall_time") is None else float(rd["wall_time"]),
                error=rd.get("error"),
                role=str(rd.get("role", "sample")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"bad run record: {exc}") from exc
        if rec.status == "done" and (rec.f is None or not math.isfinite(rec.f)):
            raise DataError(f"run {rec.index} marked done without a finite result")
        if rec.status == "running":
            rec.status = "pending"  # interrupted run: retry on resume
        runs.append(rec)
    return Campaign(space, manifest["seed"], manifest.get("condition"), runs)


def load_dataset(path, space: ParameterSpace | None = None) -> Campaign:
    """Ingest a pre-computed samples CSV (header x1,...,xm,f) as done runs.

    Without a space, coordinates are taken at face value on [-1, 1]^m and
    physical values equal normalized ones.
    """
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read dataset {path}: {exc}") from exc
    rows = [(i + 1, ln.strip()) for i, ln in enumerate(lines)
            if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise DataError(f"{path}: empty dataset")
    header_line, header = rows[0]
    cols = [c.strip() for c in header.split(",")]
    if len(cols) < 2 or cols[-1] != "f" or \
            any(c != f"x{i + 1}" for i, c in enumerate(cols[:-1])):
        raise DataError(
            f"{path}:{header_line}: header must be x1,...,xm,f; got {header!r}"
        )
    m = len(cols) - 1
    if space is None:
        space = unit_space(m)
    elif space.m != m:
        raise DataError(f"{path}: header implies m={m}, space has m={space.m}")

    runs = []
    for lineno, row in rows[1:]:
        parts = row.split(",")
        if len(parts) != m + 1:
            raise DataError(
                f"{path}:{lineno}: expected {m + 1} columns, got {len(parts)}"
            )
        try:
            values = [float(v) for v in parts]
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
        x = np.array(values[:m])
        fval = values[m]
        if not math.isfinite(fval):
            raise DataError(f"{path}:{lineno}: non-finite result {parts[m]!r}")
        runs.append(RunRecord(index=len(runs), x=x, p=space.denormalize(x),
                              status="done", f=fval))
    return Campaign(space, seed=0, condition=None, runs=runs)


def save_dataset(campaign: Campaign, path) -> None:
    """Write done runs as the samples CSV (header x1,...,xm,f)."""
    m = campaign.m
    lines = [",".join([f"x{i + 1}" for i in range(m)] + ["f"])]
    for rec in campaign.done_runs():
        lines.append(",".join([repr(float(v)) for v in rec.x] + [repr(float(rec.f))]))
    Path(path).write_text("\n".join(lines) + "\n")


# -- built-in synthetic evaluators ------------------------------------------

RIDGE_LINKS: dict[str, Callable[[float], float]] = {
    "linear": lambda t: t,
    "cubic-monotone": lambda t: t ** 3 + t,
    "logistic": lambda t: 1.0 / (1.0 + math.exp(-t)),
    "quadratic": lambda t: t ** 2,
}


def ridge_direction(m: int, seed: int) -> np.ndarray:
    """Deterministic random unit vector used as a synthetic true direction."""
    g = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0xA5,))).standard_normal(m)
    return g / np.linalg.norm(g)


def _pseudo_noise(x: np.ndarray) -> float:
    """Standard-normal draw keyed deterministically by the point itself."""
    digest = hashlib.blake2b(np.ascontiguousarray(x, dtype=float).tobytes(),
                             digest_size=8).digest()
    return float(np.random.default_rng(int.from_bytes(digest, "little")).standard_normal())


def synthetic_ridge(w_true: np.ndarray, link: str = "linear",
                    noise: float = 0.0) -> Callable[[EvalRequest], float]:
    """Evaluator computing g(w_true . x) for a monotone (or quadratic) link.

    Optional noise adds a deterministic pseudo-random perturbation keyed
    by x, so repeated evaluation of the same point is reproducible.
    """
    w_true = np.asarray(w_true, dtype=float)
    if abs(np.linalg.norm(w_true) - 1.0) > 1e-9:
        raise DataError("w_true must be a unit vector")
    if link not in RIDGE_LINKS:
        raise UsageError(
            f"unknown link {link!r}; choose from {sorted(RIDGE_LINKS)}"
        )
    if noise < 0:
        raise UsageError(f"noise must be >= 0, got {noise}")
    g = RIDGE_LINKS[link]

    def evaluator(req: EvalRequest) -> float:
        y = float(np.dot(w_true, req.x))
        value = g(y)
        if noise > 0:
            value += noise * _pseudo_noise(req.x)
        return value

    return evaluator


# -- external command evaluator ---------------------------------------------

@dataclass
class CommandEvaluator:
    """Run a user command per point via the JSON stdin/stdout protocol.

    The command receives ``{"index": n, "params": {...}, "condition": {...}}``
    on standard input and must print ``{"qoi": <real>}`` and exit 0.
    """

    argv: Sequence[str]
    timeout: float | None = None

    def __post_init__(self):
        if isinstance(self.argv, str):
            self.argv = shlex.split(self.argv)
        if not self.argv:
            raise UsageError("empty evaluator command")

    def __call__(self, req: EvalRequest) -> float:
        payload = json.dumps({
            "index": req.index,
            "params": req.params,
            "condition": req.condition,
        })
        try:
            proc = subprocess.run(
                list(self.argv), input=payload, capture_output=True,
                text=True, timeout=self.timeout,
            )
        except subprocess.TimeoutExpired as exc:
            raise EvaluatorError(
                f"run {req.index}: evaluator timed out after {self.timeout}s"
            ) from exc
        except OSError as exc:
            raise EvaluatorError(f"run {req.index}: cannot launch evaluator: {exc}") from exc
        if proc.returncode != 0:
            raise EvaluatorError(
                f"run {req.index}: evaluator exited {proc.returncode}: "
                f"{proc.stderr.strip()[:200]}"
            )
        # The qoi object may be preceded by solver chatter; use the last line
        # that parses as JSON.
        for line in reversed(proc.stdout.strip().splitlines()):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                continue
            if isinstance(obj, dict) and "qoi" in obj:
                try:
                    return float(obj["qoi"])
                except (TypeError, ValueError) as exc:
                    raise EvaluatorError(
                        f"run {req.index}: non-numeric qoi {obj['qoi']!r}"
                    ) from exc
        raise EvaluatorError(
            f"run {req.index}: no {{\"qoi\": ...}} object on evaluator stdout"
        )
