"""
Hyperparameter design-space exploration: sample configurations, evaluate them
in parallel, extract one results table.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .clusters import DatasetManifest
from .config import ConfigError, TrainConfig, parse_bool, parse_kv
from .evolution import FitnessSpec
from .metrics import PT_REFERENCE
from .network import BiasSource, count_parameters
from .pipeline import evaluate_genome, train
from .reduction import parse_pattern


@dataclass(frozen=True)
class SweepPoint:
    timescale: int
    pattern: str
    pt_cutoff: float
    fitness: str
    bias: bool

    @property
    def config_id(self) -> str:
        return f"t{self.timescale}_{self.pattern}_pt{self.pt_cutoff!r}_{self.fitness}_bias{int(self.bias)}"


@dataclass(frozen=True)
class SweepSpace:
    timescale: tuple[int, ...]
    pattern: tuple[str, ...]
    pt_cutoff: tuple[float, ...]
    fitness: tuple[str, ...]
    bias: tuple[bool, ...]

    AXES = ("timescale", "pattern", "pt_cutoff", "fitness", "bias")

    def __post_init__(self):
        for axis in self.AXES:
            if not getattr(self, axis):
                raise ValueError(f"sweep axis {axis!r} is empty")

    @property
    def size(self) -> int:
        return int(np.prod([len(getattr(self, a)) for a in self.AXES]))


DEFAULT_SPACE = SweepSpace(
    timescale=(10, 20, 40, 50, 200),
    pattern=(
        "full", "row-stride:13", "row-stride:26", "col-stride:21", "col-stride:42",
        "box:2x2", "box:3x3", "box:4x4", "box:2x4", "box:4x2",
        "box:2x8", "box:8x2", "box:4x8", "box:8x4",
    ),
    pt_cutoff=(0.2, 0.5, 0.7),
    fitness=("accuracy", "penalty", "combination"),
    bias=(True, False),
)


def load_space(path) -> SweepSpace:
    """Read a sweep definition: one comma-separated ``axis = v1, v2, ...`` line per axis."""
    kv = parse_kv(Path(path).read_text(), str(path))
    unknown = set(kv) - set(SweepSpace.AXES)
    if unknown:
        raise ConfigError(f"{path}: unknown sweep axes {sorted(unknown)}")
    convert = {"timescale": int, "pattern": str, "pt_cutoff": float, "fitness": str, "bias": parse_bool}
    values = {}
    for axis in SweepSpace.AXES:
        raw = kv.get(axis)
        if raw is None:
            values[axis] = getattr(DEFAULT_SPACE, axis)
            continue
        try:
            values[axis] = tuple(convert[axis](v.strip()) for v in raw.split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError(f"{path}: bad value on axis {axis!r}: {exc}") from None
    return SweepSpace(**values)


def enumerate_grid(space: SweepSpace) -> list[SweepPoint]:
    """Cartesian product, last axis varying fastest, in the order values are listed."""
    return [SweepPoint(*combo) for combo in itertools.product(*(getattr(space, a) for a in space.AXES))]


def sample_random(space: SweepSpace, n: int, seed: int) -> list[SweepPoint]:
    """``n`` distinct grid points drawn uniformly without replacement."""
    grid = enumerate_grid(space)
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > len(grid):
        raise ValueError(f"cannot draw {n} distinct configs from a grid of {len(grid)}")
    idx = np.random.default_rng(seed).choice(len(grid), n, replace=False)
    return [grid[i] for i in idx]


# samplers share the signature (space, n, seed) so other strategies can be registered
SAMPLERS: dict[str, Callable[[SweepSpace, int, int], list[SweepPoint]]] = {
    "grid": lambda space, n, seed: enumerate_grid(space),
    "random": sample_random,
}


def derive_seed(global_seed: int, config_id: str) -> int:
    digest = hashlib.sha256(f"{global_seed}:{config_id}".encode()).digest()
    return int.from_bytes(digest[:4], "little")


@dataclass(frozen=True)
class SweepResult:
    config_id: str
    point: SweepPoint
    seed: int
    status: str  # "ok" or "failed"
    signal_efficiency: float = float("nan")
    data_reduction: float = float("nan")
    accuracy: float = float("nan")
    f1: float = float("nan")
    neurons: int = 0
    synapses: int = 0
    parameters: int = 0
    wall_time: float = 0.0
    error: str = ""


def point_config(point: SweepPoint, base: TrainConfig, seed: int) -> TrainConfig:
    parse_pattern(point.pattern)
    return replace(
        base,
        evo=replace(base.evo, rng_seed=seed),
        fitness=FitnessSpec(point.fitness, base.fitness.k, point.pt_cutoff),
        encoder=replace(base.encoder, t_res=point.timescale),
        pattern=point.pattern,
        bias=BiasSource(point.bias, base.bias.period),
    )


def run_config(point: SweepPoint, train_manifest: DatasetManifest, test_manifest: DatasetManifest,
               base: TrainConfig, global_seed: int, pt_ref: float = PT_REFERENCE,
               normalization: str = "all") -> SweepResult:
    """Train and evaluate one configuration; failures become a failed row."""
    seed = derive_seed(global_seed, point.config_id)
    start = time.perf_counter()
    try:
        config = point_config(point, base, seed)
        genome, _ = train(train_manifest, config)
        report, _, _ = evaluate_genome(genome, test_manifest, config, pt_ref, normalization)
    except (ValueError, ArithmeticError) as exc:
        return SweepResult(point.config_id, point, seed, "failed",
                           wall_time=time.perf_counter() - start, error=f"{type(exc).__name__}: {exc}")
    return SweepResult(
        point.config_id, point, seed, "ok",
        report.signal_efficiency, report.data_reduction, report.accuracy, report.f1,
        genome.n_neurons, genome.n_synapses, count_parameters(genome),
        time.perf_counter() - start,
    )


def _run_job(args) -> SweepResult:
    return run_config(*args)


def run_sweep(configs: Sequence[SweepPoint], train_manifest: DatasetManifest, test_manifest: DatasetManifest,
              base: TrainConfig = TrainConfig(), workers: int = 1, global_seed: int = 0,
              pt_ref: float = PT_REFERENCE, normalization: str = "all") -> list[SweepResult]:
    """Evaluate every config; results come back in config order whatever the worker count."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    for path in (*train_manifest.file_paths, *test_manifest.file_paths):
        if not Path(path).is_file():
            raise FileNotFoundError(f"dataset file missing: {path}")
    # each config trains serially; parallelism lives at the sweep level
    base = replace(base, workers=1)
    jobs = [(p, train_manifest, test_manifest, base, global_seed, pt_ref, normalization) for p in configs]
    if workers == 1 or len(jobs) <= 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(_run_job, jobs))


TABLE_COLUMNS = (
    "config_id", "timescale", "pattern", "pt_cutoff", "fitness", "bias", "seed", "status",
    "signal_efficiency", "data_reduction", "accuracy", "f1", "neurons", "synapses", "parameters",
)


def extract_table(results: Sequence[SweepResult], path, include_wall_time: bool = False) -> None:
    """Write one CSV row per result.

    Wall time is left out unless asked for, so reruns produce identical files.
    """
    header = list(TABLE_COLUMNS) + (["wall_time_s"] if include_wall_time else []) + ["error"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in results:
            p = r.point
            row = [
                r.config_id, p.timescale, p.pattern, repr(p.pt_cutoff), p.fitness, str(p.bias).lower(),
                r.seed, r.status, repr(r.signal_efficiency), repr(r.data_reduction), repr(r.accuracy),
                repr(r.f1), r.neurons, r.synapses, r.parameters,
            ]
            if include_wall_time:
                row.append(f"{r.wall_time:.3f}")
            row.append(r.error)
            w.writerow(row)


def load_table(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
