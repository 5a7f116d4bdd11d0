"""
A small hyperparameter sweep
============================

Configurations are drawn from the full grid of timescales, reduction
patterns, cutoffs, fitness functions and bias settings, trained in parallel
and collected into one CSV table. Each configuration's seed is derived from
the sweep seed and its id, so the table does not depend on the worker count.
"""

import tempfile
from pathlib import Path

from pixelsnn import DEFAULT_SPACE, EvoConfig, TrainConfig, split_by_files, write_synthetic_files
from pixelsnn.sweep import extract_table, load_table, run_sweep, sample_random

workdir = Path(tempfile.mkdtemp())
manifest = write_synthetic_files(workdir / "data", 400, 4, seed=1)
train_m, test_m = split_by_files(manifest, 0.25, seed=1)

print(f"full grid: {DEFAULT_SPACE.size} configurations")
configs = sample_random(DEFAULT_SPACE, 6, seed=1)

base = TrainConfig(evo=EvoConfig(population_size=16, starting_nodes=8, starting_edges=80, max_generations=10))
results = run_sweep(configs, train_m, test_m, base, workers=2, global_seed=1, pt_ref=1.0)
extract_table(results, workdir / "sweep.csv")

for row in load_table(workdir / "sweep.csv"):
    print(f"{row['config_id']:<42} {row['status']:<6} acc={float(row['accuracy']):.3f} "
          f"eff={float(row['signal_efficiency']):.3f} params={row['parameters']}")
