"""
Evolving a pT filter
====================

A population of integer spiking networks is evolved to flag clusters with
p_t above 0.5 GeV. Each generation scores every network on a class-balanced
batch from one training file, keeps the elites and breeds the rest.

This run is deliberately small (about a minute); the default population of
100 and a few hundred generations give better filters.
"""

import tempfile

import numpy as np

from pixelsnn import (
    EvoConfig,
    FitnessSpec,
    TrainConfig,
    count_parameters,
    evaluate_genome,
    split_by_files,
    train,
    turn_on_curve,
    write_synthetic_files,
)

workdir = tempfile.mkdtemp()
manifest = write_synthetic_files(workdir, 1000, 5, seed=0)
train_m, test_m = split_by_files(manifest, 0.2, seed=0)
print(f"{len(train_m)} training files, {len(test_m)} test file(s)")

config = TrainConfig(
    evo=EvoConfig(population_size=50, max_generations=60, rng_seed=0),
    fitness=FitnessSpec("penalty", k=2.0, pt_cutoff=0.5),
    pattern="row-stride:26",
)


def show(report):
    if report.generation % 10 == 0:
        print(f"gen {report.generation:3d}  best {report.best:8.3f}  mean {report.mean:8.3f}  "
              f"size {report.neurons}n/{report.synapses}s")


genome, reports = train(train_m, config, on_report=show)
print(f"best network: {genome.n_neurons} neurons, {genome.n_synapses} synapses, "
      f"{count_parameters(genome)} parameters")

###############################################################################
# The turn-on curve shows how acceptance rises with true p_t.

report, preds, pts = evaluate_genome(genome, test_m, config, pt_ref=0.5)
print(report.to_text())
curve = turn_on_curve(preds, pts, [0.15, 0.3, 0.5, 0.7, 1.0, 2.0, 5.0, 20.0])
for lo, hi, n, eff in zip(curve.bin_edges[:-1], curve.bin_edges[1:], curve.counts, curve.efficiency):
    bar = "#" * int(round(eff * 30))
    print(f"{lo:5.2f}-{hi:5.2f} GeV  n={n:4d}  {eff:5.2f} {bar}")
print("mean acceptance above 0.5 GeV:", float(np.mean(preds[pts > 0.5])))
