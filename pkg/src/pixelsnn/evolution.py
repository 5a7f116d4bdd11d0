"""
Evolutionary optimisation of SNN structure and parameters.

A population of genomes is scored on a batch of encoded clusters, then the
next generation is built from elites (copied unchanged) plus children made by
cloning or crossing tournament winners and mutating the result.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .clusters import DatasetManifest, balanced_indices, load_dataset
from .encoding import EncoderParams, encode_batch
from .network import (
    DELAY_RANGE,
    THRESHOLD_RANGE,
    WEIGHT_RANGE,
    BiasSource,
    NetworkGenome,
    clamp_parameters,
    compile_network,
    decode_batch,
    simulate_batch,
)
from .reduction import ReductionPattern

log = logging.getLogger(__name__)

FITNESS_KINDS = ("accuracy", "penalty", "combination")


@dataclass(frozen=True)
class MutationRates:
    add_node: float = 0.1
    del_node: float = 0.1
    add_edge: float = 0.4
    del_edge: float = 0.4
    perturb_param: float = 0.9

    def __post_init__(self):
        for name, v in vars(self).items():
            if not 0 <= v <= 1:
                raise ValueError(f"mutation rate {name}={v} outside [0, 1]")


@dataclass(frozen=True)
class EvoConfig:
    population_size: int = 100
    starting_nodes: int = 50
    starting_edges: int = 800
    tournament_size: int = 4
    elitism_count: int = 2
    rates: MutationRates = field(default_factory=MutationRates)
    crossover_fraction: float = 0.8
    clone_fraction: float = 0.2
    max_generations: int = 500
    target_fitness: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not 0 <= self.elitism_count < self.population_size:
            raise ValueError("elitism_count must be in [0, population_size)")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")
        if self.starting_nodes < 0 or self.starting_edges < 0 or self.max_generations < 0:
            raise ValueError("starting sizes and max_generations must be non-negative")
        for name in ("crossover_fraction", "clone_fraction"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.crossover_fraction + self.clone_fraction <= 0:
            raise ValueError("crossover_fraction + clone_fraction must be positive")


@dataclass(frozen=True)
class FitnessSpec:
    kind: str = "penalty"
    k: float = 2.0  # tanh slope, 1/GeV
    pt_cutoff: float = 0.5

    def __post_init__(self):
        if self.kind not in FITNESS_KINDS:
            raise ValueError(f"fitness kind must be one of {FITNESS_KINDS}")
        if not self.k > 0:
            raise ValueError("k must be > 0")
        if not self.pt_cutoff > 0:
            raise ValueError("pt_cutoff must be > 0")


@dataclass(frozen=True)
class GenerationReport:
    generation: int
    best: float
    mean: float
    neurons: int
    synapses: int

    CSV_HEADER = "generation,best,mean,neurons,synapses"

    def csv_row(self) -> str:
        return f"{self.generation},{self.best!r},{self.mean!r},{self.neurons},{self.synapses}"


@dataclass(frozen=True, eq=False)
class EvalBatch:
    rasters: np.ndarray  # bool (n, channels, T)
    truths: np.ndarray  # int (n,)
    pts: np.ndarray  # float (n,)

    def __post_init__(self):
        if len(self.rasters) == 0:
            raise ValueError("evaluation batch is empty")
        if not len(self.rasters) == len(self.truths) == len(self.pts):
            raise ValueError("batch arrays differ in length")


# ---------------------------------------------------------------- fitness scores


def penalty_score(predictions, truths, pts, pt_cutoff: float, k: float) -> float:
    """Negative sum of misclassifications, each weighted by tanh(k |p_t - cutoff|).

    Errors in either direction count; samples far from the cutoff cost up to 1,
    samples sitting on it cost nothing.
    """
    y_o = np.asarray(predictions, dtype=float)
    y_t = np.asarray(truths, dtype=float)
    pts = np.asarray(pts, dtype=float)
    if not y_o.shape == y_t.shape == pts.shape:
        raise ValueError("predictions, truths and pts must have equal length")
    return -float(np.sum(np.abs(y_o - y_t) * np.tanh(k * np.abs(pts - pt_cutoff))))


def accuracy_score(predictions, truths) -> float:
    y_o = np.asarray(predictions)
    y_t = np.asarray(truths)
    if y_o.shape != y_t.shape:
        raise ValueError("predictions and truths must have equal length")
    if y_o.size == 0:
        raise ValueError("accuracy of an empty batch is undefined")
    return float(np.mean(y_o == y_t))


def score_predictions(predictions, batch: EvalBatch, spec: FitnessSpec, epoch_phase: float = 0.0) -> float:
    kind = spec.kind
    if kind == "combination":
        kind = "penalty" if epoch_phase < 0.5 else "accuracy"
    if kind == "penalty":
        return penalty_score(predictions, batch.truths, batch.pts, spec.pt_cutoff, spec.k)
    return accuracy_score(predictions, batch.truths)


def predict(genome, batch: EvalBatch, bias: BiasSource = BiasSource(), leak: str = "full") -> np.ndarray:
    return decode_batch(simulate_batch(genome, batch.rasters, bias, leak))


def evaluate_fitness(genome, batch: EvalBatch, spec: FitnessSpec, epoch_phase: float = 0.0,
                     bias: BiasSource = BiasSource(), leak: str = "full") -> float:
    """Simulate ``genome`` on every batch sample and score the decoded classes.

    ``epoch_phase`` is generation / max_generations; the combination fitness
    uses the penalty score for the first half of training, accuracy after.
    """
    return score_predictions(predict(genome, batch, bias, leak), batch, spec, epoch_phase)


# ------------------------------------------------------------- variation operators


def random_genome(n_inputs: int, n_outputs: int, n_hidden: int, n_edges: int,
                  rng: np.random.Generator) -> NetworkGenome:
    n_total = n_inputs + n_outputs + n_hidden
    thresholds = {i: int(v) for i, v in enumerate(rng.integers(THRESHOLD_RANGE[0], THRESHOLD_RANGE[1] + 1, n_total))}
    n_post = n_total - n_inputs
    n_edges = min(n_edges, n_total * n_post)
    flat = rng.choice(n_total * n_post, n_edges, replace=False)
    weights = rng.integers(WEIGHT_RANGE[0], WEIGHT_RANGE[1] + 1, n_edges)
    delays = rng.integers(DELAY_RANGE[0], DELAY_RANGE[1] + 1, n_edges)
    synapses = {
        (int(f // n_post), int(n_inputs + f % n_post)): (int(w), int(d))
        for f, w, d in zip(flat, weights, delays)
    }
    return NetworkGenome(n_inputs, n_outputs, thresholds, synapses)


def init_population(config: EvoConfig, io_counts: tuple[int, int],
                    seeds: Sequence[NetworkGenome] = (), rng: np.random.Generator | None = None) -> list[NetworkGenome]:
    """Seed genomes (clamped) first, then random genomes up to population_size."""
    n_in, n_out = io_counts
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    pop = []
    for g in seeds[:config.population_size]:
        if (g.n_inputs, g.n_outputs) != (n_in, n_out):
            raise ValueError(f"seed genome has io ({g.n_inputs}, {g.n_outputs}), expected {io_counts}")
        pop.append(clamp_parameters(g))
    while len(pop) < config.population_size:
        pop.append(random_genome(n_in, n_out, config.starting_nodes, config.starting_edges, rng))
    return pop


def tournament_select(population: Sequence, fitnesses: Sequence[float], size: int,
                      rng: np.random.Generator):
    """Draw ``size`` distinct candidates uniformly and return the fittest.

    Ties go to the candidate drawn first.
    """
    if size < 1:
        raise ValueError("tournament size must be >= 1")
    size = min(size, len(population))
    picks = rng.choice(len(population), size, replace=False)
    best = picks[0]
    for i in picks[1:]:
        if fitnesses[i] > fitnesses[best]:
            best = i
    return population[best]


def crossover(parent_a: NetworkGenome, parent_b: NetworkGenome, rng: np.random.Generator) -> NetworkGenome:
    """Endpoint-preserving graph crossover.

    Each neuron id in the union of the parents takes its threshold from a
    uniformly chosen parent and is dropped if that parent lacks it (io
    neurons are always kept). Synapses follow the same rule and are also
    dropped when an endpoint did not survive.
    """
    if (parent_a.n_inputs, parent_a.n_outputs) != (parent_b.n_inputs, parent_b.n_outputs):
        raise ValueError("parents have different io counts")
    parents = (parent_a, parent_b)
    n_io = parent_a.n_io
    thresholds = {}
    for nid in sorted(parent_a.thresholds.keys() | parent_b.thresholds.keys()):
        donor = parents[rng.integers(2)]
        if nid not in donor.thresholds:
            if nid >= n_io:
                continue
            donor = parent_a
        thresholds[nid] = donor.thresholds[nid]
    synapses = {}
    for key in sorted(parent_a.synapses.keys() | parent_b.synapses.keys()):
        donor = parents[rng.integers(2)]
        if key in donor.synapses and key[0] in thresholds and key[1] in thresholds:
            synapses[key] = donor.synapses[key]
    return clamp_parameters(NetworkGenome(parent_a.n_inputs, parent_a.n_outputs, thresholds, synapses))


def _random_param(bounds, rng) -> int:
    return int(rng.integers(bounds[0], bounds[1] + 1))


def _nudge(value: int, bounds, rng) -> int:
    if rng.random() < 0.5:
        return _random_param(bounds, rng)
    step = max(1, (bounds[1] - bounds[0]) // 16)
    return int(np.clip(value + rng.integers(-step, step + 1), bounds[0], bounds[1]))


def mutate(genome: NetworkGenome, rates: MutationRates, rng: np.random.Generator) -> NetworkGenome:
    """Apply each structural/parameter mutation with its configured probability.

    Returns a new genome; the input is left untouched.
    """
    g = genome.copy()
    ids = sorted(g.thresholds)

    if rng.random() < rates.add_node:
        nid = g.next_id()
        g.thresholds[nid] = _random_param(THRESHOLD_RANGE, rng)
        src = ids[rng.integers(len(ids))]
        dst_pool = [i for i in ids if i >= g.n_inputs]
        dst = dst_pool[rng.integers(len(dst_pool))]
        g.synapses[(src, nid)] = (_random_param(WEIGHT_RANGE, rng), _random_param(DELAY_RANGE, rng))
        g.synapses[(nid, dst)] = (_random_param(WEIGHT_RANGE, rng), _random_param(DELAY_RANGE, rng))
        ids = sorted(g.thresholds)

    if rng.random() < rates.del_node:
        hidden = g.hidden_ids
        if hidden:
            victim = hidden[rng.integers(len(hidden))]
            del g.thresholds[victim]
            g.synapses = {k: v for k, v in g.synapses.items() if victim not in k}
            ids = sorted(g.thresholds)

    if rng.random() < rates.add_edge:
        posts = [i for i in ids if i >= g.n_inputs]
        for _ in range(8):
            key = (ids[rng.integers(len(ids))], posts[rng.integers(len(posts))])
            if key not in g.synapses:
                g.synapses[key] = (_random_param(WEIGHT_RANGE, rng), _random_param(DELAY_RANGE, rng))
                break

    if rng.random() < rates.del_edge and g.synapses:
        keys = sorted(g.synapses)
        del g.synapses[keys[rng.integers(len(keys))]]

    if rng.random() < rates.perturb_param:
        tunable = [i for i in ids if i >= g.n_inputs]
        keys = sorted(g.synapses)
        choice = rng.integers(len(tunable) + 2 * len(keys))
        if choice < len(tunable):
            nid = tunable[choice]
            g.thresholds[nid] = _nudge(g.thresholds[nid], THRESHOLD_RANGE, rng)
        else:
            key = keys[(choice - len(tunable)) // 2]
            w, d = g.synapses[key]
            if (choice - len(tunable)) % 2 == 0:
                w = _nudge(w, WEIGHT_RANGE, rng)
            else:
                d = _nudge(d, DELAY_RANGE, rng)
            g.synapses[key] = (w, d)

    return clamp_parameters(g)


# ------------------------------------------------------------------------ training


class FileEncoder:
    """Loads and encodes training files on demand, caching the result per file."""

    def __init__(self, encoder: EncoderParams, pattern: ReductionPattern):
        self.encoder = encoder
        self.pattern = pattern
        self._cache: dict[str, tuple[np.ndarray, np.ndarray]] = {}

    def __call__(self, path: str) -> tuple[np.ndarray, np.ndarray]:
        if path not in self._cache:
            samples = load_dataset(path)
            if not samples:
                raise ValueError(f"{path}: no samples")
            rasters = encode_batch(samples, self.encoder, self.pattern)
            self._cache[path] = (rasters, np.array([s.p_t for s in samples]))
        return self._cache[path]

    def batch(self, path: str, pt_cutoff: float, balance_seed: int | None) -> EvalBatch:
        rasters, pts = self(path)
        idx = np.arange(len(pts)) if balance_seed is None else balanced_indices(pts, pt_cutoff, balance_seed)
        return EvalBatch(rasters[idx], (pts[idx] > pt_cutoff).astype(np.int64), pts[idx])


def _score_one(args) -> float:
    net, batch, spec, phase, bias, leak = args
    return evaluate_fitness(net, batch, spec, phase, bias, leak)


def evaluate_population(population: Sequence[NetworkGenome], batch: EvalBatch, spec: FitnessSpec,
                        epoch_phase: float, bias: BiasSource, leak: str,
                        executor: ProcessPoolExecutor | None = None) -> np.ndarray:
    """Fitness of every genome, in population order."""
    jobs = [(compile_network(g), batch, spec, epoch_phase, bias, leak) for g in population]
    if executor is None:
        return np.array([_score_one(j) for j in jobs])
    return np.array(list(executor.map(_score_one, jobs, chunksize=max(1, len(jobs) // 16))))


def evolve(train: DatasetManifest, config: EvoConfig, spec: FitnessSpec, encoder: EncoderParams,
           pattern: ReductionPattern, bias: BiasSource = BiasSource(), leak: str = "full",
           seeds: Sequence[NetworkGenome] = (), fixed_batch: bool = False, workers: int = 1,
           on_report: Callable[[GenerationReport], None] | None = None):
    """Train a network with the evolutionary loop.

    Every generation picks a random training file, balances its classes and
    scores the whole population on it (``fixed_batch`` reuses the first batch
    throughout). The population is evaluated ``max_generations + 1`` times:
    once initially and once after each round of reproduction.

    Returns:
        (best_genome, reports): the best genome ever scored, judged on the
        batch it was scored on, and one GenerationReport per evaluation.
    """
    if len(train) == 0:
        raise ValueError("training manifest is empty")
    rng = np.random.default_rng(config.rng_seed)
    n_inputs = 2 * pattern.group_count + int(bias.enabled)
    population = init_population(config, (n_inputs, 2), seeds, rng)
    files = FileEncoder(encoder, pattern)
    pick_rate = config.clone_fraction / (config.clone_fraction + config.crossover_fraction)

    def draw_batch():
        path = train.file_paths[rng.integers(len(train))]
        return files.batch(path, spec.pt_cutoff, int(rng.integers(2**32)))

    executor = ProcessPoolExecutor(workers) if workers > 1 else None
    best_genome, best_fit = None, -np.inf
    reports = []
    batch = draw_batch()
    try:
        for gen in range(config.max_generations + 1):
            if gen and not fixed_batch:
                batch = draw_batch()
            phase = gen / config.max_generations if config.max_generations else 0.0
            fit = evaluate_population(population, batch, spec, phase, bias, leak, executor)
            order = np.argsort(-fit, kind="stable")
            top = population[order[0]]
            report = GenerationReport(gen, float(fit[order[0]]), float(fit.mean()), top.n_neurons, top.n_synapses)
            reports.append(report)
            if on_report:
                on_report(report)
            log.debug("gen %d best %.4f mean %.4f", gen, report.best, report.mean)
            if fit[order[0]] > best_fit:
                best_fit, best_genome = float(fit[order[0]]), top
            if gen == config.max_generations:
                break
            if config.target_fitness is not None and best_fit >= config.target_fitness:
                break
            children = [population[i] for i in order[:config.elitism_count]]
            while len(children) < config.population_size:
                if rng.random() < pick_rate:
                    child = tournament_select(population, fit, config.tournament_size, rng)
                else:
                    a = tournament_select(population, fit, config.tournament_size, rng)
                    b = tournament_select(population, fit, config.tournament_size, rng)
                    child = crossover(a, b, rng)
                children.append(mutate(child, config.rates, rng))
            population = children
    finally:
        if executor is not None:
            executor.shutdown()
    return best_genome, reports
