"""
Integer leaky integrate-and-fire networks and their discrete-time simulation.

Neuron ids are laid out as: inputs ``0 .. n_inputs-1`` (the bias neuron, if
any, is the last input), outputs ``n_inputs .. n_inputs+n_outputs-1``, and
hidden neurons above that. Parameters live in a fixed-precision envelope:
8-bit unsigned thresholds, 9-bit signed weights and 4-bit unsigned delays.

Update rule for timestep t:

1. input neurons fire iff their raster channel is set at t (the bias neuron
   fires when ``t % period == 0``);
2. a synapse whose pre-neuron fired at t' delivers its weight at
   ``t' + delay + 1``;
3. a non-input neuron that receives at least one delivery adds the charge to
   its potential and fires if the potential reaches its threshold, resetting
   to zero;
4. with ``leak="full"`` a neuron that receives nothing at t drops to zero;
   with ``leak="none"`` it keeps its potential.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numba
import numpy as np

THRESHOLD_RANGE = (0, 255)
WEIGHT_RANGE = (-256, 255)
DELAY_RANGE = (0, 15)
FORMAT_VERSION = "pixelsnn-genome/1"
LEAK_MODES = ("full", "none")


class GenomeFormatError(ValueError):
    pass


@dataclass(frozen=True)
class BiasSource:
    enabled: bool = False
    period: int = 1

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("bias period must be >= 1")


@dataclass
class NetworkGenome:
    """An any-to-any SNN graph.

    ``thresholds`` maps neuron id -> threshold and lists every neuron.
    ``synapses`` maps (pre, post) -> (weight, delay); the dict key makes
    duplicate edges impossible. Synapses never target input neurons.
    """

    n_inputs: int
    n_outputs: int = 2
    thresholds: dict[int, int] = field(default_factory=dict)
    synapses: dict[tuple[int, int], tuple[int, int]] = field(default_factory=dict)

    @classmethod
    def empty(cls, n_inputs: int, n_outputs: int = 2, threshold: int = 0) -> "NetworkGenome":
        return cls(n_inputs, n_outputs, {i: threshold for i in range(n_inputs + n_outputs)})

    @property
    def n_io(self) -> int:
        return self.n_inputs + self.n_outputs

    @property
    def output_ids(self) -> range:
        return range(self.n_inputs, self.n_io)

    @property
    def hidden_ids(self) -> list[int]:
        return sorted(i for i in self.thresholds if i >= self.n_io)

    @property
    def n_neurons(self) -> int:
        return len(self.thresholds)

    @property
    def n_synapses(self) -> int:
        return len(self.synapses)

    def role(self, nid: int) -> str:
        if nid < self.n_inputs:
            return "input"
        return "output" if nid < self.n_io else "hidden"

    def copy(self) -> "NetworkGenome":
        return NetworkGenome(self.n_inputs, self.n_outputs, dict(self.thresholds), dict(self.synapses))

    def next_id(self) -> int:
        return max(self.thresholds) + 1

    def validate(self) -> None:
        """Raise ValueError unless every structural and precision invariant holds."""
        if self.n_inputs < 1 or self.n_outputs < 1:
            raise ValueError("need at least one input and one output")
        for i in range(self.n_io):
            if i not in self.thresholds:
                raise ValueError(f"io neuron {i} missing")
        lo, hi = THRESHOLD_RANGE
        for nid, th in self.thresholds.items():
            if nid < 0 or not lo <= th <= hi:
                raise ValueError(f"neuron {nid}: threshold {th} outside [{lo}, {hi}]")
        for (pre, post), (w, d) in self.synapses.items():
            if pre not in self.thresholds or post not in self.thresholds:
                raise ValueError(f"synapse {pre}->{post} references a missing neuron")
            if post < self.n_inputs:
                raise ValueError(f"synapse {pre}->{post} targets an input neuron")
            if not WEIGHT_RANGE[0] <= w <= WEIGHT_RANGE[1]:
                raise ValueError(f"synapse {pre}->{post}: weight {w} outside {WEIGHT_RANGE}")
            if not DELAY_RANGE[0] <= d <= DELAY_RANGE[1]:
                raise ValueError(f"synapse {pre}->{post}: delay {d} outside {DELAY_RANGE}")


def _clip(v, bounds):
    return int(min(max(v, bounds[0]), bounds[1]))


def clamp_parameters(genome: NetworkGenome) -> NetworkGenome:
    """Return a copy with every parameter clipped into its integer range."""
    return NetworkGenome(
        genome.n_inputs,
        genome.n_outputs,
        {n: _clip(t, THRESHOLD_RANGE) for n, t in genome.thresholds.items()},
        {k: (_clip(w, WEIGHT_RANGE), _clip(d, DELAY_RANGE)) for k, (w, d) in genome.synapses.items()},
    )


def count_parameters(genome: NetworkGenome) -> int:
    """One threshold per neuron plus a weight and a delay per synapse."""
    return genome.n_neurons + 2 * genome.n_synapses


# ------------------------------------------------------------------ serialization


def serialize_genome(genome: NetworkGenome) -> str:
    doc = {
        "format": FORMAT_VERSION,
        "n_inputs": genome.n_inputs,
        "n_outputs": genome.n_outputs,
        "nodes": [
            {"id": n, "role": genome.role(n), "threshold": genome.thresholds[n]}
            for n in sorted(genome.thresholds)
        ],
        "edges": [
            {"pre": pre, "post": post, "weight": w, "delay": d}
            for (pre, post), (w, d) in sorted(genome.synapses.items())
        ],
    }
    return json.dumps(doc, indent=1) + "\n"


def _int_field(obj, key, where):
    v = obj.get(key) if isinstance(obj, dict) else None
    if type(v) is not int:
        raise GenomeFormatError(f"{where}: field {key!r} must be an integer")
    return v


def deserialize_genome(text: str) -> NetworkGenome:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GenomeFormatError(f"not a genome document: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_VERSION:
        raise GenomeFormatError(f"missing or unsupported format tag (expected {FORMAT_VERSION!r})")
    n_in = _int_field(doc, "n_inputs", "header")
    n_out = _int_field(doc, "n_outputs", "header")
    thresholds: dict[int, int] = {}
    for i, node in enumerate(doc.get("nodes", [])):
        nid = _int_field(node, "id", f"node {i}")
        if nid in thresholds:
            raise GenomeFormatError(f"duplicate node id {nid}")
        thresholds[nid] = _int_field(node, "threshold", f"node {nid}")
    synapses: dict[tuple[int, int], tuple[int, int]] = {}
    for i, edge in enumerate(doc.get("edges", [])):
        key = (_int_field(edge, "pre", f"edge {i}"), _int_field(edge, "post", f"edge {i}"))
        if key in synapses:
            raise GenomeFormatError(f"duplicate edge {key[0]}->{key[1]}")
        synapses[key] = (_int_field(edge, "weight", f"edge {i}"), _int_field(edge, "delay", f"edge {i}"))
    genome = NetworkGenome(n_in, n_out, thresholds, synapses)
    try:
        genome.validate()
    except ValueError as exc:
        raise GenomeFormatError(str(exc)) from None
    return genome


def save_genome(genome: NetworkGenome, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_genome(genome))


def load_genome(path) -> NetworkGenome:
    with open(path) as fh:
        return deserialize_genome(fh.read())


# --------------------------------------------------------------------- simulation


@dataclass(frozen=True)
class SimResult:
    output_spike_counts: tuple[int, ...]
    total_timesteps: int


@dataclass(frozen=True)
class CompiledNetwork:
    """Index-based arrays for the simulator kernel (synapses sorted by pre)."""

    n_neurons: int
    n_inputs: int
    output_index: np.ndarray
    thresholds: np.ndarray
    syn_ptr: np.ndarray  # CSR row pointer over pre-neuron index
    syn_post: np.ndarray
    syn_weight: np.ndarray
    syn_delay: np.ndarray


def compile_network(genome: NetworkGenome) -> CompiledNetwork:
    ids = sorted(genome.thresholds)
    index = {nid: i for i, nid in enumerate(ids)}
    # io ids are 0..n_io-1 and sort first, so they keep their positions
    edges = sorted((index[p], index[q], w, d) for (p, q), (w, d) in genome.synapses.items())
    pre = np.array([e[0] for e in edges], dtype=np.int64)
    ptr = np.zeros(len(ids) + 1, dtype=np.int64)
    np.cumsum(np.bincount(pre, minlength=len(ids)), out=ptr[1:])
    return CompiledNetwork(
        n_neurons=len(ids),
        n_inputs=genome.n_inputs,
        output_index=np.arange(genome.n_inputs, genome.n_io, dtype=np.int64),
        thresholds=np.array([genome.thresholds[n] for n in ids], dtype=np.int64),
        syn_ptr=ptr,
        syn_post=np.array([e[1] for e in edges], dtype=np.int64),
        syn_weight=np.array([e[2] for e in edges], dtype=np.int64),
        syn_delay=np.array([e[3] for e in edges], dtype=np.int64),
    )


_RING = DELAY_RANGE[1] + 2  # slots for arrivals up to delay + 1 steps ahead


@numba.njit(cache=True)
def _run_kernel(n_neurons, n_inputs, n_raster, output_index, thresholds, syn_ptr, syn_post,
                syn_weight, syn_delay, rasters, timesteps, bias_period, leak_full):
    n_samples = rasters.shape[0]
    n_out = output_index.shape[0]
    counts = np.zeros((n_samples, n_out), dtype=np.int64)
    is_output = np.full(n_neurons, -1, dtype=np.int64)
    for o in range(n_out):
        is_output[output_index[o]] = o
    charge = np.zeros((_RING, n_neurons), dtype=np.int64)
    arrived = np.zeros((_RING, n_neurons), dtype=np.bool_)
    potential = np.zeros(n_neurons, dtype=np.int64)
    fired = np.empty(n_neurons, dtype=np.int64)
    for s in range(n_samples):
        charge[:, :] = 0
        arrived[:, :] = False
        potential[:] = 0
        for t in range(timesteps):
            slot = t % _RING
            n_fired = 0
            for i in range(n_raster):
                if rasters[s, i, t]:
                    fired[n_fired] = i
                    n_fired += 1
            if bias_period > 0 and t % bias_period == 0:
                fired[n_fired] = n_inputs - 1
                n_fired += 1
            for i in range(n_inputs, n_neurons):
                if arrived[slot, i]:
                    potential[i] += charge[slot, i]
                    if potential[i] >= thresholds[i]:
                        potential[i] = 0
                        fired[n_fired] = i
                        n_fired += 1
                        if is_output[i] >= 0:
                            counts[s, is_output[i]] += 1
                elif leak_full:
                    potential[i] = 0
                charge[slot, i] = 0
                arrived[slot, i] = False
            for f in range(n_fired):
                src = fired[f]
                for e in range(syn_ptr[src], syn_ptr[src + 1]):
                    dst_slot = (t + syn_delay[e] + 1) % _RING
                    charge[dst_slot, syn_post[e]] += syn_weight[e]
                    arrived[dst_slot, syn_post[e]] = True
    return counts


def simulate_batch(genome, rasters: np.ndarray, bias: BiasSource = BiasSource(), leak: str = "full",
                   timesteps: int | None = None) -> np.ndarray:
    """Run the network on a batch of rasters.

    Args:
        genome: NetworkGenome or a CompiledNetwork from ``compile_network``.
        rasters: bool array (n_samples, n_channels, T). ``n_channels`` must
            equal the genome's input count, minus one when bias is enabled.
        bias: constant-rate bias input, fed to the last input neuron.
        leak: ``"full"`` or ``"none"``.
        timesteps: defaults to T.

    Returns:
        int array (n_samples, n_outputs) of output spike counts.
    """
    net = genome if isinstance(genome, CompiledNetwork) else compile_network(genome)
    rasters = np.asarray(rasters, dtype=np.bool_)
    if rasters.ndim == 2:
        rasters = rasters[None]
    expected = net.n_inputs - int(bias.enabled)
    if rasters.shape[1] != expected:
        raise ValueError(
            f"raster has {rasters.shape[1]} channels, network expects {expected}"
            + (" (bias channel is synthesized)" if bias.enabled else "")
        )
    if leak not in LEAK_MODES:
        raise ValueError(f"leak must be one of {LEAK_MODES}")
    T = rasters.shape[2] if timesteps is None else timesteps
    if T != rasters.shape[2]:
        raise ValueError(f"timesteps={T} but raster has {rasters.shape[2]} steps")
    return _run_kernel(
        net.n_neurons, net.n_inputs, expected, net.output_index, net.thresholds, net.syn_ptr,
        net.syn_post, net.syn_weight, net.syn_delay, np.ascontiguousarray(rasters), T,
        bias.period if bias.enabled else 0, leak == "full",
    )


def simulate(genome, raster, timesteps: int | None = None, bias: BiasSource = BiasSource(),
             leak: str = "full") -> SimResult:
    """Simulate one raster (a SpikeRaster or a bool (channels, T) array)."""
    spikes = getattr(raster, "spikes", raster)
    T = np.shape(spikes)[1] if timesteps is None else timesteps
    counts = simulate_batch(genome, np.asarray(spikes)[None], bias, leak, T)[0]
    return SimResult(tuple(int(c) for c in counts), T)


def decode_output(result) -> int:
    """Index of the most active output; ties (including silence) go to class 0."""
    counts = getattr(result, "output_spike_counts", result)
    return int(counts[1] > counts[0])


def decode_batch(counts: np.ndarray) -> np.ndarray:
    counts = np.asarray(counts)
    return (counts[:, 1] > counts[:, 0]).astype(np.int64)
