"""Spiking-network filtering of pixel-detector clusters by transverse momentum."""

from .clusters import (
    ClusterSample,
    DatasetManifest,
    SyntheticConfig,
    balance_classes,
    generate_synthetic,
    label,
    load_dataset,
    load_manifest,
    save_dataset,
    split_by_files,
    write_synthetic_files,
)
from .encoding import EncoderParams, SpikeRaster, SpikeTrainPair, encode_cluster, encode_pixel, upsample
from .evolution import (
    EvoConfig,
    FitnessSpec,
    GenerationReport,
    MutationRates,
    accuracy_score,
    crossover,
    evaluate_fitness,
    evolve,
    init_population,
    mutate,
    penalty_score,
    tournament_select,
)
from .config import TrainConfig, load_train_config, write_train_config
from .metrics import EvalReport, TurnOnCurve, data_reduction, f1_score, signal_efficiency, turn_on_curve
from .network import (
    BiasSource,
    NetworkGenome,
    SimResult,
    clamp_parameters,
    count_parameters,
    decode_output,
    deserialize_genome,
    serialize_genome,
    simulate,
    simulate_batch,
)
from .pipeline import evaluate_genome, train
from .reduction import ReductionPattern, build_pattern, group_count, pattern_from_name, reduce_spikes
from .sweep import DEFAULT_SPACE, SweepPoint, SweepSpace, run_sweep

__version__ = "0.1.0"
