"""Glue between data, encoding, training and evaluation for one configuration."""

from __future__ import annotations

import numpy as np

from .clusters import DatasetManifest
from .config import TrainConfig
from .evolution import FileEncoder, evolve
from .metrics import PT_REFERENCE, EvalReport, evaluate_predictions
from .network import decode_batch, simulate_batch
from .reduction import pattern_from_name


def build_pattern_for(config: TrainConfig, manifest: DatasetManifest):
    rows, cols, _ = manifest.frame_shape
    return pattern_from_name(config.pattern, rows, cols)


def train(train_manifest: DatasetManifest, config: TrainConfig, on_report=None, seeds=()):
    """Evolve a network on ``train_manifest``; returns (best_genome, reports)."""
    return evolve(
        train_manifest, config.evo, config.fitness, config.encoder,
        build_pattern_for(config, train_manifest), config.bias, config.leak,
        seeds=seeds, fixed_batch=config.fixed_batch, workers=config.workers, on_report=on_report,
    )


def predict_manifest(genome, manifest: DatasetManifest, config: TrainConfig):
    """Predicted classes and true p_t for every sample in the manifest."""
    files = FileEncoder(config.encoder, build_pattern_for(config, manifest))
    preds, pts = [], []
    for path in manifest.file_paths:
        rasters, p = files(path)
        preds.append(decode_batch(simulate_batch(genome, rasters, config.bias, config.leak)))
        pts.append(p)
    return np.concatenate(preds), np.concatenate(pts)


def evaluate_genome(genome, manifest: DatasetManifest, config: TrainConfig,
                    pt_ref: float = PT_REFERENCE, normalization: str = "all"):
    """Returns (EvalReport, predictions, pts) over the whole manifest (no balancing)."""
    preds, pts = predict_manifest(genome, manifest, config)
    report = evaluate_predictions(preds, pts, config.fitness.pt_cutoff, pt_ref, normalization)
    return report, preds, pts
