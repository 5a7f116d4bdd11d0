"""Command-line entry point: ``pixelsnn <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

from . import clusters, encoding, metrics, network, pipeline, sweep
from .config import ConfigError, TrainConfig, load_train_config, write_train_config
from .evolution import GenerationReport
from .reduction import pattern_from_name

log = logging.getLogger("pixelsnn")

DEFAULT_BINS = "0.1,0.2,0.3,0.4,0.5,0.6,0.8,1.0,1.5,2.0,3.0,5.0,10.0,20.0"


def example_genome_path() -> Path:
    return Path(str(resources.files("pixelsnn") / "data" / "example_genome.json"))


def _config(args) -> TrainConfig:
    config = load_train_config(args.config) if getattr(args, "config", None) else TrainConfig()
    return config.with_seed(args.seed)


def cmd_gen_data(args) -> int:
    manifest = clusters.write_synthetic_files(args.out, args.n, args.files, args.seed)
    print(f"wrote {manifest.n_samples} samples in {len(manifest)} files to {args.out}")
    return 0


def cmd_encode(args) -> int:
    config = _config(args)
    params = replace(config.encoder, t_res=args.timescale) if args.timescale else config.encoder
    samples = clusters.load_dataset(args.input)
    if args.limit is not None:
        samples = samples[:args.limit]
    if not samples:
        encoding.write_spike_dump([], args.out)
        return 0
    rows, cols, _ = samples[0].frame_shape
    pattern = pattern_from_name(args.pattern or config.pattern, rows, cols)
    rasters = [encoding.encode_cluster(s, params, pattern) for s in samples]
    encoding.write_spike_dump(rasters, args.out)
    print(f"encoded {len(rasters)} samples into {rasters[0].n_channels} channels x "
          f"{rasters[0].n_timesteps} steps -> {args.out}")
    return 0


def cmd_train(args) -> int:
    config = _config(args)
    if args.generations is not None:
        config = replace(config, evo=replace(config.evo, max_generations=args.generations))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = clusters.load_manifest(args.manifest)
    if args.test_manifest:
        train_m, test_m = manifest, clusters.load_manifest(args.test_manifest)
    else:
        train_m, test_m = clusters.split_by_files(manifest, config.test_fraction, args.seed)
    clusters.save_manifest(train_m, out / "train_manifest.txt")
    clusters.save_manifest(test_m, out / "test_manifest.txt")
    write_train_config(config, out / "config.txt")

    with open(out / "generations.csv", "w") as fh:
        fh.write(GenerationReport.CSV_HEADER + "\n")

        def on_report(r: GenerationReport):
            fh.write(r.csv_row() + "\n")
            fh.flush()
            log.info("generation %d: best %.4f mean %.4f", r.generation, r.best, r.mean)

        genome, reports = pipeline.train(train_m, config, on_report)
    network.save_genome(genome, out / "best_genome.json")
    print(f"best fitness {max(r.best for r in reports)!r}; genome has {genome.n_neurons} neurons, "
          f"{genome.n_synapses} synapses -> {out / 'best_genome.json'}")
    return 0


def cmd_evaluate(args) -> int:
    genome_path = Path(args.genome)
    config_path = args.config or (genome_path.parent / "config.txt")
    config = load_train_config(config_path) if Path(config_path).is_file() else TrainConfig()
    genome = network.load_genome(genome_path)
    manifest = clusters.load_manifest(args.manifest)
    report, preds, pts = pipeline.evaluate_genome(genome, manifest, config, args.pt_ref, args.normalization)
    curve = metrics.turn_on_curve(preds, pts, [float(b) for b in args.bins.split(",")])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(report.to_text())
    curve.write_csv(out / "turn_on.csv")
    sys.stdout.write(report.to_text())
    return 0


def cmd_sweep(args) -> int:
    space = sweep.load_space(args.space) if args.space else sweep.DEFAULT_SPACE
    configs = sweep.SAMPLERS[args.mode](space, args.n, args.seed)
    base = load_train_config(args.config) if args.config else TrainConfig()
    manifest = clusters.load_manifest(args.manifest)
    train_m, test_m = clusters.split_by_files(manifest, base.test_fraction, args.seed)
    results = sweep.run_sweep(configs, train_m, test_m, base, args.workers, args.seed,
                              args.pt_ref, args.normalization)
    sweep.extract_table(results, args.out, include_wall_time=args.wall_time)
    failed = sum(r.status != "ok" for r in results)
    print(f"{len(results)} configs evaluated ({failed} failed) -> {args.out}")
    return 0


def cmd_inspect(args) -> int:
    genome = network.load_genome(args.genome or example_genome_path())
    print(f"inputs={genome.n_inputs}")
    print(f"outputs={genome.n_outputs}")
    print(f"hidden={len(genome.hidden_ids)}")
    print(f"neurons={genome.n_neurons}")
    print(f"synapses={genome.n_synapses}")
    print(f"parameters={network.count_parameters(genome)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pixelsnn", description="Spiking-network p_t filters for pixel clusters.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name, func, help):
        p = sub.add_parser(name, help=help, description=help)
        p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        p.set_defaults(func=func)
        return p

    p = add("gen-data", cmd_gen_data, "write synthetic cluster files and a manifest")
    p.add_argument("--n", type=int, default=2000, help="number of samples")
    p.add_argument("--files", type=int, default=10, help="number of files")
    p.add_argument("--out", required=True, help="output directory")

    p = add("encode", cmd_encode, "encode a cluster file into a spike dump")
    p.add_argument("--input", required=True, help="cluster file")
    p.add_argument("--config", help="training config supplying encoder/pattern settings")
    p.add_argument("--pattern", help="full, row-stride:N, col-stride:N or box:WxH")
    p.add_argument("--timescale", type=int, help="time resolution in ps")
    p.add_argument("--limit", type=int, help="encode only the first N samples")
    p.add_argument("--out", required=True, help="spike dump CSV")

    p = add("train", cmd_train, "evolve a network and write the best genome")
    p.add_argument("--manifest", required=True, help="dataset manifest (split by files unless --test-manifest)")
    p.add_argument("--test-manifest", help="held-out manifest; use all of --manifest for training")
    p.add_argument("--config", help="key = value training config")
    p.add_argument("--generations", type=int, help="override max_generations")
    p.add_argument("--out", required=True, help="output directory")

    p = add("evaluate", cmd_evaluate, "score a genome on a test manifest")
    p.add_argument("--genome", required=True)
    p.add_argument("--manifest", required=True, help="test manifest")
    p.add_argument("--config", help="training config (default: config.txt next to the genome)")
    p.add_argument("--pt-ref", type=float, default=metrics.PT_REFERENCE, help="signal reference in GeV")
    p.add_argument("--normalization", choices=metrics.NORMALIZATIONS, default="all")
    p.add_argument("--bins", default=DEFAULT_BINS, help="comma-separated turn-on bin edges (GeV)")
    p.add_argument("--out", required=True, help="output directory")

    p = add("sweep", cmd_sweep, "run a hyperparameter sweep")
    p.add_argument("--space", help="sweep definition file (default: full hyperparameter table)")
    p.add_argument("--mode", choices=sorted(sweep.SAMPLERS), default="random")
    p.add_argument("--n", type=int, default=12, help="configs to sample in random mode")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--manifest", required=True)
    p.add_argument("--config", help="base training config")
    p.add_argument("--pt-ref", type=float, default=metrics.PT_REFERENCE)
    p.add_argument("--normalization", choices=metrics.NORMALIZATIONS, default="all")
    p.add_argument("--wall-time", action="store_true", help="add a wall-time column")
    p.add_argument("--out", required=True, help="results CSV")

    p = add("inspect", cmd_inspect, "print genome size and parameter count")
    p.add_argument("--genome", help="genome file (default: bundled example)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, clusters.ClusterFormatError, network.GenomeFormatError,
            FileNotFoundError, ValueError) as exc:
        print(f"pixelsnn {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
