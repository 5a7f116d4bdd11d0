from pathlib import Path

import pytest

from pixelsnn.cli import example_genome_path, main
from pixelsnn.config import write_train_config
from pixelsnn.encoding import read_spike_dump
from pixelsnn.metrics import EvalReport
from pixelsnn.network import count_parameters, load_genome


def test_no_arguments(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code != 0


def test_inspect_example(capsys):
    assert main(["inspect"]) == 0
    out = capsys.readouterr().out
    g = load_genome(example_genome_path())
    assert f"parameters={g.n_neurons + 2 * g.n_synapses}" in out
    assert "parameters=930" in out and "neurons=84" in out and "synapses=423" in out
    assert count_parameters(g) == 930


def test_missing_file_is_error(tmp_path, capsys):
    assert main(["inspect", "--genome", str(tmp_path / "nope.json")]) == 1
    assert "error" in capsys.readouterr().err


def test_pipeline(tmp_path, tiny_config, capsys):
    data, run, ev = tmp_path / "data", tmp_path / "run", tmp_path / "eval"
    cfg = tmp_path / "cfg.txt"
    write_train_config(tiny_config, cfg)
    assert main(["gen-data", "--n", "80", "--files", "4", "--out", str(data), "--seed", "2"]) == 0
    assert main(["train", "--manifest", str(data / "manifest.txt"), "--config", str(cfg),
                 "--generations", "1", "--out", str(run), "--seed", "3"]) == 0
    assert (run / "generations.csv").read_text().splitlines()[0] == "generation,best,mean,neurons,synapses"
    assert len((run / "generations.csv").read_text().splitlines()) == 3
    assert main(["evaluate", "--genome", str(run / "best_genome.json"), "--manifest", str(run / "test_manifest.txt"),
                 "--pt-ref", "0.5", "--out", str(ev)]) == 0
    report = EvalReport.from_text((ev / "report.txt").read_text())
    assert report.pt_reference == 0.5 and report.n_samples == 20
    assert (ev / "turn_on.csv").read_text().startswith("bin_low,bin_high,count,efficiency\n")

    dump = tmp_path / "spikes.csv"
    assert main(["encode", "--input", str(data / "clusters_000.csv"), "--pattern", "box:3x2",
                 "--limit", "3", "--out", str(dump)]) == 0
    events = read_spike_dump(dump)
    assert len(events) == 3
    assert all(0 <= c < 12 and t % 200 == 0 for sample in events for c, t in sample)


def test_bad_config_reported(tmp_path, capsys):
    cfg = tmp_path / "bad.txt"
    cfg.write_text("population_size = lots\n")
    assert main(["train", "--manifest", "x", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert "population_size" in capsys.readouterr().err


def test_sweep(tmp_path, small_dataset, tiny_config, capsys):
    cfg = tmp_path / "cfg.txt"
    write_train_config(tiny_config, cfg)
    space = tmp_path / "space.txt"
    space.write_text("timescale = 200\npattern = row-stride:13\npt_cutoff = 0.5\nfitness = penalty\nbias = false, true\n")
    out = tmp_path / "table.csv"
    manifest = Path(small_dataset.file_paths[0]).parent / "manifest.txt"
    assert main(["sweep", "--space", str(space), "--mode", "grid", "--manifest", str(manifest),
                 "--config", str(cfg), "--pt-ref", "1.0", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 3
