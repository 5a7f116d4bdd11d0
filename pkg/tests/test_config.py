import pytest
from hypothesis import given
from hypothesis import strategies as st

from pixelsnn.config import (
    ConfigError,
    TrainConfig,
    load_train_config,
    parse_bool,
    parse_kv,
    train_config_from_kv,
    write_train_config,
)


def test_parse_kv_comments_and_blanks():
    text = "# header\n\npopulation_size = 20  # inline\npattern=box:3x2\n"
    assert parse_kv(text) == {"population_size": "20", "pattern": "box:3x2"}


@pytest.mark.parametrize("text,lineno", [("a = 1\nnonsense\n", 2), ("a = 1\n\na = 2\n", 3), ("= 4\n", 1)])
def test_parse_kv_errors_name_line(text, lineno):
    with pytest.raises(ConfigError, match=f":{lineno}:"):
        parse_kv(text, "cfg")


@pytest.mark.parametrize("s,v", [("true", True), ("No", False), ("1", True), ("off", False)])
def test_parse_bool(s, v):
    assert parse_bool(s) is v


def test_defaults_mirror_documented_values():
    c = TrainConfig()
    assert (c.evo.population_size, c.evo.starting_nodes, c.evo.starting_edges) == (100, 50, 800)
    assert (c.evo.tournament_size, c.evo.elitism_count) == (4, 2)
    assert (c.evo.crossover_fraction, c.evo.clone_fraction) == (0.8, 0.2)
    assert (c.encoder.x_th, c.encoder.delta_x, c.encoder.t_res) == (800, 400, 200)
    assert c.fitness.k == 2.0 and c.bias.period == 1


def test_overrides():
    c = train_config_from_kv({"population_size": "12", "fitness": "combination", "bias": "yes",
                              "timescale": "50", "rate_add_node": "0.3", "target_fitness": "none"})
    assert c.evo.population_size == 12
    assert c.fitness.kind == "combination"
    assert c.bias.enabled
    assert c.encoder.t_res == 50
    assert c.evo.rates.add_node == 0.3
    assert c.evo.target_fitness is None


@pytest.mark.parametrize(
    "kv",
    [{"colour": "red"}, {"population_size": "many"}, {"timescale": "30"}, {"leak": "half"}, {"elitism_count": "100"}],
)
def test_rejects(kv):
    with pytest.raises(ConfigError):
        train_config_from_kv(kv)


@given(
    st.integers(2, 500), st.integers(0, 100), st.sampled_from(["accuracy", "penalty", "combination"]),
    st.sampled_from([10, 20, 40, 50, 100, 200]), st.booleans(), st.floats(0.05, 3.0),
)
def test_round_trip(tmp_path_factory, pop, nodes, kind, t_res, bias, cut):
    c = train_config_from_kv({"population_size": str(pop), "elitism_count": "1", "starting_nodes": str(nodes),
                              "fitness": kind, "timescale": str(t_res), "bias": str(bias),
                              "pt_cutoff": repr(cut)})
    path = tmp_path_factory.mktemp("cfg") / "c.txt"
    write_train_config(c, path)
    assert load_train_config(path) == c
