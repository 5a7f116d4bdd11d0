"""
``key = value`` configuration files for training runs and sweep spaces.

Blank lines and ``#`` comments are ignored. List-valued keys (sweep axes)
take comma-separated values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .encoding import EncoderParams
from .evolution import EvoConfig, FitnessSpec
from .network import LEAK_MODES, BiasSource


class ConfigError(ValueError):
    pass


def parse_kv(text: str, source: str = "<config>") -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _optional_float(s: str):
    return None if s.strip().lower() in ("", "none") else float(s)


@dataclass(frozen=True)
class TrainConfig:
    """Everything a training run needs besides the data and the seed."""

    evo: EvoConfig = field(default_factory=EvoConfig)
    fitness: FitnessSpec = field(default_factory=FitnessSpec)
    encoder: EncoderParams = field(default_factory=EncoderParams)
    pattern: str = "row-stride:26"
    bias: BiasSource = field(default_factory=BiasSource)
    leak: str = "full"
    test_fraction: float = 0.2
    fixed_batch: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.leak not in LEAK_MODES:
            raise ConfigError(f"leak must be one of {LEAK_MODES}")
        if not 0 < self.test_fraction < 1:
            raise ConfigError("test_fraction must lie in (0, 1)")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def with_seed(self, seed: int) -> "TrainConfig":
        return replace(self, evo=replace(self.evo, rng_seed=seed))

    def to_kv(self) -> dict[str, str]:
        """Flat key/value view (round-trips through ``train_config_from_kv``)."""
        out = {}
        for key, (section, attr, _) in _TRAIN_KEYS.items():
            obj = self.evo.rates if section == "evo.rates" else getattr(self, section) if section else self
            v = getattr(obj, attr)
            out[key] = "none" if v is None else str(v).lower() if isinstance(v, bool) else str(v)
        return out


# key -> (sub-object, attribute, parser)
_TRAIN_KEYS = {
    "population_size": ("evo", "population_size", int),
    "starting_nodes": ("evo", "starting_nodes", int),
    "starting_edges": ("evo", "starting_edges", int),
    "tournament_size": ("evo", "tournament_size", int),
    "elitism_count": ("evo", "elitism_count", int),
    "crossover_fraction": ("evo", "crossover_fraction", float),
    "clone_fraction": ("evo", "clone_fraction", float),
    "max_generations": ("evo", "max_generations", int),
    "target_fitness": ("evo", "target_fitness", _optional_float),
    "seed": ("evo", "rng_seed", int),
    "rate_add_node": ("evo.rates", "add_node", float),
    "rate_del_node": ("evo.rates", "del_node", float),
    "rate_add_edge": ("evo.rates", "add_edge", float),
    "rate_del_edge": ("evo.rates", "del_edge", float),
    "rate_perturb_param": ("evo.rates", "perturb_param", float),
    "fitness": ("fitness", "kind", str),
    "k": ("fitness", "k", float),
    "pt_cutoff": ("fitness", "pt_cutoff", float),
    "x_th": ("encoder", "x_th", float),
    "delta_x": ("encoder", "delta_x", float),
    "timescale": ("encoder", "t_res", int),
    "onset": ("encoder", "onset", parse_bool),
    "pattern": ("", "pattern", str),
    "bias": ("bias", "enabled", parse_bool),
    "bias_period": ("bias", "period", int),
    "leak": ("", "leak", str),
    "test_fraction": ("", "test_fraction", float),
    "fixed_batch": ("", "fixed_batch", parse_bool),
    "workers": ("", "workers", int),
}


def train_config_from_kv(kv: dict[str, str], base: TrainConfig | None = None,
                         source: str = "<config>") -> TrainConfig:
    base = base or TrainConfig()
    groups: dict[str, dict] = {"": {}, "evo": {}, "evo.rates": {}, "fitness": {}, "encoder": {}, "bias": {}}
    for key, raw in kv.items():
        if key not in _TRAIN_KEYS:
            raise ConfigError(f"{source}: unknown key {key!r}")
        section, attr, conv = _TRAIN_KEYS[key]
        try:
            groups[section][attr] = conv(raw)
        except ValueError as exc:
            raise ConfigError(f"{source}: bad value for {key!r}: {exc}") from None
    try:
        rates = replace(base.evo.rates, **groups["evo.rates"])
        evo = replace(base.evo, rates=rates, **groups["evo"])
        return replace(
            base,
            evo=evo,
            fitness=replace(base.fitness, **groups["fitness"]),
            encoder=replace(base.encoder, **groups["encoder"]),
            bias=replace(base.bias, **groups["bias"]),
            **groups[""],
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_train_config(path) -> TrainConfig:
    text = Path(path).read_text()
    return train_config_from_kv(parse_kv(text, str(path)), source=str(path))


def write_train_config(config: TrainConfig, path) -> None:
    Path(path).write_text("".join(f"{k} = {v}\n" for k, v in config.to_kv().items()))

