"""
Tests for experiment configs and their YAML form
"""

import pytest
from pydantic import ValidationError

from src.core.exceptions import ParameterError
from src.models.experiment import ExperimentConfig, dump_config, parse_config

MINIMAL = "command: threshold\nfamily: sq_cycle\nn: 12\nseed: 1\n"


def test_minimal_config_gets_defaults():
    config = parse_config(MINIMAL)
    assert config.n == 12
    assert config.trials == 100
    assert config.preset is None
    assert config.spec.k == 2


def test_dump_then_parse_is_identity():
    config = parse_config(MINIMAL + "trials: 500\ntol: 0.05\n")
    assert parse_config(dump_config(config)) == config


def test_unknown_key_is_named():
    with pytest.raises(ParameterError, match="foo"):
        parse_config(MINIMAL + "foo: 3\n")


def test_missing_keys_are_named():
    with pytest.raises(ParameterError, match="seed"):
        parse_config("command: threshold\nfamily: sq_cycle\nn: 12\n")


@pytest.mark.parametrize("text", [
    "- 1\n- 2\n",
    MINIMAL + "eps: [1, 2]\n",
    "command: [threshold\n",
    MINIMAL.replace("threshold", "plot"),
    MINIMAL + "preset: fastest\n",
    MINIMAL + "eps: -1\n",
    MINIMAL.replace("sq_cycle", "hexagons"),
])
def test_invalid_configs(text):
    with pytest.raises(ParameterError):
        parse_config(text)


def test_configs_are_frozen():
    config = ExperimentConfig(command="fragment", family="sq_cycle", n=50, seed=2, preset="coarse")
    with pytest.raises(ValidationError):
        config.n = 60
