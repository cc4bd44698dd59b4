import os

import pytest
import yaml

from pickands.config import ExperimentConfig


EXAMPLES = os.path.join(os.path.dirname(__file__), "examples")


def pytest_addoption(parser):
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="run the full-size acceptance estimates",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return

    skip = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def example():
    def _example(name):
        with open(os.path.join(EXAMPLES, name + ".toml"), encoding="utf-8") as f:
            return f.read()

    return _example


@pytest.fixture
def invalid_example():
    def _example(name):
        with open(
            os.path.join(EXAMPLES, "invalid", name + ".toml"), encoding="utf-8"
        ) as f:
            return f.read()

    return _example


@pytest.fixture
def example_config(tmp_path):
    """
    Loads an example config with its output redirected into tmp_path.
    """

    def _example(name, **overrides):
        config = ExperimentConfig.read(os.path.join(EXAMPLES, name + ".toml"))
        config.override(output=str(tmp_path / f"{name}.csv"))
        config.override(**overrides)
        return config

    return _example


@pytest.fixture(scope="session")
def anchors():
    with open(os.path.join(EXAMPLES, "anchors.yaml"), encoding="utf-8") as f:
        return yaml.safe_load(f)
