import pytest

from rcmlab.environment import ConductanceLaw, StaticEnvironment, sample_environment
from rcmlab.harness import ExperimentConfig
from rcmlab.lattice import Window


@pytest.fixture
def homogeneous_env():
    """Unit conductances on [-12, 12]^2."""
    return StaticEnvironment.homogeneous(12)


@pytest.fixture
def uniform_env():
    """Uniform(0.5, 1.5) conductances on [-10, 10]^2, all edges open."""
    return sample_environment(ConductanceLaw.uniform(0.5, 1.5), Window(10), seed=7)


@pytest.fixture
def percolation_env():
    """Bond percolation at p = 0.7 with unit open conductances."""
    return sample_environment(ConductanceLaw.constant(1.0, p_open=0.7), Window(10), seed=3)


@pytest.fixture
def make_config():
    """Factory for validated experiment configs."""

    def make(**values):
        return ExperimentConfig.from_mapping(values)

    return make


@pytest.fixture
def config_file(tmp_path):
    """Write a flat TOML config and return its path."""

    def write(text: str, name: str = "experiment.toml"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write
