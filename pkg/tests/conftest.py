import numpy as np
import pytest

from oamris.channel import ReflectionPattern, assemble_links
from oamris.config import SystemConfig
from oamris.geometry import sample_geometry

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


@pytest.fixture(scope="session")
def default_config():
    return SystemConfig()


@pytest.fixture(scope="session")
def default_scenario(default_config):
    geo = sample_geometry(default_config, np.random.default_rng(7))
    channels = assemble_links(geo, default_config)
    pattern = ReflectionPattern.random(channels.m_elements, np.random.default_rng(8))
    return default_config, geo, channels, pattern


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
