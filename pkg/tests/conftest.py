import numpy as np
import pytest
from hypothesis import settings

from kusuri.datasets import make_world
from kusuri.models.training import TrainConfig

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

TINY = TrainConfig(epochs=2, batch_size=8, learning_rate=3e-3, dev_fraction=0.0,
                   char_dim=3, char_hidden=4, morph_dim=4, hidden=6)


@pytest.fixture(scope="session")
def world():
    return make_world(0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config():
    return TINY


# one pass/fail line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
