import numpy as np
import pytest

from palette import desk
from palette.dist import TokenDistribution, Vocabulary


@pytest.fixture(scope="session")
def world_models():
    return desk.train_models()


@pytest.fixture
def ab():
    return Vocabulary(["a", "b"])


@pytest.fixture
def abc():
    return Vocabulary(["a", "b", "c"])


def dist(vocab, probs):
    return TokenDistribution(vocab, np.asarray(probs, dtype=float))


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
