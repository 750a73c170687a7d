from pathlib import Path

import numpy as np
import pytest

from sist.dataset import ValidatedDataset

DATA = Path(__file__).resolve().parents[1] / "data" / "ucr"


def planted(n=40, m=30, pos=10, width=3, height=3.0, noise=0.1, seed=0):
    """Half the series carry a bump at a fixed position; the rest do not."""
    rng = np.random.default_rng(seed)
    X = rng.normal(0.0, noise, (n, m))
    labels = tuple("b" if i % 2 else "a" for i in range(n))
    X[1::2, pos:pos + width] += height
    return ValidatedDataset(X, labels, name="planted", classes=("a", "b"))


def random_walks(n, m, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, m)).cumsum(axis=1)
    labels = tuple("b" if i % 2 else "a" for i in range(n))
    return ValidatedDataset(X, labels, name=f"walk{n}x{m}", classes=("a", "b"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def data_dir():
    return DATA


# verdict lines from the acceptance suite, repeated in the terminal summary
VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
