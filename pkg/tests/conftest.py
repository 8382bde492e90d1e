import numpy as np
import pytest

from shapaudit.dataset import standardize
from shapaudit.synth import SynthSpec, make_synthetic

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def synth_spec():
    return SynthSpec(n=96, weights=(5.0, 0.5, 0.25, 0.1), noise_std=0.1, seed=7)


@pytest.fixture(scope="session")
def synth_ds(synth_spec):
    return standardize(make_synthetic(synth_spec))[0]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
