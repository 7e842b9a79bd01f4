import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile("ci")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_instance(rng, M, K, snr_db=(-10, 40)):
    """A channel, budget, noise and weights with per-user SNR in a realistic range."""
    H = rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))
    power = 10 ** rng.uniform(-3, 1)
    snr = 10 ** (rng.uniform(*snr_db, size=K) / 10)
    noise = power * np.linalg.norm(H, axis=0) ** 2 / snr
    weights = rng.uniform(0.2, 2.0, size=K)
    return H, power, noise, weights


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.VERDICTS):
        terminalreporter.write_line(mod.VERDICTS[number])
