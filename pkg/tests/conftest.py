import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qsov import harness as H

settings.register_profile("qsov", deadline=None, max_examples=25, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qsov")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def draw(model, N, mode="float", seed=0, **kw):
    cfg = H.ExperimentConfig(model=model, sites=N, mode=mode, seed=seed, **kw)
    return H.draw_spec(cfg)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
