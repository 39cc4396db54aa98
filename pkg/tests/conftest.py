import sys

import numpy as np
import pytest

from stochgreedy.generators import GeneratorSpec, generate
from stochgreedy.policy import AlgoParams

BASE = AlgoParams(0.082, 0.445)


@pytest.fixture
def fig3():
    return generate(GeneratorSpec("figure3"))


@pytest.fixture
def base_params():
    return BASE


def small_random(seed, m=None, n=None, law=None):
    rng = np.random.default_rng(seed)
    m = m or int(rng.integers(1, 6))
    n = n or int(rng.integers(1, 5))
    law = law or ("uniform", "sparse", "exponential")[seed % 3]
    return generate(GeneratorSpec("random", seed, m, n, law))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for num in sorted(results):
            terminalreporter.write_line(results[num])
