from __future__ import annotations

import pytest

from plcsim.analysis import System, build_system
from plcsim.codes import LinearCode, NotFound, find_rate_matrix, interference_pair
from plcsim.config import RunConfig
from plcsim.field import GF, FMatrix, mat_rank
from plcsim.storage import FunctionSpec

EXAMPLE_G = [[1, 0, 1, 1], [0, 1, 1, 1]]
EXAMPLE_LAMBDA = [[1, 0, 1, 0], [0, 1, 0, 1]]
EXAMPLE_V = [[1, 0, 0, 1], [1, 1, 0, 0], [2, 1, 0, 1]]


def example_config(**kw) -> RunConfig:
    return RunConfig(q=5, G=EXAMPLE_G, V=EXAMPLE_V, Lambda=EXAMPLE_LAMBDA, **kw)


@pytest.fixture
def example_system() -> System:
    return build_system(example_config())


def random_full_rank(rng, q, rows, cols):
    while True:
        m = rng.integers(0, q, size=(rows, cols))
        if mat_rank(FMatrix(GF(q), m)) == rows:
            return m.tolist()


def random_system(rng, *, max_n=4, max_mu=3, max_f=3, qs=(3, 5, 7)) -> System:
    """A random small system whose code admits a capacity-achieving rate matrix."""
    while True:
        q = int(rng.choice(qs))
        n = int(rng.integers(1, max_n + 1))
        k = int(rng.integers(1, n + 1))
        G = random_full_rank(rng, q, k, n)
        code = LinearCode.from_rows(q, G)
        try:
            rate = find_rate_matrix(code)
        except NotFound:
            continue
        mu = int(rng.integers(1, max_mu + 1))
        f = int(rng.integers(1, max_f + 1))
        V = rng.integers(0, q, size=(mu, f))
        if not V.any():
            V[0, 0] = 1
        spec = FunctionSpec.from_matrix(FMatrix(GF(q), V))
        return System(code, rate, interference_pair(rate), spec)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[n])
