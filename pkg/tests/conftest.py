from pathlib import Path

import numpy as np
import pytest

from bnreduce.dominance import minimum_dominant_sets, recurrence_length
from bnreduce.netcore import parse_network, random_network

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

# Largest induced state space (|U| * ell bits) drawn for the random suites;
# larger draws are resampled so the whole suite stays within a minute.
MAX_INDUCED_BITS = 16


def load(name):
    return parse_network((FIXTURES / name).read_text())


@pytest.fixture
def fig1():
    return load("fig1.bn")


@pytest.fixture
def fig3():
    return load("fig3.bn")


def random_case(seed, index, max_n=10, max_bits=MAX_INDUCED_BITS):
    """A random network with n <= max_n and one of its minimum dominant sets."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    while True:
        n = int(rng.integers(2, max_n + 1))
        net = random_network(n, rng)
        sets = minimum_dominant_sets(net)
        U = sets[int(rng.integers(len(sets)))]
        if len(U) * recurrence_length(net, U) <= max_bits:
            return net, U


def random_cases(count, seed=2024, **kw):
    return [random_case(seed, i, **kw) for i in range(count)]


# One line per acceptance criterion, echoed again in the terminal summary so
# it shows up without -s.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
