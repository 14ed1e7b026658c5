import itertools

import numpy as np
import pytest

from cogrowth.presentations import DensityConfig, check_small_cancellation, sample_density_presentation
from cogrowth.words import alphabet, exponent_sums, reduce


def all_words(m, ell):
    return itertools.product(alphabet(m), repeat=ell)


def brute_free_count(m, ell):
    return sum(1 for w in all_words(m, ell) if not reduce(w))


def brute_abelian_count(m, ell, reduced_only=False):
    n = 0
    for w in all_words(m, ell):
        if reduced_only and reduce(w) != w:
            continue
        if not any(exponent_sums(w, m)):
            n += 1
    return n


def random_sc_presentations(count, seed=2024, ell=48):
    """Single-relator density-0 presentations that pass C'(1/6), by rejection."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        p = sample_density_presentation(DensityConfig(2, 0.0, ell), rng)
        if check_small_cancellation(p, "1/6")[0]:
            out.append(p)
    return out


@pytest.fixture(scope="session")
def sc_presentations():
    return random_sc_presentations(10)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
