from fractions import Fraction

import pytest

from cantortubes.arcs import solve_table_arcs
from cantortubes.sequences import build_schedule, derive_sequences

C4 = Fraction(1, 16)


@pytest.fixture(scope="session")
def strict_table():
    """Default strict table: s = 1, c = 2^-4, depth 3."""
    return derive_sequences(build_schedule(1, 3), C4)


@pytest.fixture(scope="session")
def strict_arcs(strict_table):
    return solve_table_arcs(strict_table)


@pytest.fixture(scope="session")
def demo_table():
    """Demo-profile table at depth 4 (structural checks only)."""
    return derive_sequences(build_schedule(1, 4), C4, profile="demo")


@pytest.fixture(scope="session")
def demo_arcs(demo_table):
    return solve_table_arcs(demo_table)
