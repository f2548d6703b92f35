import numpy as np
import pytest

from phaseflow.graph import complete_graph, cycle_graph, path_graph, random_graph, star_graph


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def small_graphs(r=0.0):
    """A fixed menagerie covering trees, cycles, dense and weighted graphs."""
    return [
        complete_graph(2, r=r),
        path_graph(3, r=r),
        star_graph(4, r=r),
        cycle_graph(5, r=r),
        complete_graph(4, weight=0.7, r=r),
        random_graph(7, p=0.5, seed=3, r=r),
    ]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
