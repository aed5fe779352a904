import pytest

from cckrein.decomposition import decompose
from cckrein.generators import (
    gen_cyclic_scheme,
    gen_directed_cycle_scheme,
    gen_gq_dualgrid,
    gen_gq_grid,
    gen_gq_w2,
    gen_hamming_2_2,
    gq_to_configuration,
)
from cckrein.krein import krein_all

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


GENERATED = {
    "gq-w2": lambda: gq_to_configuration(gen_gq_w2()),
    "gq-grid-2": lambda: gq_to_configuration(gen_gq_grid(2)),
    "gq-grid-1": lambda: gq_to_configuration(gen_gq_grid(1)),
    "gq-dualgrid-2": lambda: gq_to_configuration(gen_gq_dualgrid(2)),
    "cyclic-5": lambda: gen_cyclic_scheme(5),
    "cyclic-3": lambda: gen_cyclic_scheme(3),
    "cyclic-6": lambda: gen_cyclic_scheme(6),
    "hamming-2-2": gen_hamming_2_2,
    "directed-3": lambda: gen_directed_cycle_scheme(3),
    "directed-5": lambda: gen_directed_cycle_scheme(5),
}

_cache = {}


def pipeline(name):
    """(configuration, basis, table) for a bundled generator, computed once."""
    if name not in _cache:
        cc = GENERATED[name]()
        basis = decompose(cc)
        _cache[name] = (cc, basis, krein_all(basis))
    return _cache[name]


@pytest.fixture(scope="session")
def w2():
    return pipeline("gq-w2")


@pytest.fixture(scope="session")
def grid2():
    return pipeline("gq-grid-2")
