"""Shared fixtures: solved expansions and cached oracles for the bundled walks."""
import pytest

from harmpot.expansion import exact_expansion_z2, fitted_expansion, oracle_for
from harmpot.walk import load_walk

WALKS = ("z2-simple", "z2-king", "tri-directed")

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def walks():
    return {name: load_walk(name) for name in WALKS}


@pytest.fixture(scope="session")
def oracles(walks):
    """One Fourier oracle per walk, cached across the whole session."""
    return {name: oracle_for(w) for name, w in walks.items()}


@pytest.fixture(scope="session")
def simple9():
    return exact_expansion_z2(9)


@pytest.fixture(scope="session")
def king9(walks, oracles):
    return fitted_expansion(walks["z2-king"], 9, oracle=oracles["z2-king"])


@pytest.fixture(scope="session")
def tri9(walks, oracles):
    return fitted_expansion(walks["tri-directed"], 9, oracle=oracles["tri-directed"])


@pytest.fixture(scope="session")
def expansions(simple9, king9, tri9):
    return {"z2-simple": simple9, "z2-king": king9, "tri-directed": tri9}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
