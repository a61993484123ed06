import os
from importlib import resources
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from combregge.census import CensusLadder, EnumerationFilters, enumerate_all, ingest_histogram_file

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = Path(str(resources.files("combregge") / "data"))
GOLDEN = Path(__file__).parent / "golden"

# Acceptance outcomes, filled by tests/test_acceptance.py and printed at the end.
CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        verdict, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {verdict} - {detail}")


@pytest.fixture(scope="session")
def s3_reference():
    return ingest_histogram_file(DATA / "s3_reference_k5_9.csv")


@pytest.fixture(scope="session")
def census_fixture():
    return ingest_histogram_file(DATA / "census_orientable_k1_6.csv")


@pytest.fixture(scope="session")
def ladder():
    """Orientable census with S^3 classification, filled lazily by K."""
    return CensusLadder(seed=0, orientable_only=True)


_ALL = {}


def all_census(k):
    """Every class (both orientabilities) at K tetrahedra, cached per session."""
    if k not in _ALL:
        _ALL[k] = enumerate_all(k, EnumerationFilters())
    return _ALL[k]


@pytest.fixture(scope="session")
def small_census():
    return {k: all_census(k) for k in (1, 2, 3)}
