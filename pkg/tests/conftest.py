import pytest

from zorich.mapcore import default_config
from zorich.symbolic import Itinerary

#: Verdict lines collected by the acceptance suite, echoed in the summary.
VERDICTS = []


@pytest.fixture(scope="session")
def cfg():
    return default_config()


#: Itineraries with parameter ranges used across the hair tests.
HAIR_CASES = [
    ("constant-zero", Itinerary.constant((0, 0)), (1.0, 4.0)),
    ("periodic-2", Itinerary.periodic([(0, 0), (2, 0)]), (1.0, 4.0)),
    ("periodic-3", Itinerary.periodic([(2, 0), (0, 2), (-2, 0)]), (1.0, 4.0)),
    ("power-3", Itinerary.generator("power", base=3.0), (1.0, 4.0)),
    ("tower-1", Itinerary.generator("tower", t0=1.0), (1.5, 5.0)),
]


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
