import warnings
from pathlib import Path

import pytest

from chirpedpdc.core import PhaseAliasingWarning, compute_spectra
from chirpedpdc.dispersion import make_grid
from chirpedpdc.scenario import load_material, load_scenario

SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "chirpedpdc" / "scenarios"


def bundled(name):
    return load_scenario(SCENARIOS / f"{name}.yaml")


@pytest.fixture(scope="session")
def lithium_niobate():
    return load_material("lithium_niobate_e")


@pytest.fixture(scope="session")
def highgain_scenario():
    return bundled("octave_highgain")


@pytest.fixture(scope="session")
def highgain_config(highgain_scenario):
    return highgain_scenario.crystal()


@pytest.fixture(scope="session")
def highgain_spectra(highgain_config):
    """nu = 0.146 spectra on the production 2^14 grid."""
    return compute_spectra(highgain_config, make_grid(highgain_config, 2 ** 14))


@pytest.fixture(scope="session")
def coarse_spectra(highgain_config):
    # 2^12 points under-resolve the angle near the band edges; the unwrapped
    # angle is still even, which is all the coarse tests use
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PhaseAliasingWarning)
        return compute_spectra(highgain_config, make_grid(highgain_config, 2 ** 12))


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    """Record one PASS/FAIL line per acceptance criterion; printed at the end of the run."""

    def record(number, passed, text):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {text}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
