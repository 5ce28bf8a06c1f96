import numpy as np
import pytest

from diffred import Purpose, RandomStream, SpectrumProfile, synth_spiked


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture(scope="session")
def spiked_data():
    """500 x 200, one spike of 10 over 50 unit values, exactly centered."""
    profile = SpectrumProfile.spiked([10.0], 50)
    return synth_spiked(500, 200, profile, RandomStream(11, Purpose.SYNTH_DATA, 0), centered=True)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
