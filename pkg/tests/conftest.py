import pytest

from commingle.forward import difference_sequence, sample
from commingle.signal import BlurMixture, PiecewiseSignal, SamplingGrid

GAMMA0 = (0, 0, 242, 253, -256, 218, 254, -256, -26, 0, 0)
GAMMA1 = (0, 5, 256, -209, -250, 256, -196, -254, 0, 0, 0)
DELTA0 = (0, 0, 242, 11, -509, 474, 36, -510, 230, 26, 0)
DELTA1 = (0, 5, 251, -465, -41, 506, -452, -58, 254, 0, 0)
LABELS0 = ("Z", "Z", "P1", "P2", "P3", "P1", "P2", "P3", "F1", "F2", "Z")
LABELS1 = ("Z", "S1", "S2", "P1", "P2", "P3", "P1", "P2", "P3", "Z", "Z")
GD = (256, -512, 512, -512, 256)
AMPS = (256, -256, 256, -256)


@pytest.fixture
def square_wave():
    """Four regions of +-1 with breaks 1.51T apart."""
    return PiecewiseSignal((0, 1.51, 3.02, 4.53, 6.04), AMPS)


@pytest.fixture
def alternate_wave():
    """A different signal that quantizes to the same samples under wider blur."""
    return PiecewiseSignal((0, 1.508, 3.014, 4.527, 6.035), (258, -256, 257, -256))


@pytest.fixture
def setup0():
    return BlurMixture.gaussian(1 / 8), SamplingGrid(-1.8, 11)


@pytest.fixture
def setup1():
    return BlurMixture.gaussian(1 / 7), SamplingGrid(-1.3, 11)


@pytest.fixture
def obs0(square_wave, setup0):
    return sample(square_wave, *setup0)


@pytest.fixture
def obs1(square_wave, setup1):
    return sample(square_wave, *setup1)


@pytest.fixture
def deltas(obs0, obs1):
    return difference_sequence(obs0), difference_sequence(obs1)


def pytest_terminal_summary(terminalreporter):
    from .acceptance_log import summary_lines

    lines = summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
