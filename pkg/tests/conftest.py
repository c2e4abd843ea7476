import numpy as np
import pytest

from rmd.signals import SineComponent, gen_am_mixture, gen_sinusoid_mixture

THREE_TONE_COMPONENTS = [
    SineComponent(frequency=2.0, amplitude=3.0),
    SineComponent(frequency=5.0, amplitude=0.5),
    SineComponent(frequency=19.0, amplitude=4.0),
]
SAMPLE_RATE = 200.0
DURATION = 10.0


@pytest.fixture(scope="session")
def three_tone():
    """The standard 2/5/19 Hz benchmark mixture and its components."""
    mixture, truths = gen_sinusoid_mixture(THREE_TONE_COMPONENTS, SAMPLE_RATE, DURATION)
    return mixture, truths


@pytest.fixture(scope="session")
def am_mixture():
    """The amplitude-modulated benchmark mixture (3/8/31 Hz carriers)."""
    return gen_am_mixture(3.0, 8.0, 31.0, 0.5, SAMPLE_RATE, DURATION)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
