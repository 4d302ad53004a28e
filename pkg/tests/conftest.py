import numpy as np
import pytest

from fdelink.modem import unique_word_for
from fdelink.pulses import design_rrc, matched_filter
from fdelink.sc import Numerology


@pytest.fixture(scope="session")
def num0():
    """802.11ad numerology, identity-channel guard offset."""
    return Numerology.ieee80211ad(channel_taps=0)


@pytest.fixture(scope="session")
def num10():
    """802.11ad numerology, guard offset for a 10-tap-memory channel."""
    return Numerology.ieee80211ad(channel_taps=10)


@pytest.fixture(scope="session")
def uw64():
    return unique_word_for(55, 9)


@pytest.fixture(scope="session")
def rrc02():
    return design_rrc(67, 0.2, 3)


@pytest.fixture(scope="session")
def mf02(rrc02):
    return matched_filter(rrc02)


def random_qpsk(rng, shape):
    return (rng.choice([-1.0, 1.0], shape) + 1j * rng.choice([-1.0, 1.0], shape)) / np.sqrt(2.0)
