import pytest

from locktongue.compatibility import cached_limit_cycle, resonance_frame

OMEGA0_25_2 = 1.1434396712327
OMEGA0_5_4 = 1.6986448907586


@pytest.fixture(scope="session")
def lc25():
    return cached_limit_cycle(2.5, 2.0)


@pytest.fixture(scope="session")
def lc54():
    return cached_limit_cycle(5.0, 4.0)


@pytest.fixture(scope="session")
def frame54_2():
    return resonance_frame(5.0, 4.0, 2, 1)


@pytest.fixture(scope="session")
def frame25_1():
    return resonance_frame(2.5, 2.0, 1, 1)
