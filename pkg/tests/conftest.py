import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from iesguard.devices import HOURS_PER_DAY, BuildingParams, building_heat_demand
from iesguard.environment import DayProfile, SystemParams
from iesguard.harness.profiles import generate_profiles, synthetic_tou
from iesguard.nn import MlpParams

# Slow CI runners trip the too_slow health check on the bound and network properties.
settings.register_profile("ci", suppress_health_check=(HealthCheck.too_slow,), deadline=None)
settings.register_profile("dev", deadline=None, max_examples=50)
settings.load_profile("ci" if "CI" in os.environ else "dev")


@pytest.fixture
def params():
    return SystemParams()


@pytest.fixture
def constant_day():
    """A day with constant weather and demand at 0 °C outside."""
    b = BuildingParams()
    heat = building_heat_demand(b.t_comfort, b.t_comfort, 0.0, b)
    n = HOURS_PER_DAY
    return DayProfile((0.0,) * n, (200.0,) * n, (300.0,) * n, (20.0,) * n, (heat,) * n, synthetic_tou(), 0)


@pytest.fixture
def profiles():
    return generate_profiles(3, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_net(rng):
    return MlpParams.init((4, 8, 8, 3), rng)
