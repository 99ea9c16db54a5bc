import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture
def cfg():
    from uavmec import SystemConfig
    return SystemConfig()


@pytest.fixture
def ues():
    from uavmec import default_ues
    return default_ues()
