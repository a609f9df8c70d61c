from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("ncwass", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ncwass")


@pytest.fixture(scope="session")
def fixtures():
    from ncwass.fixtures import build_fixtures

    return build_fixtures(0)
