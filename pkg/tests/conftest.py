import os

import pytest

from scripts.community import generate_community
from scripts.config import CommunityConfig
from scripts.plan import TimeGrid
from tests.builders import EVENING_CATALOG

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SCENARIOS = os.path.join(ROOT, "scenarios")


@pytest.fixture
def scenario_path():
    def _path(name):
        return os.path.join(SCENARIOS, name)
    return _path


@pytest.fixture
def grid12():
    """Two-hour slots."""
    return TimeGrid(12)


@pytest.fixture
def grid288():
    return TimeGrid(288)


@pytest.fixture(scope="session")
def community20():
    return generate_community(CommunityConfig(homes=20), seed=5)


@pytest.fixture(scope="session")
def community50():
    return generate_community(CommunityConfig(homes=50, appliances=EVENING_CATALOG), seed=2024)


@pytest.fixture
def write_scenario(tmp_path):
    """Write YAML text to a scenario file in tmp_path and return its path."""
    def _write(text, name="scenario.yaml"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return _write
