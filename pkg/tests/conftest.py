import json
from pathlib import Path

import pytest

from luxplan.metrics import WeightConfig, evaluate
from luxplan.scene import load as load_scene
from luxplan.simulation import SimSettings, simulate

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

FIXTURE_NAMES = ("office", "studio", "gallery")


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.json"


def fixture_doc(name: str) -> dict:
    return json.loads(fixture_path(name).read_text())


@pytest.fixture(scope="session")
def office_scene():
    return load_scene(fixture_path("office"))


@pytest.fixture(scope="session")
def studio_scene():
    return load_scene(fixture_path("studio"))


@pytest.fixture(scope="session")
def gallery_scene():
    return load_scene(fixture_path("gallery"))


@pytest.fixture(scope="session")
def studio_map(studio_scene):
    return simulate(studio_scene, SimSettings())


@pytest.fixture(scope="session")
def studio_report(studio_scene, studio_map):
    return evaluate(studio_scene, studio_map, WeightConfig())


@pytest.fixture(scope="session")
def office_map(office_scene):
    # Coarse preview resolution keeps the suite fast; tests that need the
    # scene's native resolution simulate explicitly.
    return simulate(office_scene, SimSettings(resolution=0.3))


@pytest.fixture(scope="session")
def office_report(office_scene, office_map):
    return evaluate(office_scene, office_map, WeightConfig())
