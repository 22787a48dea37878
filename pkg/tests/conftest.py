import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.geometry.shapes import PlugModel, SceneSpec, SocketModel  # noqa: E402
from src.insertion_env import EnvConfig  # noqa: E402

RUN_SLOW = os.getenv("INSERCAO_RUN_SLOW") == "1"


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: treino/avaliação completos (INSERCAO_RUN_SLOW=1)")


def pytest_collection_modifyitems(config, items):
    if RUN_SLOW:
        return
    pular = pytest.mark.skip(reason="defina INSERCAO_RUN_SLOW=1 para executar")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(pular)


def make_scene(primitive="cylinder", width=50.0, tolerance=2.0, height=40.0, cavity_depth=25.0,
               outer_width=90.0, outer_height=35.0, length=None, name=None, samples=1000):
    plug = PlugModel(primitive, width, height, length)
    socket = SocketModel.for_plug(plug, tolerance, cavity_depth, outer_width, outer_width, outer_height)
    return SceneSpec(name or f"{primitive}_{tolerance:g}", plug, socket, samples=samples)


@pytest.fixture
def easy_scene():
    return make_scene("cylinder", tolerance=2.0, name="easy_cylinder")


@pytest.fixture
def box_scene():
    return make_scene("box", tolerance=2.0, name="easy_box")


@pytest.fixture
def small_scene():
    return make_scene("cylinder", width=8.0, tolerance=0.5, height=25.0, cavity_depth=15.0,
                      outer_width=40.0, outer_height=20.0, name="small_cylinder_8")


@pytest.fixture
def easy_env(easy_scene):
    return EnvConfig(scene=easy_scene)
