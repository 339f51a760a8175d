import importlib.util
from pathlib import Path

import pytest

from memsched.config import SchedulerConfig, parse_scheduler_config
from memsched.memory_model import parse_memory_map
from memsched.sfg_core import parse_sfg

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def fixture_path(name):
    return str(FIXTURES / name)


def load_fixture(sfg, memory_map, config=None):
    """(graph, map, cfg) parsed from files under fixtures/."""
    graph = parse_sfg((FIXTURES / sfg).read_text(), source=sfg)
    parsed_map = parse_memory_map((FIXTURES / memory_map).read_text(), source=memory_map)
    cfg = parse_scheduler_config((FIXTURES / config).read_text(), source=config) if config else None
    return graph, parsed_map, cfg


@pytest.fixture
def add_1port():
    return load_fixture("add.sfg", "add_1port.map", "add_h4.cfg")


@pytest.fixture
def fir4_cfg():
    return SchedulerConfig(horizon=16, op_latency={"mul": 2})


@pytest.fixture(scope="session")
def api_app():
    spec = importlib.util.spec_from_file_location("memsched_api", ROOT / "api" / "scheduler" / "app.py")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    module.app.config["TESTING"] = True
    return module.app


@pytest.fixture
def client(api_app):
    return api_app.test_client()
