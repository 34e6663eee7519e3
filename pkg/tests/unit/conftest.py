from pathlib import Path

import pytest

from coarsekit.metric_core import assemble_union, single_union
from tests.unit.oracles import complete, cycle, petersen

DATA_DIR = Path(__file__).resolve().parent.parent.parent / "data"


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def k6():
    return complete(6)


@pytest.fixture
def c8():
    return cycle(8)


@pytest.fixture
def petersen_graph():
    return petersen()


@pytest.fixture
def three_c4():
    c4 = cycle(4).metric
    return assemble_union([c4, c4, c4], base_gap=3)


@pytest.fixture
def c8_union(c8):
    return single_union(c8.metric)


@pytest.fixture(autouse=True)
def _clean_config(monkeypatch):
    for name in ("COARSEKIT_EXACT_CAP", "COARSEKIT_RETRY_CAP", "COARSEKIT_WORKERS", "COARSEKIT_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
