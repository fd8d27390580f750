"""
Pytest configuration and shared fixtures
"""
import json
import logging
import os
from pathlib import Path
from typing import Callable, Dict

import pytest

from app.core.config import reset_settings
from app.models import Box, Sign
from app.services import constructs, fields
from app.services.phi import QuadraticFamily, RandersType

EXAMPLES_DIR = Path(__file__).resolve().parent.parent / "examples"


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Every test sees default settings, unaffected by the caller's environment"""
    for name in list(os.environ):
        if name.startswith("ABFINSLER_"):
            monkeypatch.delenv(name, raising=False)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def unit_box() -> Box:
    return Box(-0.5, 0.5, -0.5, 0.5)


@pytest.fixture
def euclidean(unit_box):
    return fields.euclidean_pair(unit_box)


@pytest.fixture
def randers_closed(unit_box):
    """Flat alpha with beta = x1 y1"""
    return fields.flat_pair(lambda x1, x2: x1, lambda x1, x2: 0.0, unit_box, name="randers-closed")


@pytest.fixture
def randers_nonclosed(unit_box):
    """Flat alpha with beta = x2 y1"""
    return fields.flat_pair(lambda x1, x2: x2, lambda x1, x2: 0.0, unit_box, name="randers-nonclosed")


@pytest.fixture
def randers() -> RandersType:
    return RandersType(epsilon=1.0, k=0.0)


@pytest.fixture
def section7_plus():
    return constructs.section7_pair(Sign.PLUS)


@pytest.fixture
def pf_example_plus():
    return constructs.build_pf_example(0.0, 0.0, 1.0, 0.0, Sign.PLUS)


@pytest.fixture
def quadratic_plus() -> QuadraticFamily:
    return QuadraticFamily(Sign.PLUS)


@pytest.fixture
def write_config(tmp_path) -> Callable[[Dict], Path]:
    """Write a config dict to a temporary JSON file"""

    def write(data: Dict, name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return path

    return write


@pytest.fixture
def root_logging():
    """Restore root logger handlers and level after code that reconfigures logging"""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield root
    for handler in list(root.handlers):
        root.removeHandler(handler)
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(level)
