import copy
import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from somtissue.pipeline.config import EXAMPLE_CONFIG, parse_config  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def _example_doc():
    return json.loads(EXAMPLE_CONFIG.read_text())


@pytest.fixture
def example_doc(_example_doc):
    return copy.deepcopy(_example_doc)


@pytest.fixture
def example_cfg(example_doc):
    return parse_config(example_doc)


@pytest.fixture
def write_config(tmp_path):
    def _write(doc, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return path
    return _write


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
