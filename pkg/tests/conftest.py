import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
sys.path.insert(0, str(TESTS_DIR))

TARGETS = TESTS_DIR / "targets"


@pytest.fixture(scope="session")
def targets_dir() -> Path:
    return TARGETS


@pytest.fixture(scope="session")
def mesh_spec():
    import graphref
    from graphref.constraints import parse_spec

    return parse_spec(graphref.builtin_spec_text())
