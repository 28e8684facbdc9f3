import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parents[1]
MINI = ROOT / "data" / "mini"
FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def mini_dir():
    return MINI
