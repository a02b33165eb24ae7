import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from atomreadout import reference_cycle_config


@pytest.fixture(scope="session")
def ref_cfg():
    return reference_cycle_config()
