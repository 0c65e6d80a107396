import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from wankelmut import make_environment, reference_ann_genome


@pytest.fixture(scope="session")
def env40():
    return make_environment(40)


@pytest.fixture(scope="session")
def ref_genome():
    return reference_ann_genome()


@pytest.fixture(scope="session")
def packaged_genome_path():
    import wankelmut

    return Path(wankelmut.__file__).parent / "data" / "handcoded_ann.txt"
