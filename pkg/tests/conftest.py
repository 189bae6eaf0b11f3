import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_rgb(rng, h=24, w=24):
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)


def random_gray(rng, h=24, w=24):
    return rng.integers(0, 256, size=(h, w), dtype=np.uint8)
