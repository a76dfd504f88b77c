import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from shearcase.knot_reps import KnotSpec, sample_image_curve


@pytest.fixture(scope="session")
def trefoil_image():
    return sample_image_curve(KnotSpec.torus(2, 3), rng=np.random.default_rng(7))


@pytest.fixture(scope="session")
def t25_image():
    return sample_image_curve(KnotSpec.torus(2, 5), rng=np.random.default_rng(7))
