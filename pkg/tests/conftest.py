import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hssm.partitions import EppfSpec


def small_families():
    """One spec per implemented family branch, cheap enough for enumeration."""
    return [
        EppfSpec.pitman_yor(0.0, 1.0),          # Ewens
        EppfSpec.pitman_yor(0.5, 1.0),          # positive discount
        EppfSpec.pitman_yor(-0.5, 2.0),         # species cap m = 4
        EppfSpec.gnedin(3.2, 290.0),
        EppfSpec.gnedin(4.0, 4.0),              # integer root at k0 = 2
        EppfSpec.mfm(-1.0, (0.0, 0.0, 1.0)),    # three components exactly
        EppfSpec.mfm(-0.5, (0.4, 0.3, 0.2, 0.1)),
    ]


@pytest.fixture(params=small_families(), ids=lambda s: str(s))
def family(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
