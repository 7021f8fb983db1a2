import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from strel.geometry import Point, Polygon, validate_polygon


@pytest.fixture
def rng():
    return random.Random(20240817)


def square(x0: float, y0: float, side: float = 1.0) -> Polygon:
    return validate_polygon([
        Point(x0, y0), Point(x0 + side, y0),
        Point(x0 + side, y0 + side), Point(x0, y0 + side),
    ])


@pytest.fixture
def unit_square():
    return square(0.0, 0.0)
