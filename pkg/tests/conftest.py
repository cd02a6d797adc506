import numpy as np
import pytest

from dr_cascade.grading import APTOS_2019_COUNTS, manifest_from_counts
from dr_cascade.split import stratified_split

TEST_COUNTS = (361, 74, 200, 39, 59)


@pytest.fixture(scope="session")
def aptos_manifest():
    return manifest_from_counts(APTOS_2019_COUNTS, prefix="aptos")


@pytest.fixture(scope="session")
def aptos_split(aptos_manifest):
    return stratified_split(aptos_manifest)


@pytest.fixture(scope="session")
def test_cohort():
    """A 733-image cohort with the per-grade counts of the held-out test split."""
    return manifest_from_counts(TEST_COUNTS, prefix="test")


def disc_image(width, height, box=None, value=(180, 90, 40), rng=None):
    """Black frame with a filled ellipse inscribed in ``box`` = (x0, y0, x1, y1), half-open."""
    img = np.zeros((height, width, 3), dtype=np.uint8)
    x0, y0, x1, y1 = box if box is not None else (0, 0, width, height)
    yy, xx = np.mgrid[0:height, 0:width]
    cx, cy = (x0 + x1 - 1) / 2, (y0 + y1 - 1) / 2
    rx, ry = max((x1 - x0) / 2, 0.5), max((y1 - y0) / 2, 0.5)
    inside = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
    if rng is None:
        img[inside] = value
    else:
        img[inside] = rng.integers(11, 256, size=(int(inside.sum()), 3), dtype=np.uint8)
    return img
