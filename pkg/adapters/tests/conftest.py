import numpy as np
import pytest
from PIL import Image

from rtwmaps import ModelsConfig, build_backends

SIZES = [(96, 128), (80, 120), (100, 100), (64, 160), (120, 88)]


def make_photo(index: int) -> np.ndarray:
    """Deterministic stand-in for a photograph: gradient background,
    a few contrasting rectangles and a disk, mild sensor noise."""
    rng = np.random.default_rng(100 + index)
    h, w = SIZES[index % len(SIZES)]
    yy, xx = np.mgrid[0:h, 0:w]
    img = np.stack(
        [xx / w, 0.3 + 0.5 * yy / h, np.full((h, w), 0.55)], axis=2
    )
    for _ in range(3):
        y0 = int(rng.integers(0, h - 16))
        x0 = int(rng.integers(0, w - 24))
        bh = int(rng.integers(8, 16))
        bw = int(rng.integers(12, 24))
        img[y0 : y0 + bh, x0 : x0 + bw] = rng.uniform(0.0, 1.0, size=3)
    cy, cx, r = h // 3, (2 * w) // 3, min(h, w) // 6
    disk = (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
    img[disk] = rng.uniform(0.0, 1.0, size=3)
    img += rng.normal(0.0, 0.02, size=img.shape)
    return np.clip(img, 0.0, 1.0).astype(np.float32)


@pytest.fixture(scope="session")
def photos_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("photos")
    for i in range(5):
        arr = (make_photo(i) * 255.0).round().astype(np.uint8)
        Image.fromarray(arr).save(root / f"photo_{i:02d}.png")
    return root


@pytest.fixture(scope="session")
def default_backends():
    return build_backends(ModelsConfig())
