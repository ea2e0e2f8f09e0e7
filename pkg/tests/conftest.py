import numpy as np
import pytest

from ctaug.core import Image, Mask, Sample


def random_sample(rng: np.random.Generator, h: int = 64, w: int = 64, n_labels: int = 3) -> Sample:
    img = rng.integers(0, 256, (h, w), dtype=np.uint8)
    labels = rng.integers(0, n_labels, (h, w)).astype(np.uint8)
    return Sample(Image(img), Mask(labels), "synth", f"s{rng.integers(0, 1 << 30):08d}")


@pytest.fixture
def np_rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
