import numpy as np
import pytest

from vtsr.core import Frame
from vtsr.synthbench import SyntheticSceneSpec, generate


def noise_scene(width=96, height=96, v0=(0.0, 0.0), a=(0.0, 0.0), frame_count=4, seed=3):
    spec = SyntheticSceneSpec(width=width, height=height, pattern='band-limited-noise',
                              v0=v0, a=a, frame_count=frame_count, seed=seed)
    return spec, generate(spec)


def interior(array, margin=8):
    return array[margin:-margin, margin:-margin]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_frame(rng):
    def make(width=24, height=20, channels=3):
        return Frame(rng.uniform(0.0, 1.0, (height, width, channels)))
    return make
