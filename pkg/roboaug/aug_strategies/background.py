from typing import Tuple

import numpy as np

from roboaug.aug_strategies.base import AugStrategy, frame_dims
from roboaug.aug_strategies.engine import SEED_BOUND, generation_failed
from roboaug.aug_strategies.generative import GenBackendDescriptor
from roboaug.errors import BackendError
from roboaug.load_data.base import Frame


def gen_background_scene(
    prompt: str,
    dims: Tuple[int, int],
    backend: GenBackendDescriptor,
    rng: np.random.Generator,
) -> Frame:
    """Text-to-image scene used as background, blind to the foreground layout."""
    width, height = dims
    seed = int(rng.integers(SEED_BOUND))
    try:
        return backend.client().generate("scene", prompt, width, height, seed)
    except BackendError as e:
        raise generation_failed(e, "scene generation", prompt)


class BackgroundStrategy(AugStrategy):
    METHOD_NAME = "background"
    USES_PROMPT = True

    @classmethod
    def background(cls, frame, fg, prompt, resources, rng):
        return gen_background_scene(prompt, frame_dims(frame), resources.generator, rng)
