from typing import Tuple

import numpy as np

from roboaug.aug_strategies.assets import AssetPool, cover_crop, pick_asset
from roboaug.aug_strategies.base import AugStrategy, frame_dims
from roboaug.errors import SchemaError
from roboaug.load_data.base import Frame


def gen_background_image(
    pool: AssetPool,
    dims: Tuple[int, int],
    rng: np.random.Generator,
    resample: str = "bilinear",
) -> Frame:
    """Random photograph, aspect-preserving cover scale and center crop."""
    if pool is None or pool.kind != "image":
        raise SchemaError("The imagenet method needs an asset pool of kind 'image'")
    return cover_crop(pick_asset(pool, rng), dims, resample=resample)


class ImageNetStrategy(AugStrategy):
    METHOD_NAME = "imagenet"

    @classmethod
    def background(cls, frame, fg, prompt, resources, rng):
        return gen_background_image(
            resources.asset_pool, frame_dims(frame), rng, resample=resources.config.resample
        )
