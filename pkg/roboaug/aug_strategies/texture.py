from typing import Tuple

import numpy as np

from roboaug.aug_strategies.assets import AssetPool, cover_crop, pick_asset
from roboaug.aug_strategies.base import AugStrategy, frame_dims
from roboaug.errors import SchemaError
from roboaug.load_data.base import Frame


def gen_background_texture(
    pool: AssetPool,
    dims: Tuple[int, int],
    rng: np.random.Generator,
    scale_jitter: float = 1.0,
    resample: str = "bilinear",
) -> Frame:
    """Random texture, cover-scaled (optionally jittered) and center-cropped."""
    if pool is None or pool.kind != "texture":
        raise SchemaError("The texture method needs an asset pool of kind 'texture'")
    texture = pick_asset(pool, rng)
    scale = float(rng.uniform(1.0, scale_jitter)) if scale_jitter > 1.0 else 1.0
    return cover_crop(texture, dims, scale=scale, resample=resample)


class TextureStrategy(AugStrategy):
    METHOD_NAME = "texture"

    @classmethod
    def background(cls, frame, fg, prompt, resources, rng):
        cfg = resources.config
        return gen_background_texture(
            resources.asset_pool,
            frame_dims(frame),
            rng,
            scale_jitter=cfg.scale_jitter,
            resample=cfg.resample,
        )
