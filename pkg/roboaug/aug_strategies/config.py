from typing import Type

from roboaug.aug_strategies.background import BackgroundStrategy
from roboaug.aug_strategies.base import AugStrategy, normalize_method
from roboaug.aug_strategies.engine import EngineStrategy
from roboaug.aug_strategies.imagenet import ImageNetStrategy
from roboaug.aug_strategies.inpainting import InpaintingStrategy
from roboaug.aug_strategies.none import NoAugStrategy
from roboaug.aug_strategies.texture import TextureStrategy


AUG_METHODS = {
    "engine": EngineStrategy,
    "background": BackgroundStrategy,
    "imagenet": ImageNetStrategy,
    "texture": TextureStrategy,
    "inpainting": InpaintingStrategy,
    "none": NoAugStrategy,
}

# methods whose background comes from an asset directory
ASSET_METHODS = {"texture": "texture", "imagenet": "image"}


def get_strategy(method: str) -> Type[AugStrategy]:
    return AUG_METHODS[normalize_method(method)]
