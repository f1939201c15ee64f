from roboaug.aug_strategies.base import AugStrategy


class NoAugStrategy(AugStrategy):
    METHOD_NAME = "none"
    COMPOSITES = False
    USES_FOREGROUND = False

    @classmethod
    def augment(cls, frame, fg, resources, rng):
        return frame.copy()
