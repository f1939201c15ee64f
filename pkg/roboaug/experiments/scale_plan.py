import logging
from dataclasses import asdict, dataclass, field
from typing import List, Sequence, Union

from roboaug.aug_strategies.base import derive_seed
from roboaug.errors import SchemaError

logger = logging.getLogger(__name__)

# training epochs per data factor, so every variant sees a similar number of steps
SCALE_EPOCHS = {1: 1000, 2: 700, 4: 400, 6: 300}
BASE_EPOCHS = 1000


@dataclass(frozen=True)
class PlanEntry:
    source_id: str
    copy_index: int
    seed: int
    original: bool = False

    @property
    def episode_id(self) -> str:
        return self.source_id if self.original else f"{self.source_id}__aug{self.copy_index}"


@dataclass
class ScalePlan:
    factor: int
    mix: bool
    episodes: List[PlanEntry] = field(default_factory=list)
    train_epochs: int = BASE_EPOCHS

    def __len__(self) -> int:
        return len(self.episodes)

    @property
    def n_original(self) -> int:
        return sum(e.original for e in self.episodes)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["n_episodes"] = len(self)
        out["n_original"] = self.n_original
        return out


def copy_seed(base_seed: int, copy_index: int) -> int:
    return derive_seed(base_seed, "copy", copy_index)


def train_epochs(factor: int) -> int:
    if factor in SCALE_EPOCHS:
        return SCALE_EPOCHS[factor]
    epochs = int(round(BASE_EPOCHS / factor))
    logger.warning(
        "No epoch setting for factor %s (known: %s), using %d",
        factor,
        sorted(SCALE_EPOCHS),
        epochs,
    )
    return epochs


def scale_plan(
    n_demos: Union[int, Sequence[str]],
    factor: int,
    mix: bool = False,
    base_seed: int = 0,
) -> ScalePlan:
    """
    Plan an N-times enlarged dataset. Plain plans hold N augmented copies of
    every demo; mix plans keep the originals and add N-1 augmented copies.
    ``n_demos`` is a count or the actual episode ids.
    """
    if isinstance(n_demos, int):
        if n_demos < 1:
            raise SchemaError(f"n_demos must be >= 1, got {n_demos}")
        source_ids = [f"{i:06d}" for i in range(n_demos)]
    else:
        source_ids = list(n_demos)
        if not source_ids:
            raise SchemaError("scale_plan needs at least one source episode")
    if factor < 1:
        raise SchemaError(f"factor must be >= 1, got {factor}")
    if mix and factor < 2:
        raise SchemaError("A mix plan needs factor >= 2")

    entries: List[PlanEntry] = []
    first_copy = 0
    if mix:
        entries += [PlanEntry(s, 0, base_seed, original=True) for s in source_ids]
        first_copy = 1
    for k in range(first_copy, factor):
        seed = copy_seed(base_seed, k)
        entries += [PlanEntry(s, k, seed) for s in source_ids]
    return ScalePlan(factor=factor, mix=mix, episodes=entries, train_epochs=train_epochs(factor))
