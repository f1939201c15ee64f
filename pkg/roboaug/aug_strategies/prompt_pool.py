from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from roboaug import ASSETS_DIR
from roboaug.errors import SchemaError
from roboaug.load_data.roboseg import AnnotatedFrame

DEFAULT_PROMPT_POOL = ASSETS_DIR / "prompt_pool" / "scene_prompts.txt"


@dataclass(frozen=True)
class PromptPool:
    """Scene descriptions that condition background generation."""

    prompts: tuple

    def __post_init__(self):
        object.__setattr__(self, "prompts", tuple(self.prompts))

    def __len__(self) -> int:
        return len(self.prompts)


def sample_prompt(pool: PromptPool, rng: np.random.Generator) -> str:
    """Uniform draw; the only source of randomness is ``rng``."""
    if len(pool) == 0:
        raise SchemaError("Cannot sample from an empty prompt pool")
    return pool.prompts[int(rng.integers(len(pool)))]


def load_prompt_pool(path: Union[str, Path]) -> PromptPool:
    """One prompt per non-blank line, order preserved."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    prompts = [line.strip() for line in lines if line.strip()]
    if not prompts:
        raise SchemaError(f"Prompt pool {path} is empty")
    return PromptPool(prompts)


def save_prompt_pool(pool: PromptPool, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(f"{p}\n" for p in pool.prompts), encoding="utf-8")
    return path


def prompt_pool_from_roboseg(records: Sequence[AnnotatedFrame]) -> PromptPool:
    """Collect every scene description of an annotated corpus, deduplicated."""
    seen: List[str] = []
    for rec in records:
        for desc in rec.descriptions:
            desc = desc.strip()
            if desc and desc not in seen:
                seen.append(desc)
    if not seen:
        raise SchemaError("The annotated corpus carries no scene descriptions")
    return PromptPool(seen)
