import json
import logging
import re
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from roboaug.errors import SchemaError, ValidationError
from roboaug.load_data.base import (
    Frame,
    LazyFrames,
    LoadDataset,
    as_frame,
    image_size,
    write_frame,
)
from roboaug.mask_pipeline.masks import BinaryMask, write_mask

logger = logging.getLogger(__name__)

_FRAME_FILE = re.compile(r"^(\d{6})\.png$")
_EPISODE_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._\-]*$")

# words that end an object phrase in extract_object_names
_PHRASE_STOP = {
    "the", "a", "an", "to", "on", "onto", "in", "into", "at", "from", "with",
    "and", "of", "off", "under", "over", "near", "by", "inside", "up", "down",
}


@dataclass(frozen=True)
class Metadata:
    """
    Per-episode non-visual data. ``extra`` holds proprioception, actions and
    anything else verbatim; roboaug never interprets it.
    """

    instruction: str
    object_names: Tuple[str, ...] = ()
    extra: Dict = field(default_factory=dict)
    # exact meta.json bytes when loaded from disk
    raw: Optional[bytes] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.instruction, str) or not self.instruction.strip():
            raise SchemaError("Metadata.instruction must be a non-empty string")
        object.__setattr__(self, "object_names", tuple(self.object_names))

    def to_json_bytes(self) -> bytes:
        if self.raw is not None:
            return self.raw
        doc = {
            "instruction": self.instruction,
            "object_names": list(self.object_names),
            "extra": self.extra,
        }
        return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")

    @classmethod
    def from_json_bytes(cls, raw: bytes, episode_id: str = "?") -> "Metadata":
        try:
            doc = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise SchemaError(f"Episode '{episode_id}': meta.json is not valid JSON ({e})")
        if not isinstance(doc, dict):
            raise SchemaError(f"Episode '{episode_id}': meta.json must hold an object")
        instruction = doc.get("instruction")
        object_names = doc.get("object_names", [])
        extra = doc.get("extra", {})
        if not isinstance(instruction, str) or not instruction.strip():
            raise SchemaError(f"Episode '{episode_id}': missing or empty 'instruction'")
        if not isinstance(object_names, list) or not all(
            isinstance(n, str) for n in object_names
        ):
            raise SchemaError(f"Episode '{episode_id}': 'object_names' must be a string array")
        if not isinstance(extra, dict):
            raise SchemaError(f"Episode '{episode_id}': 'extra' must be an object")
        return cls(instruction, tuple(object_names), extra, raw=raw)


@dataclass
class Episode:
    id: str
    frames: Sequence[Frame]
    metadata: Metadata

    def __post_init__(self):
        if not isinstance(self.id, str) or not _EPISODE_ID.match(self.id):
            raise SchemaError(f"Invalid episode id {self.id!r}")
        if len(self.frames) == 0:
            raise ValidationError(f"Episode '{self.id}' has no frames")
        if not isinstance(self.frames, LazyFrames):
            shapes = {as_frame(f).shape for f in self.frames}
            if len(shapes) > 1:
                raise ValidationError(
                    f"Episode '{self.id}' mixes frame dimensions: {sorted(shapes)}"
                )

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def dims(self) -> Tuple[int, int]:
        """(width, height) shared by every frame."""
        frame = self.frames[0]
        return int(frame.shape[1]), int(frame.shape[0])


@dataclass
class DemoDataset:
    episodes: List[Episode]
    root: Optional[Path] = None

    def __post_init__(self):
        _check_unique_ids(self.episodes)

    def __len__(self) -> int:
        return len(self.episodes)

    def __iter__(self):
        return iter(self.episodes)

    def episode(self, episode_id: str) -> Episode:
        for ep in self.episodes:
            if ep.id == episode_id:
                return ep
        raise SchemaError(f"Dataset has no episode {episode_id!r}")

    @property
    def n_frames(self) -> int:
        return sum(len(ep) for ep in self.episodes)


def _check_unique_ids(episodes: Sequence[Episode]) -> None:
    seen = set()
    for ep in episodes:
        if ep.id in seen:
            raise SchemaError(f"Duplicate episode id '{ep.id}'")
        seen.add(ep.id)


def episode_dir(root: Union[str, Path], episode_id: str) -> Path:
    return Path(root) / "episodes" / episode_id


def episode_mask_dir(root: Union[str, Path], episode_id: str, kind: str) -> Path:
    """Ground-truth mask folder: kind is ``robot``, ``object`` or ``proposals``."""
    return episode_dir(root, episode_id) / "masks" / kind


def write_episode_masks(
    root: Union[str, Path],
    episode_id: str,
    robot: Sequence[BinaryMask],
    object: Optional[Sequence[BinaryMask]] = None,
    proposals: Optional[Sequence[Sequence[BinaryMask]]] = None,
) -> None:
    """Store per-frame ground-truth masks next to an episode's frames."""
    for i, mask in enumerate(robot):
        write_mask(mask, episode_mask_dir(root, episode_id, "robot") / LoadDataset.frame_name(i))
    for i, mask in enumerate(object or []):
        write_mask(mask, episode_mask_dir(root, episode_id, "object") / LoadDataset.frame_name(i))
    for i, frame_proposals in enumerate(proposals or []):
        for k, mask in enumerate(frame_proposals):
            write_mask(mask, episode_mask_dir(root, episode_id, "proposals") / f"{i:06d}_{k}.png")


def _frame_paths(frames_dir: Path, episode_id: str) -> List[Path]:
    if not frames_dir.is_dir():
        raise SchemaError(f"Episode '{episode_id}' has no frames/ directory")
    indexed = []
    for p in frames_dir.iterdir():
        m = _FRAME_FILE.match(p.name)
        if m:
            indexed.append((int(m.group(1)), p))
    indexed.sort()
    if not indexed:
        raise SchemaError(f"Episode '{episode_id}' has no frames")
    for expected, (idx, _) in enumerate(indexed):
        if idx != expected:
            raise SchemaError(
                f"Episode '{episode_id}': frame files are not contiguous, "
                f"expected {LoadDataset.frame_name(expected)}"
            )
    return [p for _, p in indexed]


def _load_episode(ep_dir: Path) -> Episode:
    episode_id = ep_dir.name
    meta_path = ep_dir / LoadDataset.META_FILE
    if not meta_path.is_file():
        raise SchemaError(f"Episode '{episode_id}' is missing {LoadDataset.META_FILE}")
    metadata = Metadata.from_json_bytes(meta_path.read_bytes(), episode_id)

    paths = _frame_paths(ep_dir / "frames", episode_id)
    first = image_size(paths[0])
    for p in paths[1:]:
        size = image_size(p)
        if size != first:
            raise ValidationError(
                f"Episode '{episode_id}': frame {p.name} is {size[0]}x{size[1]}, "
                f"expected {first[0]}x{first[1]}"
            )
    return Episode(episode_id, LazyFrames(paths), metadata)


def load_dataset(root: Union[str, Path]) -> DemoDataset:
    """
    Load a demonstration dataset laid out as
    ``root/episodes/<id>/frames/%06d.png`` + ``root/episodes/<id>/meta.json``.
    Frames are decoded lazily.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"Dataset root {root} does not exist")
    episodes_root = root / "episodes"
    ep_dirs = (
        sorted(p for p in episodes_root.iterdir() if p.is_dir())
        if episodes_root.is_dir()
        else []
    )
    if not ep_dirs:
        raise SchemaError(f"no episodes found in {root}")

    episodes = [_load_episode(d) for d in ep_dirs]
    logger.info(
        "Loaded %d episodes (%d frames) from %s",
        len(episodes),
        sum(len(e) for e in episodes),
        root,
    )
    return DemoDataset(episodes, root=root)


def write_episode(root: Union[str, Path], episode: Episode) -> Path:
    """Write one episode below ``root``; returns the episode directory."""
    ep_dir = episode_dir(root, episode.id)
    frames_dir = ep_dir / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(episode.frames):
        write_frame(frame, frames_dir / LoadDataset.frame_name(i))
    (ep_dir / LoadDataset.META_FILE).write_bytes(episode.metadata.to_json_bytes())
    return ep_dir


def save_dataset(
    ds: DemoDataset, root: Union[str, Path], overwrite: bool = False
) -> Path:
    """Write ``ds`` below ``root`` with lossless PNG frames and verbatim metadata."""
    root = Path(root)
    _check_unique_ids(ds.episodes)

    if root.exists() and any(root.iterdir()):
        if not overwrite:
            raise FileExistsError(
                f"Output {root} already exists; pass overwrite=True to replace it"
            )
        if ds.root is not None and Path(ds.root).resolve() == root.resolve():
            raise SchemaError(f"Refusing to overwrite {root}: it is the dataset's own root")
        shutil.rmtree(root)

    root.mkdir(parents=True, exist_ok=True)
    for episode in ds.episodes:
        write_episode(root, episode)
    logger.info("Saved %d episodes to %s", len(ds.episodes), root)
    return root


def datasets_equal(a: DemoDataset, b: DemoDataset) -> bool:
    """Structural equality: ids, metadata and every frame raster, in order."""
    if [e.id for e in a.episodes] != [e.id for e in b.episodes]:
        return False
    for ea, eb in zip(a.episodes, b.episodes):
        if ea.metadata != eb.metadata or len(ea) != len(eb):
            return False
        for fa, fb in zip(ea.frames, eb.frames):
            if not np.array_equal(fa, fb):
                return False
    return True


def extract_object_names(instruction: str) -> List[str]:
    """
    Naive object-name extraction: the words following each "the" up to the
    next preposition, article or conjunction. "put the mouse on the pad"
    gives ["mouse", "pad"].
    """
    words = re.findall(r"[a-z0-9\-]+", instruction.lower())
    names: List[str] = []
    i = 0
    while i < len(words):
        if words[i] == "the":
            phrase = []
            j = i + 1
            while j < len(words) and words[j] not in _PHRASE_STOP:
                phrase.append(words[j])
                j += 1
            name = " ".join(phrase)
            if name and name not in names:
                names.append(name)
            i = j
        else:
            i += 1
    return names


class DemoDatasetLoader(LoadDataset):
    DATASET_NAME = "demo"

    @classmethod
    def load_data(cls, root):
        return load_dataset(root)
