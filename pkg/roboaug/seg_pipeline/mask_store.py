import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from roboaug.errors import BackendError
from roboaug.load_data.base import Frame, LoadDataset, frame_digest, read_frame
from roboaug.load_data.demo import episode_dir, episode_mask_dir
from roboaug.load_data.roboseg import AnnotatedFrame
from roboaug.mask_pipeline.masks import BinaryMask, bbox, popcount, read_mask

logger = logging.getLogger(__name__)

ROBOT_PROMPT = "robot"

_PROPOSAL_FILE = re.compile(r"^(\d{6})_(\d+)\.png$")


def sort_proposals(proposals: Sequence[BinaryMask]) -> List[BinaryMask]:
    """Area descending; ties go to the top-most, then left-most bounding box."""

    def key(mask):
        box = bbox(mask)
        corner = (box.y0, box.x0) if box is not None else (0, 0)
        return (-popcount(mask), corner)

    return sorted(proposals, key=key)


def _same_masks(a, b) -> bool:
    if isinstance(a, list) or isinstance(b, list):
        return len(a) == len(b) and all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


class MaskStore:
    """
    Ground-truth masks indexed by frame content. The passthrough backend reads
    from a store, so it answers for a frame wherever that frame appears.
    """

    def __init__(self):
        self._entries: Dict[str, Dict] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, frame: Frame) -> bool:
        return frame_digest(frame) in self._entries

    def add(
        self,
        frame: Frame,
        robot: Optional[BinaryMask] = None,
        object: Optional[BinaryMask] = None,
        proposals: Optional[Sequence[BinaryMask]] = None,
    ) -> None:
        """Index masks under the frame's digest; later masks replace earlier ones."""
        digest = frame_digest(frame)
        entry = self._entries.setdefault(digest, {})
        new = {"robot": robot, "object": object}
        if proposals is not None:
            new["proposals"] = sort_proposals(proposals)
        for key, masks in new.items():
            if masks is None:
                continue
            if key in entry and not _same_masks(entry[key], masks):
                logger.warning(
                    "Identical frames (digest %s) carry different %s masks; keeping the last one",
                    digest[:12],
                    key,
                )
            entry[key] = masks

    def _entry(self, frame: Frame) -> Dict:
        try:
            return self._entries[frame_digest(frame)]
        except KeyError:
            raise BackendError("passthrough store has no masks for this frame")

    def lookup(self, frame: Frame, prompt: str) -> BinaryMask:
        """``"robot"`` gives the robot mask, any other prompt the object mask."""
        entry = self._entry(frame)
        key = "robot" if prompt == ROBOT_PROMPT else "object"
        if key not in entry:
            raise BackendError(f"passthrough store has no {key} mask for this frame")
        return entry[key].copy()

    def proposals(self, frame: Frame) -> List[BinaryMask]:
        return [m.copy() for m in self._entry(frame).get("proposals", [])]

    @classmethod
    def from_roboseg(cls, records: Sequence[AnnotatedFrame]) -> "MaskStore":
        store = cls()
        for rec in records:
            store.add(rec.image, robot=rec.robot, object=rec.object)
        return store

    @classmethod
    def from_dataset(cls, root: Union[str, Path]) -> "MaskStore":
        """
        Index the ground-truth masks stored next to a demo dataset:
        ``masks/robot/%06d.png``, ``masks/object/%06d.png`` and
        ``masks/proposals/%06d_<k>.png`` inside each episode directory.
        """
        root = Path(root)
        store = cls()
        for ep in sorted(p for p in (root / "episodes").glob("*") if p.is_dir()):
            frames_dir = episode_dir(root, ep.name) / "frames"
            proposal_files: Dict[int, List[Path]] = {}
            prop_dir = episode_mask_dir(root, ep.name, "proposals")
            if prop_dir.is_dir():
                for p in sorted(prop_dir.iterdir()):
                    m = _PROPOSAL_FILE.match(p.name)
                    if m:
                        proposal_files.setdefault(int(m.group(1)), []).append(p)

            for frame_path in sorted(frames_dir.glob("*.png")):
                index = int(frame_path.stem)
                name = LoadDataset.frame_name(index)
                robot_path = episode_mask_dir(root, ep.name, "robot") / name
                object_path = episode_mask_dir(root, ep.name, "object") / name
                store.add(
                    read_frame(frame_path),
                    robot=read_mask(robot_path) if robot_path.is_file() else None,
                    object=read_mask(object_path) if object_path.is_file() else None,
                    proposals=[read_mask(p) for p in proposal_files.get(index, [])],
                )
        logger.info("Indexed ground-truth masks of %d frames from %s", len(store), root)
        return store
