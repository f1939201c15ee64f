import matplotlib

matplotlib.use("Agg")

import numpy as np
import pytest
from PIL import Image

from roboaug.load_data.demo import Episode, Metadata, write_episode, write_episode_masks
from roboaug.load_data.roboseg import AnnotatedFrame, save_roboseg

H, W = 12, 16
N_FRAMES = 10
INSTRUCTION = "put the mouse on the pad"


def random_frame(rng, h=H, w=W):
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)


def rect_mask(h, w, y0, x0, y1, x1):
    mask = np.zeros((h, w), dtype=bool)
    mask[y0:y1, x0:x1] = True
    return mask


def robot_masks(n=N_FRAMES, h=H, w=W):
    """A 4x5 robot block sliding right one pixel per frame."""
    return [rect_mask(h, w, 2, i % (w - 5), 6, i % (w - 5) + 5) for i in range(n)]


def object_masks(n=N_FRAMES, h=H, w=W):
    return [rect_mask(h, w, 8, 10, 11, 14) for _ in range(n)]


def proposal_masks(n=N_FRAMES, h=H, w=W):
    """Per frame: two distractors away from the foreground, one on the object."""
    per_frame = []
    for _ in range(n):
        per_frame.append(
            [
                rect_mask(h, w, 8, 0, 12, 4),  # 16 px, irrelevant
                rect_mask(h, w, 9, 5, 11, 8),  # 6 px, irrelevant
                rect_mask(h, w, 8, 10, 11, 14),  # on the object
            ]
        )
    return per_frame


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def metadata():
    return Metadata(
        instruction=INSTRUCTION,
        object_names=("mouse",),
        extra={"actions": [[0.1, 0.2, 0.3], [0.4, 0.5, 0.6]], "gripper": [0, 1]},
    )


@pytest.fixture
def episode(rng, metadata):
    frames = [random_frame(rng) for _ in range(N_FRAMES)]
    return Episode("ep0", frames, metadata)


@pytest.fixture
def demo_root(tmp_path, episode):
    """Demo dataset with one 10-frame episode plus ground-truth masks and proposals."""
    root = tmp_path / "demo"
    write_episode(root, episode)
    write_episode_masks(
        root,
        episode.id,
        robot=robot_masks(),
        object=object_masks(),
        proposals=proposal_masks(),
    )
    return root


@pytest.fixture
def roboseg_records(rng):
    records = []
    for i in range(5):
        image = random_frame(rng)
        main = rect_mask(H, W, 1, i, 5, i + 4)
        aux = rect_mask(H, W, 10, 0, 12, 3) if i % 2 else np.zeros((H, W), dtype=bool)
        records.append(
            AnnotatedFrame(
                name=f"img_{i:03d}",
                image=image,
                robot_main=main,
                robot_aux=aux,
                object=rect_mask(H, W, 7, 10, 10, 14),
                instruction=INSTRUCTION,
                descriptions=[f"scene description {i}", "a wooden table"],
            )
        )
    return records


@pytest.fixture
def roboseg_root(tmp_path, roboseg_records):
    return save_roboseg(roboseg_records, tmp_path / "roboseg")


@pytest.fixture
def prompt_file(tmp_path):
    path = tmp_path / "prompts.txt"
    path.write_text("a sunny kitchen\n\na dim office\na wooden workshop\n", encoding="utf-8")
    return path


def _write_images(root, sizes, seed):
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    for i, (h, w) in enumerate(sizes):
        Image.fromarray(random_frame(rng, h, w)).save(root / f"asset_{i}.png")
    return root


@pytest.fixture
def texture_dir(tmp_path):
    return _write_images(tmp_path / "textures", [(8, 8), (20, 10), (5, 30)], seed=7)


@pytest.fixture
def image_dir(tmp_path):
    return _write_images(tmp_path / "images", [(48, 64), (30, 40)], seed=8)
