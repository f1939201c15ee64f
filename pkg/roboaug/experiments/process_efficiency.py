import logging
import time
from dataclasses import replace
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import numpy as np
from tqdm import tqdm

from roboaug.aug_strategies.config import ASSET_METHODS
from roboaug.load_data.base import Frame
from roboaug.model_pipeline.engine_pipeline import EngineConfig, RoboEngine

logger = logging.getLogger(__name__)

MIN_BENCH_FRAMES = 10


def bench(
    cfg: EngineConfig,
    frames: Sequence[Frame],
    methods: Optional[Sequence[str]] = None,
    object_names: Sequence[str] = (),
    asset_pool: Optional[Union[str, Path]] = None,
    progress: bool = False,
) -> Dict[str, Dict]:
    """
    Wall-clock seconds per augmented frame for each method, one frame at a
    time. Methods needing an asset pool are skipped when none is given.
    """
    if len(frames) < MIN_BENCH_FRAMES:
        logger.warning("Timing %d frames; use at least %d for stable numbers", len(frames), MIN_BENCH_FRAMES)
    asset_pool = asset_pool or cfg.asset_pool
    report = {}
    for method in methods or [cfg.aug.method]:
        pool = asset_pool if method in ASSET_METHODS else None
        if method in ASSET_METHODS and pool is None:
            logger.warning("Skipping %s: no asset pool given", method)
            continue
        run_cfg = replace(cfg, aug=replace(cfg.aug, method=method), asset_pool=pool, batch_size=1)
        engine = RoboEngine(config=run_cfg)
        times = []
        for index, frame in enumerate(tqdm(frames, desc=method, disable=not progress)):
            start = time.perf_counter()
            engine.gen_image(frame, object_names, "bench", index)
            times.append(time.perf_counter() - start)
        report[run_cfg.aug.method] = {
            "sec_per_frame": float(np.mean(times)) if times else 0.0,
            "std": float(np.std(times)) if times else 0.0,
            "n_frames": len(times),
        }
        print(f"[BENCH/{run_cfg.aug.method}] {report[run_cfg.aug.method]['sec_per_frame']:.4f} s/frame")
    return report
