import json
import logging
import shutil
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional

import joblib
from tqdm import tqdm

from roboaug.aug_strategies.generative import BACKGROUND_FINETUNE
from roboaug.errors import BackendError, SchemaError
from roboaug.experiments.scale_plan import ScalePlan
from roboaug.load_data.base import LoadDataset, write_frame
from roboaug.load_data.demo import (
    DemoDataset,
    Episode,
    episode_dir,
    extract_object_names,
    load_dataset,
    write_episode,
)
from roboaug.model_pipeline.engine_pipeline import EngineConfig, RoboEngine
from roboaug.seg_pipeline.backends import SEG_FINETUNE

logger = logging.getLogger(__name__)

STAGING_SUFFIX = ".staging"
DONE_MARKER = ".done"
MANIFEST_FILE = "augmentation.json"


@dataclass
class EpisodeJob:
    """One output episode: ``source`` augmented by ``engine``, or copied when it is None."""

    out_id: str
    source: Episode
    engine: Optional[RoboEngine]


def object_names_for(episode: Episode, cfg: EngineConfig) -> List[str]:
    names = list(episode.metadata.object_names)
    if not names and cfg.aug.extract_objects:
        names = extract_object_names(episode.metadata.instruction)
        logger.debug("Episode %s: extracted object names %s", episode.id, names)
    return names


def staging_dir(output: Path) -> Path:
    return output.with_name(output.name + STAGING_SUFFIX)


def _run_job(job: EpisodeJob, staging: Path, cfg: EngineConfig) -> str:
    ep_dir = episode_dir(staging, job.out_id)
    if ep_dir.exists():
        shutil.rmtree(ep_dir)
    if job.engine is None:
        write_episode(staging, replace(job.source, id=job.out_id))
    else:
        try:
            augmented = job.engine.gen_video(
                job.source.frames, object_names_for(job.source, cfg), job.out_id
            )
        except BackendError as e:
            raise type(e)(
                f"episode '{job.source.id}': {e.detail}",
                endpoint=e.endpoint,
                frame_index=e.frame_index,
            )
        frames_dir = ep_dir / "frames"
        for i, aug in enumerate(augmented):
            write_frame(aug.frame, frames_dir / LoadDataset.frame_name(i))
        (ep_dir / LoadDataset.META_FILE).write_bytes(job.source.metadata.to_json_bytes())
    (ep_dir / DONE_MARKER).touch()
    return job.out_id


def manifest(cfg: EngineConfig, n_episodes: int, plan: Optional[ScalePlan] = None) -> dict:
    """Run settings written next to the output; no timestamps, so reruns match byte for byte."""
    aug = cfg.aug
    backends = aug.backends
    out = {
        "method": aug.method,
        "seed": aug.seed,
        "background_scope": aug.background_scope,
        "dilate_radius": aug.dilate_radius,
        "feather_radius": aug.feather_radius,
        "inpaint_count": aug.inpaint_count,
        "robo_seg": cfg.robo_seg.kind,
        "obj_seg": cfg.obj_seg.kind,
        "generator": backends["generator"].kind if "generator" in backends else "procedural",
        "episodes": n_episodes,
    }
    if cfg.robo_seg.kind == "external":
        out["robo_seg_finetune"] = SEG_FINETUNE
    if out["generator"] == "background_diffusion":
        out["generator_finetune"] = BACKGROUND_FINETUNE
    if plan is not None:
        out["scale_plan"] = {
            "factor": plan.factor,
            "mix": plan.mix,
            "train_epochs": plan.train_epochs,
        }
    return out


def _materialize(
    cfg: EngineConfig,
    ds: DemoDataset,
    jobs: List[EpisodeJob],
    run_manifest: dict,
    resume: bool,
    overwrite: bool,
    workers: int,
    progress: bool,
) -> DemoDataset:
    if cfg.output is None:
        raise SchemaError("EngineConfig.output must be set to write an augmented dataset")
    output = Path(cfg.output)
    if ds.root is not None and output.resolve() == Path(ds.root).resolve():
        raise SchemaError(f"Output {output} is the input dataset itself")
    if output.exists() and any(output.iterdir()) and not overwrite:
        raise FileExistsError(f"Output {output} already exists; pass overwrite=True to replace it")

    staging = staging_dir(output)
    if staging.exists() and not resume:
        shutil.rmtree(staging)
    staging.mkdir(parents=True, exist_ok=True)

    todo = [j for j in jobs if not (episode_dir(staging, j.out_id) / DONE_MARKER).is_file()]
    if len(todo) < len(jobs):
        print(f"[RESUME] {len(jobs) - len(todo)} of {len(jobs)} episodes already done in {staging}")

    # threads: external backends serialize per descriptor, numpy releases the GIL
    joblib.Parallel(n_jobs=workers, backend="threading")(
        joblib.delayed(_run_job)(job, staging, cfg)
        for job in tqdm(todo, desc="episodes", disable=not progress)
    )

    for job in jobs:
        (episode_dir(staging, job.out_id) / DONE_MARKER).unlink()
    (staging / MANIFEST_FILE).write_text(
        json.dumps(run_manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    if output.exists():
        shutil.rmtree(output)
    staging.rename(output)
    logger.info("Wrote %d augmented episodes to %s", len(jobs), output)
    return load_dataset(output)


def augment_dataset(
    cfg: EngineConfig,
    ds: DemoDataset,
    resume: bool = False,
    overwrite: bool = False,
    workers: int = 1,
    progress: bool = False,
) -> DemoDataset:
    """
    Augment every episode of ``ds`` into ``cfg.output``. Episodes are written
    to ``<output>.staging`` first and the directory is renamed once all of
    them are done; with ``resume=True`` finished episodes of an interrupted
    run are kept.
    """
    engine = RoboEngine(config=cfg)
    jobs = [EpisodeJob(ep.id, ep, engine) for ep in ds]
    return _materialize(
        cfg, ds, jobs, manifest(cfg, len(jobs)), resume, overwrite, workers, progress
    )


def apply_scale_plan(
    cfg: EngineConfig,
    ds: DemoDataset,
    plan: ScalePlan,
    resume: bool = False,
    overwrite: bool = False,
    workers: int = 1,
    progress: bool = False,
) -> DemoDataset:
    """Materialize a scale plan: originals copied verbatim, each copy augmented with its own seed."""
    engines = {}
    jobs = []
    for entry in plan.episodes:
        source = ds.episode(entry.source_id)
        if entry.original:
            jobs.append(EpisodeJob(entry.episode_id, source, None))
            continue
        if entry.seed not in engines:
            engines[entry.seed] = RoboEngine(config=replace(cfg, aug=replace(cfg.aug, seed=entry.seed)))
        jobs.append(EpisodeJob(entry.episode_id, source, engines[entry.seed]))
    return _materialize(
        cfg, ds, jobs, manifest(cfg, len(jobs), plan), resume, overwrite, workers, progress
    )
