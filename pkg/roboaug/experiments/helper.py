import argparse
import logging
from collections.abc import Mapping
from pathlib import Path

from roboaug.aug_strategies.base import AUG_METHOD_NAMES, METHOD_ALIASES
from roboaug.errors import SchemaError
from roboaug.model_pipeline.engine_pipeline import EngineConfig, load_config_file
from roboaug.seg_pipeline.backends import parse_backend_spec

METHOD_CHOICES = list(AUG_METHOD_NAMES) + list(METHOD_ALIASES)


def setup_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _add_engine_args(parser: argparse.ArgumentParser, multi_method: bool = False) -> None:
    """Flags shared by augment and bench; unset flags leave --config values alone."""
    parser.add_argument("--input", required=True, type=Path, help="Demo dataset root.")
    parser.add_argument("--config", type=Path, help="YAML engine config; flags override it.")
    if multi_method:
        parser.add_argument(
            "--aug-method",
            nargs="+",
            choices=METHOD_CHOICES,
            help="One or more augmentation methods to time.",
        )
    else:
        parser.add_argument("--aug-method", choices=METHOD_CHOICES, help="Augmentation method.")
    parser.add_argument(
        "--robo-seg",
        help="Robot segmentation backend: external:URI | passthrough[:DIR] | chroma[:R,G,B[:TOL]].",
    )
    parser.add_argument("--obj-seg", help="Object segmentation backend, same syntax as --robo-seg.")
    parser.add_argument("--generator", help="Background generator: procedural | <kind>:URI.")
    parser.add_argument("--inpainter", help="Inpainting backend: procedural | inpaint_diffusion:URI.")
    parser.add_argument("--proposals", help="Region proposal backend for inpainting.")
    parser.add_argument("--batch-size", type=int, help="Frames per segmentation request.")
    parser.add_argument("--seed", type=int, help="Base seed of every per-frame random stream.")
    parser.add_argument("--prompt-pool", type=Path, help="Scene description file, one per line.")
    parser.add_argument("--asset-pool", type=Path, help="Texture or image directory.")
    parser.add_argument(
        "--background-scope",
        choices=["per-frame", "per-episode", "per_frame", "per_episode"],
        help="Draw a background per frame or once per episode.",
    )
    parser.add_argument("--dilate", type=int, help="Foreground dilation radius in pixels.")
    parser.add_argument("--feather", type=int, help="Foreground feather radius in pixels.")
    parser.add_argument("--inpaint-count", type=int, help="Objects to inpaint per frame.")
    parser.add_argument(
        "--extract-objects",
        action="store_true",
        default=None,
        help="Guess object names from the instruction when meta.json lists none.",
    )


def _flag(args, name: str):
    return getattr(args, name, None)


def _seg_spec(spec: str, input_root: Path):
    """A bare ``passthrough`` reads ground truth from the input dataset."""
    desc = parse_backend_spec(spec)
    if desc.kind == "passthrough" and not desc.params:
        desc.params["root"] = str(input_root)
    return desc


def build_engine_config(args, method: str = None) -> EngineConfig:
    """EngineConfig from --config (if any) with command-line flags applied on top."""
    data = {}
    if _flag(args, "config") is not None:
        data = dict(load_config_file(args.config))
    aug = data.get("aug") or {}
    if not isinstance(aug, Mapping):
        raise SchemaError(f"{args.config}: 'aug' must be a mapping")
    aug = dict(aug)
    backends = aug.get("backends") or {}
    if not isinstance(backends, Mapping):
        raise SchemaError(f"{args.config}: 'aug.backends' must be a mapping")
    backends = dict(backends)

    data.setdefault("robo_seg", "passthrough")
    data.setdefault("obj_seg", "passthrough")
    for key in ("robo_seg", "obj_seg"):
        if _flag(args, key):
            data[key] = _flag(args, key)
    for key in ("robo_seg", "obj_seg"):
        if isinstance(data[key], str):
            data[key] = _seg_spec(data[key], args.input)

    overrides = {
        "method": method,
        "seed": _flag(args, "seed"),
        "background_scope": _flag(args, "background_scope"),
        "dilate_radius": _flag(args, "dilate"),
        "feather_radius": _flag(args, "feather"),
        "inpaint_count": _flag(args, "inpaint_count"),
        "extract_objects": _flag(args, "extract_objects"),
    }
    aug.update({k: v for k, v in overrides.items() if v is not None})
    for key in ("generator", "inpainter", "proposals"):
        if _flag(args, key):
            backends[key] = _flag(args, key)
    if isinstance(backends.get("proposals"), str):
        backends["proposals"] = _seg_spec(backends["proposals"], args.input)
    aug["backends"] = backends
    data["aug"] = aug

    for key in ("batch_size", "prompt_pool"):
        if _flag(args, key) is not None:
            data[key] = _flag(args, key)
    method_name = aug.get("method", "engine")
    if _flag(args, "asset_pool") is not None and method_name in ("texture", "imagenet"):
        data["asset_pool"] = args.asset_pool
    if _flag(args, "output") is not None:
        data["output"] = args.output
    return EngineConfig.from_dict(data)


def cmd_parser(argv=None):
    parser = argparse.ArgumentParser(
        description="Augment robot demonstration datasets and evaluate augmentation pipelines."
    )
    parser.add_argument(
        "--log-level",
        default="INFO",
        help="Logging level (default: INFO).",
    )
    parser.add_argument(
        "--no-progress",
        action="store_true",
        help="Hide progress bars.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    augment = sub.add_parser("augment", help="Augment a demo dataset into a new one.")
    _add_engine_args(augment)
    augment.add_argument("--output", required=True, type=Path, help="Output dataset root.")
    augment.add_argument("--workers", type=int, default=1, help="Episodes augmented in parallel.")
    augment.add_argument("--resume", action="store_true", help="Keep finished episodes of a previous run.")
    augment.add_argument("--overwrite", action="store_true", help="Replace an existing output.")

    eval_seg = sub.add_parser("eval-seg", help="GIoU of a segmentation backend on an annotated set.")
    eval_seg.add_argument("--backend", required=True, help="Backend spec, as for --robo-seg.")
    eval_seg.add_argument("--data", required=True, type=Path, help="Annotated (RoboSeg layout) root.")
    eval_seg.add_argument("--out", type=Path, help="Write the JSON report here as well.")

    score = sub.add_parser("score", help="Normalize a raw behavior score table.")
    score.add_argument("--raw", required=True, type=Path, help="Raw score CSV.")
    score.add_argument("--out", type=Path, help="Write the JSON table here as well.")
    score.add_argument("--plot", action="store_true", help="Save a comparison plot under assets/plots.")

    plan = sub.add_parser("scale-plan", help="Plan (and optionally build) an enlarged dataset.")
    plan.add_argument("--demos", type=int, help="Number of source demos (ignored with --input).")
    plan.add_argument("--factor", type=int, required=True, help="Data multiplier N.")
    plan.add_argument("--mix", action="store_true", help="Keep the originals next to N-1 copies.")
    plan.add_argument("--seed", type=int, default=0, help="Base seed of the copies.")
    plan.add_argument("--input", type=Path, help="Demo dataset to plan over and materialize.")
    plan.add_argument("--output", type=Path, help="Where to materialize the plan (needs --input).")
    plan.add_argument("--config", type=Path, help="YAML engine config for materialization.")
    plan.add_argument("--out", type=Path, help="Write the JSON plan here as well.")

    bench = sub.add_parser("bench", help="Time augmentation methods per frame.")
    _add_engine_args(bench, multi_method=True)
    bench.add_argument("--frames", type=int, default=10, help="Frames to time (default: 10).")
    bench.add_argument("--out", type=Path, help="Write the JSON report here as well.")

    args = parser.parse_args(argv)
    if args.command == "scale-plan" and args.input is None and args.demos is None:
        parser.error("scale-plan needs --demos or --input")
    if args.command == "scale-plan" and args.output is not None and args.input is None:
        parser.error("scale-plan --output needs --input")
    return args
