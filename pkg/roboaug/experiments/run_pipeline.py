import json
import logging
import sys

from roboaug.aug_strategies.base import AUG_METHOD_NAMES
from roboaug.errors import RoboAugError, exit_code_for
from roboaug.experiments.helper import build_engine_config, cmd_parser, setup_logging
from roboaug.experiments.process_efficiency import bench
from roboaug.experiments.process_results import (
    format_table,
    is_scaling_table,
    score_file,
    table_to_json,
    write_json,
)
from roboaug.experiments.scale_plan import scale_plan
from roboaug.data_pipeline.data_pipeline_setup import augment_dataset, apply_scale_plan
from roboaug.load_data.config import load_data
from roboaug.metrics.evaluation_pipeline import eval_seg
from roboaug.seg_pipeline.backends import parse_backend_spec

logger = logging.getLogger(__name__)


def _emit(obj, out=None) -> None:
    print(json.dumps(obj, indent=2))
    if out is not None:
        print(f"Saved to '{write_json(obj, out)}'")


def run_augment(args) -> None:
    cfg = build_engine_config(args, args.aug_method)
    ds = load_data(args.input, "demo")
    print(f"\n=== augment {args.input} -> {args.output} ({cfg.aug.method}) ===\n")
    out = augment_dataset(
        cfg,
        ds,
        resume=args.resume,
        overwrite=args.overwrite,
        workers=args.workers,
        progress=not args.no_progress,
    )
    print(f"[DONE] {len(out)} episodes, {out.n_frames} frames written to '{args.output}'")


def run_eval_seg(args) -> None:
    backend = parse_backend_spec(args.backend)
    if backend.kind == "passthrough" and not backend.params:
        backend.params["root"] = str(args.data)
    report = eval_seg(backend, args.data, progress=not args.no_progress)
    if report.mean is not None:
        print(f"[GIoU/MEAN] = {report.mean:.4f}")
        print(f"[IoU/MEAN]  = {report.mean_iou:.4f}")
    if report.failures:
        print(f"[FAILED] {len(report.failures)} images could not be scored")
    _emit(report.to_dict(), args.out)


def run_score(args) -> None:
    table = score_file(args.raw)
    print(format_table(table))
    _emit(table_to_json(table), args.out)
    if args.plot:
        from roboaug.visualization.comparison_analysis import (
            plot_method_comparison,
            plot_scaling_trend,
        )

        if is_scaling_table(args.raw):
            path = plot_scaling_trend(table.reset_index())
        else:
            path = plot_method_comparison(table)
        print(f"Plot saved to '{path}'")


def run_scale_plan(args) -> None:
    ds = load_data(args.input, "demo") if args.input is not None else None
    demos = [ep.id for ep in ds] if ds is not None else args.demos
    plan = scale_plan(demos, args.factor, mix=args.mix, base_seed=args.seed)
    print(
        f"[PLAN] {len(plan)} episodes ({plan.n_original} original), "
        f"train for {plan.train_epochs} epochs"
    )
    _emit(plan.to_dict(), args.out)
    if args.output is not None:
        cfg = build_engine_config(args)
        out = apply_scale_plan(cfg, ds, plan, progress=not args.no_progress)
        print(f"[DONE] {len(out)} episodes written to '{args.output}'")


def run_bench(args) -> None:
    cfg = build_engine_config(args, "none")
    ds = load_data(args.input, "demo")
    episode = ds.episodes[0]
    frames = [episode.frames[i] for i in range(min(args.frames, len(episode)))]
    names = list(episode.metadata.object_names)
    report = bench(
        cfg,
        frames,
        methods=args.aug_method or list(AUG_METHOD_NAMES),
        object_names=names,
        asset_pool=args.asset_pool,
        progress=not args.no_progress,
    )
    _emit(report, args.out)


COMMANDS = {
    "augment": run_augment,
    "eval-seg": run_eval_seg,
    "score": run_score,
    "scale-plan": run_scale_plan,
    "bench": run_bench,
}


def main(argv=None) -> int:
    args = cmd_parser(argv)
    setup_logging(args.log_level)
    try:
        COMMANDS[args.command](args)
    except (RoboAugError, OSError) as e:
        logger.error("%s failed: %s", args.command, e)
        return exit_code_for(e)
    return 0


if __name__ == "__main__":
    sys.exit(main())
