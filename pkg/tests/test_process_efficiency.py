import logging

from roboaug.experiments.process_efficiency import bench
from roboaug.model_pipeline.engine_pipeline import EngineConfig


def test_bench_reports_each_method(demo_root, prompt_file, episode, texture_dir, capsys, caplog):
    seg = f"passthrough:{demo_root}"
    cfg = EngineConfig(robo_seg=seg, obj_seg=seg, aug={"method": "none"}, prompt_pool=prompt_file)
    with caplog.at_level(logging.WARNING):
        report = bench(
            cfg,
            list(episode.frames[:3]),
            methods=["none", "robo_engine", "texture", "imagenet"],
            object_names=["mouse"],
            asset_pool=None,
        )
    assert set(report) == {"none", "engine"}
    assert report["engine"]["n_frames"] == 3
    assert report["engine"]["sec_per_frame"] >= 0.0
    assert "Skipping texture" in caplog.text
    assert "[BENCH/none]" in capsys.readouterr().out

    with_pool = bench(cfg, list(episode.frames[:2]), methods=["texture"], asset_pool=texture_dir)
    assert with_pool["texture"]["n_frames"] == 2
