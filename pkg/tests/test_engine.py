import numpy as np
import pytest
import yaml

from roboaug import ASSETS_DIR
from roboaug.aug_strategies.base import frame_rng
from roboaug.aug_strategies.engine import gen_background_engine
from roboaug.aug_strategies.generative import GenBackendDescriptor
from roboaug.aug_strategies.prompt_pool import load_prompt_pool, sample_prompt
from roboaug.errors import BackendError, SchemaError, ValidationError
from roboaug.mask_pipeline.masks import dilate, union
from roboaug.model_pipeline.engine_pipeline import EngineConfig, RoboEngine, gen_video

from conftest import object_masks, proposal_masks, robot_masks


def foregrounds():
    return [union([r, o]) for r, o in zip(robot_masks(), object_masks())]


def make_engine(demo_root, prompt_file, **kwargs):
    kwargs.setdefault("prompt_pool", prompt_file)
    return RoboEngine(robo_seg_method=f"passthrough:{demo_root}", **kwargs)


def test_none_is_identity(demo_root, prompt_file, episode):
    engine = make_engine(demo_root, prompt_file, aug_method="none")
    out = engine.gen_video(episode.frames, ["mouse"], "ep0")
    assert len(out) == len(episode)
    for aug, frame in zip(out, episode.frames):
        assert np.array_equal(aug.frame, frame)
        assert aug.provenance.method == "none"
        assert aug.provenance.backend_kind is None


@pytest.mark.parametrize("method", ["engine", "background", "texture", "imagenet"])
def test_foreground_preserved(demo_root, prompt_file, texture_dir, image_dir, episode, method):
    pools = {"texture": texture_dir, "imagenet": image_dir}
    engine = make_engine(demo_root, prompt_file, aug_method=method, asset_pool=pools.get(method))
    out = engine.gen_video(episode.frames, ["mouse"], "ep0")
    for aug, frame, fg in zip(out, episode.frames, foregrounds()):
        assert aug.frame.shape == frame.shape
        assert aug.frame.dtype == np.uint8
        assert np.array_equal(aug.frame[fg], frame[fg])


def test_engine_background_matches_generator(demo_root, prompt_file, episode):
    engine = make_engine(demo_root, prompt_file, aug_method="robo_engine", seed=11)
    pool = load_prompt_pool(prompt_file)
    out = engine.gen_video(episode.frames, ["mouse"], "ep0")
    for i, (aug, frame, fg) in enumerate(zip(out, episode.frames, foregrounds())):
        rng = frame_rng(11, "ep0", i)
        prompt = sample_prompt(pool, rng)
        background = gen_background_engine(frame, fg, prompt, GenBackendDescriptor("procedural"), rng)
        assert np.array_equal(aug.frame[~fg], background[~fg])
        assert aug.provenance.prompt == prompt
        assert aug.provenance.seed == 11
        assert aug.provenance.backend_kind == "procedural"


def test_batch_size_invariance(demo_root, prompt_file, episode):
    results = []
    for batch_size in (1, 4, 32):
        engine = make_engine(demo_root, prompt_file, batch_size=batch_size, seed=3)
        results.append([a.frame for a in engine.gen_video(episode.frames, ["mouse"], "ep0")])
    for other in results[1:]:
        for a, b in zip(results[0], other):
            assert np.array_equal(a, b)


def test_gen_image_matches_gen_video(demo_root, prompt_file, episode):
    engine = make_engine(demo_root, prompt_file, seed=5)
    video = engine.gen_video(episode.frames, ["mouse"], "ep0")
    for i in (0, 4, 9):
        single = engine.gen_image(episode.frames[i], ["mouse"], "ep0", i)
        assert np.array_equal(single.frame, video[i].frame)


def test_reruns_are_identical(demo_root, prompt_file, episode):
    a = make_engine(demo_root, prompt_file, seed=2).gen_video(episode.frames, ["mouse"], "ep0")
    b = make_engine(demo_root, prompt_file, seed=2).gen_video(episode.frames, ["mouse"], "ep0")
    c = make_engine(demo_root, prompt_file, seed=3).gen_video(episode.frames, ["mouse"], "ep0")
    assert all(np.array_equal(x.frame, y.frame) for x, y in zip(a, b))
    assert not all(np.array_equal(x.frame, y.frame) for x, y in zip(a, c))


def test_per_episode_background(demo_root, prompt_file, episode):
    engine = make_engine(demo_root, prompt_file, background_scope="per_episode")
    out = engine.gen_video(episode.frames, ["mouse"], "ep0")
    fgs = foregrounds()
    assert len({a.provenance.prompt for a in out}) == 1
    for i in range(1, len(out)):
        shared = ~fgs[0] & ~fgs[i]
        assert np.array_equal(out[i].frame[shared], out[0].frame[shared])


def test_dilation_keeps_margin(demo_root, prompt_file, episode):
    engine = make_engine(demo_root, prompt_file, dilate_radius=1)
    out = engine.gen_video(episode.frames, ["mouse"], "ep0")
    for aug, frame, fg in zip(out, episode.frames, foregrounds()):
        grown = dilate(fg, 1)
        assert np.array_equal(aug.frame[grown], frame[grown])


def test_feathered_composite(demo_root, prompt_file, episode):
    engine = make_engine(demo_root, prompt_file, feather_radius=1)
    out = engine.gen_video(episode.frames, ["mouse"], "ep0")
    hard = make_engine(demo_root, prompt_file).gen_video(episode.frames, ["mouse"], "ep0")
    assert out[0].frame.shape == episode.frames[0].shape
    assert not np.array_equal(out[0].frame, hard[0].frame)


def test_inpainting_only_touches_proposals(demo_root, prompt_file, episode):
    engine = make_engine(demo_root, prompt_file, aug_method="inpainting", inpaint_count=2)
    out = engine.gen_video(episode.frames, ["mouse"], "ep0")
    for aug, frame, props in zip(out, episode.frames, proposal_masks()):
        editable = props[0] | props[1]
        assert np.array_equal(aug.frame[~editable], frame[~editable])
        assert aug.provenance.backend_kind == "procedural"


def test_unknown_frame_reports_index(demo_root, prompt_file, rng):
    engine = make_engine(demo_root, prompt_file)
    frame = rng.integers(0, 256, size=(12, 16, 3), dtype=np.uint8)
    with pytest.raises(BackendError) as info:
        engine.gen_image(frame, [], "ep0", frame_index=5)
    assert info.value.frame_index == 5


def test_gen_video_edge_cases(demo_root, prompt_file, rng):
    engine = make_engine(demo_root, prompt_file)
    assert engine.gen_video([], ["mouse"]) == []
    frames = [
        rng.integers(0, 256, size=(12, 16, 3), dtype=np.uint8),
        rng.integers(0, 256, size=(8, 16, 3), dtype=np.uint8),
    ]
    with pytest.raises(ValidationError):
        engine.gen_video(frames)


def test_config_rules(demo_root, prompt_file, texture_dir):
    seg = f"passthrough:{demo_root}"
    with pytest.raises(SchemaError):
        EngineConfig(robo_seg=seg, obj_seg=seg, aug={"method": "texture"})
    with pytest.raises(SchemaError):
        EngineConfig(robo_seg=seg, obj_seg=seg, asset_pool=texture_dir)
    with pytest.raises(SchemaError):
        EngineConfig(robo_seg=seg, obj_seg=seg, batch_size=0)
    with pytest.raises(SchemaError):
        EngineConfig(robo_seg=seg, obj_seg=seg, prompt_pool=None)
    cfg = EngineConfig(robo_seg=seg, obj_seg=seg, aug={"method": "texture"}, asset_pool=str(texture_dir))
    assert cfg.asset_pool == texture_dir


def test_from_yaml(tmp_path, demo_root, prompt_file, episode):
    doc = {
        "robo_seg": f"passthrough:{demo_root}",
        "obj_seg": {"kind": "passthrough", "params": {"root": str(demo_root)}},
        "batch_size": 4,
        "prompt_pool": str(prompt_file),
        "aug": {
            "method": "robo_engine",
            "seed": 9,
            "background_scope": "per-frame",
            "backends": {"generator": "procedural"},
        },
    }
    path = tmp_path / "engine.yaml"
    path.write_text(yaml.safe_dump(doc), encoding="utf-8")
    cfg = EngineConfig.from_yaml(path)
    assert cfg.aug.method == "engine"
    assert cfg.aug.seed == 9
    assert cfg.batch_size == 4
    assert cfg.aug.backends["generator"].kind == "procedural"

    from_yaml = gen_video(cfg, episode.frames[:3], ["mouse"], "ep0")
    direct = make_engine(demo_root, prompt_file, seed=9).gen_video(episode.frames[:3], ["mouse"], "ep0")
    for a, b in zip(from_yaml, direct):
        assert np.array_equal(a.frame, b.frame)


def test_from_yaml_rejects_unknown_keys(tmp_path, demo_root):
    path = tmp_path / "bad.yaml"
    path.write_text(
        yaml.safe_dump({"robo_seg": f"passthrough:{demo_root}", "obj_seg": "chroma", "workers": 3}),
        encoding="utf-8",
    )
    with pytest.raises(SchemaError, match="workers"):
        EngineConfig.from_yaml(path)
    path.write_text(yaml.safe_dump({"obj_seg": "chroma"}), encoding="utf-8")
    with pytest.raises(SchemaError, match="robo_seg"):
        EngineConfig.from_yaml(path)


def test_bundled_configs():
    cfg = EngineConfig.from_yaml(ASSETS_DIR / "configs" / "robo_engine.yaml")
    assert cfg.robo_seg.kind == "external"
    assert cfg.robo_seg.endpoint == "http://localhost:8000"
    assert cfg.aug.method == "engine"
    assert cfg.aug.backends["generator"].kind == "background_diffusion"

    oracle = EngineConfig.from_yaml(ASSETS_DIR / "configs" / "oracle.yaml")
    assert oracle.robo_seg.kind == "passthrough"
    assert oracle.aug.background_scope == "per_episode"
