import json
import logging

import numpy as np
import pytest

from roboaug.errors import SchemaError, ValidationError
from roboaug.load_data.roboseg import AnnotatedFrame, load_roboseg, validate_annotation
from roboaug.mask_pipeline.masks import write_mask

from conftest import H, INSTRUCTION, W, random_frame, rect_mask


def test_load_roboseg(roboseg_root, roboseg_records):
    loaded = load_roboseg(roboseg_root)
    assert [r.name for r in loaded] == [f"img_{i:03d}" for i in range(5)]
    for got, want in zip(loaded, roboseg_records):
        assert np.array_equal(got.image, want.image)
        assert np.array_equal(got.robot, want.robot)
        assert np.array_equal(got.object, want.object)
        assert got.instruction == INSTRUCTION
        assert got.descriptions == want.descriptions


def test_robot_and_foreground(roboseg_records):
    rec = roboseg_records[1]
    assert rec.robot.sum() == rec.robot_main.sum() + rec.robot_aux.sum()
    assert (rec.foreground >= rec.robot).all()
    assert (rec.foreground >= rec.object).all()


def test_missing_aux_is_empty(roboseg_root, caplog):
    (roboseg_root / "masks" / "robot_aux" / "img_001.png").unlink()
    with caplog.at_level(logging.WARNING):
        loaded = load_roboseg(roboseg_root)
    assert not loaded[1].robot_aux.any()
    assert "img_001" in caplog.text


def test_missing_main_lists_ids(roboseg_root):
    (roboseg_root / "masks" / "robot_main" / "img_002.png").unlink()
    (roboseg_root / "masks" / "object" / "img_004.png").unlink()
    with pytest.raises(ValidationError) as info:
        load_roboseg(roboseg_root)
    assert "img_002" in str(info.value)
    assert "img_004" in str(info.value)


def test_mask_dimension_mismatch(roboseg_root):
    write_mask(np.zeros((H + 1, W), dtype=bool), roboseg_root / "masks" / "object" / "img_000.png")
    with pytest.raises(ValidationError, match="img_000"):
        load_roboseg(roboseg_root)


def test_missing_annotations(roboseg_root):
    (roboseg_root / "annotations.json").unlink()
    with pytest.raises(SchemaError):
        load_roboseg(roboseg_root)


@pytest.mark.parametrize("entry", ["a robot arm", ["put the mouse"], {"descriptions": "one string"}])
def test_malformed_annotation_entry(roboseg_root, entry):
    path = roboseg_root / "annotations.json"
    doc = json.loads(path.read_text(encoding="utf-8"))
    doc["img_002"] = entry
    path.write_text(json.dumps(doc), encoding="utf-8")
    with pytest.raises(SchemaError, match="img_002"):
        load_roboseg(roboseg_root)


def _record(rng, main, obj, instruction=INSTRUCTION):
    return AnnotatedFrame(
        name="r",
        image=random_frame(rng),
        robot_main=main,
        robot_aux=np.zeros((H, W), dtype=bool),
        object=obj,
        instruction=instruction,
    )


def test_validate_overlap(rng):
    main = rect_mask(H, W, 0, 0, 2, 5)  # 10 px
    obj = rect_mask(H, W, 1, 4, 3, 5)  # 1 px inside main
    report = validate_annotation(_record(rng, main, obj))
    assert not report.ok
    assert "overlap" in report.violations[0]
    assert validate_annotation(_record(rng, main, obj), overlap_threshold=0.2).ok


def test_validate_clean_record(roboseg_records):
    for rec in roboseg_records:
        report = validate_annotation(rec)
        assert report.ok, report.violations
        assert report.n_descriptions == 2


def test_validate_empty_robot_and_instruction(rng):
    empty = np.zeros((H, W), dtype=bool)
    report = validate_annotation(_record(rng, empty, empty, instruction=""))
    assert "empty robot_main mask" in report.violations
    assert "missing instruction" in report.violations
    assert validate_annotation(_record(rng, empty, empty), expect_robot=False).ok


def test_validate_dimension_mismatch(rng):
    rec = _record(rng, np.zeros((H, W + 2), dtype=bool), np.zeros((H, W), dtype=bool))
    report = validate_annotation(rec)
    assert any("dimension mismatch" in v for v in report.violations)
