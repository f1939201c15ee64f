import numpy as np
import pytest
from PIL import Image

from roboaug.errors import ValidationError
from roboaug.mask_pipeline.masks import (
    Rect,
    bbox,
    box_support,
    complement,
    decode_mask,
    dilate,
    empty_mask,
    encode_mask,
    erode,
    feather,
    full_mask,
    intersect,
    popcount,
    read_mask,
    union,
    write_mask,
)

from conftest import rect_mask


def random_masks(rng, n, h=16, w=16):
    return [rng.random((h, w)) < 0.4 for _ in range(n)]


def test_union_identity_and_halves():
    m = np.zeros((4, 4), dtype=bool)
    m[1, 2] = True
    assert np.array_equal(union([m, empty_mask(4, 4)]), m)

    left, right = np.zeros((4, 4), bool), np.zeros((4, 4), bool)
    left[:, :2] = True
    right[:, 2:] = True
    assert union([left, right]).all()


def test_union_inclusion_exclusion(rng):
    for _ in range(20):
        a, b = random_masks(rng, 2)
        expected = popcount(a) + popcount(b) - popcount(a & b)
        assert popcount(union([a, b])) == expected


def test_union_algebra(rng):
    a, b, c = random_masks(rng, 3)
    assert np.array_equal(union([a, union([b, c])]), union([union([a, b]), c]))
    assert np.array_equal(union([a, b]), union([b, a]))
    assert np.array_equal(union([a, a]), a)


def test_union_errors():
    with pytest.raises(ValidationError):
        union([])
    with pytest.raises(ValidationError):
        union([empty_mask(4, 4), empty_mask(4, 5)])


def test_intersect_and_complement(rng):
    a, b = random_masks(rng, 2)
    assert np.array_equal(intersect([a, b]), a & b)
    assert np.array_equal(complement(a), ~a)
    assert popcount(a) + popcount(complement(a)) == a.size


def test_dilate_identity_and_block():
    m = np.zeros((5, 5), dtype=bool)
    m[2, 2] = True
    assert np.array_equal(dilate(m, 0), m)
    out = dilate(m, 1)
    expected = np.zeros((5, 5), dtype=bool)
    expected[1:4, 1:4] = True
    assert np.array_equal(out, expected)


def test_dilate_monotone_and_composition(rng):
    for m in random_masks(rng, 5, 12, 12):
        for a, b in [(1, 2), (2, 1), (0, 3)]:
            twice = dilate(dilate(m, a), b)
            once = dilate(m, max(a, b))
            assert (m <= once).all()
            assert (once <= twice).all()


def test_dilate_negative_radius():
    with pytest.raises(ValidationError):
        dilate(empty_mask(3, 3), -1)


def test_feather_zero_and_full():
    m = np.zeros((5, 5), dtype=bool)
    m[1:3, 1:4] = True
    assert np.array_equal(feather(m, 0), m.astype(float))
    assert (feather(full_mask(6, 7), 2) == 1.0).all()


def test_feather_single_pixel():
    m = np.zeros((5, 5), dtype=bool)
    m[2, 2] = True
    alpha = feather(m, 1)
    assert alpha[2, 2] == pytest.approx(1 / 9)
    assert alpha[1, 1] == pytest.approx(1 / 9)
    assert alpha[0, 0] == 0.0


def test_feather_interior_and_exterior(rng):
    for m in random_masks(rng, 5, 14, 14):
        for r in (1, 2):
            alpha = feather(m, r)
            assert ((alpha >= 0) & (alpha <= 1)).all()
            assert (alpha[erode(m, r)] == 1.0).all()
            assert (alpha[~dilate(m, r)] == 0.0).all()


def test_feather_matches_window_counts(rng):
    for m in random_masks(rng, 4, 9, 11):
        for r in (1, 3):
            k = 2 * r + 1
            padded = np.pad(m, r, mode="edge")
            expected = np.array(
                [[padded[y : y + k, x : x + k].sum() for x in range(m.shape[1])] for y in range(m.shape[0])]
            ) / k**2
            assert np.array_equal(feather(m, r), expected)


def test_box_support():
    m = np.zeros((5, 6), dtype=bool)
    assert not box_support(m).any()
    m[1, 1] = m[3, 4] = True
    assert np.array_equal(box_support(m), rect_mask(5, 6, 1, 1, 4, 5))


def test_bbox():
    assert bbox(empty_mask(4, 4)) is None
    m = np.zeros((4, 5), dtype=bool)
    m[1, 1] = True
    m[2, 3] = True
    assert bbox(m) == Rect(1, 1, 4, 3)
    assert bbox(full_mask(3, 7)) == Rect(0, 0, 7, 3)


def test_rect_order():
    with pytest.raises(ValidationError):
        Rect(3, 0, 1, 2)
    assert Rect(0, 0, 2, 3).area == 6


def test_decode_threshold():
    raster = np.array([[0, 127], [128, 255]], dtype=np.uint8)
    assert np.array_equal(decode_mask(raster), [[False, False], [True, True]])


def test_decode_encode_round_trip(rng):
    m = rng.random((9, 11)) < 0.5
    raster = encode_mask(m)
    assert set(np.unique(raster)) <= {0, 255}
    assert np.array_equal(decode_mask(raster), m)


def test_decode_rejects_multichannel():
    with pytest.raises(ValidationError):
        decode_mask(np.zeros((4, 4, 3), dtype=np.uint8))


def test_mask_file_round_trip(tmp_path, rng):
    m = rng.random((6, 8)) < 0.5
    path = write_mask(m, tmp_path / "sub" / "m.png")
    assert np.array_equal(read_mask(path), m)


def test_read_mask_rejects_rgb(tmp_path):
    path = tmp_path / "rgb.png"
    Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8)).save(path)
    with pytest.raises(ValidationError):
        read_mask(path)
