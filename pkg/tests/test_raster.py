"""Grayscale loading, Otsu thresholding, projection histograms."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from diecg.errors import DegenerateThresholdWarning, FormatError
from diecg.raster import (
    HORIZONTAL,
    VERTICAL,
    BinaryImage,
    GrayImage,
    load_grayscale,
    otsu_binarize,
    projection_histogram,
)


def otsu_bruteforce(pixels: np.ndarray) -> int:
    """Exhaustive reference: maximize between-class variance exactly.

    Computed in Fractions so no floating-point tie can disagree with the
    implementation under test. Foreground is pixels < t; ties keep the
    lowest threshold.
    """
    hist = np.bincount(pixels.ravel(), minlength=256)
    total = int(pixels.size)
    best_t, best_var = 0, Fraction(-1)
    for t in range(256):
        n0 = int(hist[:t].sum())
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        mu0 = Fraction(int((np.arange(t) * hist[:t]).sum()), n0)
        mu1 = Fraction(int((np.arange(t, 256) * hist[t:]).sum()), n1)
        var = Fraction(n0, total) * Fraction(n1, total) * (mu0 - mu1) ** 2
        if var > best_var:
            best_t, best_var = t, var
    return best_t


def gray(arr) -> GrayImage:
    return GrayImage(np.asarray(arr, dtype=np.uint8))


# -- load_grayscale -----------------------------------------------------------


def test_load_grayscale_luma_weights(tmp_path):
    # 0.299*200 + 0.587*30 + 0.114*120 = 91.09 -> 91
    rgb = np.zeros((2, 3, 3), dtype=np.uint8)
    rgb[..., 0], rgb[..., 1], rgb[..., 2] = 200, 30, 120
    path = tmp_path / "c.png"
    Image.fromarray(rgb, mode="RGB").save(path)
    img = load_grayscale(path)
    assert img.pixels.shape == (2, 3)
    assert np.all(img.pixels == 91)


def test_load_grayscale_pure_red_rounds_to_76(tmp_path):
    rgb = np.zeros((1, 1, 3), dtype=np.uint8)
    rgb[..., 0] = 255  # 0.299 * 255 = 76.245
    path = tmp_path / "r.png"
    Image.fromarray(rgb, mode="RGB").save(path)
    assert load_grayscale(path).pixels[0, 0] == 76


def test_load_grayscale_l_mode_passthrough(tmp_path):
    arr = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
    path = tmp_path / "l.png"
    Image.fromarray(arr, mode="L").save(path)
    np.testing.assert_array_equal(load_grayscale(path).pixels, arr)


def test_load_grayscale_alpha_composites_over_white(tmp_path):
    rgba = np.zeros((1, 2, 4), dtype=np.uint8)
    rgba[0, 0] = (0, 0, 0, 0)  # fully transparent black -> paper white
    rgba[0, 1] = (0, 0, 0, 255)  # opaque black -> ink
    path = tmp_path / "a.png"
    Image.fromarray(rgba, mode="RGBA").save(path)
    px = load_grayscale(path).pixels
    assert px[0, 0] == 255
    assert px[0, 1] == 0


def test_load_grayscale_accepts_jpeg(tmp_path):
    arr = np.full((8, 8), 128, dtype=np.uint8)
    path = tmp_path / "p.jpg"
    Image.fromarray(arr, mode="L").save(path, format="JPEG")
    img = load_grayscale(path)
    assert img.pixels.shape == (8, 8)


def test_load_grayscale_rejects_other_formats(tmp_path):
    path = tmp_path / "p.bmp"
    Image.fromarray(np.zeros((4, 4), dtype=np.uint8), mode="L").save(path, format="BMP")
    with pytest.raises(FormatError, match="unsupported format"):
        load_grayscale(path)


def test_load_grayscale_rejects_non_image(tmp_path):
    path = tmp_path / "fake.png"
    path.write_text("definitely not a png")
    with pytest.raises(FormatError, match="not a decodable image"):
        load_grayscale(path)


def test_load_grayscale_missing_file(tmp_path):
    with pytest.raises(FormatError, match="no such file"):
        load_grayscale(tmp_path / "absent.png")


# -- otsu_binarize ------------------------------------------------------------


def test_otsu_two_level_image_lowest_tie():
    # every t in 1..255 separates {0} from {255} equally; ties keep the lowest
    img = gray([[0, 0, 255, 255]])
    out = otsu_binarize(img)
    assert out.threshold == 1
    np.testing.assert_array_equal(out.foreground, img.pixels < 1)


def test_otsu_matches_bruteforce_on_bimodal():
    rng = np.random.default_rng(5)
    px = np.concatenate(
        [rng.integers(10, 60, 300), rng.integers(180, 240, 500)]
    ).astype(np.uint8)
    img = gray(px.reshape(20, 40))
    out = otsu_binarize(img)
    assert out.threshold == otsu_bruteforce(img.pixels)
    np.testing.assert_array_equal(out.foreground, img.pixels < out.threshold)


def test_otsu_constant_image_warns_all_background():
    img = gray(np.full((5, 5), 77))
    with pytest.warns(DegenerateThresholdWarning):
        out = otsu_binarize(img)
    assert out.threshold == 0
    assert not out.foreground.any()


@settings(max_examples=60, deadline=None)
@given(
    arrays(
        np.uint8,
        st.tuples(st.integers(2, 12), st.integers(2, 12)),
        elements=st.integers(0, 255),
    )
)
def test_otsu_matches_bruteforce_property(pixels):
    if pixels.min() == pixels.max():
        return  # degenerate case covered above
    out = otsu_binarize(GrayImage(pixels))
    assert out.threshold == otsu_bruteforce(pixels)


def test_otsu_foreground_is_ink_side(rendered_pages):
    img, truth, _ = rendered_pages["template1"]
    out = otsu_binarize(img)
    # traces and rules are dark, paper and grid are light: the grid must
    # not survive binarization on a default-intensity page
    frac = out.foreground.mean()
    assert 0.005 < frac < 0.08
    assert img.pixels[out.foreground].max() < out.threshold


# -- projection_histogram -----------------------------------------------------


def test_projection_counts_by_axis():
    fg = np.array(
        [
            [True, False, True],
            [False, False, False],
            [True, True, True],
        ]
    )
    b = BinaryImage(fg)
    v = projection_histogram(b, VERTICAL)
    h = projection_histogram(b, HORIZONTAL)
    np.testing.assert_array_equal(v.counts, [2, 0, 3])
    np.testing.assert_array_equal(h.counts, [2, 1, 2])
    assert v.axis == VERTICAL and h.axis == HORIZONTAL


def test_projection_rejects_unknown_axis():
    b = BinaryImage(np.ones((2, 2), dtype=bool))
    with pytest.raises(ValueError):
        projection_histogram(b, "diagonal")


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.bool_, st.tuples(st.integers(1, 15), st.integers(1, 15)))
)
def test_projection_sums_equal_total(fg):
    b = BinaryImage(fg)
    total = int(fg.sum())
    assert projection_histogram(b, VERTICAL).counts.sum() == total
    assert projection_histogram(b, HORIZONTAL).counts.sum() == total
