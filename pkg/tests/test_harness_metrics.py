import math

import numpy as np
import pytest

from luminark.core.image import ImageBuffer
from luminark.errors import LayoutError
from luminark.harness.metrics import balanced_accuracy, l2_to_nearest, mean_std, psnr, wilson_interval
from luminark.harness.reports import ROBUSTNESS_COLUMNS, rows_to_csv, write_manifest


def test_psnr_one_level_difference():
    a = ImageBuffer.from_uint8(np.full((8, 8, 3), 100, dtype=np.uint8))
    b = ImageBuffer.from_uint8(np.full((8, 8, 3), 101, dtype=np.uint8))
    assert psnr(a, b) == pytest.approx(48.1308, abs=1e-3)


def test_psnr_identical_is_infinite():
    a = ImageBuffer.filled(8, 8, (0.2, 0.4, 0.6))
    assert psnr(a, a) == math.inf


def test_psnr_shape_mismatch():
    with pytest.raises(LayoutError):
        psnr(ImageBuffer.filled(8, 8, (0, 0, 0)), ImageBuffer.filled(8, 16, (0, 0, 0)))


def test_l2_to_nearest_picks_closest_template():
    image = ImageBuffer.filled(4, 4, (0.5, 0.5, 0.5))
    templates = [ImageBuffer.filled(4, 4, (0.0, 0.0, 0.0)), ImageBuffer.filled(4, 4, (0.6, 0.6, 0.6))]
    assert l2_to_nearest(image, templates) == pytest.approx(0.1)
    with pytest.raises(LayoutError):
        l2_to_nearest(image, [ImageBuffer.filled(8, 8, (0, 0, 0))])


def test_wilson_interval_contains_estimate():
    low, high = wilson_interval(10, 1000)
    assert low < 0.01 < high
    assert 0.0 <= low and high <= 1.0


def test_wilson_interval_zero_successes():
    low, high = wilson_interval(0, 10000)
    assert low == 0.0
    assert 0.0 < high < 0.001


def test_wilson_interval_degenerate_and_invalid():
    assert wilson_interval(0, 1) == (0.0, 1.0)
    with pytest.raises(ValueError):
        wilson_interval(5, 4)


def test_wilson_interval_narrows_with_trials():
    small = wilson_interval(5, 100)
    large = wilson_interval(500, 10000)
    assert large[1] - large[0] < small[1] - small[0]


def test_balanced_accuracy():
    assert balanced_accuracy(0.9, 0.7) == pytest.approx(0.8)


def test_mean_std():
    assert mean_std([1.0, 2.0, 3.0]) == (2.0, 1.0)
    assert mean_std([4.0]) == (4.0, 0.0)
    assert mean_std([2.0, math.inf]) == (2.0, 0.0)
    mean, std = mean_std([])
    assert math.isnan(mean) and math.isnan(std)


def test_rows_to_csv_uses_fixed_columns():
    text = rows_to_csv([{"attack": "jpeg", "accuracy": 0.5, "extra": 1}], ROBUSTNESS_COLUMNS)
    header, row = text.splitlines()
    assert header.split(",") == list(ROBUSTNESS_COLUMNS)
    assert row.startswith("jpeg,0.5,")
    assert "extra" not in text


def test_write_manifest(tmp_path):
    path = write_manifest(tmp_path, {"seed": 1}, {"b": "b.csv", "a": "a.json"}, {"fpr": {"verdict": "PASS"}})
    text = path.read_text()
    assert path.name == "manifest.json"
    assert '"schema_version": 1' in text
    assert text.index('"a.json"') < text.index('"b.csv"')
