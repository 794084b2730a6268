import numpy as np
import pytest

from luminark.attacks import AttackKind, AttackSpec, apply_attack, attack_battery, battery_kinds, derive_attack_seed
from luminark.core.image import ImageBuffer
from luminark.errors import LayoutError
from luminark.managers.attack_registry import get_default_registry


def _noise_image(height=32, width=48, seed=3):
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)


@pytest.mark.parametrize("kind", [k.value for k in AttackKind])
def test_every_attack_keeps_shape_and_dtype(kind):
    attack = get_default_registry().create(kind)
    pixels = _noise_image()
    out = attack.apply(pixels, seed=11)
    assert out.shape == pixels.shape
    assert out.dtype == np.uint8


@pytest.mark.parametrize("kind", ["median_filter", "horizontal_flip"])
def test_constant_image_is_unchanged(kind):
    pixels = np.full((24, 24, 3), 97, dtype=np.uint8)
    out = get_default_registry().create(kind).apply(pixels)
    assert np.array_equal(out, pixels)


def test_horizontal_flip_mirrors_columns():
    pixels = _noise_image()
    out = get_default_registry().create("horizontal_flip").apply(pixels)
    assert np.array_equal(out, pixels[:, ::-1, :])


@pytest.mark.parametrize("kind", ["gaussian_noise", "color_jitter", "color_quantization"])
def test_stochastic_attacks_repeat_per_seed(kind):
    attack = get_default_registry().create(kind)
    assert attack.is_stochastic()
    pixels = _noise_image()
    first = attack.apply(pixels, seed=5)
    second = attack.apply(pixels, seed=5)
    assert np.array_equal(first, second)


def test_gaussian_noise_differs_across_seeds():
    attack = get_default_registry().create("gaussian_noise")
    pixels = _noise_image()
    assert not np.array_equal(attack.apply(pixels, seed=1), attack.apply(pixels, seed=2))


def test_cropping_leaves_tiny_images_alone():
    pixels = _noise_image(height=4, width=4)
    out = get_default_registry().create("cropping").apply(pixels)
    assert np.array_equal(out, pixels)


def test_parameter_override_builds_new_instance():
    registry = get_default_registry()
    default = registry.create("jpeg")
    custom = registry.create("jpeg", quality=90)
    assert default.get_parameters() == {"quality": 50}
    assert custom.get_parameters() == {"quality": 90}
    assert custom is not default


@pytest.mark.parametrize(
    "pixels",
    [
        np.zeros((8, 8, 3), dtype=np.float64),
        np.zeros((8, 8), dtype=np.uint8),
        np.zeros((8, 8, 4), dtype=np.uint8),
        np.zeros((0, 8, 3), dtype=np.uint8),
    ],
)
def test_attacks_reject_bad_arrays(pixels):
    with pytest.raises(LayoutError):
        get_default_registry().create("jpeg").apply(pixels)


def test_attack_spec_coerces_kind_strings():
    spec = AttackSpec(kind="jpeg", rng_seed=4)
    assert spec.kind is AttackKind.JPEG
    assert spec.parameters == {}
    with pytest.raises(ValueError):
        AttackSpec(kind="rotation")


def test_apply_attack_on_image_buffer():
    image = ImageBuffer.from_uint8(_noise_image())
    out = apply_attack(image, AttackSpec(kind=AttackKind.HORIZONTAL_FLIP))
    assert out.equals(image.flip_horizontal())


def test_battery_has_nine_kinds_without_flip():
    kinds = battery_kinds()
    assert len(kinds) == 9
    assert AttackKind.HORIZONTAL_FLIP not in kinds


def test_battery_is_deterministic_and_ordered():
    image = ImageBuffer.from_uint8(_noise_image())
    first = attack_battery(image, seed=21)
    second = attack_battery(image, seed=21)
    assert list(first) == [k.value for k in battery_kinds()]
    for name in first:
        assert first[name].shape == image.shape
        assert first[name].equals(second[name])


def test_attack_seeds_differ_per_kind():
    seeds = {derive_attack_seed(7, kind) for kind in AttackKind}
    assert len(seeds) == len(AttackKind)
    assert derive_attack_seed(7, "jpeg") == derive_attack_seed(7, AttackKind.JPEG)
