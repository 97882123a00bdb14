import numpy as np
import pytest

from conftest import img
from topodown.classic import (
    METHODS, acn_downsample, area_pool, bicubic, bilinear, classic_downsample, crossing_numbers,
    max_pool, min_pool, nearest,
)
from topodown.raster import BinaryImage, Factors
from topodown.topology import image_betti

F2 = Factors(2, 2)


@pytest.mark.parametrize("name", sorted(METHODS))
@pytest.mark.parametrize("black", [False, True])
def test_constant_images(name, black):
    im = BinaryImage.blank(8, 8, black=black)
    assert classic_downsample(im, F2, name) == BinaryImage.blank(4, 4, black=black)


@pytest.mark.parametrize("name", ["nearest", "area", "maxpool", "minpool", "bilinear", "bicubic", "acn"])
def test_factor_one_identity(name, rng):
    im = BinaryImage(rng.random((6, 6)) < 0.5)
    assert classic_downsample(im, Factors(1, 1), name) == im


def test_nearest_samples_top_left():
    assert nearest(img("#...", "....", "....", "...."), F2).to_strings() == ["#.", ".."]
    assert nearest(img("....", ".#..", "....", "...."), F2).to_strings() == ["..", ".."]


def test_area_tie_is_black():
    assert area_pool(img("##", ".."), F2).to_strings() == ["#"]
    assert area_pool(img("#.", ".."), F2).to_strings() == ["."]


def test_max_min_pool_single_pixel():
    im = img("....", ".#..", "....", "....")
    assert max_pool(im, F2).to_strings() == ["#.", ".."]
    assert min_pool(im, F2).to_strings() == ["..", ".."]


def test_vertical_split_kept():
    im = img("####....", "####....", "####....", "####....")
    for fn in (bilinear, bicubic):
        assert fn(im, F2).to_strings() == ["##..", "##.."]


def test_anisotropic_shapes():
    im = BinaryImage.blank(12, 4)
    for name in ("nearest", "area", "maxpool", "minpool", "bilinear", "bicubic"):
        assert classic_downsample(im, Factors(3, 2), name).shape == (2, 4)


def test_unknown_method():
    with pytest.raises(ValueError):
        classic_downsample(BinaryImage.blank(2, 2), F2, "lanczos")


def test_acn_rejects_odd_factors():
    with pytest.raises(ValueError):
        acn_downsample(BinaryImage.blank(6, 6), Factors(3, 3))
    with pytest.raises(ValueError):
        acn_downsample(BinaryImage.blank(4, 2), Factors(2, 1))


def test_crossing_numbers_line_and_end():
    px = img(".....", ".###.", ".....").pixels
    cn = crossing_numbers(px)
    assert cn[1, 2] == 2  # middle of a line
    assert cn[1, 1] == 1  # end point
    assert cn[0, 0] == 1


def test_acn_keeps_thin_line():
    # a one-pixel diagonal line: min pooling loses it, ACN keeps one piece
    px = np.zeros((8, 8), bool)
    for k in range(8):
        px[k, k] = True
    im = BinaryImage(px)
    assert image_betti(acn_downsample(im, F2)) == (1, 0)
    assert image_betti(min_pool(im, F2)) == (0, 0)


def test_acn_uniform_block_keeps_color(rng):
    px = np.kron(rng.random((4, 4)) < 0.5, np.ones((2, 2), bool))
    # every pixel in a uniform block has the same color, so the block keeps it
    assert (acn_downsample(BinaryImage(px), F2).pixels == px[::2, ::2]).all()


def pooled_reference(px, f, reduce):
    h, w = px.shape
    out = np.zeros((h // f.b, w // f.a), bool)
    for Y in range(h // f.b):
        for X in range(w // f.a):
            out[Y, X] = reduce(px[Y * f.b:(Y + 1) * f.b, X * f.a:(X + 1) * f.a])
    return out


@pytest.mark.parametrize("f", [Factors(2, 2), Factors(4, 2), Factors(3, 3)])
def test_pools_match_loops(f, rng):
    px = rng.random((12, 12)) < 0.5
    im = BinaryImage(px)
    assert (max_pool(im, f).pixels == pooled_reference(px, f, np.any)).all()
    assert (min_pool(im, f).pixels == pooled_reference(px, f, np.all)).all()
    half = lambda b: 2 * b.sum() >= b.size
    assert (area_pool(im, f).pixels == pooled_reference(px, f, half)).all()


@pytest.mark.parametrize("kernel", ["bilinear", "bicubic"])
@pytest.mark.parametrize("f", [Factors(2, 2), Factors(4, 4), Factors(4, 2)])
def test_filters_match_opencv(kernel, f, rng):
    cv2 = pytest.importorskip("cv2")
    fn = bilinear if kernel == "bilinear" else bicubic
    interp = cv2.INTER_LINEAR if kernel == "bilinear" else cv2.INTER_CUBIC
    for _ in range(10):
        px = rng.random((32, 32)) < 0.5
        grey = cv2.resize(px.astype(np.float32), (32 // f.a, 32 // f.b), interpolation=interp)
        ours = fn(BinaryImage(px), f).pixels
        clear = np.abs(grey - 0.5) > 1e-4
        assert (ours[clear] == (grey[clear] >= 0.5)).all()
