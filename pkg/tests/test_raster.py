import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from topodown.raster import (
    BinaryImage, Factors, ImageFormatError, crop_ring, load_image, pad_white_ring, save_image,
)
from topodown.topology import image_betti

bool_images = arrays(np.bool_, st.tuples(st.integers(1, 12), st.integers(1, 12)))


def test_plain_pbm_example():
    im = load_image(b"P1 2 2 1 0 0 1")
    assert im.pixels.tolist() == [[True, False], [False, True]]


def test_png_all_white():
    from PIL import Image
    import io

    buf = io.BytesIO()
    Image.fromarray(np.full((3, 5), 255, np.uint8), mode="L").save(buf, "PNG")
    im = load_image(buf.getvalue())
    assert (im.width, im.height) == (5, 3)
    assert not im.pixels.any()


def test_png_threshold_is_strict():
    from PIL import Image
    import io

    buf = io.BytesIO()
    Image.fromarray(np.array([[127, 128]], np.uint8), mode="L").save(buf, "PNG")
    assert load_image(buf.getvalue()).pixels.tolist() == [[True, False]]


@pytest.mark.parametrize("data", [b"P1 2", b"P1", b"P4 8 2\n\x00", b"P1 2 2 1 0 1", b"junk"])
def test_malformed(data):
    with pytest.raises(ImageFormatError, match="malformed"):
        load_image(data)


def test_zero_dimensions():
    with pytest.raises(ImageFormatError):
        load_image(b"P1 0 3\n")


def test_rgb_png_rejected():
    from PIL import Image
    import io

    buf = io.BytesIO()
    Image.new("RGB", (2, 2)).save(buf, "PNG")
    with pytest.raises(ImageFormatError, match="unsupported"):
        load_image(buf.getvalue())


def test_one_pixel_pbm_text():
    assert save_image(BinaryImage.blank(1, 1, True)).split() == [b"P1", b"1", b"1", b"1"]
    assert save_image(BinaryImage.blank(1, 1, False)).split() == [b"P1", b"1", b"1", b"0"]


@settings(max_examples=60, deadline=None)
@given(bool_images, st.sampled_from(["pbm", "pbm-raw", "png"]))
def test_round_trip(px, fmt):
    im = BinaryImage(px)
    assert load_image(save_image(im, fmt)) == im


def test_long_rows_wrap_in_plain_pbm():
    im = BinaryImage(np.ones((2, 100), bool))
    data = save_image(im)
    assert max(len(line) for line in data.splitlines()) < 70
    assert load_image(data) == im


def test_factors_parse():
    assert Factors.parse("4") == Factors(4, 4)
    assert Factors.parse("16x8") == Factors(16, 8)
    with pytest.raises(ValueError):
        Factors.parse("0")
    with pytest.raises(ValueError):
        Factors.parse("2x")


def test_pad_all_black():
    out = pad_white_ring(BinaryImage.blank(4, 4, True), Factors(2, 2))
    assert out.shape == (8, 8)
    assert out.pixels[2:6, 2:6].all()
    assert out.pixels.sum() == 16


def test_pad_white_unit():
    out = pad_white_ring(BinaryImage.blank(2, 2), Factors(1, 1))
    assert out.shape == (4, 4) and not out.pixels.any()


def test_pad_anisotropic_keeps_divisibility():
    out = pad_white_ring(BinaryImage.blank(16, 8), Factors(4, 2))
    assert (out.width, out.height) == (24, 12)
    out.check_divisible(Factors(4, 2))


def test_crop_examples():
    assert crop_ring(BinaryImage.blank(4, 4), Factors(1, 1)) == BinaryImage.blank(2, 2)
    px = np.zeros((4, 4), bool)
    px[1, 1] = True
    assert crop_ring(BinaryImage(px), Factors(1, 1)).pixels.tolist() == [[True, False], [False, False]]
    bad = np.zeros((3, 3), bool)
    bad[0, 1] = True
    with pytest.raises(ValueError):
        crop_ring(BinaryImage(bad), Factors(1, 1))


@settings(max_examples=60, deadline=None)
@given(bool_images)
def test_padding_keeps_betti(px):
    im = BinaryImage(px)
    assert image_betti(pad_white_ring(im, Factors(1, 1))) == image_betti(im)


def test_image_is_immutable():
    im = BinaryImage.blank(2, 2)
    with pytest.raises(ValueError):
        im.pixels[0, 0] = True
