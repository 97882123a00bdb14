"""Binary image container, PBM/PNG codecs and white-ring padding.

Pixels are stored row-major in a boolean array of shape (height, width),
``True`` meaning black (foreground). Pixel ``(x, y)`` is ``pixels[y, x]``:
origin top-left, x to the right, y downward.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from PIL import Image


class ImageFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Factors:
    """Integer downsampling factors, ``a`` along x and ``b`` along y."""

    a: int
    b: int

    def __post_init__(self):
        if int(self.a) != self.a or int(self.b) != self.b or self.a < 1 or self.b < 1:
            raise ValueError(f"factors must be positive integers, got {self.a}x{self.b}")

    @classmethod
    def parse(cls, text: str) -> "Factors":
        """Parse ``"N"`` or ``"AxB"``."""
        m = re.fullmatch(r"\s*(\d+)\s*(?:[xX]\s*(\d+))?\s*", text)
        if not m:
            raise ValueError(f"bad factor spec {text!r}; expected N or AxB")
        a = int(m.group(1))
        b = int(m.group(2)) if m.group(2) else a
        return cls(a, b)

    def __str__(self):
        return f"{self.a}x{self.b}"


class BinaryImage:
    """Immutable W x H black/white raster."""

    __slots__ = ("_px",)

    def __init__(self, pixels):
        arr = np.array(pixels, dtype=bool, copy=True)
        if arr.ndim != 2:
            raise ValueError("pixels must be a 2-D array")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("zero dimensions")
        arr.setflags(write=False)
        self._px = arr

    @classmethod
    def blank(cls, width: int, height: int, black: bool = False) -> "BinaryImage":
        return cls(np.full((height, width), black, dtype=bool))

    @classmethod
    def from_strings(cls, rows: Iterable[str], black: str = "#") -> "BinaryImage":
        """Build from text rows, e.g. ``["#..", ".#."]``; ``black`` marks foreground."""
        rows = [r for r in rows]
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("rows must be non-empty and of equal length")
        return cls(np.array([[ch in black for ch in r] for r in rows], dtype=bool))

    @property
    def pixels(self) -> np.ndarray:
        return self._px

    @property
    def width(self) -> int:
        return self._px.shape[1]

    @property
    def height(self) -> int:
        return self._px.shape[0]

    @property
    def shape(self):
        return self._px.shape

    def __getitem__(self, xy):
        x, y = xy
        return bool(self._px[y, x])

    def to_strings(self, black: str = "#", white: str = ".") -> list[str]:
        return ["".join(black if v else white for v in row) for row in self._px]

    def __eq__(self, other):
        if not isinstance(other, BinaryImage):
            return NotImplemented
        return self._px.shape == other._px.shape and bool(np.array_equal(self._px, other._px))

    def __hash__(self):
        return hash((self._px.shape, self._px.tobytes()))

    def __repr__(self):
        return f"BinaryImage({self.width}x{self.height}, black={int(self._px.sum())})"

    def check_divisible(self, factors: Factors) -> None:
        if self.width % factors.a or self.height % factors.b:
            raise ValueError(
                f"image {self.width}x{self.height} is not divisible by factors {factors}"
            )


# --------------------------------------------------------------------------- PBM

def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # skips whitespace and comments, returns next whitespace-delimited token
    while True:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
            continue
        break
    start = pos
    while pos < len(data) and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ImageFormatError("malformed file: truncated PBM header")
    return data[start:pos], pos


def _parse_pbm(data: bytes) -> BinaryImage:
    magic, pos = _read_token(data, 0)
    if magic not in (b"P1", b"P4"):
        raise ImageFormatError("malformed file: bad PBM magic")
    try:
        w_tok, pos = _read_token(data, pos)
        h_tok, pos = _read_token(data, pos)
        width, height = int(w_tok), int(h_tok)
    except ValueError as exc:
        raise ImageFormatError("malformed file: bad PBM dimensions") from exc
    if width <= 0 or height <= 0:
        raise ImageFormatError("zero dimensions")
    n = width * height
    if magic == b"P1":
        bits = []
        while pos < len(data) and len(bits) < n:
            ch = data[pos : pos + 1]
            if ch == b"#":
                nl = data.find(b"\n", pos)
                pos = len(data) if nl < 0 else nl + 1
                continue
            if ch in (b"0", b"1"):
                bits.append(ch == b"1")
            elif not ch.isspace():
                raise ImageFormatError("malformed file: bad P1 pixel")
            pos += 1
        if len(bits) != n:
            raise ImageFormatError("malformed file: truncated P1 raster")
        return BinaryImage(np.array(bits, dtype=bool).reshape(height, width))
    # P4: exactly one whitespace byte after the height
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise ImageFormatError("malformed file: truncated PBM header")
    pos += 1
    row_bytes = (width + 7) // 8
    raw = data[pos : pos + row_bytes * height]
    if len(raw) != row_bytes * height:
        raise ImageFormatError("malformed file: truncated P4 raster")
    packed = np.frombuffer(raw, dtype=np.uint8).reshape(height, row_bytes)
    bits = np.unpackbits(packed, axis=1)[:, :width]
    return BinaryImage(bits.astype(bool))


def _write_pbm(img: BinaryImage, raw: bool) -> bytes:
    px = img.pixels
    if raw:
        header = f"P4\n{img.width} {img.height}\n".encode()
        return header + np.packbits(px.astype(np.uint8), axis=1).tobytes()
    lines = [f"P1\n{img.width} {img.height}"]
    # plain PBM lines should stay under 70 characters
    for row in px:
        s = " ".join("1" if v else "0" for v in row)
        while len(s) > 69:
            cut = s.rfind(" ", 0, 70)
            lines.append(s[:cut])
            s = s[cut + 1 :]
        lines.append(s)
    return ("\n".join(lines) + "\n").encode()


# --------------------------------------------------------------------------- API


def load_image(data: bytes, threshold: int = 128) -> BinaryImage:
    """Decode PBM (P1/P4) or 8-bit grayscale PNG bytes.

    PBM 1-bits are black. PNG gray values strictly below ``threshold`` are black.
    """
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        try:
            im = Image.open(io.BytesIO(data))
            im.load()
        except Exception as exc:  # Pillow raises a zoo of exception types
            raise ImageFormatError(f"malformed file: {exc}") from exc
        if im.mode == "1":
            arr = np.asarray(im, dtype=np.uint8) * 255
        elif im.mode == "L":
            arr = np.asarray(im, dtype=np.uint8)
        else:
            raise ImageFormatError(f"unsupported bit depth / mode {im.mode!r}; need 8-bit grayscale")
        if arr.size == 0:
            raise ImageFormatError("zero dimensions")
        return BinaryImage(arr < threshold)
    if data[:1] == b"P" or data[:1].isspace() or data[:1] == b"#":
        return _parse_pbm(data)
    raise ImageFormatError("malformed file: unrecognised format")


def save_image(img: BinaryImage, format: str = "pbm") -> bytes:
    """Encode as ``"pbm"`` (plain P1), ``"pbm-raw"`` (P4) or ``"png"``."""
    fmt = format.lower()
    if fmt in ("pbm", "p1"):
        return _write_pbm(img, raw=False)
    if fmt in ("pbm-raw", "p4"):
        return _write_pbm(img, raw=True)
    if fmt == "png":
        buf = io.BytesIO()
        Image.fromarray(np.where(img.pixels, 0, 255).astype(np.uint8), mode="L").save(buf, "PNG")
        return buf.getvalue()
    raise ValueError(f"unknown image format {format!r}")


def read_image_file(path, threshold: int = 128) -> BinaryImage:
    with open(path, "rb") as fh:
        return load_image(fh.read(), threshold)


def write_image_file(img: BinaryImage, path) -> None:
    path = str(path)
    fmt = "png" if path.lower().endswith(".png") else "pbm"
    with open(path, "wb") as fh:
        fh.write(save_image(img, fmt))


def pad_white_ring(img: BinaryImage, factors: Factors) -> BinaryImage:
    """Surround the image with a white border ``a`` pixels wide left/right and
    ``b`` pixels tall top/bottom, i.e. one big-pixel on every side."""
    out = np.zeros((img.height + 2 * factors.b, img.width + 2 * factors.a), dtype=bool)
    out[factors.b : factors.b + img.height, factors.a : factors.a + img.width] = img.pixels
    return BinaryImage(out)


def crop_ring(img: BinaryImage, factors: Factors) -> BinaryImage:
    """Remove a one-big-pixel border; ``img`` is in big-pixel units when
    ``factors`` is (1, 1), or in original pixels otherwise.

    Raises ``ValueError`` if the border holds any black pixel, since dropping it
    would change the topology.
    """
    a, b = factors.a, factors.b
    if img.width < 3 * a or img.height < 3 * b:
        raise ValueError("image too small to crop a ring")
    px = img.pixels
    inner = px[b:-b, a:-a]
    if px.sum() != inner.sum():
        raise ValueError("cannot crop ring: border contains black pixels")
    return BinaryImage(inner)
