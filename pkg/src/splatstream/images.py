"""Image file I/O: 8-bit PNG for viewing, raw planar float32 for bit-exact tests."""
from __future__ import annotations

import numpy as np
from PIL import Image

from .errors import InvalidInputError


def write_png(path, image):
    """Write an (H, W, 3) float image in [0, 1] as 8-bit RGB."""
    arr = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    data = (arr * 255.0 + 0.5).astype(np.uint8)
    Image.fromarray(data, mode="RGB").save(path)


def read_png(path):
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64)
    return arr / 255.0


def write_f32(path, image):
    """Raw little-endian float32, planar channel-major (3, H, W)."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidInputError("expected an (H, W, 3) image")
    planar = np.ascontiguousarray(arr.transpose(2, 0, 1).astype("<f4"))
    with open(path, "wb") as fh:
        fh.write(planar.tobytes())


def read_f32(path, width, height):
    with open(path, "rb") as fh:
        buf = fh.read()
    expected = 3 * width * height * 4
    if len(buf) != expected:
        raise InvalidInputError(f"{path}: expected {expected} bytes, found {len(buf)}")
    planar = np.frombuffer(buf, dtype="<f4").reshape(3, height, width)
    return planar.transpose(1, 2, 0).astype(np.float64)


def read_image(path, width=None, height=None):
    path = str(path)
    if path.endswith(".f32"):
        if width is None or height is None:
            raise InvalidInputError("raw f32 images need width/height from the manifest")
        return read_f32(path, width, height)
    return read_png(path)
