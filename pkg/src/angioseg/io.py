"""8-bit grayscale image I/O: binary PGM (P5) and PNG.

Loading maps [0, 255] to [0, 1] by dividing by 255; writing rounds back.
"""

import os

import numpy as np
from PIL import Image


def _read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    # header: magic, width, height, maxval -- whitespace separated, with
    # optional '#' comment lines
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PGM supported (maxval {maxval})")
    raw = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    return raw.reshape(height, width)


def _write_pgm(path, pixels):
    h, w = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(pixels.astype(np.uint8).tobytes())


def read_image(path):
    """Read a PGM or PNG file as a float64 image in [0, 1]."""
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        pixels = _read_pgm(path)
    else:
        with Image.open(path) as im:
            pixels = np.asarray(im.convert("L"), dtype=np.uint8)
    return pixels.astype(np.float64) / 255.0


def write_image(path, img):
    """Write a [0, 1] image as 8-bit PGM or PNG depending on the extension."""
    pixels = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    pixels = np.floor(pixels * 255.0 + 0.5).astype(np.uint8)
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        _write_pgm(path, pixels)
    else:
        Image.fromarray(pixels, mode="L").save(path)


def write_mask(path, mask):
    """Write a boolean mask as an 8-bit image (0 / 255)."""
    write_image(path, np.asarray(mask, dtype=bool).astype(np.float64))


def read_mask(path, threshold=0.5):
    return read_image(path) >= threshold


def write_overlay(path, gray, arteries=None, catheter=None, centerline=None):
    """Write an RGB PNG of ``gray`` with mask overlays.

    Arteries are drawn red, the catheter blue and centerlines green.
    """
    base = np.clip(np.asarray(gray, dtype=np.float64), 0.0, 1.0)
    base = np.floor(base * 255.0 + 0.5).astype(np.uint8)
    rgb = np.stack([base, base, base], axis=-1)
    if arteries is not None:
        rgb[np.asarray(arteries, dtype=bool)] = (220, 30, 30)
    if catheter is not None:
        rgb[np.asarray(catheter, dtype=bool)] = (40, 70, 230)
    if centerline is not None:
        rgb[np.asarray(centerline, dtype=bool)] = (30, 200, 60)
    Image.fromarray(rgb, mode="RGB").save(path)
