#!/usr/bin/env python3
"""Regenerate tests/data/natural: 256x256 8-bit grayscale crops of the
photographs bundled with scikit-image.

Usage: python3 tools/make_corpus.py [OUT_DIR]
"""
import os
import sys

import numpy as np
from skimage import data, io, transform

SIDE = 256

# (source file, mode, argument)
#   "fit":  scale the short side to SIDE, then center crop
#   "crop": take a SIDE x SIDE window at (row, col) of the full-resolution image
SOURCES = [
    ("camera.png", "fit", None),
    ("camera.png", "crop", (60, 180)),
    ("camera.png", "crop", (256, 0)),
    ("astronaut.png", "fit", None),
    ("astronaut.png", "crop", (0, 128)),
    ("astronaut.png", "crop", (256, 200)),
    ("coffee.png", "fit", None),
    ("coffee.png", "crop", (100, 250)),
    ("chelsea.png", "fit", None),
    ("coins.png", "fit", None),
    ("moon.png", "fit", None),
    ("moon.png", "crop", (128, 128)),
    ("rocket.jpg", "fit", None),
    ("motorcycle_left.png", "fit", None),
    ("motorcycle_right.png", "crop", (120, 240)),
    ("gravel.png", "fit", None),
    ("brick.png", "fit", None),
    ("grass.png", "fit", None),
    ("ihc.png", "fit", None),
    ("retina.jpg", "fit", None),
    ("retina.jpg", "crop", (560, 560)),
    ("hubble_deep_field.jpg", "fit", None),
    ("clock_motion.png", "fit", None),
    ("cell.png", "fit", None),
]


def luminance(img):
    if img.ndim == 2:
        return img.astype(np.float64)
    rgb = img[..., :3].astype(np.float64)
    return rgb @ np.array([0.299, 0.587, 0.114])


def quantize(x):
    x = np.clip(x, 0.0, 255.0)
    return np.floor(x + 0.5).astype(np.uint8)


def fit(gray):
    h, w = gray.shape
    scale = SIDE / min(h, w)
    nh, nw = max(SIDE, round(h * scale)), max(SIDE, round(w * scale))
    small = transform.resize(gray, (nh, nw), anti_aliasing=True, preserve_range=True)
    r0, c0 = (nh - SIDE) // 2, (nw - SIDE) // 2
    return small[r0:r0 + SIDE, c0:c0 + SIDE]


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "tests", "data", "natural")
    os.makedirs(out, exist_ok=True)
    root = os.path.dirname(data.__file__)
    for i, (name, mode, arg) in enumerate(SOURCES):
        gray = luminance(io.imread(os.path.join(root, name)))
        if mode == "fit":
            tile = fit(gray)
        else:
            r, c = arg
            tile = gray[r:r + SIDE, c:c + SIDE]
        assert tile.shape == (SIDE, SIDE), (name, tile.shape)
        stem = os.path.splitext(name)[0]
        io.imsave(os.path.join(out, f"{i:02d}_{stem}.png"), quantize(tile), check_contrast=False)


if __name__ == "__main__":
    main()
