"""Numpy reference values for the noise and metric anchors.

Uses numpy's own generator, so per-image numbers differ from the C++ code;
corpus means should agree within a few hundredths of a dB.
Usage: python3 corpus_anchors.py [tests/data/natural]
"""
import sys
from pathlib import Path

import numpy as np
from PIL import Image

C1 = (0.01 * 255) ** 2


def psnr(a, b):
    mse = np.mean((a - b) ** 2)
    return 10 * np.log10(255.0**2 / mse)


def quantize(x):
    return np.clip(np.sign(x) * np.floor(np.abs(x) + 0.5), 0, 255)


def salt_pepper(img, fraction, rng):
    out = img.copy().ravel()
    k = int(np.floor(fraction * out.size + 0.5))
    idx = rng.permutation(out.size)[:k]
    out[idx[: (k + 1) // 2]] = 0
    out[idx[(k + 1) // 2 :]] = 255
    return out.reshape(img.shape), k


def main():
    root = Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data/natural")
    rng = np.random.default_rng(2024)
    g, m = [], []
    for p in sorted(root.glob("*.png")):
        clean = np.asarray(Image.open(p).convert("L"), dtype=float)
        noisy = quantize(clean + 50 * rng.standard_normal(clean.shape))
        g.append(psnr(clean, noisy))
        mixed, k = salt_pepper(noisy, 0.2, rng)
        assert k == round(0.2 * clean.size)
        m.append(psnr(clean, mixed))
    print(f"{len(g)} images: AWGN sigma=50 mean PSNR {np.mean(g):.3f} dB, mixture {np.mean(m):.3f} dB")

    white = quantize(255 + 50 * rng.standard_normal(10**6))
    print(f"clipped constant 255: mean {white.mean():.4f} (half-normal theory {255 - 50 / np.sqrt(2 * np.pi):.4f})")
    print(f"SSIM constant 100 vs 150: {(2 * 100 * 150 + C1) / (100**2 + 150**2 + C1):.6f}")
    print(f"PSNR 100 vs 150: {psnr(np.full(4, 100.0), np.full(4, 150.0)):.4f} dB")


if __name__ == "__main__":
    main()
