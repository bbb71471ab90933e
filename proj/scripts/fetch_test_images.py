#!/usr/bin/env python3
"""Populate data/ with the 512x512 8-bit grayscale benchmark images.

cameraman comes from scikit-image's bundled data. peppers has no redistributable
copy in common Python packages; pass a local file with --peppers (color inputs
are converted with ITU-R BT.601 luma and must already be 512x512).
"""
import argparse
import hashlib
import pathlib
import sys

import numpy as np
from PIL import Image

KNOWN_SHA256 = {
    # sha256 of the raw 8-bit pixel bytes (row-major), not of the PNG file
    "cameraman": "5cb24482a53416f99052258be2b1ee38cd31c559a70c8a8b321cba231b332e21",
}


def pixel_digest(arr):
    return hashlib.sha256(np.ascontiguousarray(arr, dtype=np.uint8).tobytes()).hexdigest()


def store(name, arr, out_dir):
    if arr.shape != (512, 512):
        sys.exit(f"{name}: expected 512x512, got {arr.shape}")
    digest = pixel_digest(arr)
    expected = KNOWN_SHA256.get(name)
    if expected and digest != expected:
        sys.exit(f"{name}: pixel checksum mismatch ({digest})")
    path = out_dir / f"{name}.png"
    Image.fromarray(arr.astype(np.uint8), mode="L").save(path)
    print(f"{path}  sha256(pixels)={digest}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--peppers", help="local peppers image (any format Pillow reads)")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    try:
        from skimage import data
        store("cameraman", np.asarray(data.camera()), out)
    except ImportError:
        print("scikit-image not installed; skipping cameraman", file=sys.stderr)

    if args.peppers:
        img = Image.open(args.peppers)
        if img.mode not in ("L", "P"):
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
            gray = np.rint(rgb @ np.array([0.299, 0.587, 0.114])).clip(0, 255)
        else:
            gray = np.asarray(img.convert("L"))
        store("peppers", gray, out)
    elif not (out / "peppers.png").exists():
        print("peppers.png not present; pass --peppers <file> to add it", file=sys.stderr)


if __name__ == "__main__":
    main()
