#!/usr/bin/env python3
"""Export standard grayscale test images from scikit-image's bundled data.

Each image is converted to 8-bit grayscale, center-cropped to a square,
resized to 256x256 and written as PNG. The source pixels are verified
against a SHA-256 digest first, so a changed upstream image is reported
instead of silently producing a different benchmark.
"""

import argparse
import hashlib
import sys
from pathlib import Path

import numpy as np
from PIL import Image
import skimage.data
from skimage.color import rgb2gray

# output name -> skimage.data loader
IMAGES = {
    "cameraman": "camera",
    "astronaut": "astronaut",
    "moon": "moon",
    "coins": "coins",
    "chelsea": "chelsea",
}

# sha256 of the source array bytes
CHECKSUMS = {
    "cameraman": "5cb24482a53416f99052258be2b1ee38cd31c559a70c8a8b321cba231b332e21",
    "astronaut": "a8c429c18afa7b0fd5673e598d73a21225d94c864a71bbb3885126fdecb41071",
    "moon": "a20362266d5b01021f6f0f54bd603c3137f921b741770420deeb5ea0141716c0",
    "coins": "e080cc03805f1fa70516c3cb84883d4633bda2a1b51841da7c22f3d14c072451",
    "chelsea": "416b729128bfb2c3d1eb69bf9b1734a796293abc17939267b2dc94f8a5784031",
}


def source_digest(arr):
    return hashlib.sha256(np.ascontiguousarray(arr).tobytes()).hexdigest()


def to_gray_u8(arr):
    if arr.ndim == 3:
        arr = rgb2gray(arr[..., :3])
        return np.clip(np.round(arr * 255.0), 0, 255).astype(np.uint8)
    return arr.astype(np.uint8)


def center_square(arr):
    h, w = arr.shape
    s = min(h, w)
    top, left = (h - s) // 2, (w - s) // 2
    return arr[top:top + s, left:left + s]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/images", help="output directory")
    parser.add_argument("--size", type=int, default=256, help="output side length")
    parser.add_argument("--print-checksums", action="store_true",
                        help="print source digests instead of verifying them")
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failed = False
    for name, loader in IMAGES.items():
        arr = getattr(skimage.data, loader)()
        digest = source_digest(arr)
        if args.print_checksums:
            print(f'    "{name}": "{digest}",')
            continue
        expected = CHECKSUMS.get(name)
        if expected and expected != digest:
            print(f"{name}: checksum mismatch ({digest})", file=sys.stderr)
            failed = True
            continue
        gray = center_square(to_gray_u8(arr))
        img = Image.fromarray(gray, mode="L").resize((args.size, args.size), Image.LANCZOS)
        path = out / f"{name}.png"
        img.save(path)
        print(f"wrote {path}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
