#!/usr/bin/env python3
"""Export scikit-learn's bundled digits as IDX image/label files.

Produces the same container format as the classic MNIST distribution
(magic 0x00000803 for images, 0x00000801 for labels, big-endian dims),
so the C++ loader exercises the real format without network access.
Images are 8x8 uint8, rescaled from sklearn's 0..16 range to 0..255.
"""
import argparse
import struct
import sys

import numpy as np
from sklearn.datasets import load_digits


def write_idx_images(path, images):
    n, h, w = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">iiii", 0x00000803, n, h, w))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">ii", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_images")
    ap.add_argument("out_labels")
    args = ap.parse_args()

    ds = load_digits()
    images = np.round(ds.images * (255.0 / 16.0)).clip(0, 255)
    write_idx_images(args.out_images, images)
    write_idx_labels(args.out_labels, ds.target)
    print(f"wrote {len(ds.target)} digits to {args.out_images} / {args.out_labels}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
