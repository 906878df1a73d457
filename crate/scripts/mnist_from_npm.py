#!/usr/bin/env python3
"""Build IDX files from the 10,000 MNIST digits bundled in the `mnist` npm package.

Usage: mnist_from_npm.py <unpacked-package-dir> <out-dir>

The package stores one JSON file per digit class with pixel intensities in
[0, 1] rounded to three decimals. Pixels are mapped back to bytes with
round(v * 255); samples are interleaved round-robin across classes so that
any prefix of the output is roughly class balanced.
"""
import json
import os
import struct
import sys


def main():
    src, out = sys.argv[1], sys.argv[2]
    per_class = []
    for d in range(10):
        with open(os.path.join(src, "src", "digits", f"{d}.json")) as f:
            data = json.load(f)["data"]
        n = len(data) // 784
        per_class.append([data[i * 784:(i + 1) * 784] for i in range(n)])

    images, labels = [], []
    longest = max(len(c) for c in per_class)
    for i in range(longest):
        for d in range(10):
            if i < len(per_class[d]):
                images.append(per_class[d][i])
                labels.append(d)

    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(min(255, max(0, round(v * 255))) for v in img))
    with open(os.path.join(out, "labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))
    print(f"wrote {len(images)} samples to {out}")


if __name__ == "__main__":
    main()
