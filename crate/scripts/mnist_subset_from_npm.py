#!/usr/bin/env python3
"""Rebuild data/mnist-subset/ from the 10,000 MNIST digits bundled in the
MIT-licensed npm package `mnist` (https://www.npmjs.com/package/mnist).

Usage:
    npm pack mnist && tar xzf mnist-*.tgz
    python3 scripts/mnist_subset_from_npm.py package/src/digits data/mnist-subset

Pixels in the npm package are stored as value/255 rounded to 3 decimals;
they are mapped back to bytes with round(v * 255). Samples are shuffled
with a fixed seed so that any prefix is class-balanced in expectation.
"""
import gzip
import json
import random
import struct
import sys
from pathlib import Path


def main(src: Path, dst: Path) -> None:
    samples = []
    for digit in range(10):
        flat = json.loads((src / f"{digit}.json").read_text())["data"]
        assert len(flat) % 784 == 0
        for i in range(len(flat) // 784):
            px = bytes(min(255, max(0, round(v * 255))) for v in flat[i * 784:(i + 1) * 784])
            samples.append((px, digit))
    random.Random(20170101).shuffle(samples)

    dst.mkdir(parents=True, exist_ok=True)
    n = len(samples)
    with gzip.GzipFile(dst / "images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x803, n, 28, 28))
        for px, _ in samples:
            f.write(px)
    with gzip.GzipFile(dst / "labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(bytes(label for _, label in samples))
    print(f"wrote {n} samples to {dst}")


if __name__ == "__main__":
    main(Path(sys.argv[1]), Path(sys.argv[2]))
