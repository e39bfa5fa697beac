#!/usr/bin/env python3
"""Convert the per-class JSON dump of FashionMNIST (npm package `fashion-mnist`,
directory `package/src/clothes/`) into gzipped IDX files.

The dump holds 7000 images per class with the original train/test order lost,
so the split is rebuilt per class: the first 6000 images go to train and the
next 1000 to test (60000 / 10000 overall, 6000 / 1000 per class like the
original release). Both splits are shuffled with a fixed seed.

usage: prepare_fashion_mnist.py CLOTHES_DIR OUT_DIR
"""
import gzip
import json
import pathlib
import struct
import sys

import numpy as np

TRAIN_PER_CLASS = 6000
TEST_PER_CLASS = 1000


def write_images(path, images):
    with gzip.open(path, "wb") as f:
        f.write(struct.pack(">IIII", 2051, images.shape[0], 28, 28))
        f.write(images.astype(np.uint8).tobytes())


def write_labels(path, labels):
    with gzip.open(path, "wb") as f:
        f.write(struct.pack(">II", 2049, labels.shape[0]))
        f.write(labels.astype(np.uint8).tobytes())


def main(argv):
    if len(argv) != 3:
        print(__doc__, file=sys.stderr)
        return 1
    src, out = pathlib.Path(argv[1]), pathlib.Path(argv[2])
    out.mkdir(parents=True, exist_ok=True)
    train_x, train_y, test_x, test_y = [], [], [], []
    for label in range(10):
        rows = json.loads((src / f"{label}.json").read_text())["data"]
        # the dump contains a few empty placeholder entries
        data = np.asarray([r for r in rows if len(r) == 784], dtype=np.uint8)
        if data.shape[0] < TRAIN_PER_CLASS + TEST_PER_CLASS or data.shape[1] != 784:
            raise SystemExit(f"class {label}: unexpected shape {data.shape}")
        train_x.append(data[:TRAIN_PER_CLASS])
        test_x.append(data[TRAIN_PER_CLASS:TRAIN_PER_CLASS + TEST_PER_CLASS])
        train_y.append(np.full(TRAIN_PER_CLASS, label, dtype=np.uint8))
        test_y.append(np.full(TEST_PER_CLASS, label, dtype=np.uint8))
    rng = np.random.RandomState(0)
    for name, xs, ys in (("train", train_x, train_y), ("t10k", test_x, test_y)):
        x, y = np.concatenate(xs), np.concatenate(ys)
        order = rng.permutation(x.shape[0])
        write_images(out / f"{name}-images-idx3-ubyte.gz", x[order])
        write_labels(out / f"{name}-labels-idx1-ubyte.gz", y[order])
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
