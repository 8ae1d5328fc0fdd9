#!/usr/bin/env python3
"""Convert the digit JSON files shipped in the npm `mnist` package to IDX.

Usage: convert_mnist_json.py <package>/src/digits <out_dir>

Each JSON file holds {"data": [...]} with 784 floats per digit in [0,1]
(three decimals). Values are rounded back to 8-bit. Every fifth sample of
each class goes to the test split; the rest go to the training split. Both
splits are interleaved by class so the files have no label runs.
"""
import json
import struct
import sys
from pathlib import Path


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    src, out = Path(sys.argv[1]), Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    per_class = []
    for digit in range(10):
        flat = json.loads((src / f"{digit}.json").read_text())["data"]
        assert len(flat) % 784 == 0
        samples = [
            [min(255, max(0, round(v * 255))) for v in flat[i:i + 784]]
            for i in range(0, len(flat), 784)
        ]
        per_class.append(samples)

    train, test = [], []
    for digit, samples in enumerate(per_class):
        for i, s in enumerate(samples):
            (test if i % 5 == 4 else train).append((i, digit, s))
    # interleave: order by within-class index, then digit
    train.sort(key=lambda t: (t[0], t[1]))
    test.sort(key=lambda t: (t[0], t[1]))

    write_idx_images(out / "train-images-idx3-ubyte", [s for _, _, s in train])
    write_idx_labels(out / "train-labels-idx1-ubyte", [d for _, d, _ in train])
    write_idx_images(out / "t10k-images-idx3-ubyte", [s for _, _, s in test])
    write_idx_labels(out / "t10k-labels-idx1-ubyte", [d for _, d, _ in test])
    print(f"train={len(train)} test={len(test)}")


if __name__ == "__main__":
    main()
