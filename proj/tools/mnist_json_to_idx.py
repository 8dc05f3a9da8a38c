#!/usr/bin/env python3
"""Convert the digit JSON files shipped with the `mnist` npm package into
gzip-compressed IDX files (train/test split, shuffled with a fixed seed).

Usage: mnist_json_to_idx.py <package>/src/digits <out_dir> [--test N] [--seed S]
"""
import argparse
import gzip
import json
import os
import random
import struct


def write_idx(path, magic, dims, payload):
    with open(path, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as f:
        f.write(struct.pack(">I", magic))
        for d in dims:
            f.write(struct.pack(">I", d))
        f.write(bytes(payload))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir")
    ap.add_argument("out_dir")
    ap.add_argument("--test", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=2017)
    args = ap.parse_args()

    samples = []
    for label in range(10):
        with open(os.path.join(args.digits_dir, f"{label}.json")) as f:
            flat = json.load(f)["data"]
        for k in range(len(flat) // 784):
            pixels = [min(255, max(0, round(v * 255))) for v in flat[784 * k:784 * (k + 1)]]
            samples.append((pixels, label))

    random.Random(args.seed).shuffle(samples)
    splits = {"t10k": samples[:args.test], "train": samples[args.test:]}
    os.makedirs(args.out_dir, exist_ok=True)
    for name, part in splits.items():
        images = [p for s in part for p in s[0]]
        labels = [s[1] for s in part]
        write_idx(os.path.join(args.out_dir, f"{name}-images-idx3-ubyte.gz"), 0x803, [len(part), 28, 28], images)
        write_idx(os.path.join(args.out_dir, f"{name}-labels-idx1-ubyte.gz"), 0x801, [len(part)], labels)
        print(f"{name}: {len(part)} samples")


if __name__ == "__main__":
    main()
