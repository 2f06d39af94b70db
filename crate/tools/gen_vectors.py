#!/usr/bin/env python3
"""Regenerate crates/core/data/vectors.txt from tools/concepts.txt.

Each `@axis` section lists lemmas (optionally `lemma:weight`, default 1.0).
A lemma's vector is the weighted sum of its axes plus a small per-word
noise vector, then rotated by a fixed orthogonal matrix so the stored
vectors are dense. Everything is seeded from SHA-256 of the names, so the
output is byte-identical across runs and platforms.

    python3 tools/gen_vectors.py
"""
import hashlib
import math
import os
import random

DIM = 100
NOISE = 0.55

HERE = os.path.dirname(os.path.abspath(__file__))


def rng_for(name):
    seed = int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:8], "big")
    return random.Random(seed)


def unit_gauss(name, dim):
    r = rng_for(name)
    v = [r.gauss(0.0, 1.0) for _ in range(dim)]
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def rotation(dim):
    # Gram-Schmidt over seeded gaussian rows.
    rows = []
    for i in range(dim):
        v = unit_gauss(f"rotation-row-{i}", dim)
        for q in rows:
            d = sum(a * b for a, b in zip(v, q))
            v = [a - d * b for a, b in zip(v, q)]
        n = math.sqrt(sum(x * x for x in v))
        rows.append([x / n for x in v])
    return rows


def parse(path):
    axes = []
    weights = {}
    current = None
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("@"):
                current = line[1:].strip()
                if current not in axes:
                    axes.append(current)
                continue
            for item in line.split():
                word, _, w = item.partition(":")
                weights.setdefault(word.lower(), {})
                weights[word.lower()][current] = weights[word.lower()].get(current, 0.0) + (
                    float(w) if w else 1.0
                )
    return axes, weights


def build(path=os.path.join(HERE, "concepts.txt")):
    axes, weights = parse(path)
    if len(axes) > DIM:
        raise SystemExit(f"{len(axes)} axes exceed dimension {DIM}")
    index = {a: i for i, a in enumerate(axes)}
    rot = rotation(DIM)
    vectors = {}
    for word in sorted(weights):
        base = [0.0] * DIM
        for axis, w in weights[word].items():
            base[index[axis]] += w
        noise = unit_gauss(f"word-{word}", DIM)
        base = [b + NOISE * n for b, n in zip(base, noise)]
        vectors[word] = [sum(r[j] * base[j] for j in range(DIM)) for r in rot]
    return vectors


def main():
    vectors = build()
    out = os.path.join(HERE, "..", "crates", "core", "data", "vectors.txt")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(f"{len(vectors)} {DIM}\n")
        for word, vec in vectors.items():
            fh.write(word + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")
    print(f"{len(vectors)} words x {DIM} dims")


if __name__ == "__main__":
    main()
