#!/usr/bin/env python3
"""Independent recomputation of phrase similarities over data/vectors.txt.

Lemma lists are written out by hand (no tokenizer or tagger involved), so the
numbers here can be frozen into Rust tests as an external check.

    python3 tools/similarity_oracle.py
"""
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
VECTORS = os.path.join(HERE, "..", "crates", "core", "data", "vectors.txt")


def load():
    vec = {}
    with open(VECTORS, encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            parts = line.split()
            vec[parts[0]] = [float(x) for x in parts[1:]]
    return vec


def cos(a, b):
    dot = sum(x * y for x, y in zip(a, b))
    return dot / math.sqrt(sum(x * x for x in a) * sum(y * y for y in b))


def mean(vec, words):
    vs = [vec[w] for w in words if w in vec]
    return [sum(c) / len(vs) for c in zip(*vs)]


OPTIONS = {
    "A": ["positively", "charged", "particle"],
    "B": ["sum", "number", "proton", "neutron"],
    "C": ["negatively", "charged", "subatomic", "particle"],
    "D": ["discover", "charge", "electron"],
}
STEM = ["proton"]


def main():
    vec = load()
    a = mean(vec, OPTIONS["A"])
    for name in "BCD":
        print(f"text_similarity(A, {name}) = {cos(a, mean(vec, OPTIONS[name])):.12f}")
    for name, words in OPTIONS.items():
        best = max(
            (cos(vec[s], vec[w]), w) for s in STEM for w in words if w != s and w in vec
        )
        print(f"association({name}) = {best[0]:.12f} via {best[1]}")


if __name__ == "__main__":
    main()
