#!/usr/bin/env python3
"""Regenerate crates/core/data/{lexicon.tsv,dictionary.txt}.

Inputs are the data tables of two PyPI packages, unpacked (not imported):

    pip download lemminflect wordfreq msgpack --no-deps -d wheels/
    for w in wheels/*.whl; do python3 -m zipfile -e "$w" unpacked/; done
    PYTHONPATH=unpacked python3 tools/gen_lexicon.py unpacked

lexicon.tsv   form<TAB>pos:lemma[,pos:lemma...]   (pos in noun/verb/adj/adv)
dictionary.txt  one known lowercase word per line (spell-check guard)
"""
import csv
import gzip
import io
import os
import re
import sys

import msgpack

MAX_BUCKET = 640  # wordfreq centibel bucket; ~45k most frequent English words
ALPHA = re.compile(r"^[a-z][a-z'-]*[a-z]$|^[a-z]$")

# Readings the source tables get wrong. Replaces the generated entry.
OVERRIDES = {
    "tin": ["noun:tin", "verb:tin"],
    "tins": ["noun:tin", "verb:tin"],
}


def frequent_words(root):
    path = os.path.join(root, "wordfreq", "data", "large_en.msgpack.gz")
    data = msgpack.load(gzip.open(path), raw=False, strict_map_key=False)
    out = []
    for bucket, words in enumerate(data[1:]):
        if bucket > MAX_BUCKET:
            break
        out.extend(w for w in words if ALPHA.match(w))
    return out


def main(root):
    freq = frequent_words(root)
    known = set(freq)
    lemma_path = os.path.join(root, "lemminflect", "resources", "lemma_lu.csv.gz")
    entries = {}
    with gzip.open(lemma_path, "rt", encoding="utf-8") as fh:
        for form, pos, lemmas in csv.reader(fh):
            if pos == "aux":
                continue
            low = form.lower()
            if form != low or not ALPHA.match(low):
                continue
            lemma = lemmas.split("/")[0].lower()
            if low not in known and lemma not in known:
                continue
            entries.setdefault(low, [])
            tag = f"{pos}:{lemma}"
            if tag not in entries[low]:
                entries[low].append(tag)

    entries.update(OVERRIDES)
    out_dir = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "data")
    with open(os.path.join(out_dir, "lexicon.tsv"), "w", encoding="utf-8") as fh:
        for form in sorted(entries):
            fh.write(f"{form}\t{','.join(entries[form])}\n")
    words = sorted(known | set(entries))
    with open(os.path.join(out_dir, "dictionary.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(words) + "\n")
    print(f"lexicon: {len(entries)} forms, dictionary: {len(words)} words")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "unpacked")
