#!/usr/bin/env python3
"""The interchange formats: word2vec text embeddings and word-pair dictionaries.

Everything the CLI reads and writes goes through these two loaders, so this
doubles as a minimal end-to-end example of the library API on files.
"""
import io

import numpy as np

from xlmap.embedio import load_dictionary, load_embeddings, save_embeddings

# An embedding file: `count dim` header, then one `word v1 ... vdim` per line.
text = """4 3
the 0.1 0.2 0.3
of 0.4 0.5 0.6
cat -1 0 0.5
dog -0.9 0.1 0.4
"""
emb = load_embeddings(io.StringIO(text))
print(f"loaded {len(emb)} words, dim {emb.dim}; most frequent: {emb.words[0]!r}")

# Round trips preserve order and values exactly.
buf = io.StringIO()
save_embeddings(emb, buf)
again = load_embeddings(io.StringIO(buf.getvalue()))
assert again.words == emb.words
assert np.array_equal(again.vectors, emb.vectors)
print("save -> load round trip is exact")

# Duplicates keep the first (most frequent) occurrence; zero rows are dropped.
messy = "3 2\nword 1 0\nword 9 9\nghost 0 0\n"
import warnings
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    cleaned = load_embeddings(io.StringIO(messy))
print(f"messy file: kept {cleaned.words}, warning: {caught[0].message}")

# Dictionaries: one `source target` pair per line, tab or space separated.
gold = load_dictionary(io.StringIO("two\tdue\ntwo 2\nthree tre\ntwo due\n"))
print(f"{len(gold)} unique pairs; targets of 'two': "
      f"{sorted(gold.targets_by_source['two'])}")
