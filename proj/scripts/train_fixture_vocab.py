# SPDX-License-Identifier: Apache-2.0
"""Trains the small byte-level BPE vocabulary used by the test fixtures.

The output follows the GPT-2 interchange layout: vocab.json maps byte-level
token strings to ids, merges.txt lists ranked pairs after a version header,
and "<|endoftext|>" takes the last id.
"""
import glob
import json
import os
import sys

from tokenizers import Tokenizer, models, pre_tokenizers, trainers


def training_text(root):
    for path in sorted(glob.glob(os.path.join(root, "*.py"))):
        with open(path, encoding="utf-8", errors="replace") as f:
            yield f.read()


def main(out_dir, corpus_root, vocab_size=4000):
    tok = Tokenizer(models.BPE())
    tok.pre_tokenizer = pre_tokenizers.ByteLevel(add_prefix_space=False)
    trainer = trainers.BpeTrainer(
        vocab_size=vocab_size,
        initial_alphabet=pre_tokenizers.ByteLevel.alphabet(),
        show_progress=False,
    )
    tok.train_from_iterator(training_text(corpus_root), trainer)
    model = json.loads(tok.to_str())["model"]
    vocab = dict(model["vocab"])
    vocab["<|endoftext|>"] = len(vocab)
    merges = [m if isinstance(m, str) else " ".join(m) for m in model["merges"]]

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "vocab.json"), "w", encoding="utf-8") as f:
        json.dump(vocab, f, ensure_ascii=False)
    with open(os.path.join(out_dir, "merges.txt"), "w", encoding="utf-8") as f:
        f.write("#version: 0.2\n")
        for m in merges:
            f.write(m + "\n")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
