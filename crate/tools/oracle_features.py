#!/usr/bin/env python3
"""Reference feature table computed by direct counting.

Bigram model only (order 2, add-k, lowercased, rare words -> <unk>, sentence
end -> </s>). Written independently of the Rust implementation and used to
freeze the expected features for the fixture corpora.

    python3 tools/oracle_features.py CORPUS CONSTRUCTIONS OUT.csv [--lemma think]
"""

import argparse
import csv
import json
import math
from collections import Counter

K = 0.01
MIN_COUNT = 2
PUNCT = set("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~…“”‘’«»–—¿¡")


def is_punct(tok):
    return tok != "" and all(c in PUNCT for c in tok)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("corpus")
    ap.add_argument("constructions")
    ap.add_argument("out")
    ap.add_argument("--lemma")
    args = ap.parse_args()

    corpus = [json.loads(l) for l in open(args.corpus) if l.strip()]
    by_id = {r["id"]: r for r in corpus}
    cons = [json.loads(l) for l in open(args.constructions) if l.strip()]
    if args.lemma:
        cons = [c for c in cons if c["main_verb_lemma"].lower() == args.lemma.lower()]
    cons.sort(key=lambda c: (c["sentence_id"], c["main_verb_index"]))

    # vocabulary
    sents = [[t.lower() for t in r["tokens"]] for r in corpus]
    freq = Counter(w for s in sents for w in s)
    vocab = ["<unk>", "</s>"] + sorted(w for w, c in freq.items() if c >= MIN_COUNT and w not in ("<unk>", "</s>"))
    known = set(vocab)
    V = len(vocab)

    def norm(w):
        w = w.lower()
        return w if w in known else "<unk>"

    bigram = Counter()
    context = Counter()
    for s in sents:
        seq = ["<s>"] + [norm(w) for w in s] + ["</s>"]
        for a, b in zip(seq, seq[1:]):
            bigram[(a, b)] += 1
            context[a] += 1

    def prob(prev, w):
        c = norm(prev) if prev is not None else "<s>"
        total = context[c]
        if total == 0 and K == 0:
            return 1.0 / V
        return (bigram[(c, norm(w))] + K) / (total + K * V)

    def entropy(prev):
        c = norm(prev) if prev is not None else "<s>"
        total = context[c]
        h = 0.0
        for w in vocab:
            p = (bigram[(c, w)] + K) / (total + K * V)
            if p > 0:
                h -= p * math.log(p)
        return h

    # verb-lemma relative frequency over the whole corpus
    verb_counts = Counter()
    for r in corpus:
        for lemma, pos in zip(r["lemmas"], r["pos"]):
            if pos in ("VERB", "AUX") or pos.startswith("VB"):
                verb_counts[lemma.lower()] += 1
    verb_total = sum(verb_counts.values())

    rows = []
    for c in cons:
        s = by_id[c["sentence_id"]]
        toks = s["tokens"]
        mv, onset = c["main_verb_index"], c["sc_onset_index"]
        mc_length = sum(1 for t in toks[: mv + 1] if not is_punct(t))
        p_without = prob(toks[mv], toks[onset])
        p_with = prob("that", toks[onset])
        subj = c["sc_subject_index"]
        rows.append({
            "sentence_id": c["sentence_id"],
            "main_verb_index": mv,
            "main_verb_lemma": c["main_verb_lemma"],
            "mc_length": mc_length,
            "mc_verb_frequency": verb_counts[c["main_verb_lemma"].lower()] / verb_total,
            "sc_length": c["sc_end_index"] - onset + 1,
            "sc_subject_distance": None if subj is None else float(subj - onset + 1),
            "sc_subject_missing": "true" if subj is None else "false",
            "sc_onset_surprisal": -math.log(p_without + p_with),
            "sc_onset_entropy": entropy(toks[mv]),
            "label": 1 if c["label"] == "EXPLICIT" else 0,
        })
    observed = [r["sc_subject_distance"] for r in rows if r["sc_subject_distance"] is not None]
    fill = sum(observed) / len(observed) if observed else 1.0
    for r in rows:
        if r["sc_subject_distance"] is None:
            r["sc_subject_distance"] = fill

    with open(args.out, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0].keys()) if rows else [], lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    print(f"{len(rows)} rows, vocabulary {V}")


if __name__ == "__main__":
    main()
