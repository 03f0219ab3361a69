#!/usr/bin/env python3
"""Generates the synthetic fixture corpus.

Sentences are built from templates as constituency trees with matching
lemmas, UPOS tags and dependency arcs. Every complement construction the
generator emits is recorded as ground truth, so the extraction output can be
checked against positions known by construction.

    python3 tools/gen_synthetic.py fixtures/synthetic_corpus.jsonl \
        fixtures/synthetic_constructions.jsonl
"""

import json
import math
import random
import sys

SEED = 7
N_SENTENCES = 420


class Tok:
    def __init__(self, tag, word, lemma, upos, rel):
        self.tag, self.word, self.lemma, self.upos, self.rel = tag, word, lemma, upos, rel
        self.head = None
        self.index = None


def node(label, *children):
    return (label, [c for c in children if c is not None])


def leaves(tree):
    if isinstance(tree, Tok):
        return [tree]
    out = []
    for c in tree[1]:
        out.extend(leaves(c))
    return out


def bracket(tree):
    if isinstance(tree, Tok):
        w = tree.word.replace("(", "-LRB-").replace(")", "-RRB-")
        return f"({tree.tag} {w})"
    return "(" + tree[0] + " " + " ".join(bracket(c) for c in tree[1]) + ")"


def attach(dep, head, rel=None):
    dep.head = head
    if rel:
        dep.rel = rel
    return dep


PRONOUNS = [
    # word, lemma, person/number key for agreement
    ("I", "I", "1s"), ("you", "you", "2"), ("we", "we", "pl"), ("they", "they", "pl"),
    ("he", "he", "3s"), ("she", "she", "3s"), ("it", "it", "3s"),
]
NOUNS = [("game", "3s"), ("plan", "3s"), ("guy", "3s"), ("office", "3s"), ("kids", "pl"),
         ("neighbors", "pl"), ("price", "3s"), ("movie", "3s"), ("store", "3s"), ("rules", "pl")]
NAMES = ["Ann", "Bob", "Maria", "Tom"]
POSS = [("my", "my"), ("his", "his"), ("their", "their")]
KIN = [("brother", "3s"), ("mom", "3s"), ("boss", "3s"), ("friends", "pl"), ("daughter", "3s")]

# lemma, 3sg present, base/non-3sg present, past; relative weight
MAIN_VERBS = [
    ("think", "thinks", "think", "thought", 40),
    ("say", "says", "say", "said", 14),
    ("know", "knows", "know", "knew", 12),
    ("guess", "guesses", "guess", "guessed", 6),
    ("believe", "believes", "believe", "believed", 6),
    ("realize", "realizes", "realize", "realized", 5),
    ("hope", "hopes", "hope", "hoped", 5),
    ("feel", "feels", "feel", "felt", 4),
    ("mention", "mentions", "mention", "mentioned", 3),
    ("admit", "admits", "admit", "admitted", 3),
    ("suggest", "suggests", "suggest", "suggested", 2),
]
# base-rate shift of "that" per lemma (positive = more explicit)
LEMMA_BIAS = {"think": -1.0, "guess": -1.2, "hope": -0.4, "feel": -0.3, "say": 0.0,
              "know": 0.2, "believe": 0.4, "realize": 0.5, "mention": 0.9, "admit": 1.0,
              "suggest": 1.1}

SC_VERBS = [
    # lemma, past, transitive objects allowed
    ("lose", "lost", True), ("win", "won", True), ("like", "liked", True),
    ("see", "saw", True), ("leave", "left", False), ("call", "called", True),
    ("break", "broke", True), ("change", "changed", True),
]
ADJS = ["fine", "wrong", "tired", "happy", "late", "ready", "serious", "right"]


def pick_weighted(rng, items, weight):
    total = sum(weight(i) for i in items)
    r = rng.uniform(0, total)
    for i in items:
        r -= weight(i)
        if r <= 0:
            return i
    return items[-1]


def subject_np(rng, allow_there=False, allow_that_det=True):
    """Returns (np_tree, head_tok, agreement, is_pronoun, all_toks)."""
    r = rng.random()
    if allow_there and r < 0.08:
        t = Tok("EX", "there", "there", "PRON", "expl")
        return node("NP", t), t, "there", True
    if r < 0.55:
        w, lemma, agr = rng.choice(PRONOUNS)
        t = Tok("PRP", w, lemma, "PRON", "nsubj")
        return node("NP", t), t, agr, True
    if r < 0.65:
        name = rng.choice(NAMES)
        t = Tok("NNP", name, name, "PROPN", "nsubj")
        return node("NP", t), t, "3s", False
    if r < 0.85:
        det_word = rng.choice(["the", "this"] + (["that"] if allow_that_det else []))
        noun, agr = rng.choice(NOUNS)
        if agr == "pl" and det_word in ("this", "that"):
            det_word = "the"
        d = Tok("DT", det_word, det_word, "DET", "det")
        n = Tok("NNS" if agr == "pl" else "NN", noun, noun.rstrip("s") if agr == "pl" else noun,
                "NOUN", "nsubj")
        attach(d, n)
        return node("NP", d, n), n, agr, False
    (pw, pl), (noun, agr) = rng.choice(POSS), rng.choice(KIN)
    p = Tok("PRP$", pw, pl, "PRON", "poss")
    n = Tok("NNS" if agr == "pl" else "NN", noun, noun.rstrip("s") if agr == "pl" else noun,
            "NOUN", "nsubj")
    attach(p, n)
    return node("NP", p, n), n, agr, False


def be_form(agr, past):
    if past:
        return "was" if agr in ("1s", "3s") else "were"
    return {"1s": "am", "3s": "is"}.get(agr, "are")


def object_np(rng, head):
    r = rng.random()
    if r < 0.3:
        w = rng.choice(["him", "her", "them", "it"])
        t = attach(Tok("PRP", w, {"him": "he", "her": "she", "them": "they"}.get(w, w), "PRON", "dobj"), head)
        return node("NP", t)
    det_word = rng.choice(["the", "a", "that", "my"])
    noun, agr = rng.choice(NOUNS)
    if agr == "pl" and det_word in ("a", "that"):
        det_word = "the"
    tag = "PRP$" if det_word == "my" else "DT"
    d = Tok(tag, det_word, det_word, "PRON" if tag == "PRP$" else "DET", "poss" if tag == "PRP$" else "det")
    n = attach(Tok("NNS" if agr == "pl" else "NN", noun, noun.rstrip("s") if agr == "pl" else noun, "NOUN", "dobj"), head)
    attach(d, n)
    return node("NP", d, n)


def pp(rng, head):
    prep = rng.choice(["at", "with", "after", "before"])
    p = attach(Tok("IN", prep, prep, "ADP", "prep"), head)
    obj = rng.choice([("the", "office"), ("the", "game"), ("the", "party"), ("my", "brother")])
    d = Tok("PRP$" if obj[0] == "my" else "DT", obj[0], obj[0], "PRON" if obj[0] == "my" else "DET",
            "poss" if obj[0] == "my" else "det")
    n = attach(Tok("NN", obj[1], obj[1], "NOUN", "pobj"), p)
    attach(d, n)
    return node("PP", p, node("NP", d, n))


def sub_clause(rng, depth):
    """A finite clause. Returns (tree, head_verb_tok, nested) where nested
    lists inner constructions as (main_verb_tok, explicit, that_tok, clause)."""
    np_tree, subj, agr, _ = subject_np(rng, allow_there=True, allow_that_det=False)
    nested = []
    r = rng.random()
    if agr == "there":
        v = Tok("VBZ" if rng.random() < 0.7 else "VBD", "", "be", "VERB", "ccomp")
        v.word = "is" if v.tag == "VBZ" else "was"
        noun, _ = rng.choice([n for n in NOUNS if n[1] == "3s"])
        d = Tok("DT", "a", "a", "DET", "det")
        n = attach(Tok("NN", noun, noun, "NOUN", "attr"), v)
        attach(d, n)
        attach(subj, v)
        tree = node("S", np_tree, node("VP", v, node("NP", d, n), pp(rng, v) if rng.random() < 0.3 else None))
        return tree, v, nested
    if depth == 0 and r < 0.1:
        # nested reporting clause: "... you know [that] he left"
        lemma, s3, base, past, _ = pick_weighted(rng, MAIN_VERBS, lambda m: m[4])
        use_past = rng.random() < 0.5
        word = past if use_past else (s3 if agr == "3s" else base)
        tag = "VBD" if use_past else ("VBZ" if agr == "3s" else "VBP")
        v = Tok(tag, word, lemma, "VERB", "ccomp")
        attach(subj, v)
        inner, inner_head, inner_nested = sub_clause(rng, depth + 1)
        explicit = rng.random() < 0.5
        attach(inner_head, v, "ccomp")
        clause, that = complement(rng, inner, inner_head, explicit)
        nested.append((v, explicit, that, inner))
        nested.extend(inner_nested)
        return node("S", np_tree, node("VP", v, clause)), v, nested
    if r < 0.35:
        past = rng.random() < 0.6
        v = Tok("VBD" if past else ("VBZ" if agr == "3s" else "VBP"), be_form(agr, past), "be", "AUX", "ccomp")
        adv = Tok("RB", "really", "really", "ADV", "advmod") if rng.random() < 0.2 else None
        a = attach(Tok("JJ", rng.choice(ADJS), None, "ADJ", "acomp"), v)
        a.lemma = a.word
        if adv:
            attach(adv, a)
        attach(subj, v)
        tree = node("S", np_tree, node("VP", v, node("ADJP", adv, a), pp(rng, v) if rng.random() < 0.25 else None))
        return tree, v, nested
    if r < 0.5:
        m = Tok("MD", rng.choice(["will", "should", "could", "might"]), None, "AUX", "aux")
        m.lemma = m.word
        lemma, _, trans = rng.choice(SC_VERBS)
        v = Tok("VB", lemma, lemma, "VERB", "ccomp")
        attach(m, v)
        attach(subj, v)
        obj = object_np(rng, v) if trans and rng.random() < 0.7 else None
        tree = node("S", np_tree, node("VP", m, node("VP", v, obj, pp(rng, v) if rng.random() < 0.3 else None)))
        return tree, v, nested
    lemma, past, trans = rng.choice(SC_VERBS)
    v = Tok("VBD", past, lemma, "VERB", "ccomp")
    attach(subj, v)
    obj = object_np(rng, v) if trans and rng.random() < 0.8 else None
    extra = pp(rng, v) if rng.random() < 0.4 else None
    return node("S", np_tree, node("VP", v, obj, extra)), v, nested


def complement(rng, clause, clause_head, explicit):
    if explicit:
        that = attach(Tok("IN", "that", "that", "SCONJ", "mark"), clause_head)
        return node("SBAR", that, clause), that
    if rng.random() < 0.7:
        return node("SBAR", clause), None
    return clause, None


def logistic(x):
    return 1.0 / (1.0 + math.exp(-x))


def construction_sentence(rng):
    lemma, s3, base, past, _ = pick_weighted(rng, MAIN_VERBS, lambda m: m[4])
    form = rng.random()
    pre = []
    if form < 0.15:
        # question: do you think ...
        do = Tok("VBP", "do", "do", "AUX", "aux")
        you = Tok("PRP", "you", "you", "PRON", "nsubj")
        v = Tok("VB", base, lemma, "VERB", "ROOT")
        attach(do, v)
        attach(you, v)
        mc_nodes = [do, node("NP", you)]
        label = "SQ"
        final = "?"
    else:
        np_tree, subj, agr, _ = subject_np(rng, allow_that_det=False)
        use_past = rng.random() < 0.4
        word = past if use_past else (s3 if agr == "3s" else base)
        tag = "VBD" if use_past else ("VBZ" if agr == "3s" else "VBP")
        v = Tok(tag, word, lemma, "VERB", "ROOT")
        subj.rel = "nsubj"
        attach(subj, v)
        mc_nodes = [np_tree]
        label = "S"
        final = "."
        if rng.random() < 0.2:
            intj = attach(Tok("UH", rng.choice(["well", "honestly", "yeah"]), None, "INTJ", "intj"), v)
            intj.lemma = intj.word.lower()
            comma = attach(Tok(",", ",", ",", "PUNCT", "punct"), v)
            pre = [node("INTJ", intj), comma]
    adv = None
    if rng.random() < 0.15:
        adv = attach(Tok("RB", rng.choice(["always", "really", "honestly"]), None, "ADV", "advmod"), v)
        adv.lemma = adv.word

    clause, head, nested = sub_clause(rng, 0)
    attach(head, v, "ccomp")

    # choose the label from a noisy linear score so the data are not separable
    mc_toks = [t for part in pre + mc_nodes for t in leaves(part)] + ([adv] if adv else []) + [v]
    mc_len = sum(1 for t in mc_toks if not is_punct(t.word))
    sc_len = len(leaves(clause))
    score = -0.3 + 0.35 * (mc_len - 2) + 0.12 * (sc_len - 5) + LEMMA_BIAS[lemma] + rng.gauss(0, 1.0)
    explicit = rng.random() < logistic(score)
    comp, that = complement(rng, clause, head, explicit)

    vp = node("VP", node("ADVP", adv) if adv else None, v, comp)
    punct = attach(Tok(".", final, final, "PUNCT", "punct"), v)
    tree = node(label, *pre, *mc_nodes, vp, punct)
    constructions = [(v, explicit, that, clause)] + nested
    return tree, constructions


def filler_sentence(rng):
    kind = rng.randrange(6)
    if kind == 0:
        # demonstrative determiner: I have never been to that part of the city .
        i = Tok("PRP", "I", "I", "PRON", "nsubj")
        have = Tok("VBP", "have", "have", "AUX", "aux")
        never = Tok("RB", "never", "never", "ADV", "neg")
        been = Tok("VBN", "been", "be", "AUX", "ROOT")
        to = attach(Tok("TO", "to", "to", "ADP", "prep"), been)
        that = Tok("DT", "that", "that", "DET", "det")
        place = rng.choice(["part", "side", "corner"])
        part = attach(Tok("NN", place, place, "NOUN", "pobj"), to)
        attach(that, part)
        of = attach(Tok("IN", "of", "of", "ADP", "prep"), part)
        the = Tok("DT", "the", "the", "DET", "det")
        city = attach(Tok("NN", "city", "city", "NOUN", "pobj"), of)
        attach(the, city)
        for t in (i, have, never):
            attach(t, been)
        dot = attach(Tok(".", ".", ".", "PUNCT", "punct"), been)
        return node("S", node("NP", i), node("VP", have, node("ADVP", never), node("VP", been, node("PP", to, node("NP", node("NP", that, part), node("PP", of, node("NP", the, city)))))), dot)
    if kind == 1:
        # demonstrative pronoun: that is a great idea .
        that = Tok("DT", "that", "that", "PRON", "nsubj")
        is_ = Tok("VBZ", rng.choice(["is", "was"]), "be", "AUX", "ROOT")
        a = Tok("DT", "a", "a", "DET", "det")
        adj = Tok("JJ", rng.choice(["great", "terrible", "funny"]), None, "ADJ", "amod")
        adj.lemma = adj.word
        idea = attach(Tok("NN", rng.choice(["idea", "story", "question"]), None, "NOUN", "attr"), is_)
        idea.lemma = idea.word
        attach(a, idea)
        attach(adj, idea)
        attach(that, is_)
        dot = attach(Tok(".", ".", ".", "PUNCT", "punct"), is_)
        return node("S", node("NP", that), node("VP", is_, node("NP", a, adj, idea)), dot)
    if kind == 2:
        # relative pronoun: Ann is on the team that lost .
        name = rng.choice(NAMES)
        ann = Tok("NNP", name, name, "PROPN", "nsubj")
        is_ = Tok("VBZ", "is", "be", "AUX", "ROOT")
        on = attach(Tok("IN", "on", "on", "ADP", "prep"), is_)
        the = Tok("DT", "the", "the", "DET", "det")
        team = attach(Tok("NN", "team", "team", "NOUN", "pobj"), on)
        attach(the, team)
        that = Tok("WDT", "that", "that", "PRON", "nsubj")
        lemma, past, _ = rng.choice([v for v in SC_VERBS if v[0] in ("lose", "win", "leave")])
        v = attach(Tok("VBD", past, lemma, "VERB", "relcl"), team)
        attach(that, v)
        attach(ann, is_)
        dot = attach(Tok(".", ".", ".", "PUNCT", "punct"), is_)
        return node("S", node("NP", ann), node("VP", is_, node("PP", on, node("NP", node("NP", the, team), node("SBAR", node("WHNP", that), node("S", node("VP", v)))))), dot)
    if kind == 3:
        # non-finite complement: I want to go home before it gets dark .
        np_tree, subj, agr, _ = subject_np(rng, allow_that_det=False)
        want = Tok("VBD", "wanted", "want", "VERB", "ROOT")
        attach(subj, want)
        to = Tok("TO", "to", "to", "PART", "aux")
        go = attach(Tok("VB", "go", "go", "VERB", "xcomp"), want)
        attach(to, go)
        home = attach(Tok("RB", "home", "home", "ADV", "advmod"), go)
        before = Tok("IN", "before", "before", "SCONJ", "mark")
        it = Tok("PRP", "it", "it", "PRON", "nsubj")
        got = attach(Tok("VBD", "got", "get", "VERB", "advcl"), go)
        attach(before, got)
        attach(it, got)
        dark = attach(Tok("JJ", "dark", "dark", "ADJ", "acomp"), got)
        dot = attach(Tok(".", ".", ".", "PUNCT", "punct"), want)
        return node("S", np_tree, node("VP", want, node("S", node("VP", to, node("VP", go, node("ADVP", home), node("SBAR", before, node("S", node("NP", it), node("VP", got, node("ADJP", dark)))))))), dot)
    if kind == 4:
        # plain transitive clause
        np_tree, subj, agr, _ = subject_np(rng, allow_that_det=False)
        lemma, past, _ = rng.choice([v for v in SC_VERBS if v[2]])
        v = Tok("VBD", past, lemma, "VERB", "ROOT")
        attach(subj, v)
        obj = object_np(rng, v)
        extra = pp(rng, v)
        dot = attach(Tok(".", ".", ".", "PUNCT", "punct"), v)
        return node("S", np_tree, node("VP", v, obj, extra), dot)
    # wh-complement: I know what you did last summer .
    i = Tok("PRP", "I", "I", "PRON", "nsubj")
    know = Tok("VBP", "know", "know", "VERB", "ROOT")
    attach(i, know)
    what = Tok("WP", "what", "what", "PRON", "dobj")
    you = Tok("PRP", "you", "you", "PRON", "nsubj")
    did = attach(Tok("VBD", "did", "do", "VERB", "ccomp"), know)
    attach(what, did)
    attach(you, did)
    last = Tok("JJ", "last", "last", "ADJ", "amod")
    when = attach(Tok("NN", rng.choice(["summer", "week", "night"]), None, "NOUN", "npadvmod"), did)
    when.lemma = when.word
    attach(last, when)
    dot = attach(Tok(".", ".", ".", "PUNCT", "punct"), know)
    return node("S", node("NP", i), node("VP", know, node("SBAR", node("WHNP", what), node("S", node("NP", you), node("VP", did, node("NP", last, when))))), dot)


def is_punct(word):
    return all(not c.isalnum() for c in word)


def main(corpus_path, truth_path):
    rng = random.Random(SEED)
    records, truth = [], []
    for n in range(N_SENTENCES):
        sid = f"s{n:04d}"
        if rng.random() < 0.8:
            tree, cons = construction_sentence(rng)
        else:
            tree, cons = filler_sentence(rng), []
        toks = leaves(tree)
        for i, t in enumerate(toks):
            t.index = i
        words = [t.word for t in toks]
        word_count = sum(1 for w in words if not is_punct(w))
        records.append({
            "id": sid,
            "tokens": words,
            "lemmas": [t.lemma for t in toks],
            "pos": [t.upos for t in toks],
            "dep_head": [t.head.index if t.head is not None else -1 for t in toks],
            "dep_rel": [t.rel for t in toks],
            "parse": bracket(tree),
        })
        if not 5 <= word_count <= 50:
            continue
        found = []
        for verb, explicit, that, clause in cons:
            span = leaves(clause)
            onset, end = span[0].index, span[-1].index
            while end > onset and is_punct(words[end]):
                end -= 1
            subj = next((t.index for t in span
                         if t.rel.startswith("nsubj") and t.head is not None
                         and onset <= t.head.index <= end), None)
            found.append({
                "sentence_id": sid,
                "label": "EXPLICIT" if explicit else "IMPLICIT",
                "main_verb_index": verb.index,
                "main_verb_lemma": verb.lemma,
                "sconj_index": that.index if that is not None else None,
                "sc_onset_index": onset,
                "sc_end_index": end,
                "sc_subject_index": subj,
                "sentence_length": word_count,
            })
        truth.extend(sorted(found, key=lambda c: c["main_verb_index"]))

    with open(corpus_path, "w") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")
    with open(truth_path, "w") as f:
        for c in truth:
            f.write(json.dumps(c, separators=(",", ":")) + "\n")
    explicit = sum(c["label"] == "EXPLICIT" for c in truth)
    print(f"{len(records)} sentences, {len(truth)} constructions ({explicit} explicit)")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
