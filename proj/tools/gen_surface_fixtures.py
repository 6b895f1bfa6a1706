#!/usr/bin/env python3
"""Generate the surface-metric fixture corpus with the public sacrebleu scorer.

Run once; the output is committed under tests/fixtures/. Requires
sacrebleu==2.1.0 (the version named in the metric signatures).

    python3 tools/gen_surface_fixtures.py > tests/fixtures/surface_fixtures.jsonl
"""
import json
import random
import sys

import sacrebleu
from sacrebleu.metrics import BLEU, CHRF
from sacrebleu.tokenizers.tokenizer_13a import Tokenizer13a

assert sacrebleu.__version__ == "2.1.0", sacrebleu.__version__

BLEU_SCORER = BLEU(tokenize="13a", smooth_method="exp", effective_order=False,
                   lowercase=False)
CHRF_SCORER = CHRF(char_order=6, word_order=0, beta=2, whitespace=False,
                   eps_smoothing=False, lowercase=False)
TOKENIZER = Tokenizer13a()

WORDS = ("the cat sat on mat a dog ran in park is there any good jamaican food "
         "cambridge does have meal flight from boston to denver show me "
         "United Airlines cheapest fare Monday morning").split()
PUNCT = list(".,;:!?\"'()[]{}<>-/@#$%&*+=_~^`|\\")
CJK = list("剑桥有牙买加菜吗请告诉我最便宜的航班从北京到上海今天天气很好")
ARABIC = list("مرحبا بكم في المطعم")
EXOTIC_SPACE = ["　", " ", " ", "\t", " ", "\n"]

rng = random.Random(20221017)


def words(n):
    return " ".join(rng.choice(WORDS) for _ in range(n))


def perturb(text):
    toks = text.split()
    out = []
    for t in toks:
        r = rng.random()
        if r < 0.15:
            continue
        if r < 0.3:
            out.append(rng.choice(WORDS))
        else:
            out.append(t)
        if rng.random() < 0.1:
            out.append(rng.choice(WORDS))
    return " ".join(out) if out else rng.choice(WORDS)


def punct_text():
    parts = []
    for _ in range(rng.randint(2, 10)):
        w = rng.choice(WORDS)
        if rng.random() < 0.5:
            w = w + rng.choice(PUNCT)
        if rng.random() < 0.3:
            w = rng.choice(PUNCT) + w
        if rng.random() < 0.1:
            w = w + rng.choice(PUNCT) + rng.choice(PUNCT)
        parts.append(w)
    return " ".join(parts)


def digit_text():
    parts = []
    for _ in range(rng.randint(2, 8)):
        k = rng.random()
        if k < 0.25:
            parts.append(f"{rng.randint(0, 9999)}.{rng.randint(0, 99)}")
        elif k < 0.45:
            parts.append(f"{rng.randint(1, 999)},{rng.randint(100, 999)}")
        elif k < 0.6:
            parts.append(f"{rng.randint(0, 99)}-{rng.randint(0, 99)}")
        elif k < 0.7:
            parts.append(f"{rng.randint(0, 9)}.")
        elif k < 0.8:
            parts.append(f"${rng.randint(1, 500)}")
        else:
            parts.append(rng.choice(WORDS))
    return " ".join(parts)


def cjk_text():
    n = rng.randint(1, 14)
    s = "".join(rng.choice(CJK) for _ in range(n))
    if rng.random() < 0.4:
        s += rng.choice(["？", "。", "，", "！", "?", "."])
    if rng.random() < 0.3:
        s = s[: n // 2] + " " + s[n // 2:]
    return s


def cjk_perturb(text):
    chars = list(text)
    for i in range(len(chars)):
        if rng.random() < 0.25:
            chars[i] = rng.choice(CJK)
    return "".join(chars)


def tricky_text():
    pieces = [
        "a <skipped> b", "end-\nline", "multi\nline text", "&quot;quoted&quot;",
        "fish &amp; chips", "&lt;tag&gt;", "&amp;lt;", "state-of-the-art",
        "1-2-3", "x-1", "e.g., this", "...", "a..b", ",,", "3.14.15", "U.S.A.",
        "email@example.com", "C++ & C#", "50%", "(parenthetical)", "trailing   ",
        "tab\tseparated", "  leading", "emoji 😀 here", "naïve café", "Ünïcödé",
        "don't", "«guillemets»", "—em dash—", "x　y", "nb sp",
        "thin space", "trailing newline\n", "dash -\n", "1,000,000",
        ".5 and 5.", "a.1", "1.a", "1,a", "a,1", "9-", "-9", "&amp;amp;",
    ]
    k = rng.randint(1, 3)
    return " ".join(rng.choice(pieces) for _ in range(k))


def make_pair(category):
    if category == "identity":
        t = rng.choice([words(rng.randint(1, 12)), punct_text(), digit_text(), cjk_text()])
        return t, t
    if category == "empty_overlap":
        ref = words(rng.randint(1, 8))
        hyp = " ".join(rng.choice(CJK + ARABIC) for _ in range(rng.randint(1, 6)))
        if rng.random() < 0.5:
            hyp = "".join(rng.choice("xyzqjk") for _ in range(rng.randint(1, 3)))
        return hyp, ref
    if category == "partial_overlap":
        ref = words(rng.randint(1, 15))
        return perturb(ref), ref
    if category == "long_overlap":
        ref = words(rng.randint(8, 25))
        return perturb(ref), ref
    if category == "short":
        ref = words(rng.randint(1, 5))
        hyp = words(rng.randint(1, 3))
        return hyp, ref
    if category == "punctuation":
        ref = punct_text()
        hyp = perturb(ref) if rng.random() < 0.5 else punct_text()
        return hyp, ref
    if category == "digits":
        ref = digit_text()
        hyp = perturb(ref) if rng.random() < 0.6 else digit_text()
        return hyp, ref
    if category == "cjk":
        ref = cjk_text()
        hyp = cjk_perturb(ref)
        return hyp, ref
    if category == "tricky":
        ref = tricky_text()
        hyp = tricky_text() if rng.random() < 0.5 else ref + " " + tricky_text()
        return hyp, ref
    if category == "whitespace":
        ref = words(rng.randint(2, 8))
        hyp = "".join(c if c != " " else rng.choice(EXOTIC_SPACE + [" ", "  "]) for c in ref)
        return hyp, ref
    raise ValueError(category)


CATEGORIES = ["identity", "empty_overlap", "partial_overlap", "long_overlap", "short", "punctuation",
              "digits", "cjk", "tricky", "whitespace"]

HAND_PAIRS = [
    ("the cat sat on the mat", "the cat sat on the mat", "identity"),
    ("the the the the", "the cat", "hand"),
    ("abc", "abd", "hand"),
    ("abc", "abc", "identity"),
    ("hello, world", "hello world", "hand"),
    ("3.14", "3.14", "identity"),
    ("Does Cambridge have a good meal in Jamaica",
     "Is there any good Jamaican food in Cambridge", "hand"),
    ("a b c", "d e f", "empty_overlap"),
]


def main():
    out = sys.stdout
    rows = [(h, r, c) for h, r, c in HAND_PAIRS]
    for i in range(360):
        cat = CATEGORIES[i % len(CATEGORIES)]
        hyp, ref = make_pair(cat)
        if not "".join(ref.split()) or not TOKENIZER(ref.rstrip()).split():
            continue
        rows.append((hyp, ref, cat))
    for hyp, ref, cat in rows:
        bleu = BLEU_SCORER.sentence_score(hyp, [ref])
        chrf = CHRF_SCORER.sentence_score(hyp, [ref])
        rec = {
            "category": cat,
            "hypothesis": hyp,
            "reference": ref,
            "hyp_tokens": TOKENIZER(hyp).split(),
            "ref_tokens": TOKENIZER(ref).split(),
            "bleu": bleu.score,
            "bleu_bp": bleu.bp,
            "bleu_precisions": bleu.precisions,
            "chrf": chrf.score,
        }
        out.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
    sys.stderr.write(f"{len(rows)} pairs\n")
    sys.stderr.write("BLEU " + BLEU_SCORER.get_signature().format() + "\n")
    sys.stderr.write("chrF " + CHRF_SCORER.get_signature().format() + "\n")


if __name__ == "__main__":
    main()
