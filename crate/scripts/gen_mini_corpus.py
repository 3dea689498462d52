#!/usr/bin/env python3
"""Generate the synthetic mini-corpus fixtures under data/mini.

Sentences come from a small template grammar whose words carry UD tags, so the
same generator yields a raw corpus, a tagged treebank in CoNLL-U and a
WordPiece vocabulary that covers it. Output is deterministic for a given seed.

    python3 scripts/gen_mini_corpus.py [--out data/mini] [--seed 7]
"""

import argparse
import json
import random
from collections import Counter
from pathlib import Path

DET = ["the", "a", "this", "every", "some", "that"]
NOUN = ["lake", "river", "winter", "village", "farmer", "road", "bridge", "price", "market", "storm",
        "harvest", "council", "engine", "valley", "school", "city", "forest", "crop", "museum", "team",
        "ship", "station", "tower", "report", "law", "festival", "army", "mine", "garden", "library"]
PLURAL = {n: n + "s" for n in NOUN}
PLURAL.update({"city": "cities", "library": "libraries", "army": "armies", "ship": "ships"})
PROPN = [["Paris"], ["Berlin"], ["Smith"], ["Ada"], ["Oslo"], ["Mr.", "Brown"], ["Dr.", "Lee"],
         ["Prof.", "Okafor"], ["Lisbon"], ["Zürich"], ["Kraków"], ["St.", "Ives"]]
ADJ = ["cold", "warm", "large", "small", "old", "new", "quiet", "busy", "heavy", "narrow", "ancient",
       "popular", "famous", "dry", "wet", "rich", "poor", "strong", "frozen", "reflective", "expensive"]
ADV = ["very", "quite", "rarely", "often", "slowly", "quickly", "early", "later", "again", "soon", "mostly"]
INTENS = ["very", "quite", "more", "rather"]
VERB_T = ["built", "closed", "opened", "crossed", "damaged", "raised", "lowered", "visited", "reached",
          "flooded", "praised", "replaced", "sold", "moved", "repaired", "funded"]
VERB_I = ["froze", "grew", "fell", "rose", "failed", "collapsed", "improved", "declined", "expanded",
          "stopped", "flourished", "waited"]
VERB_BASE = ["build", "close", "open", "cross", "repair", "sell", "visit", "fund", "replace"]
VERB_WANT = ["wanted", "planned", "tried", "hoped"]
AUX_PAST = {"sg": "was", "pl": "were"}
PRON = {"sg": ["it", "he", "she"], "pl": ["they", "we"]}
ADP = ["in", "near", "across", "after", "before", "during", "from", "with", "on"]
CCONJ = ["and", "or"]
SCONJ_NEUTRAL = ["because", "while", "when", "if"]
YEARS = [str(y) for y in range(1890, 2021, 7)]
DECIMALS = ["3.5", "12.75", "0.8", "41.2"]

POSITIVE_ADV = ["therefore", "accordingly", "thus", "consequently", "hence", "thence", "thereupon",
                "therefrom", "whence", "wherefore"]
NEGATIVE_ADV = ["however", "nevertheless", "still"]


class Sentence:
    def __init__(self):
        self.toks = []

    def add(self, form, tag):
        self.toks.append((form, tag))
        return self

    def extend(self, pairs):
        self.toks.extend(pairs)
        return self

    def capitalized(self):
        form, tag = self.toks[0]
        if tag != "PROPN":
            self.toks[0] = (form[0].upper() + form[1:], tag)
        return self

    def text(self):
        out = ""
        for i, (form, _) in enumerate(self.toks):
            if i > 0 and form not in {",", ".", ";", "!", "?", ")"} and self.toks[i - 1][0] != "(":
                out += " "
            out += form
        return out


class Grammar:
    def __init__(self, rng):
        self.r = rng

    def pick(self, xs):
        return self.r.choice(xs)

    def noun_phrase(self):
        r = self.r
        number = "pl" if r.random() < 0.3 else "sg"
        if r.random() < 0.15:
            return [(w, "PROPN") for w in self.pick(PROPN)], "sg"
        if r.random() < 0.15:
            return [(self.pick(PRON[number]), "PRON")], number
        out = []
        det = self.pick(DET) if number == "sg" else self.pick(["the", "some", "many"])
        out.append((det, "ADJ" if det == "many" else "DET"))
        if r.random() < 0.4:
            out.append((self.pick(ADJ), "ADJ"))
        noun = self.pick(NOUN)
        out.append((PLURAL[noun] if number == "pl" else noun, "NOUN"))
        return out, number

    def object_phrase(self):
        out = [(self.pick(["the", "a", "this"]), "DET")]
        if self.r.random() < 0.3:
            out.append((self.pick(ADJ), "ADJ"))
        out.append((self.pick(NOUN), "NOUN"))
        return out

    def clause(self):
        r = self.r
        subj, number = self.noun_phrase()
        kind = r.randrange(7)
        out = list(subj)
        if kind == 0:
            out.append((self.pick(VERB_I), "VERB"))
            if r.random() < 0.5:
                out.append((self.pick(ADV), "ADV"))
        elif kind == 1:
            out.append((self.pick(VERB_T), "VERB"))
            out += self.object_phrase()
        elif kind == 2:
            out.append((AUX_PAST[number], "AUX"))
            if r.random() < 0.6:
                out.append((self.pick(INTENS), "ADV"))
            out.append((self.pick(ADJ), "ADJ"))
        elif kind == 3:
            out.append((AUX_PAST[number], "AUX"))
            out.append(("not", "PART"))
            out.append((self.pick(ADJ), "ADJ"))
        elif kind == 4:
            out.append((self.pick(VERB_T), "VERB"))
            out += self.object_phrase()
            out.append((self.pick(ADP), "ADP"))
            out += self.object_phrase()
        elif kind == 5:
            out.append((self.pick(VERB_I), "VERB"))
            out.append((self.pick(["in", "after", "before"]), "ADP"))
            out.append((self.pick(YEARS), "NUM"))
        else:
            out.append((self.pick(VERB_WANT), "VERB"))
            out.append(("to", "PART"))
            out.append((self.pick(VERB_BASE), "VERB"))
            out += self.object_phrase()
        if r.random() < 0.08:
            out += [("by", "ADP"), (self.pick(DECIMALS), "NUM"), ("percent", "NOUN")]
        return out

    # each builder returns a Sentence without the final period
    def positive(self):
        r, c = self.r, self.clause
        k = r.randrange(11)
        s = Sentence()
        if k == 0:
            s.extend(c()).add(",", "PUNCT").add(self.pick(["hence", "so", "thus"]), "ADV").extend(c())
        elif k == 1:
            s.extend(c()).add(";", "PUNCT").add(self.pick(POSITIVE_ADV), "ADV").add(",", "PUNCT").extend(c())
        elif k == 2:
            s.add(self.pick(POSITIVE_ADV), "ADV").add(",", "PUNCT").extend(c())
        elif k == 3:
            s.extend(c()).add(",", "PUNCT").add("and", "CCONJ").add("so", "ADV").extend(c())
        elif k == 4:
            s.add("since", "SCONJ").extend(c()).add(",", "PUNCT").extend(c())
        elif k == 5:
            s.extend([("for", "ADP"), ("this", "DET"), ("reason", "NOUN"), (",", "PUNCT")]).extend(c())
        elif k == 6:
            s.extend([("in", "ADP"), ("consequence", "NOUN"), (",", "PUNCT")]).extend(c())
        elif k == 7:
            s.extend(c()).extend([("on", "ADP"), ("account", "NOUN"), ("of", "ADP")]).extend(self.object_phrase())
        elif k == 8:
            s.extend(c()).extend([("on", "ADP"), ("the", "DET"), ("grounds", "NOUN"), ("that", "SCONJ")]).extend(c())
        elif k == 9:
            s.extend([("to", "ADP"), ("that", "DET"), ("end", "NOUN"), (",", "PUNCT")]).extend(c())
        else:
            s.extend(c()).add(",", "PUNCT").add("so", "ADV").extend(c())
        return s

    def negative(self):
        r, c = self.r, self.clause
        k = r.randrange(8)
        s = Sentence()
        if k == 0:
            s.extend(c()).add(",", "PUNCT").add("but", "CCONJ").extend(c())
        elif k == 1:
            s.add(self.pick(["although", "though"]), "SCONJ").extend(c()).add(",", "PUNCT").extend(c())
        elif k == 2:
            s.extend(c()).add(";", "PUNCT").add(self.pick(NEGATIVE_ADV), "ADV").add(",", "PUNCT").extend(c())
        elif k == 3:
            s.add(self.pick(NEGATIVE_ADV), "ADV").add(",", "PUNCT").extend(c())
        elif k == 4:
            s.extend([("on", "ADP"), ("the", "DET"), ("other", "ADJ"), ("hand", "NOUN"), (",", "PUNCT")]).extend(c())
        elif k == 5:
            s.extend(c()).add(",", "PUNCT").add("yet", "CCONJ").extend(c())
        elif k == 6:
            s.extend(c()).add(",", "PUNCT").add("but", "CCONJ").add("still", "ADV").extend(c())
        else:
            s.extend(c()).add(",", "PUNCT").extend([("though", "SCONJ")]).extend(c())
        return s

    def mixed(self):
        s = Sentence()
        if self.r.random() < 0.5:
            s.add("although", "SCONJ").extend(self.clause()).add(",", "PUNCT").extend(self.clause())
            s.add(",", "PUNCT").add("so", "ADV").extend(self.clause())
        else:
            s.add("since", "SCONJ").extend(self.clause()).add(",", "PUNCT").extend(self.clause())
            s.add(",", "PUNCT").add("but", "CCONJ").extend(self.clause())
        return s

    def neutral(self):
        r, c = self.r, self.clause
        k = r.randrange(4)
        s = Sentence()
        if k == 0:
            s.extend(c())
        elif k == 1:
            s.extend(c()).add(",", "PUNCT").add(self.pick(CCONJ), "CCONJ").extend(c())
        elif k == 2:
            s.extend(c()).add(self.pick(SCONJ_NEUTRAL), "SCONJ").extend(c())
        else:
            s.add(self.pick(SCONJ_NEUTRAL), "SCONJ").extend(c()).add(",", "PUNCT").extend(c())
        return s

    def short(self):
        noun = self.pick(NOUN)
        return Sentence().extend([("the", "DET"), (noun, "NOUN"), (self.pick(VERB_I), "VERB")])

    def sentence(self):
        u = self.r.random()
        if u < 0.33:
            s = self.positive()
        elif u < 0.73:
            s = self.negative()
        elif u < 0.78:
            s = self.mixed()
        elif u < 0.96:
            s = self.neutral()
        else:
            s = self.short()
        s.capitalized()
        end = "!" if self.r.random() < 0.03 else "."
        return s.add(end, "PUNCT")


# a fixed opening sentence so `inspect 0 0` has a known subject
SHOWCASE = Sentence().extend([
    ("The", "DET"), ("winter", "NOUN"), ("was", "AUX"), ("very", "ADV"), ("cold", "ADJ"), (",", "PUNCT"),
    ("hence", "ADV"), ("the", "DET"), ("lakes", "NOUN"), ("were", "AUX"), ("frozen", "ADJ"), ("and", "CCONJ"),
    ("more", "ADV"), ("reflective", "ADJ"), (".", "PUNCT"),
])

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
SUFFIXES = ["##s", "##es", "##ed", "##ing", "##ly", "##er", "##est", "##ion", "##al"]


def write_corpus(g, path, n_sentences):
    docs, sentences = [], [SHOWCASE]
    while len(sentences) < n_sentences:
        sentences.append(g.sentence())
    i, doc_id = 0, 0
    while i < len(sentences):
        n = g.r.randint(6, 12)
        chunk = sentences[i:i + n]
        paras, cur = [], []
        for s in chunk:
            cur.append(s.text())
            if g.r.random() < 0.25:
                paras.append(" ".join(cur))
                cur = []
        if cur:
            paras.append(" ".join(cur))
        docs.append({"id": doc_id, "title": f"Document {doc_id}", "text": "\n\n".join(paras)})
        doc_id += 1
        i += n
    with open(path, "w", encoding="utf-8") as f:
        for d in docs:
            f.write(json.dumps(d, ensure_ascii=False) + "\n")
    return sentences


def write_conllu(sentences, path):
    with open(path, "w", encoding="utf-8") as f:
        for k, s in enumerate(sentences):
            f.write(f"# sent_id = {k}\n# text = {s.text()}\n")
            for i, (form, tag) in enumerate(s.toks, 1):
                f.write(f"{i}\t{form}\t_\t{tag}\t_\t_\t_\t_\t_\t_\n")
            f.write("\n")


def write_vocab(sentences, path, rng):
    counts = Counter(form.lower() for s in sentences for form, _ in s.toks)
    chars = sorted({c for w in counts for c in w if c.isascii()})
    words = sorted(counts, key=lambda w: (-counts[w], w))
    # leave a tail of words to be spelled out of pieces
    whole = [w for i, w in enumerate(words) if i < 40 or rng.random() < 0.8]
    stems = sorted({w[:-1] for w in words if w.endswith("s") and len(w) > 3} | {w[:-2] for w in words if w.endswith("ed")})
    tokens = list(SPECIALS)
    seen = set(tokens)
    for t in chars + ["##" + c for c in chars] + SUFFIXES + sorted(whole) + stems:
        if t not in seen and t:
            seen.add(t)
            tokens.append(t)
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(tokens) + "\n")
    return len(tokens)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="data/mini")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--sentences", type=int, default=1000)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    corpus = write_corpus(Grammar(random.Random(args.seed)), out / "corpus.jsonl", args.sentences)
    tb = Grammar(random.Random(args.seed + 1))
    train = [tb.sentence() for _ in range(1500)]
    dev = [tb.sentence() for _ in range(300)]
    write_conllu(train, out / "treebank-train.conllu")
    write_conllu(dev, out / "treebank-dev.conllu")
    size = write_vocab(corpus + train, out / "vocab.txt", random.Random(args.seed + 2))
    print(f"{len(corpus)} corpus sentences, {len(train)}/{len(dev)} treebank sentences, vocab {size}")


if __name__ == "__main__":
    main()
