#!/usr/bin/env python3
"""Writes the caption-domain UPOS treebank used by the tagger tests.

The corpus is generated from templates over a lexicon that contains
NOUN/VERB, ADJ/ADV and DET/SCONJ/PRON ambiguous forms. The held-out slice
also draws from words that never occur in training, so accuracy there
depends on the suffix/context features rather than memorisation.

    python3 tests/tools/make_treebank.py tests/data/treebank
"""

import random
import sys
from pathlib import Path

SEED = 20240611

NOUNS = ["man", "woman", "dog", "cat", "boy", "girl", "car", "ball", "kitchen", "field", "guitar", "shirt",
         "table", "street", "baby", "horse", "chef", "player", "crowd", "stage", "bike", "river", "phone",
         "camera", "song", "game", "room", "road", "tree", "boat", "food", "hat", "team", "dancer"]
HELDOUT_NOUNS = ["tiger", "violin", "teacher", "bucket", "sofa", "monkey", "airplane", "lawn", "jacket"]
# Forms that are also verbs.
AMBIG_NOUNS = ["run", "walk", "dance", "cook", "play", "talk", "race", "jump", "swim"]
PLURAL = {"man": "men", "woman": "women", "baby": "babies", "boy": "boys", "girl": "girls", "dog": "dogs",
          "cat": "cats", "player": "players", "dancer": "dancers", "car": "cars", "horse": "horses",
          "tiger": "tigers", "teacher": "teachers", "monkey": "monkeys", "chef": "chefs"}
VERBS = ["run", "walk", "dance", "cook", "play", "talk", "race", "jump", "swim", "drive", "sing", "eat",
         "wear", "hold", "ride", "throw", "watch", "show", "explain", "fix", "climb", "open", "kick", "paint"]
HELDOUT_VERBS = ["juggle", "stir", "chase", "wash", "fold", "carry"]
ADJS = ["red", "small", "big", "young", "old", "blue", "green", "tall", "funny", "white", "black", "happy",
        "beautiful", "little", "loud", "dark", "wooden", "famous"]
HELDOUT_ADJS = ["shiny", "purple", "colorful", "enormous", "careful"]
ADVS = ["quickly", "slowly", "loudly", "happily", "together", "very", "really", "outside", "carefully"]
HELDOUT_ADVS = ["gently", "angrily", "eagerly"]
ADPS = ["in", "on", "at", "with", "near", "into", "under", "from", "of", "behind", "for"]
DETS = ["a", "the", "the", "a", "an", "this", "some", "two"]
PROPNS = ["Obama", "Messi", "Paris", "Minecraft", "Spongebob", "Taylor", "London", "Netflix"]
HELDOUT_PROPNS = ["Beyonce", "Tokyo", "Pikachu"]
NUMS = ["two", "three", "four", "five", "10", "2"]
PRONS = ["he", "she", "they", "it", "someone", "people", "we"]
SCONJS = ["while", "as", "because", "when", "after"]
CCONJS = ["and", "but", "or"]
INTJS = ["oh", "hey", "wow"]


def ing(verb):
    if verb in ("run", "swim"):
        return verb + verb[-1] + "ing"
    if verb.endswith("e") and verb not in ("see",):
        return verb[:-1] + "ing"
    return verb + "ing"


def third(verb):
    if verb.endswith(("sh", "ch", "x", "s")):
        return verb + "es"
    return verb + "s"


def plural(noun):
    return PLURAL.get(noun, noun + "s")


class Generator:
    def __init__(self, rng, heldout):
        self.rng = rng
        self.heldout = heldout

    def pick(self, base, extra, share=0.35):
        if self.heldout and extra and self.rng.random() < share:
            return self.rng.choice(extra)
        return self.rng.choice(base)

    def noun(self):
        if self.rng.random() < 0.2:
            return self.rng.choice(AMBIG_NOUNS)
        return self.pick(NOUNS, HELDOUT_NOUNS)

    def verb(self):
        return self.pick(VERBS, HELDOUT_VERBS)

    def adj(self):
        return self.pick(ADJS, HELDOUT_ADJS)

    def adv(self):
        return self.pick(ADVS, HELDOUT_ADVS)

    def propn(self):
        return self.pick(PROPNS, HELDOUT_PROPNS)

    def np(self, plural_ok=True):
        out = []
        det = self.rng.choice(DETS)
        if det == "two":
            out.append((det, "NUM"))
            if self.rng.random() < 0.4:
                out.append((self.adj(), "ADJ"))
            out.append((plural(self.noun()), "NOUN"))
            return out
        if det == "an":
            det = "a"
        out.append((det, "DET"))
        if self.rng.random() < 0.45:
            if self.rng.random() < 0.15:
                out.append(("very", "ADV"))
            out.append((self.adj(), "ADJ"))
        out.append((self.noun(), "NOUN"))
        return out

    def pp(self):
        return [(self.rng.choice(ADPS), "ADP")] + self.np()

    def subject(self):
        r = self.rng.random()
        if r < 0.65:
            return self.np()
        if r < 0.8:
            return [(self.propn(), "PROPN")]
        return [(self.rng.choice(PRONS), "PRON")]

    def progressive(self):
        out = []
        if self.rng.random() < 0.5:
            out.append((self.rng.choice(["is", "are"]), "AUX"))
        out.append((ing(self.verb()), "VERB"))
        if self.rng.random() < 0.7:
            out += self.np()
        if self.rng.random() < 0.5:
            out += self.pp()
        if self.rng.random() < 0.2:
            out.append((self.adv(), "ADV"))
        return out

    def simple(self):
        out = [(third(self.verb()), "VERB")]
        if self.rng.random() < 0.6:
            out += self.np()
        if self.rng.random() < 0.3:
            out.append((self.adv(), "ADV"))
        if self.rng.random() < 0.4:
            out += self.pp()
        return out

    def sentence(self):
        r = self.rng.random()
        if r < 0.35:
            out = self.subject() + self.progressive()
        elif r < 0.55:
            out = self.subject() + self.simple()
        elif r < 0.63:
            out = [("there", "PRON"), (self.rng.choice(["is", "are"]), "AUX")] + self.np() + \
                  [(ing(self.verb()), "VERB")] + self.pp()
        elif r < 0.71:
            out = self.subject() + [(third(self.rng.choice(["want", "start", "need"])), "VERB"),
                                    ("to", "PART"), (self.verb(), "VERB")] + self.np()
        elif r < 0.78:
            out = self.subject() + self.progressive() + [(self.rng.choice(SCONJS), "SCONJ")] + \
                  [(ing(self.verb()), "VERB")]
        elif r < 0.85:
            out = self.subject() + self.simple() + [(self.rng.choice(CCONJS), "CCONJ")] + self.simple()
        elif r < 0.9:
            out = [("a", "DET"), (self.rng.choice(["video", "clip", "scene"]), "NOUN"), ("of", "ADP")] + \
                  self.np() + [(ing(self.verb()), "VERB")]
        elif r < 0.94:
            out = self.subject() + [("is", "AUX"), ("not", "PART"), (ing(self.verb()), "VERB")] + self.np()
        elif r < 0.97:
            out = [(self.rng.choice(INTJS), "INTJ"), (",", "PUNCT")] + self.subject() + self.progressive()
        else:
            out = self.subject() + [(third(self.verb()), "VERB"), ("that", "SCONJ")] + self.subject() + \
                  self.simple()
        if self.rng.random() < 0.3:
            out.append((".", "PUNCT"))
        if self.rng.random() < 0.1:
            out[0] = (out[0][0].capitalize(), out[0][1])
        return out


def write_conllu(path, sentences, prefix):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for n, sent in enumerate(sentences, 1):
            f.write(f"# sent_id = {prefix}-{n:04d}\n")
            f.write("# text = " + " ".join(w for w, _ in sent) + "\n")
            for i, (word, tag) in enumerate(sent, 1):
                f.write(f"{i}\t{word}\t_\t{tag}\t_\t_\t_\t_\t_\t_\n")
            f.write("\n")


def build(count, rng, heldout, budget=None):
    gen = Generator(rng, heldout)
    out, tokens = [], 0
    while len(out) < count:
        sent = gen.sentence()
        if budget is not None and tokens + len(sent) > budget:
            break
        out.append(sent)
        tokens += len(sent)
    return out


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(SEED)
    train = build(10_000, rng, heldout=False, budget=8_000)
    heldout = build(200, rng, heldout=True)
    toy = build(47, random.Random(SEED + 1), heldout=False) + [
        [("the", "DET"), ("dog", "NOUN"), ("barks", "VERB")],
        [("a", "DET"), ("dog", "NOUN"), ("barks", "VERB"), ("at", "ADP"), ("the", "DET"), ("cat", "NOUN")],
        [("the", "DET"), ("old", "ADJ"), ("dog", "NOUN"), ("barks", "VERB"), ("loudly", "ADV")],
    ]
    write_conllu(out / "train.conllu", train, "train")
    write_conllu(out / "heldout.conllu", heldout, "heldout")
    write_conllu(out / "toy.conllu", toy, "toy")
    for name, data in (("train", train), ("heldout", heldout), ("toy", toy)):
        print(name, len(data), "sentences", sum(map(len, data)), "tokens")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/treebank")
