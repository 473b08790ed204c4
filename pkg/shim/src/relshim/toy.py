"""Deterministic desk-scale backends for tests and fixture recording.

These stand in for the real models so the service (and its clients) can be
exercised without weights: a tiny smoothed bigram over an embedded corpus,
and a first-word keyword parser over the canonical relation table.
"""

import re

from .protocol import RELATION_COUNT, RELATION_TABLE

_WORD_RE = re.compile(r"\w+(?:['’-]\w+)*|[^\w\s]", re.UNICODE)

TOY_CORPUS = [
    "the cat sat on the mat .",
    "the cat ran after the dog .",
    "a dog sat by the door .",
    "the dog barked because the cat ran .",
    "the cat slept and the dog watched .",
]

_SMOOTHING = 0.1


def _words(text):
    return [w.lower() for w in _WORD_RE.findall(text)]


class ToyLm:
    """Add-0.1 bigram over the embedded corpus; <eos> bounds each line."""

    name = "toy-bigram"

    def __init__(self, corpus=TOY_CORPUS):
        self.entries = ["<unk>", "<eos>"]
        for line in corpus:
            for word in _words(line):
                if word not in self.entries:
                    self.entries.append(word)
        self.unknown_id = 0
        index = {w: i for i, w in enumerate(self.entries)}
        eos = index["<eos>"]
        self._pairs = {}
        for line in corpus:
            ids = [eos] + [index[w] for w in _words(line)] + [eos]
            for a, b in zip(ids, ids[1:]):
                self._pairs.setdefault(a, {}).setdefault(b, 0)
                self._pairs[a][b] += 1
        self._eos = eos
        self._index = index

    def encode(self, text):
        return [self._index.get(w, self.unknown_id) for w in _words(text)]

    def next_pairs(self, prompt_ids, generated_ids, top_n):
        """Sparse top-N of P(next | last token), plus the remainder mass."""
        history = list(prompt_ids) + list(generated_ids)
        context = history[-1] if history else self._eos
        row = self._pairs.get(context, {})
        total = sum(row.values()) + _SMOOTHING * len(self.entries)
        probs = [(i, (row.get(i, 0) + _SMOOTHING) / total) for i in range(len(self.entries))]
        probs.sort(key=lambda pair: (-pair[1], pair[0]))
        kept = probs[:top_n]
        rest = 1.0 - sum(p for _, p in kept)
        return kept, max(rest, 0.0)


class ToyParser:
    """Keyword attribution and punctuation/cue segmentation."""

    name = "toy-cues"

    KEYWORDS = {
        "because": ("Cause_NS", 4.0),
        "if": ("Condition_NS", 4.0),
        "but": ("Contrast_NN", 4.0),
        "instead": ("Contrast_NN", 4.0),
        "which": ("Elaboration_NS", 4.0),
        "and": ("Joint_NN", 4.0),
        "by": ("Manner-Means_NS", 4.0),
        "wonderful": ("Evaluation_NS", 4.0),
    }
    OPENERS = {"because", "but", "instead", "if", "which", "and", "by"}
    CLOSERS = {".", "!", "?"}

    def relation_logits(self, left, right):
        logits = [0.0] * RELATION_COUNT
        for position, word in enumerate(_words(right)):
            hit = self.KEYWORDS.get(word)
            if hit:
                name, weight = hit
                logits[RELATION_TABLE.index(name)] += weight if position == 0 else weight / 2.0
        return logits

    def segment(self, text):
        """Character end-offsets of the units; always covers the text."""
        boundaries = []
        token_spans = [m.span() for m in _WORD_RE.finditer(text)]
        for i in range(1, len(token_spans)):
            previous = text[slice(*token_spans[i - 1])].lower()
            current = text[slice(*token_spans[i])].lower()
            if previous in self.CLOSERS or current in self.OPENERS:
                boundaries.append(token_spans[i][0])
        # breaks fall before the opener; emit end-offsets instead
        ends = [b for b in boundaries] + [len(text)]
        deduped = sorted(set(e for e in ends if e > 0))
        if deduped[-1] != len(text):
            deduped.append(len(text))
        return deduped
