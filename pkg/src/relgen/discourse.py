"""Discourse-parser backends: relation attribution for a two-segment split, and EDU segmentation.

The desk-scale backend is a cue lexicon: each cue phrase found in the right
segment adds its weight to one relation's logit (full weight when the match
starts the segment, half weight elsewhere, so control concentrates on the
first generated tokens).  Segmentation opens a new unit after any
terminator token and before any boundary-cue token.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

import numpy as np

from .core import Relation, RelationTaxonomy
from .errors import EmptyInput, EmptySegment
from .vocab import Token, Vocabulary, WordTokenizer
from . import wire

RELATION_COUNT = wire.RELATION_LOGIT_COUNT

MID_SEGMENT_FACTOR = 0.5


@dataclass(frozen=True)
class Segmentation:
    """Contiguous, non-overlapping token spans covering the input exactly."""

    spans: tuple[tuple[int, int], ...]  # half-open (start, end) index ranges

    def __len__(self) -> int:
        return len(self.spans)

    def tokens_of(self, tokens: Sequence[Token], span_index: int) -> list[Token]:
        start, end = self.spans[span_index]
        return list(tokens[start:end])


class DiscourseBackend(ABC):
    """Contract shared by every discourse parser the decoder can drive."""

    vocabulary: Vocabulary

    @abstractmethod
    def tokenize(self, text: str) -> list[Token]:
        """Tokenize text into the parser's vocabulary."""

    @abstractmethod
    def detokenize(self, tokens: Sequence[Token]) -> str:
        ...

    @abstractmethod
    def relation_logits(self, left: Sequence[Token], right: Sequence[Token]) -> np.ndarray:
        """42 finite logits for the relation between the two segments."""

    @abstractmethod
    def segment(self, tokens: Sequence[Token]) -> Segmentation:
        """Split tokens into elementary discourse units."""

    def count_edus(self, tokens: Sequence[Token]) -> int:
        return len(self.segment(tokens))


@dataclass(frozen=True)
class CueEntry:
    phrase: tuple[str, ...]
    relation: Relation
    weight: float


class CueLexicon:
    """Cue phrases with relation weights, plus boundary-cue and terminator sets."""

    def __init__(self, entries: Sequence[CueEntry], boundary_cues: set[str], terminators: set[str]):
        for entry in entries:
            if not entry.phrase:
                raise ValueError("cue phrases must be non-empty")
            if not np.isfinite(entry.weight):
                raise ValueError(f"non-finite weight for cue {entry.phrase}")
        self.entries = list(entries)
        self.boundary_cues = set(boundary_cues)
        self.terminators = set(terminators)

    @classmethod
    def from_file(cls, path, taxonomy: RelationTaxonomy) -> "CueLexicon":
        with open(path, encoding="utf-8") as handle:
            return cls.from_lines(handle, taxonomy)

    @classmethod
    def from_lines(cls, lines, taxonomy: RelationTaxonomy) -> "CueLexicon":
        """Parse the TSV lexicon format.

        Header lines start with '!': ``!boundary`` and ``!terminators``
        declare tab-separated token sets.  Every other non-comment line is
        ``cue-phrase<TAB>relation-name<TAB>weight``.
        """
        entries: list[CueEntry] = []
        boundary: set[str] = set()
        terminators: set[str] = set()
        for raw in lines:
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if fields[0] == "!boundary":
                boundary.update(f.lower() for f in fields[1:] if f)
                continue
            if fields[0] == "!terminators":
                terminators.update(f for f in fields[1:] if f)
                continue
            if len(fields) != 3:
                raise ValueError(f"expected 3 tab-separated fields, got {line!r}")
            phrase = tuple(word.lower() for word in fields[0].split())
            relation = taxonomy.parse(fields[1])
            entries.append(CueEntry(phrase, relation, float(fields[2])))
        return cls(entries, boundary, terminators)

    @classmethod
    def default(cls, taxonomy: RelationTaxonomy | None = None) -> "CueLexicon":
        if taxonomy is None:
            taxonomy = RelationTaxonomy.default()
        text = resources.files("relgen.data").joinpath("lexicon.tsv").read_text("utf-8")
        return cls.from_lines(text.splitlines(), taxonomy)


class CueDiscourseBackend(DiscourseBackend):
    """Deterministic lexicon-driven stand-in for a neural discourse parser.

    The parser vocabulary is lowercased word-level; unknown words keep
    their (lowercased) surface so segmentation and detokenization stay
    lossless.
    """

    def __init__(self, lexicon: CueLexicon, taxonomy: RelationTaxonomy | None = None):
        if taxonomy is None:
            taxonomy = RelationTaxonomy.default()
        self.lexicon = lexicon
        self.taxonomy = taxonomy
        words: list[str] = ["<unk>"]
        seen = {"<unk>"}
        for entry in lexicon.entries:
            for word in entry.phrase:
                if word not in seen:
                    seen.add(word)
                    words.append(word)
        for word in sorted(lexicon.boundary_cues | lexicon.terminators):
            if word not in seen:
                seen.add(word)
                words.append(word)
        self.vocabulary = Vocabulary(words, unknown_id=0)
        self._tokenizer = WordTokenizer(self.vocabulary, lowercase=True)

    def tokenize(self, text: str) -> list[Token]:
        return self._tokenizer.tokenize(text)

    def detokenize(self, tokens: Sequence[Token]) -> str:
        return self._tokenizer.detokenize(tokens)

    def relation_logits(self, left: Sequence[Token], right: Sequence[Token]) -> np.ndarray:
        if not left or not right:
            raise EmptySegment("relation attribution needs two non-empty segments")
        surfaces = [t.surface for t in right]
        logits = np.zeros(RELATION_COUNT, dtype=np.float64)
        for entry in self.lexicon.entries:
            width = len(entry.phrase)
            for start in range(0, len(surfaces) - width + 1):
                if tuple(surfaces[start:start + width]) == entry.phrase:
                    factor = 1.0 if start == 0 else MID_SEGMENT_FACTOR
                    logits[entry.relation.index] += factor * entry.weight
        return logits

    def segment(self, tokens: Sequence[Token]) -> Segmentation:
        if not tokens:
            raise EmptyInput("cannot segment an empty token sequence")
        starts = [0]
        for i in range(1, len(tokens)):
            after_terminator = tokens[i - 1].surface in self.lexicon.terminators
            before_boundary = tokens[i].surface in self.lexicon.boundary_cues
            if after_terminator or before_boundary:
                starts.append(i)
        spans = tuple(
            (start, end) for start, end in zip(starts, starts[1:] + [len(tokens)])
        )
        return Segmentation(spans)


class RemoteDiscourseBackend(DiscourseBackend):
    """Wire-protocol client for a served discourse parser.

    Segments and relation pairs travel as plain text; token sequences are
    re-assembled locally, so the client keeps a word-level tokenizer whose
    vocabulary is open (every word maps to the unknown id, surfaces are
    preserved).
    """

    def __init__(self, endpoint: str | None = None, timeout: float = 30.0, client=None):
        if client is None:
            if endpoint is None:
                raise ValueError("either an endpoint or a client is required")
            client = wire.WireClient(endpoint, timeout=timeout)
        self._client = client
        wire.check_envelope(self._client.health())
        self.vocabulary = Vocabulary(["<unk>"], unknown_id=0)
        self._tokenizer = WordTokenizer(self.vocabulary, lowercase=True)

    def tokenize(self, text: str) -> list[Token]:
        return self._tokenizer.tokenize(text)

    def detokenize(self, tokens: Sequence[Token]) -> str:
        return self._tokenizer.detokenize(tokens)

    def relation_logits(self, left: Sequence[Token], right: Sequence[Token]) -> np.ndarray:
        if not left or not right:
            raise EmptySegment("relation attribution needs two non-empty segments")
        payload = self._client.post(
            "/parser/relation",
            {"left": self.detokenize(left), "right": self.detokenize(right)},
        )
        return np.asarray(wire.parse_relation_logits(payload), dtype=np.float64)

    def segment(self, tokens: Sequence[Token]) -> Segmentation:
        if not tokens:
            raise EmptyInput("cannot segment an empty token sequence")
        text = self.detokenize(tokens)
        payload = self._client.post("/parser/segment", {"text": text})
        offsets = wire.parse_segment_boundaries(payload, len(text))
        return self._spans_from_offsets(tokens, offsets)

    @staticmethod
    def _spans_from_offsets(tokens: Sequence[Token], offsets: list[int]) -> Segmentation:
        # Assign each token to the first span whose character end-offset
        # reaches the token's end; guarantees contiguous exact cover even
        # if the server cuts mid-token.
        ends = []
        position = 0
        for i, token in enumerate(tokens):
            if i > 0:
                position += 1  # joining space
            position += len(token.surface)
            ends.append(position)
        starts = [0]
        token_index = 0
        for offset in offsets[:-1]:
            while token_index < len(ends) and ends[token_index] <= offset:
                token_index += 1
            if 0 < token_index < len(tokens) and token_index != starts[-1]:
                starts.append(token_index)
        spans = tuple((s, e) for s, e in zip(starts, starts[1:] + [len(tokens)]))
        return Segmentation(spans)
