"""Tokens, vocabularies, and the word-level tokenizers used by the desk backends.

Two vocabularies coexist in a running pipeline: the language model's V and
the parser's V'.  They are deliberately distinct instances (the parser side
lowercases), so every generation exercises the detokenize/retokenize path
between them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

UNK = "<unk>"
EOS = "<eos>"
MARKER_SURFACES = frozenset({UNK, EOS})

# Words keep internal apostrophes and hyphens; every other punctuation
# character becomes its own token.
_TOKEN_RE = re.compile(r"\w+(?:['’-]\w+)*|[^\w\s]", re.UNICODE)


@dataclass(frozen=True)
class Token:
    """A vocabulary id paired with the surface string it stands for."""

    id: int
    surface: str


class Vocabulary:
    """An ordered, immutable list of unique surface strings."""

    def __init__(self, entries: Sequence[str], unknown_id: int):
        entries = list(entries)
        if len(set(entries)) != len(entries):
            raise ValueError("vocabulary entries must be unique")
        if not 0 <= unknown_id < len(entries):
            raise ValueError(f"unknown_id {unknown_id} out of range for {len(entries)} entries")
        self._entries = entries
        self._index = {surface: i for i, surface in enumerate(entries)}
        self.unknown_id = unknown_id

    @property
    def entries(self) -> list[str]:
        return list(self._entries)

    def id_of(self, surface: str) -> int:
        return self._index.get(surface, self.unknown_id)

    def surface_of(self, token_id: int) -> str:
        return self._entries[token_id]

    def token(self, surface: str) -> Token:
        return Token(self.id_of(surface), surface)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, surface: str) -> bool:
        return surface in self._index


def split_words(text: str) -> list[str]:
    """Whitespace split with punctuation peeled into separate tokens."""
    return _TOKEN_RE.findall(text)


class WordTokenizer:
    """Maps text to Tokens of a fixed Vocabulary; unknown words keep their surface.

    With ``lowercase=True`` every surface is folded before lookup, which is
    the parser-side convention.
    """

    def __init__(self, vocabulary: Vocabulary, lowercase: bool = False):
        self.vocabulary = vocabulary
        self.lowercase = lowercase

    def tokenize(self, text: str) -> list[Token]:
        tokens = []
        for word in split_words(text):
            if self.lowercase:
                word = word.lower()
            tokens.append(Token(self.vocabulary.id_of(word), word))
        return tokens

    def detokenize(self, tokens: Iterable[Token]) -> str:
        """Space-joined surfaces; marker tokens contribute no text."""
        return " ".join(t.surface for t in tokens if t.surface not in MARKER_SURFACES)


def build_vocabulary(words: Iterable[str]) -> Vocabulary:
    """Vocabulary with reserved markers first, then words in first-seen order."""
    entries = [UNK, EOS]
    seen = set(entries)
    for word in words:
        if word not in seen:
            seen.add(word)
            entries.append(word)
    return Vocabulary(entries, unknown_id=0)
