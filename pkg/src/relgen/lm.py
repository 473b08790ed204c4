"""Language-model backends: next-token distributions and sequence log-likelihoods.

The desk-scale backend is an add-delta smoothed word n-gram model, which is
deterministic and cheap enough for property tests.  The remote backend
speaks the wire protocol to a server wrapping a real neural model.
"""

from __future__ import annotations

import json
from abc import ABC, abstractmethod
from collections import Counter
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import EmptyContinuation, EmptyCorpus, MalformedResponse
from .vocab import EOS, MARKER_SURFACES, Token, Vocabulary, WordTokenizer, build_vocabulary, split_words
from . import wire

DISTRIBUTION_ATOL = 1e-9

MODEL_FORMAT = "relgen-ngram"
MODEL_FORMAT_VERSION = 1


class LmBackend(ABC):
    """Contract shared by every language model the decoder can drive."""

    vocabulary: Vocabulary

    @abstractmethod
    def encode(self, text: str) -> list[Token]:
        """Tokenize text into the model's vocabulary."""

    @abstractmethod
    def decode(self, tokens: Sequence[Token]) -> str:
        """Detokenize model tokens back to text."""

    @abstractmethod
    def next_distribution(self, prompt: Sequence[Token], generated: Sequence[Token]) -> np.ndarray:
        """Probability vector over the full vocabulary; sums to 1 within 1e-9."""

    def sequence_logprob(self, prompt: Sequence[Token], continuation: Sequence[Token]) -> float:
        """Chain-rule sum of per-step log-probabilities of the continuation."""
        if not continuation:
            raise EmptyContinuation("cannot score an empty continuation")
        total = 0.0
        history = list(prompt)
        for token in continuation:
            dist = self.next_distribution(history[: len(prompt)], history[len(prompt):])
            total += float(np.log(dist[token.id]))
            history.append(token)
        return total


class NgramModel(LmBackend):
    """Add-delta smoothed n-gram model over a word vocabulary.

    Contexts shorter than order-1 (including the very start of a line) are
    left-padded with the <eos> marker, which doubles as the end-of-line
    event, so every conditional distribution is well defined.
    """

    def __init__(self, order: int, delta: float, vocabulary: Vocabulary,
                 counts: dict[tuple[int, ...], Counter]):
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        if not delta > 0:
            raise ValueError(f"delta must be positive, got {delta}")
        self.order = order
        self.delta = delta
        self.vocabulary = vocabulary
        self._counts = counts
        self._context_totals = {ctx: sum(c.values()) for ctx, c in counts.items()}
        self._tokenizer = WordTokenizer(vocabulary)
        self._eos_id = vocabulary.id_of(EOS)

    def encode(self, text: str) -> list[Token]:
        return self._tokenizer.tokenize(text)

    def decode(self, tokens: Sequence[Token]) -> str:
        return self._tokenizer.detokenize(tokens)

    def _context_key(self, ids: Sequence[int]) -> tuple[int, ...]:
        width = self.order - 1
        if width == 0:
            return ()
        padded = [self._eos_id] * max(0, width - len(ids)) + list(ids[-width:] if width else [])
        return tuple(padded)

    def next_distribution(self, prompt: Sequence[Token], generated: Sequence[Token]) -> np.ndarray:
        ids = [t.id for t in prompt] + [t.id for t in generated]
        context = self._context_key(ids)
        size = len(self.vocabulary)
        dist = np.full(size, self.delta, dtype=np.float64)
        counter = self._counts.get(context)
        total = self.delta * size
        if counter is not None:
            for token_id, count in counter.items():
                dist[token_id] += count
            total += self._context_totals[context]
        dist /= total
        return dist

    # --- persistence ---------------------------------------------------

    def save(self, path) -> None:
        payload = {
            "format": MODEL_FORMAT,
            "version": MODEL_FORMAT_VERSION,
            "order": self.order,
            "delta": self.delta,
            "entries": self.vocabulary.entries,
            "unknown_id": self.vocabulary.unknown_id,
            "counts": {
                " ".join(map(str, ctx)): dict(sorted(counter.items()))
                for ctx, counter in sorted(self._counts.items())
            },
        }
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, sort_keys=True)
            handle.write("\n")

    @classmethod
    def load(cls, path) -> "NgramModel":
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
        if payload.get("format") != MODEL_FORMAT or payload.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"{path} is not a {MODEL_FORMAT} v{MODEL_FORMAT_VERSION} file")
        vocabulary = Vocabulary(payload["entries"], payload["unknown_id"])
        counts = {
            tuple(int(part) for part in key.split() if part): Counter(
                {int(token_id): count for token_id, count in counter.items()}
            )
            for key, counter in payload["counts"].items()
        }
        return cls(payload["order"], payload["delta"], vocabulary, counts)


def train_ngram(corpus: Iterable[str] | IO[str], order: int = 2, delta: float = 0.01) -> NgramModel:
    """Train an add-delta n-gram model from lines of text.

    The vocabulary is the corpus word set plus the <unk> and <eos> markers;
    counts never cross line boundaries.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    lines = [split_words(line) for line in corpus]
    lines = [words for words in lines if words]
    if not lines:
        raise EmptyCorpus("corpus contained no tokens")
    vocabulary = build_vocabulary(word for words in lines for word in words)
    eos_id = vocabulary.id_of(EOS)
    counts: dict[tuple[int, ...], Counter] = {}
    width = order - 1
    for words in lines:
        ids = [eos_id] * width + [vocabulary.id_of(w) for w in words] + [eos_id]
        for i in range(width, len(ids)):
            context = tuple(ids[i - width:i])
            counts.setdefault(context, Counter())[ids[i]] += 1
    return NgramModel(order, delta, vocabulary, counts)


class RemoteLmBackend(LmBackend):
    """Wire-protocol client presenting a served model through the LmBackend contract.

    The vocabulary is fetched once at construction; per-step distributions
    arrive as sparse top-N (id, probability) pairs with the remainder mass
    assigned to the vocabulary's unknown entry.
    """

    def __init__(self, endpoint: str | None = None, timeout: float = 30.0, top_n: int = 200,
                 client=None):
        if client is None:
            if endpoint is None:
                raise ValueError("either an endpoint or a client is required")
            client = wire.WireClient(endpoint, timeout=timeout)
        self._client = client
        wire.check_envelope(self._client.health())
        entries, unknown_id = wire.parse_vocabulary(self._client.get("/lm/vocab"))
        self.vocabulary = Vocabulary(entries, unknown_id)
        self.top_n = top_n

    def encode(self, text: str) -> list[Token]:
        ids = wire.parse_token_ids(self._client.post("/lm/encode", {"text": text}))
        try:
            return [Token(i, self.vocabulary.surface_of(i)) for i in ids]
        except IndexError:
            raise MalformedResponse("encode response contained an out-of-vocabulary id") from None

    def decode(self, tokens: Sequence[Token]) -> str:
        return " ".join(t.surface for t in tokens
                        if t.surface and t.surface not in MARKER_SURFACES)

    def next_distribution(self, prompt: Sequence[Token], generated: Sequence[Token]) -> np.ndarray:
        payload = self._client.post(
            "/lm/next",
            {
                "prompt_ids": [t.id for t in prompt],
                "generated_ids": [t.id for t in generated],
                "top_n": self.top_n,
            },
        )
        pairs, rest = wire.parse_sparse_distribution(payload)
        dist = np.zeros(len(self.vocabulary), dtype=np.float64)
        for token_id, prob in pairs:
            if token_id >= len(self.vocabulary):
                raise MalformedResponse(f"token id {token_id} outside the served vocabulary")
            dist[token_id] += prob
        dist[self.vocabulary.unknown_id] += rest
        total = dist.sum()
        if total <= 0:
            raise MalformedResponse("distribution carries no probability mass")
        return dist / total
