"""The generation pipeline: nucleus extraction, parser re-ranking, fused greedy
selection, and segmentation-driven stopping.

Every step is deterministic.  Ties always break toward the ascending token
id so identical inputs reproduce byte-identical results, which the golden
and determinism tests rely on.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .core import GenerationConfig, Relation
from .discourse import DiscourseBackend
from .errors import EmptyPrompt, NoProperPrefix
from .lm import LmBackend
from .vocab import MARKER_SURFACES, Token

RECORD_SCHEMA = "relgen-record/v1"


@dataclass(frozen=True)
class NucleusSet:
    """Top tokens of one step's distribution, ordered by (probability desc, id asc)."""

    members: tuple[tuple[int, float], ...]

    @property
    def ids(self) -> list[int]:
        return [token_id for token_id, _ in self.members]

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([prob for _, prob in self.members], dtype=np.float64)

    def __len__(self) -> int:
        return len(self.members)


def nucleus(dist: np.ndarray, p: float, k: int) -> NucleusSet:
    """Smallest set of highest-probability tokens with mass >= p, capped at k members."""
    dist = np.asarray(dist, dtype=np.float64)
    ids = np.lexsort((np.arange(len(dist)), -dist))
    cumulative = 0.0
    cut = len(dist)
    for rank, token_id in enumerate(ids):
        cumulative += dist[token_id]
        if cumulative >= p:
            cut = rank + 1
            break
    cut = min(cut, k)
    members = tuple((int(i), float(dist[i])) for i in ids[:cut])
    return NucleusSet(members)


def retokenize(tokens: Sequence[Token], parser: DiscourseBackend) -> list[Token]:
    """Map LM tokens into the parser's vocabulary via detokenized text.

    One LM token may become several parser tokens (or none, for pure
    marker tokens).
    """
    text = " ".join(t.surface for t in tokens if t.surface and t.surface not in MARKER_SURFACES)
    if not text:
        return []
    return parser.tokenize(text)


def parser_scores(logits: np.ndarray, tau: float) -> np.ndarray:
    """Temperatured softmax over candidate logits, max-shifted for overflow safety.

    Candidates excluded from scoring carry -inf logits and receive score 0;
    if every candidate is excluded the scores fall back to uniform.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if logits.size == 0:
        raise ValueError("cannot score an empty candidate list")
    peak = np.max(logits)
    if not np.isfinite(peak):
        return np.full(logits.shape, 1.0 / logits.size)
    shifted = np.exp((logits - peak) / tau)
    return shifted / shifted.sum()


def fuse_select(nucleus_set: NucleusSet, scores: np.ndarray, alpha: float) -> int:
    """Greedy fusion: argmax of P(y)^(1-alpha) * score(y)^alpha over the nucleus.

    Computed in log space; returns the position of the winner within the
    nucleus.  Ties break toward the ascending token id, which is the
    nucleus member order.
    """
    probs = nucleus_set.probabilities
    scores = np.asarray(scores, dtype=np.float64)
    with np.errstate(divide="ignore"):
        if alpha == 0.0:
            fused = np.log(probs)
        elif alpha == 1.0:
            fused = np.log(scores)
        else:
            fused = (1.0 - alpha) * np.log(probs) + alpha * np.log(scores)
    return int(np.argmax(fused))


def should_stop(parser: DiscourseBackend, prompt_tokens: Sequence[Token],
                generated_tokens: Sequence[Token], prompt_edus: int) -> bool:
    """True once the combined sequence segments into more than prompt_edus + 1 units."""
    combined = list(prompt_tokens) + list(generated_tokens)
    return len(parser.segment(combined)) > prompt_edus + 1


def trim_output(parser: DiscourseBackend, prompt_tokens: Sequence[Token],
                generated_tokens: Sequence[Token]) -> str:
    """Drop the trailing partial unit: keep the smallest run of leading EDUs
    that properly contains the prompt, minus the prompt itself."""
    combined = list(prompt_tokens) + list(generated_tokens)
    segmentation = parser.segment(combined)
    boundary = len(prompt_tokens)
    for _, end in segmentation.spans:
        if end > boundary:
            return parser.detokenize(combined[boundary:end])
    raise NoProperPrefix("the prompt is the entire segmented sequence; nothing to keep")


class StopReason(enum.Enum):
    EDU_COMPLETE = "edu_complete"
    MAX_TOKENS = "max_tokens"
    PERIOD = "period"


@dataclass(frozen=True)
class StepRecord:
    """Diagnostics captured at one decoding step."""

    step: int
    nucleus_size: int
    parser_score_max: float
    parser_score_min: float
    chosen_token: Token
    chosen_lm_prob: float
    chosen_parser_score: float

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "nucleus_size": self.nucleus_size,
            "parser_score_max": self.parser_score_max,
            "parser_score_min": self.parser_score_min,
            "chosen_id": self.chosen_token.id,
            "chosen_surface": self.chosen_token.surface,
            "chosen_lm_prob": self.chosen_lm_prob,
            "chosen_parser_score": self.chosen_parser_score,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StepRecord":
        return cls(
            step=data["step"],
            nucleus_size=data["nucleus_size"],
            parser_score_max=data["parser_score_max"],
            parser_score_min=data["parser_score_min"],
            chosen_token=Token(data["chosen_id"], data["chosen_surface"]),
            chosen_lm_prob=data["chosen_lm_prob"],
            chosen_parser_score=data["chosen_parser_score"],
        )


@dataclass(frozen=True)
class GenerationResult:
    """Completion text plus the per-step trace of how it was produced."""

    completion_text: str
    completion_tokens: tuple[Token, ...]
    steps: tuple[StepRecord, ...]
    stop_reason: StopReason


def _ends_sentence(surface: str) -> bool:
    return surface.rstrip("\"')]}").endswith(".")


def generate(lm: LmBackend, parser: DiscourseBackend, prompt_text: str,
             relation: Relation, config: GenerationConfig | None = None) -> GenerationResult:
    """Generate one relation-controlled continuation of the prompt.

    Per step: take the LM's nucleus, re-tokenize each candidate to the
    parser vocabulary, score the candidates' fit to ``relation`` with a
    temperatured softmax over the parser logits, and pick the fused argmax.
    Generation ends when the segmenter finds a unit beyond the first new
    one (the trailing partial unit is trimmed off), or by force after
    ``max_new_tokens`` tokens or a sentence-final period (untrimmed).
    """
    if config is None:
        config = GenerationConfig()
    prompt_tokens = lm.encode(prompt_text)
    if not prompt_tokens:
        raise EmptyPrompt(f"prompt {prompt_text!r} tokenized to nothing")

    prompt_parser_tokens = retokenize(prompt_tokens, parser)
    prompt_edus = parser.count_edus(prompt_parser_tokens) if prompt_parser_tokens else 0

    generated: list[Token] = []
    generated_parser: list[Token] = []
    steps: list[StepRecord] = []

    for step in range(config.max_new_tokens):
        dist = lm.next_distribution(prompt_tokens, generated)
        nucleus_set = nucleus(dist, config.p, config.k)

        candidates = [lm.vocabulary.surface_of(token_id) for token_id in nucleus_set.ids]
        logits = np.full(len(candidates), -np.inf)
        for i, surface in enumerate(candidates):
            candidate_parser = retokenize([Token(nucleus_set.ids[i], surface)], parser)
            if not candidate_parser:
                continue  # nothing for the parser to score
            right = generated_parser + candidate_parser
            logits[i] = parser.relation_logits(prompt_parser_tokens, right)[relation.index]
        scores = parser_scores(logits, config.tau)

        winner = fuse_select(nucleus_set, scores, config.alpha)
        chosen_id, chosen_prob = nucleus_set.members[winner]
        chosen = Token(chosen_id, lm.vocabulary.surface_of(chosen_id))
        generated.append(chosen)
        generated_parser.extend(retokenize([chosen], parser))
        steps.append(StepRecord(
            step=step,
            nucleus_size=len(nucleus_set),
            parser_score_max=float(np.max(scores)),
            parser_score_min=float(np.min(scores)),
            chosen_token=chosen,
            chosen_lm_prob=chosen_prob,
            chosen_parser_score=float(scores[winner]),
        ))

        if generated_parser and should_stop(parser, prompt_parser_tokens, generated_parser, prompt_edus):
            completion = trim_output(parser, prompt_parser_tokens, generated_parser)
            return GenerationResult(completion, tuple(generated), tuple(steps), StopReason.EDU_COMPLETE)
        if config.stop_on_period and _ends_sentence(chosen.surface):
            return GenerationResult(lm.decode(generated), tuple(generated), tuple(steps), StopReason.PERIOD)

    return GenerationResult(lm.decode(generated), tuple(generated), tuple(steps), StopReason.MAX_TOKENS)


# --- record serialization ---------------------------------------------------


@dataclass(frozen=True)
class GenerationRecord:
    """One serialized generation: inputs, parameters, and the result."""

    prompt: str
    relation: str | None  # None marks the uncontrolled baseline
    config: GenerationConfig
    result: GenerationResult

    def to_dict(self) -> dict:
        return {
            "schema": RECORD_SCHEMA,
            "prompt": self.prompt,
            "relation": self.relation,
            "config": self.config.to_dict(),
            "completion": self.result.completion_text,
            "completion_ids": [t.id for t in self.result.completion_tokens],
            "completion_surfaces": [t.surface for t in self.result.completion_tokens],
            "stop_reason": self.result.stop_reason.value,
            "steps": [s.to_dict() for s in self.result.steps],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GenerationRecord":
        if data.get("schema") != RECORD_SCHEMA:
            raise ValueError(f"unsupported record schema {data.get('schema')!r}")
        tokens = tuple(
            Token(i, s) for i, s in zip(data["completion_ids"], data["completion_surfaces"])
        )
        result = GenerationResult(
            completion_text=data["completion"],
            completion_tokens=tokens,
            steps=tuple(StepRecord.from_dict(s) for s in data["steps"]),
            stop_reason=StopReason(data["stop_reason"]),
        )
        return cls(data["prompt"], data["relation"], GenerationConfig.from_dict(data["config"]), result)


def write_records(records: Iterable[GenerationRecord], handle: IO[str]) -> None:
    for record in records:
        handle.write(json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False,
                                separators=(",", ":")))
        handle.write("\n")


def read_records(handle: IO[str]) -> list[GenerationRecord]:
    return [GenerationRecord.from_dict(json.loads(line)) for line in handle if line.strip()]
