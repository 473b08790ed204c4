"""Automatic evaluation: per-relation attribution accuracy and completion perplexity.

A completion counts as correct when two-segment relation attribution of
(prompt, completion) puts its argmax on the intended relation.  Perplexity
is the exponentiated mean negative log-likelihood of the completion under
the language model, conditioned on the prompt.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Relation, RelationTaxonomy
from .decoder import GenerationRecord
from .discourse import DiscourseBackend
from .errors import EmptyText, InconsistentBatch
from .lm import LmBackend

ALL_ROW = "All Relations"
BASELINE_ROW = "None"


def relation_correct(parser: DiscourseBackend, prompt_text: str, completion_text: str,
                     relation: Relation) -> bool:
    """True when the parser attributes the prompt/completion pair to ``relation``.

    Ties in the logit vector resolve to the lowest index, mirroring a plain
    argmax over the parser's output layer.
    """
    if not prompt_text.strip() or not completion_text.strip():
        raise EmptyText("both prompt and completion must be non-empty")
    left = parser.tokenize(prompt_text)
    right = parser.tokenize(completion_text)
    logits = parser.relation_logits(left, right)
    return int(np.argmax(logits)) == relation.index


def completion_perplexity(lm: LmBackend, prompt_text: str, completion_text: str) -> float:
    """exp(-logprob / T) of the completion's T tokens, conditioned on the prompt."""
    if not prompt_text.strip() or not completion_text.strip():
        raise EmptyText("both prompt and completion must be non-empty")
    prompt_tokens = lm.encode(prompt_text)
    completion_tokens = lm.encode(completion_text)
    logprob = lm.sequence_logprob(prompt_tokens, completion_tokens)
    return math.exp(-logprob / len(completion_tokens))


@dataclass(frozen=True)
class EvalRow:
    relation: str
    correct_percent: float | None  # None for the uncontrolled baseline
    mean_perplexity: float
    n: int


@dataclass(frozen=True)
class EvalReport:
    """Per-relation rows plus the aggregate and uncontrolled-baseline rows."""

    rows: tuple[EvalRow, ...]
    all_row: EvalRow
    baseline_row: EvalRow
    n_per_relation: int

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(["relation", "correct_percent", "mean_perplexity", "n"])
        for row in (*self.rows, self.all_row, self.baseline_row):
            percent = "" if row.correct_percent is None else f"{row.correct_percent:.1f}"
            writer.writerow([row.relation, percent, f"{row.mean_perplexity:.1f}", row.n])
        return buffer.getvalue()

    def to_text(self) -> str:
        lines = [f"{'Relation':<22} {'Correct%':>9} {'Perplexity':>11}"]
        for row in (*self.rows, self.all_row, self.baseline_row):
            percent = "-" if row.correct_percent is None else f"{row.correct_percent:.1f}"
            lines.append(f"{row.relation:<22} {percent:>9} {row.mean_perplexity:>11.1f}")
        return "\n".join(lines)


def _check_batch(records: Sequence[GenerationRecord]) -> tuple[list[str], list[str]]:
    prompts: list[str] = []
    relations: set[str] = set()
    coverage: dict[str, dict[str | None, int]] = {}
    for record in records:
        if record.prompt not in coverage:
            prompts.append(record.prompt)
            coverage[record.prompt] = {}
        coverage[record.prompt][record.relation] = coverage[record.prompt].get(record.relation, 0) + 1
        if record.relation is not None:
            relations.add(record.relation)
    expected: list[str | None] = sorted(relations) + [None]
    for prompt in prompts:
        for key in expected:
            if coverage[prompt].get(key, 0) != 1:
                label = key if key is not None else "the uncontrolled baseline"
                raise InconsistentBatch(
                    f"prompt {prompt!r} has {coverage[prompt].get(key, 0)} generations "
                    f"for {label}; expected exactly 1"
                )
        extra = set(coverage[prompt]) - set(expected)
        if extra:
            raise InconsistentBatch(f"prompt {prompt!r} carries unexpected relations {extra}")
    return prompts, sorted(relations)


def build_report(lm: LmBackend, parser: DiscourseBackend,
                 records: Sequence[GenerationRecord],
                 taxonomy: RelationTaxonomy | None = None) -> EvalReport:
    """Score a complete batch (every prompt x every relation, plus baselines)."""
    if taxonomy is None:
        taxonomy = RelationTaxonomy.default()
    prompts, relation_names = _check_batch(records)
    ordered = sorted(records, key=lambda r: (r.relation or "", r.prompt))

    per_relation: dict[str, list[tuple[bool, float]]] = {name: [] for name in relation_names}
    baseline_perplexities: list[float] = []
    for record in ordered:
        perplexity = completion_perplexity(lm, record.prompt, record.result.completion_text)
        if record.relation is None:
            baseline_perplexities.append(perplexity)
        else:
            relation = taxonomy.parse(record.relation)
            correct = relation_correct(parser, record.prompt, record.result.completion_text, relation)
            per_relation[record.relation].append((correct, perplexity))

    rows = []
    total_correct = 0
    total_n = 0
    all_perplexities: list[float] = []
    for name in relation_names:
        outcomes = per_relation[name]
        n_correct = sum(1 for correct, _ in outcomes if correct)
        perplexities = [p for _, p in outcomes]
        rows.append(EvalRow(name, 100.0 * n_correct / len(outcomes),
                            float(np.mean(perplexities)), len(outcomes)))
        total_correct += n_correct
        total_n += len(outcomes)
        all_perplexities.extend(perplexities)

    all_row = EvalRow(ALL_ROW, 100.0 * total_correct / total_n,
                      float(np.mean(all_perplexities)), total_n)
    baseline_row = EvalRow(BASELINE_ROW, None, float(np.mean(baseline_perplexities)),
                           len(baseline_perplexities))
    return EvalReport(tuple(rows), all_row, baseline_row, n_per_relation=len(prompts))
