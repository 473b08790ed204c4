"""Per-step parser-score spread, aggregated across many generations.

The spread (highest minus lowest softmax score over the nucleus) at a step
is a proxy for how strongly the parser re-ranks the LM distribution there;
averaging it per step across a batch shows where control is exerted.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

from .decoder import GenerationResult
from .errors import EmptyInput, IoFailure


@dataclass(frozen=True)
class PerturbationCurve:
    """Mean score spread per generation step, with observation counts."""

    per_step_mean_spread: tuple[float, ...]
    n_generations: int
    n_observations_per_step: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.per_step_mean_spread)


def perturbation_curve(results: Sequence[GenerationResult]) -> PerturbationCurve:
    """Average the per-step spread over all generations long enough to reach each step."""
    if not results:
        raise EmptyInput("need at least one generation to build a curve")
    max_steps = max(len(r.steps) for r in results)
    sums = [0.0] * max_steps
    counts = [0] * max_steps
    for result in results:
        for record in result.steps:
            sums[record.step] += record.parser_score_max - record.parser_score_min
            counts[record.step] += 1
    means = tuple(s / c for s, c in zip(sums, counts))
    return PerturbationCurve(means, len(results), tuple(counts))


def export_curve(curve: PerturbationCurve, path) -> None:
    """Write the curve as a plot-ready CSV: step, mean_spread, n_observations."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["step", "mean_spread", "n_observations"])
            for step, (spread, count) in enumerate(
                zip(curve.per_step_mean_spread, curve.n_observations_per_step)
            ):
                writer.writerow([step, repr(spread), count])
    except OSError as exc:
        raise IoFailure(f"could not write curve to {path}: {exc}") from exc


def load_curve(path) -> PerturbationCurve:
    """Read back an exported curve (observation counts bound n_generations)."""
    try:
        with open(path, encoding="utf-8", newline="") as handle:
            rows = list(csv.DictReader(handle))
    except OSError as exc:
        raise IoFailure(f"could not read curve from {path}: {exc}") from exc
    if not rows:
        raise EmptyInput(f"{path} holds no curve rows")
    means = tuple(float(row["mean_spread"]) for row in rows)
    counts = tuple(int(row["n_observations"]) for row in rows)
    return PerturbationCurve(means, counts[0], counts)


def mean_spread_from(curve: PerturbationCurve, first_step: int) -> float:
    """Observation-weighted mean spread over all steps >= first_step."""
    num = sum(
        spread * count
        for step, (spread, count) in enumerate(
            zip(curve.per_step_mean_spread, curve.n_observations_per_step)
        )
        if step >= first_step
    )
    den = sum(count for step, count in enumerate(curve.n_observations_per_step) if step >= first_step)
    if den == 0:
        raise EmptyInput(f"no observations at steps >= {first_step}")
    return num / den
