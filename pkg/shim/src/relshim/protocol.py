"""Envelope models for the wire protocol (see PROTOCOL.md at the repo root).

Every request and response carries protocol_version == 1; FastAPI turns a
failed validation into a 4xx, which is the mandated answer to malformed
envelopes.
"""

from typing import Literal

from pydantic import BaseModel, Field

PROTOCOL_VERSION = 1

# Canonical relation-label order; logits travel by position.  Must stay in
# sync with the engine's taxonomy file (PROTOCOL.md, "Canonical relation
# table").
RELATION_TABLE = [
    "Attribution_SN", "Enablement_NS", "Cause_SN", "Cause_NN", "Temporal_SN",
    "Condition_NN", "Cause_NS", "Temporal_NN", "Explanation_SN", "Background_NS",
    "Contrast_SN", "Evaluation_SN", "Topic-Comment_SN", "Condition_SN", "Comparison_NN",
    "Elaboration_NS", "Explanation_NS", "TextualOrganization_NN", "Background_SN",
    "Contrast_NN", "Topic-Comment_NN", "Condition_NS", "Comparison_SN", "Evaluation_NS",
    "Explanation_NN", "Same-Unit_NN", "Contrast_NS", "Topic-Comment_NS", "Manner-Means_SN",
    "Summary_NS", "Temporal_NS", "Attribution_NS", "Manner-Means_NS", "Summary_SN",
    "Joint_NN", "Topic-Change_NN", "Comparison_NS", "Evaluation_NN", "Topic-Change_NS",
    "Enablement_SN", "Summary_NN", "Elaboration_SN",
]

RELATION_COUNT = len(RELATION_TABLE)


class Envelope(BaseModel):
    protocol_version: Literal[1]


class HealthResponse(Envelope):
    lm_model: str
    parser_model: str


class VocabResponse(Envelope):
    entries: list[str]
    unknown_id: int


class EncodeRequest(Envelope):
    text: str


class EncodeResponse(Envelope):
    ids: list[int]


class NextRequest(Envelope):
    prompt_ids: list[int]
    generated_ids: list[int] = Field(default_factory=list)
    top_n: int = Field(default=200, ge=1)


class NextResponse(Envelope):
    pairs: list[tuple[int, float]]
    rest: float


class RelationRequest(Envelope):
    left: str = Field(min_length=1)
    right: str = Field(min_length=1)


class RelationResponse(Envelope):
    logits: list[float]


class SegmentRequest(Envelope):
    text: str = Field(min_length=1)


class SegmentResponse(Envelope):
    boundaries: list[int]
