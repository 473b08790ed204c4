"""Relation-controlled text generation.

A discourse parser re-ranks the language model's nucleus vocabulary at
every decoding step so the generated continuation holds a chosen
rhetorical relation with the prompt.
"""

from .core import GenerationConfig, Relation, RelationTaxonomy, parse_relation_name, relation_index
from .decoder import (GenerationRecord, GenerationResult, NucleusSet, StepRecord, StopReason,
                      fuse_select, generate, nucleus, parser_scores, read_records, retokenize,
                      should_stop, trim_output, write_records)
from .discourse import CueDiscourseBackend, CueLexicon, DiscourseBackend, RemoteDiscourseBackend, Segmentation
from .lm import LmBackend, NgramModel, RemoteLmBackend, train_ngram
from .vocab import Token, Vocabulary, WordTokenizer

__version__ = "0.1.0"

__all__ = [
    "CueDiscourseBackend", "CueLexicon", "DiscourseBackend", "GenerationConfig",
    "GenerationRecord", "GenerationResult", "LmBackend", "NgramModel", "NucleusSet",
    "Relation", "RelationTaxonomy", "RemoteDiscourseBackend", "RemoteLmBackend",
    "Segmentation", "StepRecord", "StopReason", "Token", "Vocabulary", "WordTokenizer",
    "fuse_select", "generate", "nucleus", "parse_relation_name", "parser_scores",
    "read_records", "relation_index", "retokenize", "should_stop", "train_ngram",
    "trim_output", "write_records",
]
