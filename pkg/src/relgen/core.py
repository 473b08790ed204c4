"""Relation taxonomy and generation configuration.

The taxonomy is data, not code: a plain-text file lists the valid
"{Category}_{Nuclearity}" labels, and file order defines the index each
label occupies in a parser's logit vector.  The default file mirrors the
42-label inventory of a public multilingual RST parser; swapping the file
re-targets the whole engine to a different label set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Iterator

from .errors import ConfigError, MalformedName, UnknownRelation

EXPECTED_RELATION_COUNT = 42
EXPECTED_CATEGORY_COUNT = 18


class Nuclearity(enum.Enum):
    """Which side(s) of a relation carry the nucleus."""

    NN = "NN"
    NS = "NS"
    SN = "SN"


@dataclass(frozen=True)
class RelationCategory:
    """One of the coarse relation categories, e.g. Contrast or Attribution."""

    name: str


@dataclass(frozen=True)
class Relation:
    """A category plus nuclearity, pinned to its logit-vector index."""

    category: RelationCategory
    nuclearity: Nuclearity
    index: int

    @property
    def name(self) -> str:
        return f"{self.category.name}_{self.nuclearity.value}"

    def __str__(self) -> str:
        return self.name


def _split_relation_name(name: str) -> tuple[str, Nuclearity]:
    head, sep, tail = name.rpartition("_")
    if not sep or not head:
        raise MalformedName(f"relation name {name!r} lacks a '_NN/_NS/_SN' suffix")
    try:
        nuclearity = Nuclearity(tail)
    except ValueError:
        raise MalformedName(f"relation name {name!r} has unknown nuclearity {tail!r}") from None
    return head, nuclearity


class RelationTaxonomy:
    """The ordered set of valid relations loaded from a taxonomy file."""

    def __init__(self, names: Iterable[str]):
        self._relations: list[Relation] = []
        self._by_name: dict[str, Relation] = {}
        categories: dict[str, RelationCategory] = {}
        for index, name in enumerate(names):
            head, nuclearity = _split_relation_name(name)
            if name in self._by_name:
                raise ValueError(f"duplicate relation name {name!r} in taxonomy")
            category = categories.setdefault(head, RelationCategory(head))
            relation = Relation(category, nuclearity, index)
            self._relations.append(relation)
            self._by_name[name] = relation
        self._categories = categories

    @classmethod
    def from_file(cls, path) -> "RelationTaxonomy":
        with open(path, encoding="utf-8") as handle:
            return cls.from_lines(handle)

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "RelationTaxonomy":
        names = []
        for raw in lines:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            names.append(line)
        return cls(names)

    @classmethod
    def default(cls) -> "RelationTaxonomy":
        text = resources.files("relgen.data").joinpath("relations.txt").read_text("utf-8")
        return cls.from_lines(text.splitlines())

    def parse(self, name: str) -> Relation:
        """Look up a relation by its exact, case-sensitive name."""
        _split_relation_name(name)
        relation = self._by_name.get(name)
        if relation is None:
            raise UnknownRelation(f"relation {name!r} is not in the {len(self)}-entry taxonomy")
        return relation

    def index_of(self, relation: Relation) -> int:
        return relation.index

    @property
    def categories(self) -> list[RelationCategory]:
        return list(self._categories.values())

    def __len__(self) -> int:
        return len(self._relations)

    def __iter__(self) -> Iterator[Relation]:
        return iter(self._relations)

    def __getitem__(self, index: int) -> Relation:
        return self._relations[index]


def parse_relation_name(name: str, taxonomy: RelationTaxonomy | None = None) -> Relation:
    """Parse "{Category}_{Nuclearity}" against a taxonomy (default if omitted)."""
    if taxonomy is None:
        taxonomy = RelationTaxonomy.default()
    return taxonomy.parse(name)


def relation_index(relation: Relation) -> int:
    """Stable position of the relation in the logit vector."""
    return relation.index


@dataclass(frozen=True)
class GenerationConfig:
    """Decoding parameters.

    p and k bound the nucleus (smallest top-probability set whose mass
    reaches p, at most k members), tau is the softmax temperature applied
    to the parser logits, and alpha in [0, 1] is the exponent weighting
    the parser score against the LM probability in the greedy selection.
    """

    p: float = 0.75
    k: int = 100
    tau: float = 0.1
    alpha: float = 0.7
    max_new_tokens: int = 30
    stop_on_period: bool = True
    seed: int = 0  # reserved: decoding is deterministic

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ConfigError(f"p must be in (0, 1], got {self.p}")
        if self.k < 1:
            raise ConfigError(f"k must be a positive integer, got {self.k}")
        if not self.tau > 0.0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.max_new_tokens < 1:
            raise ConfigError(f"max_new_tokens must be >= 1, got {self.max_new_tokens}")

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "k": self.k,
            "tau": self.tau,
            "alpha": self.alpha,
            "max_new_tokens": self.max_new_tokens,
            "stop_on_period": self.stop_on_period,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GenerationConfig":
        return cls(**data)
