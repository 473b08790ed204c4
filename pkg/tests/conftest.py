import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from relgen import CueDiscourseBackend, CueLexicon, RelationTaxonomy, train_ngram

DATA = Path(__file__).parent.parent / "src" / "relgen" / "data"


@pytest.fixture(scope="session")
def taxonomy():
    return RelationTaxonomy.default()


@pytest.fixture(scope="session")
def desk_lm():
    with open(DATA / "corpus.txt", encoding="utf-8") as handle:
        return train_ngram(handle, order=2, delta=0.01)


@pytest.fixture(scope="session")
def desk_parser(taxonomy):
    return CueDiscourseBackend(CueLexicon.default(taxonomy), taxonomy)


@pytest.fixture(scope="session")
def desk_prompts():
    with open(DATA / "prompts.txt", encoding="utf-8") as handle:
        return [line.strip() for line in handle if line.strip()]
