"""Replay recorded wire exchanges through the remote backends, offline.

The fixture file is produced by the shim's record mode (see PROTOCOL.md,
"Fixture recording"); regenerate with

    python -c "from relshim.recorder import record_fixtures; \
               record_fixtures('tests/fixtures/requests.jsonl', \
                               'tests/fixtures/recorded_exchanges.jsonl')"
"""

import json
from pathlib import Path

import pytest

from relgen import RemoteDiscourseBackend, RemoteLmBackend

FIXTURES = Path(__file__).parent / "fixtures" / "recorded_exchanges.jsonl"


def load_exchanges():
    with open(FIXTURES, encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]


class ReplayClient:
    """Transport that answers only from the recorded exchanges."""

    def __init__(self, exchanges):
        self._by_key = {}
        for exchange in exchanges:
            request = exchange["request"]
            key = self._key(request["method"], request["path"], request["body"])
            self._by_key[key] = exchange["response"]

    @staticmethod
    def _key(method, path, body):
        return method, path, json.dumps(body, sort_keys=True)

    def _lookup(self, method, path, body):
        try:
            return self._by_key[self._key(method, path, body)]
        except KeyError:
            raise AssertionError(f"no recorded exchange for {method} {path} {body}") from None

    def health(self):
        return self._lookup("GET", "/health", None)

    def get(self, path):
        return self._lookup("GET", path, None)

    def post(self, path, body):
        return self._lookup("POST", path, {"protocol_version": 1, **body})


@pytest.fixture(scope="module")
def exchanges():
    return load_exchanges()


@pytest.fixture(scope="module")
def replay(exchanges):
    return ReplayClient(exchanges)


def recorded_bodies(exchanges, path):
    return [(e["request"]["body"], e["response"]) for e in exchanges
            if e["request"]["path"] == path]


def test_fixture_file_is_present_and_covers_all_endpoints(exchanges):
    paths = {e["request"]["path"] for e in exchanges}
    assert {"/health", "/lm/vocab", "/lm/encode", "/lm/next",
            "/parser/relation", "/parser/segment"} <= paths


def test_lm_replay_decodes_every_recorded_exchange(exchanges, replay):
    lm = RemoteLmBackend(client=replay)
    assert lm.vocabulary.entries[0] == "<unk>"

    for body, response in recorded_bodies(exchanges, "/lm/encode"):
        tokens = lm.encode(body["text"])
        assert [t.id for t in tokens] == response["ids"]
        assert all(0 <= t.id < len(lm.vocabulary) for t in tokens)

    for body, response in recorded_bodies(exchanges, "/lm/next"):
        lm.top_n = body["top_n"]
        prompt = [lm.vocabulary.token(lm.vocabulary.surface_of(i)) for i in body["prompt_ids"]]
        generated = [lm.vocabulary.token(lm.vocabulary.surface_of(i)) for i in body["generated_ids"]]
        dist = lm.next_distribution(prompt, generated)
        assert abs(dist.sum() - 1.0) < 1e-9
        assert (dist >= 0).all()
        # every recorded pair lands at its id (up to the exact renormalization)
        for token_id, prob in response["pairs"]:
            if token_id != lm.vocabulary.unknown_id:
                assert dist[token_id] == pytest.approx(prob, rel=1e-9)


def test_parser_replay_decodes_every_recorded_exchange(exchanges, replay):
    parser = RemoteDiscourseBackend(client=replay)

    for body, response in recorded_bodies(exchanges, "/parser/relation"):
        left = parser.tokenize(body["left"])
        right = parser.tokenize(body["right"])
        logits = parser.relation_logits(left, right)
        assert logits.tolist() == response["logits"]
        assert logits.shape == (42,)

    for body, response in recorded_bodies(exchanges, "/parser/segment"):
        tokens = parser.tokenize(body["text"])
        seg = parser.segment(tokens)
        rebuilt = [t for i in range(len(seg)) for t in seg.tokens_of(tokens, i)]
        assert rebuilt == tokens
        assert len(seg) == len(response["boundaries"])


def test_replay_is_byte_stable(exchanges):
    # re-serializing the fixture reproduces the file exactly
    lines = [json.dumps(e, sort_keys=True, ensure_ascii=False) for e in exchanges]
    assert FIXTURES.read_text(encoding="utf-8").splitlines() == lines
