import math

import pytest
from fastapi.testclient import TestClient

from relshim import RELATION_COUNT, RELATION_TABLE, create_app
from relshim.toy import ToyLm, ToyParser

V = {"protocol_version": 1}


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(ToyLm(), ToyParser()))


def test_relation_table_shape():
    assert RELATION_COUNT == 42
    assert len(set(RELATION_TABLE)) == 42
    categories = {name.rsplit("_", 1)[0] for name in RELATION_TABLE}
    assert len(categories) == 18
    assert all(name.rsplit("_", 1)[1] in {"NN", "NS", "SN"} for name in RELATION_TABLE)


def test_health_reports_models_and_version(client):
    payload = client.get("/health").json()
    assert payload["protocol_version"] == 1
    assert payload["lm_model"] == "toy-bigram"
    assert payload["parser_model"] == "toy-cues"


def test_vocab_is_well_formed(client):
    payload = client.get("/lm/vocab").json()
    entries = payload["entries"]
    assert len(entries) == len(set(entries))
    assert 0 <= payload["unknown_id"] < len(entries)


def test_encode_round_trip(client):
    vocab = client.get("/lm/vocab").json()["entries"]
    ids = client.post("/lm/encode", json={**V, "text": "the cat sat"}).json()["ids"]
    assert [vocab[i] for i in ids] == ["the", "cat", "sat"]


def test_unknown_words_map_to_unknown_id(client):
    payload = client.post("/lm/encode", json={**V, "text": "zyzzx"}).json()
    assert payload["ids"] == [client.get("/lm/vocab").json()["unknown_id"]]


def test_next_distribution_contract(client):
    ids = client.post("/lm/encode", json={**V, "text": "the cat"}).json()["ids"]
    payload = client.post("/lm/next", json={**V, "prompt_ids": ids,
                                            "generated_ids": [], "top_n": 5}).json()
    pairs = payload["pairs"]
    assert len(pairs) == 5
    probs = [p for _, p in pairs]
    assert all(0.0 <= p <= 1.0 for p in probs)
    assert sum(probs) <= 1.0 + 1e-6
    assert abs(sum(probs) + payload["rest"] - 1.0) < 1e-6
    assert probs == sorted(probs, reverse=True)
    assert len({i for i, _ in pairs}) == len(pairs)


def test_next_distribution_is_deterministic(client):
    body = {**V, "prompt_ids": [2, 3], "generated_ids": [4], "top_n": 7}
    assert client.post("/lm/next", json=body).json() == client.post("/lm/next", json=body).json()


def test_next_rejects_out_of_vocab_ids(client):
    response = client.post("/lm/next", json={**V, "prompt_ids": [99999], "generated_ids": []})
    assert response.status_code == 422


def test_relation_carries_exactly_42_finite_logits(client):
    payload = client.post("/parser/relation",
                          json={**V, "left": "the cat sat ,", "right": "because it ran"}).json()
    logits = payload["logits"]
    assert len(logits) == 42
    assert all(math.isfinite(v) for v in logits)
    assert logits[RELATION_TABLE.index("Cause_NS")] == 4.0


def test_relation_keyword_weights_halve_mid_segment(client):
    payload = client.post("/parser/relation",
                          json={**V, "left": "x", "right": "but it ran because it could"}).json()
    logits = payload["logits"]
    assert logits[RELATION_TABLE.index("Contrast_NN")] == 4.0
    assert logits[RELATION_TABLE.index("Cause_NS")] == 2.0


def test_segmentation_covers_text_exactly(client):
    text = "the cat sat . the dog barked because the cat ran ."
    payload = client.post("/parser/segment", json={**V, "text": text}).json()
    boundaries = payload["boundaries"]
    assert boundaries[-1] == len(text)
    assert boundaries == sorted(set(boundaries))
    spans = [text[a:b] for a, b in zip([0] + boundaries[:-1], boundaries)]
    assert "".join(spans) == text
    assert len(spans) == 3


def test_malformed_envelopes_rejected_with_4xx(client):
    assert client.post("/lm/encode", json={"text": "x"}).status_code == 422  # missing version
    assert client.post("/lm/encode", json={"protocol_version": 2, "text": "x"}).status_code == 422
    assert client.post("/parser/relation", json={**V, "left": "", "right": "y"}).status_code == 422
    assert client.post("/parser/segment", json={**V}).status_code == 422
    assert client.post("/lm/next", json={**V, "prompt_ids": "nope"}).status_code == 422


def test_invalid_backend_output_is_a_server_error():
    class BrokenParser(ToyParser):
        name = "broken"

        def relation_logits(self, left, right):
            return [0.0] * 41

    client = TestClient(create_app(ToyLm(), BrokenParser()), raise_server_exceptions=False)
    response = client.post("/parser/relation", json={**V, "left": "a", "right": "b"})
    assert response.status_code == 500
