"""End-to-end: the engine's remote backends driving a live shim over HTTP."""

import socket
import threading
import time

import pytest
import uvicorn

from relshim import create_app
from relshim.toy import ToyLm, ToyParser

relgen = pytest.importorskip("relgen")

from relgen import GenerationConfig, RemoteDiscourseBackend, RemoteLmBackend, generate
from relgen.cli import run as relgen_cli


@pytest.fixture(scope="module")
def endpoint():
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    config = uvicorn.Config(create_app(ToyLm(), ToyParser()), host="127.0.0.1",
                            port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("shim did not start in time")
        time.sleep(0.05)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def test_remote_backends_construct_and_validate(endpoint):
    lm = RemoteLmBackend(endpoint)
    assert "<unk>" in lm.vocabulary.entries
    parser = RemoteDiscourseBackend(endpoint)
    logits = parser.relation_logits(parser.tokenize("the cat sat ,"),
                                    parser.tokenize("because it ran"))
    assert logits.shape == (42,)


def test_full_generation_over_the_wire(endpoint):
    lm = RemoteLmBackend(endpoint)
    parser = RemoteDiscourseBackend(endpoint)
    taxonomy = relgen.RelationTaxonomy.default()
    config = GenerationConfig(max_new_tokens=8)
    first = generate(lm, parser, "the cat sat on the mat ,", taxonomy.parse("Cause_NS"), config)
    second = generate(lm, parser, "the cat sat on the mat ,", taxonomy.parse("Cause_NS"), config)
    assert first == second  # deterministic service, deterministic decode
    assert first.completion_text
    assert len(first.steps) <= 8
    dist = lm.next_distribution(lm.encode("the cat"), [])
    assert abs(dist.sum() - 1.0) < 1e-9


def test_engine_cli_serve_check_and_remote_generate(endpoint, capsys):
    assert relgen_cli(["serve-check", "--endpoint", endpoint]) == 0
    out = capsys.readouterr().out
    assert "toy-bigram" in out
    code = relgen_cli(["generate", "--prompt", "the cat sat ,", "--relation", "Contrast_NN",
                       "--backend", "remote", "--endpoint", endpoint, "--max-tokens", "6"])
    assert code == 0
    assert capsys.readouterr().out.strip()
