"""FastAPI application exposing the wire protocol around a pair of backends."""

import math

from fastapi import FastAPI, HTTPException

from . import protocol as p


def create_app(lm, parser) -> FastAPI:
    """Wire the endpoints to an LM backend and a parser backend.

    Backends follow the interfaces of ``toy.ToyLm`` and ``toy.ToyParser``.
    Every response validates against its envelope model before leaving the
    process.
    """
    app = FastAPI(title="relgen model shim", version="1")

    @app.get("/health", response_model=p.HealthResponse)
    def health():
        return p.HealthResponse(protocol_version=p.PROTOCOL_VERSION,
                                lm_model=lm.name, parser_model=parser.name)

    @app.get("/lm/vocab", response_model=p.VocabResponse)
    def vocab():
        return p.VocabResponse(protocol_version=p.PROTOCOL_VERSION,
                               entries=lm.entries, unknown_id=lm.unknown_id)

    @app.post("/lm/encode", response_model=p.EncodeResponse)
    def encode(request: p.EncodeRequest):
        return p.EncodeResponse(protocol_version=p.PROTOCOL_VERSION,
                                ids=lm.encode(request.text))

    @app.post("/lm/next", response_model=p.NextResponse)
    def next_distribution(request: p.NextRequest):
        size = len(lm.entries)
        if any(not 0 <= i < size for i in request.prompt_ids + request.generated_ids):
            raise HTTPException(status_code=422, detail="token id outside the vocabulary")
        pairs, rest = lm.next_pairs(request.prompt_ids, request.generated_ids, request.top_n)
        return p.NextResponse(protocol_version=p.PROTOCOL_VERSION, pairs=pairs, rest=rest)

    @app.post("/parser/relation", response_model=p.RelationResponse)
    def relation(request: p.RelationRequest):
        logits = list(parser.relation_logits(request.left, request.right))
        if len(logits) != p.RELATION_COUNT or not all(math.isfinite(v) for v in logits):
            raise HTTPException(status_code=500, detail="backend produced invalid logits")
        return p.RelationResponse(protocol_version=p.PROTOCOL_VERSION, logits=logits)

    @app.post("/parser/segment", response_model=p.SegmentResponse)
    def segment(request: p.SegmentRequest):
        boundaries = list(parser.segment(request.text))
        if not boundaries or boundaries[-1] != len(request.text) or \
                any(b <= a for a, b in zip(boundaries, boundaries[1:])):
            raise HTTPException(status_code=500, detail="backend produced invalid boundaries")
        return p.SegmentResponse(protocol_version=p.PROTOCOL_VERSION, boundaries=boundaries)

    return app


def build_backends(backend: str = "toy", model_path: str | None = None,
                   parser_plugin: str | None = None, device: str = "cpu"):
    """Construct the (lm, parser) pair for the requested mode."""
    from .toy import ToyLm, ToyParser

    if backend == "toy":
        return ToyLm(), ToyParser()
    from .real import TransformersLm, load_parser_plugin

    if not model_path:
        raise ValueError("real backend requires --model-path")
    lm = TransformersLm(model_path, device=device)
    parser = load_parser_plugin(parser_plugin) if parser_plugin else ToyParser()
    return lm, parser
