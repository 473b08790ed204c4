"""Adapters for serving real models behind the protocol.

The language-model adapter wraps any causal LM loadable through
``transformers``.  A real discourse parser rarely ships as a pip package,
so it plugs in by dotted path: ``--parser-plugin pkg.module:factory`` must
resolve to a zero-argument callable returning an object with the ToyParser
interface (``relation_logits(left, right) -> 42 floats``,
``segment(text) -> end offsets``, ``name``).  Inference must be
deterministic; the protocol requires identical responses for identical
requests.
"""

import importlib

from .protocol import RELATION_COUNT


class TransformersLm:
    """Greedy-friendly wrapper around a causal LM checkpoint."""

    def __init__(self, model_path: str, device: str = "cpu"):
        try:
            import torch
            from transformers import AutoModelForCausalLM, AutoTokenizer
        except ImportError as exc:  # pragma: no cover - heavy optional dependency
            raise RuntimeError("serving a real model requires the [real] extra") from exc
        self._torch = torch
        self.name = model_path
        self.tokenizer = AutoTokenizer.from_pretrained(model_path)
        self.model = AutoModelForCausalLM.from_pretrained(model_path).to(device).eval()
        self.device = device
        vocab = self.tokenizer.get_vocab()
        self.entries = [""] * len(vocab)
        for surface, token_id in vocab.items():
            self.entries[token_id] = surface
        unk = self.tokenizer.unk_token_id
        self.unknown_id = unk if unk is not None else 0

    def encode(self, text):
        return self.tokenizer.encode(text, add_special_tokens=False)

    def next_pairs(self, prompt_ids, generated_ids, top_n):
        torch = self._torch
        ids = list(prompt_ids) + list(generated_ids)
        with torch.no_grad():
            batch = torch.tensor([ids], dtype=torch.long, device=self.device)
            logits = self.model(batch).logits[0, -1]
            probs = torch.softmax(logits.double(), dim=-1)
            top = torch.topk(probs, k=min(top_n, probs.numel()))
        pairs = sorted(
            zip(top.indices.tolist(), top.values.tolist()),
            key=lambda pair: (-pair[1], pair[0]),
        )
        rest = max(1.0 - sum(p for _, p in pairs), 0.0)
        return pairs, rest


def load_parser_plugin(spec: str):
    """Resolve ``module.path:factory`` into a parser backend instance."""
    module_name, _, attribute = spec.partition(":")
    if not attribute:
        raise ValueError(f"parser plugin {spec!r} must look like 'pkg.module:factory'")
    factory = getattr(importlib.import_module(module_name), attribute)
    parser = factory()
    probe = parser.relation_logits("left segment", "right segment")
    if len(probe) != RELATION_COUNT:
        raise ValueError(
            f"parser plugin {spec!r} returned {len(probe)} logits, expected {RELATION_COUNT}"
        )
    return parser
