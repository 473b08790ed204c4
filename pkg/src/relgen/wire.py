"""Client-side wire protocol: envelope validation and HTTP transport.

The protocol is documented normatively in PROTOCOL.md at the repository
root.  Every request and response is a JSON object carrying a mandatory
``protocol_version`` field; the payload validators below are pure
functions so they can be exercised offline against recorded fixtures.
"""

from __future__ import annotations

import math
import threading
from typing import Any

import requests

from .errors import BackendUnavailable, MalformedResponse, ProtocolMismatch

PROTOCOL_VERSION = 1
RELATION_LOGIT_COUNT = 42

# Listed sparse probabilities may overshoot 1 by at most this much.
MASS_TOLERANCE = 1e-6


def check_envelope(payload: Any) -> dict:
    """Common envelope checks: a JSON object with the right protocol_version."""
    if not isinstance(payload, dict):
        raise MalformedResponse(f"expected a JSON object, got {type(payload).__name__}")
    version = payload.get("protocol_version")
    if version != PROTOCOL_VERSION:
        raise ProtocolMismatch(
            f"endpoint speaks protocol version {version!r}, client speaks {PROTOCOL_VERSION}"
        )
    return payload


def parse_sparse_distribution(payload: Any) -> tuple[list[tuple[int, float]], float]:
    """Validate a sparse next-token response; returns (pairs, remainder mass)."""
    payload = check_envelope(payload)
    raw_pairs = payload.get("pairs")
    if not isinstance(raw_pairs, list):
        raise MalformedResponse("sparse distribution must carry a 'pairs' list")
    pairs: list[tuple[int, float]] = []
    seen_ids = set()
    total = 0.0
    for item in raw_pairs:
        try:
            token_id, prob = int(item[0]), float(item[1])
        except (TypeError, ValueError, IndexError):
            raise MalformedResponse(f"malformed (id, probability) pair: {item!r}") from None
        if token_id in seen_ids:
            raise MalformedResponse(f"duplicate token id {token_id} in sparse distribution")
        if not 0.0 <= prob <= 1.0 or not math.isfinite(prob):
            raise MalformedResponse(f"probability {prob!r} for id {token_id} outside [0, 1]")
        seen_ids.add(token_id)
        pairs.append((token_id, prob))
        total += prob
    if total > 1.0 + MASS_TOLERANCE:
        raise MalformedResponse(f"listed probabilities sum to {total}, above 1")
    rest = float(payload.get("rest", 0.0))
    if not math.isfinite(rest) or rest < -MASS_TOLERANCE:
        raise MalformedResponse(f"remainder mass {rest!r} is not a non-negative real")
    if abs(total + rest - 1.0) > MASS_TOLERANCE:
        raise MalformedResponse(f"total mass {total + rest} differs from 1")
    return pairs, rest


def parse_relation_logits(payload: Any) -> list[float]:
    """Validate a relation-logits response: exactly 42 finite reals."""
    payload = check_envelope(payload)
    logits = payload.get("logits")
    if not isinstance(logits, list) or len(logits) != RELATION_LOGIT_COUNT:
        count = len(logits) if isinstance(logits, list) else "no"
        raise MalformedResponse(f"expected {RELATION_LOGIT_COUNT} logits, got {count}")
    values = []
    for value in logits:
        try:
            number = float(value)
        except (TypeError, ValueError):
            raise MalformedResponse(f"non-numeric logit {value!r}") from None
        if not math.isfinite(number):
            raise MalformedResponse(f"non-finite logit {value!r}")
        values.append(number)
    return values


def parse_segment_boundaries(payload: Any, text_length: int) -> list[int]:
    """Validate segmentation boundaries: increasing character end-offsets covering the text."""
    payload = check_envelope(payload)
    boundaries = payload.get("boundaries")
    if not isinstance(boundaries, list) or not boundaries:
        raise MalformedResponse("segmentation response must carry a non-empty 'boundaries' list")
    previous = 0
    offsets = []
    for value in boundaries:
        if not isinstance(value, int) or value <= previous:
            raise MalformedResponse(f"boundaries must be strictly increasing ints, got {boundaries!r}")
        previous = value
        offsets.append(value)
    if offsets[-1] != text_length:
        raise MalformedResponse(
            f"final boundary {offsets[-1]} does not cover the {text_length}-char input"
        )
    return offsets


def parse_token_ids(payload: Any) -> list[int]:
    payload = check_envelope(payload)
    ids = payload.get("ids")
    if not isinstance(ids, list) or not all(isinstance(i, int) and i >= 0 for i in ids):
        raise MalformedResponse("encode response must carry a list of non-negative int 'ids'")
    return ids


def parse_vocabulary(payload: Any) -> tuple[list[str], int]:
    payload = check_envelope(payload)
    entries = payload.get("entries")
    unknown_id = payload.get("unknown_id")
    if not isinstance(entries, list) or not all(isinstance(e, str) for e in entries):
        raise MalformedResponse("vocabulary response must carry a list of string 'entries'")
    if not isinstance(unknown_id, int) or not 0 <= unknown_id < len(entries):
        raise MalformedResponse(f"unknown_id {unknown_id!r} is not a valid entry index")
    return entries, unknown_id


class WireClient:
    """Thin JSON-over-HTTP transport with the error mapping the backends share.

    Requests are serialized through a lock: callers must not assume
    parallel speedup from concurrent use.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self._session = requests.Session()
        self._lock = threading.Lock()

    def get(self, path: str) -> Any:
        return self._request("GET", path, None)

    def post(self, path: str, body: dict) -> Any:
        payload = dict(body)
        payload["protocol_version"] = PROTOCOL_VERSION
        return self._request("POST", path, payload)

    def _request(self, method: str, path: str, body: dict | None) -> Any:
        url = f"{self.endpoint}{path}"
        try:
            with self._lock:
                response = self._session.request(method, url, json=body, timeout=self.timeout)
        except requests.RequestException as exc:
            raise BackendUnavailable(f"{method} {url} failed: {exc}") from exc
        if 400 <= response.status_code < 500:
            raise ProtocolMismatch(
                f"{method} {url} rejected with HTTP {response.status_code}: {response.text[:200]}"
            )
        if response.status_code != 200:
            raise BackendUnavailable(f"{method} {url} returned HTTP {response.status_code}")
        try:
            return response.json()
        except ValueError as exc:
            raise MalformedResponse(f"{method} {url} returned non-JSON body") from exc

    def health(self) -> dict:
        return check_envelope(self.get("/health"))
