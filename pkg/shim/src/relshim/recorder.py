"""Record request/response exchanges for offline contract testing.

Input: JSON Lines, one request per line: {"method", "path", "body"|null}.
Output: JSON Lines fixtures pairing each request with the exact response
body, in input order (see PROTOCOL.md, "Fixture recording").
"""

import json

from fastapi.testclient import TestClient

from .app import create_app
from .protocol import PROTOCOL_VERSION


def record_fixtures(requests_path, fixtures_path, lm=None, parser=None) -> int:
    """Replay a requests file through an in-process service; returns the row count."""
    if lm is None or parser is None:
        from .toy import ToyLm, ToyParser
        lm = lm or ToyLm()
        parser = parser or ToyParser()
    client = TestClient(create_app(lm, parser))

    written = 0
    with open(requests_path, encoding="utf-8") as requests_file, \
            open(fixtures_path, "w", encoding="utf-8") as fixtures_file:
        for line in requests_file:
            if not line.strip():
                continue
            request = json.loads(line)
            method = request["method"].upper()
            body = request.get("body")
            if body is not None:
                body = {"protocol_version": PROTOCOL_VERSION, **body}
            if method == "GET":
                response = client.get(request["path"])
            else:
                response = client.post(request["path"], json=body)
            response.raise_for_status()
            fixture = {
                "request": {"method": method, "path": request["path"], "body": body},
                "response": response.json(),
            }
            fixtures_file.write(json.dumps(fixture, sort_keys=True, ensure_ascii=False))
            fixtures_file.write("\n")
            written += 1
    return written
