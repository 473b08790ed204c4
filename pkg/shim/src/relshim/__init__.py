"""HTTP shim exposing a language model and a discourse parser behind the
wire protocol documented in the repository's PROTOCOL.md."""

from .app import build_backends, create_app
from .protocol import PROTOCOL_VERSION, RELATION_COUNT, RELATION_TABLE
from .recorder import record_fixtures

__version__ = "0.1.0"

__all__ = ["PROTOCOL_VERSION", "RELATION_COUNT", "RELATION_TABLE",
           "build_backends", "create_app", "record_fixtures"]
