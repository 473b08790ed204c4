"""Exception types shared across the package."""


class RelgenError(Exception):
    """Base class for all errors raised by this package."""


class UnknownRelation(RelgenError):
    """Relation name is well-formed but not present in the loaded taxonomy."""


class MalformedName(RelgenError):
    """Relation name lacks the '{Category}_{Nuclearity}' structure."""


class ConfigError(RelgenError, ValueError):
    """A generation parameter is out of its legal range."""


class EmptyCorpus(RelgenError):
    """Training corpus contained no tokens."""


class EmptyPrompt(RelgenError):
    """Prompt text tokenized to nothing."""


class EmptyContinuation(RelgenError):
    """A log-likelihood was requested for an empty continuation."""


class EmptySegment(RelgenError):
    """Relation scoring requires both segments to be non-empty."""


class EmptyInput(RelgenError):
    """Segmentation requires a non-empty token sequence."""


class EmptyText(RelgenError):
    """Evaluation requires non-empty prompt and completion text."""


class NoProperPrefix(RelgenError):
    """The prompt is not a proper prefix of any leading EDU concatenation."""


class InconsistentBatch(RelgenError):
    """A record batch does not cover every prompt x relation combination."""


class BackendUnavailable(RelgenError):
    """A remote backend could not be reached or failed server-side."""


class ProtocolMismatch(RelgenError):
    """The remote endpoint speaks a different wire-protocol version."""


class MalformedResponse(RelgenError):
    """A remote response violated the wire-protocol contract."""


class IoFailure(RelgenError):
    """A file could not be read or written."""
