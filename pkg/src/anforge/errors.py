"""Error types and the exhaustive-enumeration cap shared across modules."""

import os

#: Default cap on exhaustively enumerated configuration spaces (2**24).
DEFAULT_CAP = 1 << 24


def exhaustive_cap(override=None):
    """Effective cap: explicit override > AN_FORGE_CAP env var > default."""
    if override is not None:
        return int(override)
    env = os.environ.get("AN_FORGE_CAP")
    if env:
        return int(env)
    return DEFAULT_CAP


class AnforgeError(Exception):
    """Base class for all library errors."""


class ShapeError(AnforgeError):
    """Configuration does not conform to a network's alphabet or node count."""


class CapExceeded(AnforgeError):
    """An enumeration or step budget was exhausted."""

    def __init__(self, message, required=None, cap=None, steps_taken=None):
        super().__init__(message)
        self.required = required
        self.cap = cap
        self.steps_taken = steps_taken


class PreconditionError(AnforgeError):
    """An operation's declared precondition does not hold."""


class NotRepresentable(AnforgeError):
    """A network cannot be expressed in the requested form."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class WiringError(AnforgeError):
    """Gate-network wiring is not bijective, has a self-loop, or mismatched arity."""


class VerificationFailed(AnforgeError):
    """A verification that was required to pass reported a counterexample."""
