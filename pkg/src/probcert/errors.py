"""Exception types shared across the package.

Numeric domain violations (k > n, p outside [0, 1], bad alpha) raise plain
ValueError; these classes cover the operational failure modes that callers
need to tell apart, and the CLI maps them to distinct exit codes.
"""


class ProbcertError(Exception):
    """Base class for operational errors raised by this package."""


class ConfigError(ProbcertError):
    """Invalid configuration: bad file contents, shape mismatches, bad flags."""


class TransportError(ProbcertError):
    """External model process failed: handshake, timeout, malformed response."""


class EstimationError(ProbcertError):
    """No usable assessments to aggregate (for example, all inconclusive)."""
