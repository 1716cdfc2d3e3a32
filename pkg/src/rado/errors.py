"""Exception types shared across the workbench."""


class RadoError(Exception):
    """Base class for all workbench errors."""


class SearchExhausted(RadoError):
    """A bounded search ran out of budget before finding a witness.

    This is never a silent wrong answer: it signals either a handle that
    violates its semantic contract, a bound that is too small, or a
    construction whose next witness would exceed the value-size guard.
    """


class PreconditionViolation(RadoError):
    """An operation was called with arguments outside its contract."""


class OracleInconsistency(RadoError):
    """A decision oracle returned two different answers for the same key."""


class NoSubtreeFound(RadoError):
    """The bounded strong-subtree search failed at the requested height."""


class UsageError(RadoError):
    """Malformed command-line input."""


# CLI exit codes.  0 = success / boolean true, 1 = boolean false.
EXIT_CODES = {
    UsageError: 2,
    SearchExhausted: 3,
    PreconditionViolation: 4,
    NoSubtreeFound: 5,
    OracleInconsistency: 6,
}
