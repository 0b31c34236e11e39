"""Exception types shared across the package.

The CLI maps these onto exit codes: input problems exit with 2,
verification failures with 1, everything unexpected with 3.
"""


class DcxError(Exception):
    """Base class for all package errors."""


class InputError(DcxError, ValueError):
    """Malformed or out-of-contract input (bad shapes, signs, kinds)."""


class DomainError(InputError):
    """A point was evaluated outside a function's domain."""


class PreconditionError(InputError):
    """A caller-certified precondition failed a runtime spot check."""


class UndecidableError(InputError):
    """The requested query is not decidable for these set kinds.

    Raised instead of silently answering; the caller should supply
    a supported representation.
    """


class InternalError(DcxError, RuntimeError):
    """An internal invariant broke (non-convergence, bad bracket, ...)."""
