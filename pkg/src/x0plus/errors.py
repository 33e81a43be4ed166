"""Exception hierarchy shared by every module."""


class X0PlusError(Exception):
    """Base class for all errors raised by this package."""


class DomainMismatchError(X0PlusError, TypeError):
    """Operands live over different coefficient domains (Q versus F_p, or two primes)."""


class DegenerateInputError(X0PlusError, ValueError):
    pass


class NotPIntegralError(X0PlusError, ValueError):
    """A coefficient denominator is divisible by the reduction prime."""

    def __init__(self, p, coefficient=None):
        self.p = p
        self.coefficient = coefficient
        msg = f"coefficient {coefficient} is not {p}-integral" if coefficient is not None else f"not {p}-integral"
        super().__init__(msg)


class InvalidDiscriminantError(X0PlusError, ValueError):
    pass


class OutOfDomainError(X0PlusError, ValueError):
    pass


class InternalInconsistencyError(X0PlusError, RuntimeError):
    pass


class SchemaError(X0PlusError, ValueError):
    pass


class InvariantError(X0PlusError, ValueError):
    """A fixture loaded fine but violates a mathematical invariant."""


class FixtureNotFoundError(X0PlusError, FileNotFoundError):
    pass


class FetchError(X0PlusError, OSError):
    pass


class ParseError(X0PlusError, ValueError):
    pass


class InsufficientDataError(X0PlusError, LookupError):
    pass


class NotOnCurveError(X0PlusError, ValueError):
    pass


class BadPrimeError(X0PlusError, ValueError):
    pass


class NonConvergentError(X0PlusError, ArithmeticError):
    """The q-expansion cannot be trusted at the requested point (|q| too large)."""


class NoHeegnerFormError(X0PlusError, ValueError):
    pass
