"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class ToruswalkError(Exception):
    """Base class for all package errors."""


class DomainError(ToruswalkError, ValueError):
    """An argument lies outside the domain of an operation."""


class ConfigError(ToruswalkError, ValueError):
    """A run configuration failed validation (CLI exit code 2)."""


class InvariantError(ToruswalkError, ArithmeticError):
    """A numeric invariant (unitarity, normalization) was violated (exit code 3)."""


class NonUnitaryCoinError(InvariantError):
    def __init__(self, node, residual):
        self.node = node
        self.residual = residual
        super().__init__(
            f"coin at node {node} is not unitary (residual {residual:.3e})"
        )
