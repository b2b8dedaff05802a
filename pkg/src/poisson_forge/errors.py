"""Exception types shared across the package."""


class PoissonForgeError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(PoissonForgeError, ValueError):
    pass


class NonCocycleInput(PoissonForgeError, ValueError):
    pass


class SingularForm(PoissonForgeError, ValueError):
    pass


class NonCentralElement(PoissonForgeError, ValueError):
    pass


class WellDefinednessWitness(PoissonForgeError):
    """Two generators share a Hamiltonian vector at a point but pair differently."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NonConstantDefect(PoissonForgeError, ValueError):
    pass


class NonFinite(PoissonForgeError, ArithmeticError):
    pass


class NonPeriodic(PoissonForgeError, ValueError):
    pass


class FiberMismatch(PoissonForgeError, ValueError):
    pass


class RepresentationMismatch(PoissonForgeError, ValueError):
    pass


class ConfigError(PoissonForgeError, ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class UnknownCheck(PoissonForgeError, KeyError):
    pass
